#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "almsp/error.hpp"
#include "almsp/numerics.hpp"
#include "almsp/rng.hpp"

namespace almsp {

template <typename Scalar>
struct DenseClustering {
  Mat<Scalar> centroids;                // dims x (fixed + new)
  std::vector<Eigen::Index> assignment;  // per point
  Eigen::Index fixed_count = 0;
  std::vector<Scalar> objective_trace;  // within-cluster SS after each assignment step
  int iterations = 0;
};

/// Squared distances between the columns of points and centroids.
template <typename DerivedP, typename DerivedC>
Mat<typename DerivedP::Scalar> squared_distances(const Eigen::MatrixBase<DerivedP>& points,
                                                 const Eigen::MatrixBase<DerivedC>& centroids) {
  using Scalar = typename DerivedP::Scalar;
  Mat<Scalar> d = (-2 * (points.transpose() * centroids)).eval();
  d.colwise() += points.colwise().squaredNorm().transpose();
  d.rowwise() += centroids.colwise().squaredNorm();
  return d.cwiseMax(Scalar(0));
}

namespace detail {

template <typename Scalar>
Scalar assign(const Mat<Scalar>& points, const Mat<Scalar>& centroids, std::vector<Eigen::Index>& assignment) {
  const Mat<Scalar> d = squared_distances(points, centroids);
  assignment.resize(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    Eigen::Index best = 0;
    Scalar bd = d(i, 0);
    for (Eigen::Index c = 1; c < centroids.cols(); ++c) {
      if (d(i, c) < bd) {
        bd = d(i, c);
        best = c;
      }
    }
    assignment[static_cast<std::size_t>(i)] = best;
  }
  Scalar obj = 0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    obj += (points.col(i) - centroids.col(assignment[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return obj;
}

} // namespace detail

/// Lloyd's algorithm where the first `fixed.cols()` centroids are frozen.
///
/// New centroids are seeded with k-means++ against every centroid chosen
/// so far (fixed ones included). Assignment considers all centroids with
/// ties going to the lowest index; only the new centroids are updated. An
/// empty new cluster is reseeded at the point farthest from its own
/// centroid. Stops when no new centroid moves by tol or more, or after
/// max_iter updates.
template <typename DerivedP, typename DerivedF>
DenseClustering<typename DerivedP::Scalar> incremental_kmeans_dense(const Eigen::MatrixBase<DerivedP>& points,
                                                                    const Eigen::MatrixBase<DerivedF>& fixed,
                                                                    Eigen::Index k_new, std::uint64_t seed,
                                                                    int max_iter = 100,
                                                                    typename DerivedP::Scalar tol = 1e-6) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index n = points.cols();
  const Eigen::Index n_fixed = fixed.cols();
  if (k_new < 1) throw Error("k-means: number of new clusters must be >= 1");
  if (k_new > n) throw Error("k-means: more new clusters than points");
  if (n_fixed > 0 && fixed.rows() != points.rows()) throw Error("k-means: centroid dimension mismatch");

  const Mat<Scalar> x = points;
  DenseClustering<Scalar> out;
  out.fixed_count = n_fixed;
  out.centroids.resize(x.rows(), n_fixed + k_new);
  if (n_fixed > 0) out.centroids.leftCols(n_fixed) = fixed;

  Rng rng(seed);
  Vec<Scalar> nearest = Vec<Scalar>::Constant(n, std::numeric_limits<Scalar>::infinity());
  auto absorb = [&](Eigen::Index c) {
    nearest = nearest.cwiseMin(squared_distances(x, out.centroids.col(c)).col(0));
  };
  for (Eigen::Index c = 0; c < n_fixed; ++c) absorb(c);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Eigen::Index j = 0; j < k_new; ++j) {
    Eigen::Index pick = 0;
    const Scalar total = (n_fixed + j == 0) ? Scalar(0) : nearest.sum();
    if (n_fixed + j == 0) {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
    } else if (total > Scalar(0)) {
      const Scalar r = static_cast<Scalar>(rng.uniform()) * total;
      Scalar acc = 0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest(i) <= Scalar(0)) continue;
        acc += nearest(i);
        pick = i;
        if (acc > r) break;
      }
    } else {
      // All points coincide with existing centroids.
      pick = 0;
      while (pick < n - 1 && taken[static_cast<std::size_t>(pick)]) ++pick;
    }
    taken[static_cast<std::size_t>(pick)] = true;
    out.centroids.col(n_fixed + j) = x.col(pick);
    absorb(n_fixed + j);
  }

  for (int it = 0; it < max_iter; ++it) {
    out.objective_trace.push_back(detail::assign(x, out.centroids, out.assignment));
    ++out.iterations;

    Mat<Scalar> sums = Mat<Scalar>::Zero(x.rows(), k_new);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k_new), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index c = out.assignment[static_cast<std::size_t>(i)] - n_fixed;
      if (c < 0) continue;
      sums.col(c) += x.col(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    Mat<Scalar> updated = out.centroids;
    for (Eigen::Index c = 0; c < k_new; ++c) {
      const auto cnt = counts[static_cast<std::size_t>(c)];
      if (cnt > 0) updated.col(n_fixed + c) = sums.col(c) / static_cast<Scalar>(cnt);
    }
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Eigen::Index c = 0; c < k_new; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      Scalar fd = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const Scalar d = (x.col(i) - updated.col(out.assignment[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      used[static_cast<std::size_t>(far)] = true;
      updated.col(n_fixed + c) = x.col(far);
    }
    const Scalar moved = (updated.rightCols(k_new) - out.centroids.rightCols(k_new)).colwise().norm().maxCoeff();
    out.centroids = std::move(updated);
    if (moved < tol) break;
  }
  out.objective_trace.push_back(detail::assign(x, out.centroids, out.assignment));
  return out;
}

template <typename Derived>
DenseClustering<typename Derived::Scalar> kmeans_dense(const Eigen::MatrixBase<Derived>& points, Eigen::Index k,
                                                       std::uint64_t seed, int max_iter = 100,
                                                       typename Derived::Scalar tol = 1e-6) {
  if (k < 1) throw Error("k-means: k must be >= 1");
  return incremental_kmeans_dense(points, Mat<typename Derived::Scalar>(points.rows(), 0), k, seed, max_iter, tol);
}

} // namespace almsp
