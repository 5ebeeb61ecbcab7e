#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "almsp/error.hpp"
#include "almsp/rng.hpp"

namespace almsp {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
constexpr Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// Validates that p is a probability vector (entries >= 0, sum 1 +- tol).
template <typename Derived>
void check_distribution(const Eigen::MatrixBase<Derived>& p, typename Derived::Scalar tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  if (p.size() == 0) throw NumericError("empty distribution");
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= Scalar(0))) throw NumericError("negative or NaN probability");
  }
  if (std::abs(p.sum() - Scalar(1)) > tol) throw NumericError("probabilities do not sum to 1");
}

/// Shannon entropy in nats; 0 ln 0 is taken as 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p, typename Derived::Scalar tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  check_distribution(p, tol);
  Scalar h = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > Scalar(0)) h -= p(i) * std::log(p(i));
  }
  return h;
}

/// Quantile normalization of the columns of `scores`.
///
/// Every column is a score vector over the same row set. A row is ranked
/// only if it is finite in every column; other rows come out as -inf in
/// every column. The reference distribution is the element-wise mean of
/// the sorted active columns, and each active value is replaced by the
/// reference value at its rank. Tied values share the mean of the
/// reference values over the tied ranks.
template <typename Derived>
Mat<typename Derived::Scalar> quantile_normalize(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = scores.rows();
  const Eigen::Index cols = scores.cols();
  if (cols == 0) throw NumericError("quantile normalization needs at least one vector");

  std::vector<Eigen::Index> active;
  for (Eigen::Index r = 0; r < rows; ++r) {
    bool finite = true;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Scalar v = scores(r, c);
      if (std::isnan(v)) throw NumericError("NaN score in quantile normalization");
      if (v == neg_inf<Scalar>()) {
        finite = false;
      } else if (!std::isfinite(v)) {
        throw NumericError("+inf score in quantile normalization");
      }
    }
    if (finite) active.push_back(r);
  }

  Mat<Scalar> out = Mat<Scalar>::Constant(rows, cols, neg_inf<Scalar>());
  const auto n = static_cast<Eigen::Index>(active.size());
  if (n == 0) return out;

  // order[c][k] = row of rank k in column c.
  std::vector<std::vector<Eigen::Index>> order(static_cast<std::size_t>(cols), active);
  Vec<Scalar> reference = Vec<Scalar>::Zero(n);
  for (Eigen::Index c = 0; c < cols; ++c) {
    auto& ord = order[static_cast<std::size_t>(c)];
    std::stable_sort(ord.begin(), ord.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scores(a, c) < scores(b, c); });
    for (Eigen::Index k = 0; k < n; ++k) reference(k) += scores(ord[static_cast<std::size_t>(k)], c);
  }
  reference /= static_cast<Scalar>(cols);

  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto& ord = order[static_cast<std::size_t>(c)];
    Eigen::Index k = 0;
    while (k < n) {
      Eigen::Index end = k + 1;
      const Scalar v = scores(ord[static_cast<std::size_t>(k)], c);
      while (end < n && scores(ord[static_cast<std::size_t>(end)], c) == v) ++end;
      const Scalar tied = reference.segment(k, end - k).mean();
      for (Eigen::Index j = k; j < end; ++j) out(ord[static_cast<std::size_t>(j)], c) = tied;
      k = end;
    }
  }
  return out;
}

/// ln[(1/N) sum_i exp(-|query - x_i| / h)] over the columns x_i of `data`.
/// The kernel is left unnormalized; values only rank queries against the
/// same data and bandwidth.
template <typename DerivedData, typename DerivedQuery>
typename DerivedData::Scalar kde_log_density(const Eigen::MatrixBase<DerivedData>& data,
                                             const Eigen::MatrixBase<DerivedQuery>& query,
                                             typename DerivedData::Scalar bandwidth) {
  using Scalar = typename DerivedData::Scalar;
  if (data.cols() == 0) throw NumericError("kde: empty data");
  if (!(bandwidth > Scalar(0))) throw NumericError("kde: bandwidth must be positive");
  if (data.rows() != query.rows()) throw NumericError("kde: dimension mismatch");
  const Vec<Scalar> logk = -(data.colwise() - query.col(0)).colwise().norm().transpose() / bandwidth;
  const Scalar m = logk.maxCoeff();
  return m + std::log((logk.array() - m).exp().sum()) - std::log(static_cast<Scalar>(data.cols()));
}

/// Pairwise Euclidean distances between the columns of a and b.
template <typename DerivedA, typename DerivedB>
Mat<typename DerivedA::Scalar> pairwise_distances(const Eigen::MatrixBase<DerivedA>& a,
                                                  const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Mat<Scalar> d(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) d.col(j) = (a.colwise() - b.col(j)).colwise().norm().transpose();
  return d;
}

/// kde_log_density for every column of `queries`, sharing one distance
/// computation.
template <typename DerivedData, typename DerivedQuery>
Vec<typename DerivedData::Scalar> kde_log_densities(const Eigen::MatrixBase<DerivedData>& data,
                                                    const Eigen::MatrixBase<DerivedQuery>& queries,
                                                    typename DerivedData::Scalar bandwidth) {
  using Scalar = typename DerivedData::Scalar;
  if (data.cols() == 0) throw NumericError("kde: empty data");
  if (!(bandwidth > Scalar(0))) throw NumericError("kde: bandwidth must be positive");
  const Mat<Scalar> logk = -pairwise_distances(queries, data) / bandwidth;
  Vec<Scalar> out(queries.cols());
  const Scalar log_n = std::log(static_cast<Scalar>(data.cols()));
  for (Eigen::Index q = 0; q < queries.cols(); ++q) {
    const Scalar m = logk.row(q).maxCoeff();
    out(q) = m + std::log((logk.row(q).array() - m).exp().sum()) - log_n;
  }
  return out;
}

/// Median pairwise distance over a seeded subsample of at most
/// `max_points` columns. Returns 1 when fewer than two points are
/// available or every distance is zero.
template <typename Derived>
typename Derived::Scalar median_bandwidth(const Eigen::MatrixBase<Derived>& data, std::size_t max_points = 256,
                                          std::uint64_t seed = 0) {
  using Scalar = typename Derived::Scalar;
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(data.cols()));
  std::iota(pick.begin(), pick.end(), 0);
  if (pick.size() > max_points) {
    Rng rng(seed);
    rng.shuffle(pick);
    pick.resize(max_points);
    std::sort(pick.begin(), pick.end());
  }
  if (pick.size() < 2) return Scalar(1);
  Mat<Scalar> sub(data.rows(), static_cast<Eigen::Index>(pick.size()));
  for (std::size_t i = 0; i < pick.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = data.col(pick[i]);
  const Mat<Scalar> d = pairwise_distances(sub, sub);
  std::vector<Scalar> upper;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) upper.push_back(d(i, j));
  std::sort(upper.begin(), upper.end());
  const std::size_t m = upper.size();
  const Scalar med = (m % 2 == 1) ? upper[m / 2] : (upper[m / 2 - 1] + upper[m / 2]) / Scalar(2);
  return med > Scalar(0) ? med : Scalar(1);
}

} // namespace almsp
