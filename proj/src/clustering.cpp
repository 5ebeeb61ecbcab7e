#include "almsp/clustering.hpp"

#include <unordered_set>

#include "almsp/error.hpp"
#include "almsp/kmeans.hpp"

namespace almsp {

Eigen::Index Clustering::cluster_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return assignment[i];
  }
  throw Error("clustering has no point '" + std::string(id) + "'");
}

std::vector<std::string> Clustering::members(Eigen::Index cluster) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (assignment[i] == cluster) out.push_back(ids[i]);
  }
  return out;
}

Clustering kmeans(std::span<const Point> points, std::size_t k, const KmeansOptions& opts) {
  if (k == 0) throw Error("k-means: k must be >= 1");
  if (k > points.size()) throw Error("k-means: k exceeds the number of points");
  return incremental_kmeans(points, {}, k, opts);
}

Clustering incremental_kmeans(std::span<const Point> points, std::span<const SparseVector> fixed,
                              std::size_t k_new, const KmeansOptions& opts) {
  if (k_new == 0) throw Error("k-means: number of new clusters must be >= 1");
  if (k_new > points.size()) throw Error("k-means: more new clusters than points");
  std::unordered_set<std::string_view> seen;
  std::vector<SparseVector> all;
  all.reserve(points.size() + fixed.size());
  for (const auto& p : points) {
    if (!seen.insert(p.id).second) throw Error("k-means: duplicate point id '" + p.id + "'");
    all.push_back(p.vector);
  }
  for (const auto& f : fixed) all.push_back(f);
  const DenseColumns dense = to_dense_columns(all);
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto nf = static_cast<Eigen::Index>(fixed.size());

  const auto result = incremental_kmeans_dense(dense.matrix.leftCols(n), dense.matrix.rightCols(nf),
                                               static_cast<Eigen::Index>(k_new), opts.seed, opts.max_iter, opts.tol);

  Clustering c;
  c.fixed_count = fixed.size();
  c.assignment = result.assignment;
  c.objective_trace = result.objective_trace;
  c.iterations = result.iterations;
  for (const auto& f : fixed) c.centroids.push_back(f);
  for (Eigen::Index j = nf; j < result.centroids.cols(); ++j) {
    c.centroids.push_back(dense.to_sparse(result.centroids.col(j)));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    c.ids.push_back(points[static_cast<std::size_t>(i)].id);
    c.sq_distance.push_back(
        (dense.matrix.col(i) - result.centroids.col(result.assignment[static_cast<std::size_t>(i)])).squaredNorm());
  }
  return c;
}

std::string nearest_member(const Clustering& clustering, Eigen::Index cluster, std::span<const Point> points) {
  if (cluster < 0 || static_cast<std::size_t>(cluster) >= clustering.size()) {
    throw Error("nearest_member: cluster index out of range");
  }
  const SparseVector& centroid = clustering.centroids[static_cast<std::size_t>(cluster)];
  const std::string* best = nullptr;
  double bd = 0;
  for (const auto& id : clustering.members(cluster)) {
    const Point* p = nullptr;
    for (const auto& q : points) {
      if (q.id == id) {
        p = &q;
        break;
      }
    }
    if (!p) throw Error("nearest_member: point '" + id + "' not supplied");
    const double d = (p->vector - centroid).squaredNorm();
    if (!best || d < bd || (d == bd && p->id < *best)) {
      best = &p->id;
      bd = d;
    }
  }
  if (!best) throw Error("nearest_member: cluster is empty");
  return *best;
}

} // namespace almsp
