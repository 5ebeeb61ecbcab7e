#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "almsp/features.hpp"

namespace almsp {

struct Point {
  std::string id;
  SparseVector vector;
};

struct Clustering {
  std::vector<SparseVector> centroids;
  std::vector<std::string> ids;           // input point order
  std::vector<Eigen::Index> assignment;   // per point
  std::vector<double> sq_distance;        // per point, to its own centroid
  std::size_t fixed_count = 0;
  std::vector<double> objective_trace;
  int iterations = 0;

  std::size_t size() const { return centroids.size(); }
  Eigen::Index cluster_of(std::string_view id) const;
  std::vector<std::string> members(Eigen::Index cluster) const;
};

struct KmeansOptions {
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-6;
};

Clustering kmeans(std::span<const Point> points, std::size_t k, const KmeansOptions& opts = {});

/// The fixed centroids come back unchanged as clusters [0, fixed.size()).
Clustering incremental_kmeans(std::span<const Point> points, std::span<const SparseVector> fixed,
                              std::size_t k_new, const KmeansOptions& opts = {});

/// Member closest to the centroid; ties go to the smallest id.
std::string nearest_member(const Clustering& clustering, Eigen::Index cluster, std::span<const Point> points);

} // namespace almsp
