#include <doctest.h>

#include <set>

#include "almsp/clustering.hpp"
#include "almsp/kmeans.hpp"
#include "almsp/rng.hpp"

using namespace almsp;

namespace {

SparseVector vec(std::initializer_list<double> xs) {
  SparseVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) {
    if (x != 0.0) v.insert(i) = x;
    ++i;
  }
  return v;
}

std::vector<Point> blobs(Rng& rng, int per_blob) {
  std::vector<Point> pts;
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < per_blob; ++i) {
      const double cx = b == 0 ? 0.0 : 10.0;
      pts.push_back({"p" + std::to_string(b) + "_" + std::to_string(i),
                     vec({cx + rng.uniform() - 0.5, cx + rng.uniform() - 0.5})});
    }
  }
  return pts;
}

} // namespace

TEST_CASE("k equal to the number of points") {
  const std::vector<Point> pts{{"a", vec({0, 0})}, {"b", vec({1, 0})}, {"c", vec({0, 5})}, {"d", vec({3, 3})}};
  const Clustering c = kmeans(pts, 4, {7});
  std::set<Eigen::Index> used(c.assignment.begin(), c.assignment.end());
  CHECK(used.size() == 4);
  for (double d : c.sq_distance) CHECK(d == doctest::Approx(0.0));
}

TEST_CASE("two separated blobs") {
  Rng rng(1);
  const auto pts = blobs(rng, 15);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Clustering c = kmeans(pts, 2, {seed});
    for (int i = 0; i < 15; ++i) {
      CHECK(c.assignment[static_cast<std::size_t>(i)] == c.assignment[0]);
      CHECK(c.assignment[static_cast<std::size_t>(15 + i)] == c.assignment[15]);
    }
    CHECK(c.assignment[0] != c.assignment[15]);
  }
}

TEST_CASE("determinism under a seed") {
  Rng rng(2);
  const auto pts = blobs(rng, 20);
  const Clustering a = kmeans(pts, 5, {3});
  const Clustering b = kmeans(pts, 5, {3});
  CHECK(a.assignment == b.assignment);
  for (std::size_t i = 0; i < a.centroids.size(); ++i) CHECK(a.centroids[i].isApprox(b.centroids[i], 0.0));
}

TEST_CASE("incremental: new centroid lands on the far point") {
  std::vector<Point> pts{{"a", vec({0, 0})}, {"b", vec({0, 0})}, {"c", vec({0, 0})}, {"far", vec({9, 4})}};
  const std::vector<SparseVector> fixed{vec({0, 0})};
  const Clustering c = incremental_kmeans(pts, fixed, 1, {0});
  REQUIRE(c.size() == 2);
  CHECK(c.fixed_count == 1);
  CHECK(c.centroids[1].isApprox(vec({9, 4})));
  CHECK(c.cluster_of("far") == 1);
  CHECK(c.cluster_of("a") == 0);
}

TEST_CASE("incremental with no fixed centroids equals k-means") {
  Rng rng(4);
  const auto pts = blobs(rng, 12);
  const Clustering a = kmeans(pts, 3, {5});
  const Clustering b = incremental_kmeans(pts, {}, 3, {5});
  CHECK(a.assignment == b.assignment);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("fixed centroids come back bit-identical") {
  Rng rng(6);
  const auto pts = blobs(rng, 10);
  const std::vector<SparseVector> fixed{vec({0.123456789, -0.3}), vec({10.0000001, 9.7})};
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const Clustering c = incremental_kmeans(pts, fixed, 3, {seed});
    REQUIRE(c.fixed_count == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(c.centroids[i].nonZeros() == fixed[i].nonZeros());
      for (SparseVector::InnerIterator it(fixed[i]); it; ++it) CHECK(c.centroids[i].coeff(it.index()) == it.value());
    }
  }
}

TEST_CASE("property: objective never increases across iterations") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    std::vector<Point> pts;
    const int n = 5 + static_cast<int>(rng.index(40));
    for (int i = 0; i < n; ++i) {
      pts.push_back({"x" + std::to_string(i), vec({rng.uniform(), rng.uniform(), rng.uniform() * 3})});
    }
    std::vector<SparseVector> fixed;
    if (t % 2) fixed.push_back(pts[0].vector);
    const std::size_t k = 1 + rng.index(std::min<std::uint64_t>(6, static_cast<std::uint64_t>(n)));
    const Clustering c = incremental_kmeans(pts, fixed, k, {static_cast<std::uint64_t>(t)});
    for (std::size_t i = 1; i < c.objective_trace.size(); ++i) {
      CHECK(c.objective_trace[i] <= c.objective_trace[i - 1] + 1e-9);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      // nearest-centroid assignment at convergence
      double best = 1e300;
      for (const auto& cen : c.centroids) best = std::min(best, (pts[i].vector - cen).squaredNorm());
      CHECK(c.sq_distance[i] == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("duplicate points never yield NaN centroids") {
  std::vector<Point> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({"d" + std::to_string(i), vec({1, 1})});
  pts.push_back({"z", vec({2, 2})});
  const Clustering c = incremental_kmeans(pts, std::vector<SparseVector>{vec({1, 1})}, 3, {1});
  for (const auto& cen : c.centroids) {
    for (SparseVector::InnerIterator it(cen); it; ++it) CHECK(std::isfinite(it.value()));
  }
}

TEST_CASE("k-means argument errors") {
  const std::vector<Point> pts{{"a", vec({0})}, {"b", vec({1})}};
  CHECK_THROWS(kmeans(pts, 3, {}));
  CHECK_THROWS(kmeans(pts, 0, {}));
  CHECK_THROWS(incremental_kmeans(pts, {}, 0, {}));
}

TEST_CASE("nearest member") {
  const std::vector<Point> one{{"solo", vec({2, 2})}};
  CHECK(nearest_member(kmeans(one, 1, {}), 0, one) == "solo");

  Clustering c;
  c.centroids = {vec({0, 0})};
  c.ids = {"b", "a", "c"};
  c.assignment = {0, 0, 0};
  const std::vector<Point> tie{{"b", vec({1, 0})}, {"a", vec({0, 1})}, {"c", vec({2, 0})}};
  CHECK(nearest_member(c, 0, tie) == "a");
  const std::vector<Point> ordered{{"b", vec({2, 0})}, {"a", vec({3, 0})}, {"c", vec({1, 0})}};
  CHECK(nearest_member(c, 0, ordered) == "c");
}

TEST_CASE("dense core works on float") {
  Eigen::MatrixXf pts(1, 4);
  pts << 0, 0.1f, 5, 5.1f;
  const auto c = kmeans_dense(pts, 2, 1);
  CHECK(c.assignment[0] == c.assignment[1]);
  CHECK(c.assignment[2] == c.assignment[3]);
  CHECK(c.assignment[0] != c.assignment[2]);
}
