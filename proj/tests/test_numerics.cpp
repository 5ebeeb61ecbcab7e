#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "almsp/error.hpp"
#include "almsp/numerics.hpp"
#include "almsp/rng.hpp"

using namespace almsp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("entropy reference values") {
  CHECK(std::abs(entropy(Eigen::Vector4d::Constant(0.25)) - std::log(4.0)) < 1e-12);
  CHECK(entropy(Eigen::Vector3d(0, 1, 0)) == 0.0);
  CHECK(std::abs(entropy(Eigen::Vector3d(0.5, 0.5, 0)) - std::log(2.0)) < 1e-12);
  CHECK_THROWS_AS(entropy(Eigen::Vector2d(-0.1, 1.1)), NumericError);
  CHECK_THROWS_AS(entropy(Eigen::Vector2d(0.5, 0.6)), NumericError);
  CHECK_THROWS_AS(entropy(Eigen::VectorXd(0)), NumericError);
  CHECK(entropy(Eigen::Vector2f(0.5f, 0.5f), 1e-6f) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("property: entropy lies in [0, ln n] and peaks at uniform") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng.index(12));
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p(i) = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    if (p.sum() == 0.0) p(0) = 1.0;
    p /= p.sum();
    const double h = entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(n)) + 1e-12);
  }
}

TEST_CASE("quantile normalization worked example") {
  Eigen::Matrix<double, 3, 2> m;
  m << 1, 100, 5, 200, 3, 300;
  const Eigen::MatrixXd q = quantile_normalize(m);
  const Eigen::Vector3d a(50.5, 152.5, 101.5), b(50.5, 101.5, 152.5);
  CHECK((q.col(0) - a).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((q.col(1) - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("quantile normalization ties take the mean of their reference values") {
  Eigen::Matrix<double, 3, 2> m;
  m << 1, 10, 1, 20, 3, 30;
  // reference: (1+10)/2, (1+20)/2, (3+30)/2 = 5.5, 10.5, 16.5
  const Eigen::MatrixXd q = quantile_normalize(m);
  CHECK(q(0, 0) == doctest::Approx(8.0));
  CHECK(q(1, 0) == doctest::Approx(8.0));
  CHECK(q(2, 0) == doctest::Approx(16.5));
  CHECK(q(0, 1) == doctest::Approx(5.5));
}

TEST_CASE("quantile normalization sentinels") {
  Eigen::Matrix<double, 4, 2> m;
  m << 1, 4, -kInf, 3, 2, 2, 3, 1;
  const Eigen::MatrixXd q = quantile_normalize(m);
  CHECK(q(1, 0) == -kInf);
  CHECK(q(1, 1) == -kInf);
  // remaining rows: col0 [1,2,3], col1 [4,2,1] -> reference [1, 2, 3.5]
  CHECK(q(0, 0) == doctest::Approx(1.0));
  CHECK(q(2, 0) == doctest::Approx(2.0));
  CHECK(q(3, 0) == doctest::Approx(3.5));
  CHECK(q(0, 1) == doctest::Approx(3.5));
  CHECK(q(3, 1) == doctest::Approx(1.0));
  CHECK(q(2, 1) == doctest::Approx(2.0));

  Eigen::Matrix<double, 2, 2> bad;
  bad << 1, std::nan(""), 2, 3;
  CHECK_THROWS_AS(quantile_normalize(bad), NumericError);
  bad << 1, kInf, 2, 3;
  CHECK_THROWS_AS(quantile_normalize(bad), NumericError);
}

TEST_CASE("property: quantile normalization preserves order and equalizes distributions") {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const int rows = 2 + static_cast<int>(rng.index(30));
    const int cols = 2 + static_cast<int>(rng.index(3));
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = (rng.uniform() - 0.5) * std::pow(10.0, j);
    const Eigen::MatrixXd q = quantile_normalize(m);
    for (int j = 0; j < cols; ++j) {
      for (int a = 0; a < rows; ++a)
        for (int b = 0; b < rows; ++b)
          if (m(a, j) < m(b, j)) CHECK(q(a, j) <= q(b, j));
    }
    std::vector<double> first(q.col(0).data(), q.col(0).data() + rows);
    std::sort(first.begin(), first.end());
    for (int j = 1; j < cols; ++j) {
      std::vector<double> other(q.col(j).data(), q.col(j).data() + rows);
      std::sort(other.begin(), other.end());
      for (int i = 0; i < rows; ++i) CHECK(std::abs(first[i] - other[i]) < 1e-9);
    }
  }
}

TEST_CASE("kde reference values") {
  Eigen::MatrixXd one(2, 1);
  one << 0.3, -1.2;
  CHECK(kde_log_density(one, Eigen::Vector2d(0.3, -1.2), 0.7) == 0.0);

  Eigen::MatrixXd pts(1, 2);
  pts << 0, 2;
  CHECK(std::abs(kde_log_density(pts, Eigen::VectorXd::Constant(1, 1.0), 1.0) + 1.0) < 1e-12);

  CHECK_THROWS_AS(kde_log_density(pts, Eigen::VectorXd::Constant(1, 1.0), 0.0), NumericError);
  CHECK_THROWS_AS(kde_log_density(Eigen::MatrixXd(1, 0), Eigen::VectorXd::Constant(1, 1.0), 1.0), NumericError);
}

TEST_CASE("kde: cluster member is denser than an outlier") {
  Eigen::MatrixXd d(2, 10);
  d << 0, 0.1, 0.2, 0.1, 0.0, 0.15, 0.05, 0.2, 0.1, 5.0,  //
      0, 0.1, 0.0, 0.2, 0.1, 0.05, 0.15, 0.2, 0.0, 5.0;
  const double h = 0.5;
  auto brute = [&](int q) {
    double s = 0;
    for (int i = 0; i < 10; ++i) s += std::exp(-(d.col(i) - d.col(q)).norm() / h);
    return std::log(s / 10);
  };
  const double inside = kde_log_density(d, Eigen::Vector2d(d.col(1)), h);
  const double outlier = kde_log_density(d, Eigen::Vector2d(d.col(9)), h);
  CHECK(inside == doctest::Approx(brute(1)).epsilon(1e-12));
  CHECK(outlier == doctest::Approx(brute(9)).epsilon(1e-12));
  CHECK(inside > outlier);
  const Eigen::VectorXd all = kde_log_densities(d, d, h);
  for (int q = 0; q < 10; ++q) CHECK(all(q) == doctest::Approx(brute(q)).epsilon(1e-9));
}

TEST_CASE("property: kde is translation invariant") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd d(3, 8);
    for (int i = 0; i < d.size(); ++i) d.data()[i] = rng.uniform() * 4 - 2;
    Eigen::Vector3d q(rng.uniform(), rng.uniform(), rng.uniform());
    Eigen::Vector3d shift(rng.uniform() * 100, -rng.uniform() * 50, 7.0);
    const double a = kde_log_density(d, q, 0.8);
    const double b = kde_log_density((d.colwise() + shift).eval(), (q + shift).eval(), 0.8);
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("median bandwidth") {
  Eigen::MatrixXd d(1, 3);
  d << 0, 1, 3;
  CHECK(median_bandwidth(d) == doctest::Approx(2.0));
  CHECK(median_bandwidth(Eigen::MatrixXd(1, 1)) == 1.0);
  CHECK(median_bandwidth(Eigen::MatrixXd::Zero(2, 4)) == 1.0);
}
