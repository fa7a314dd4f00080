#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "advreg/common.hpp"
#include "advreg/partition.hpp"
#include "advreg/rng.hpp"

using namespace advreg;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

// exhaustive nearest-center search with the stated tie-breaks: smallest
// distance, then smallest center norm, then lexicographic
Eigen::VectorXd exhaustive_nearest(const GridPartition& grid, const Eigen::VectorXd& x) {
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_norm = 0.0;
  for (long long k = 0; k < grid.cell_count(); ++k) {
    Eigen::VectorXd c = grid.center(k);
    double dist = (x - c).squaredNorm();
    if (dist < best_dist) {
      best = c;
      best_dist = dist;
      best_norm = c.squaredNorm();
      continue;
    }
    if (dist == best_dist) {
      double norm = c.squaredNorm();
      bool take = norm < best_norm;
      if (norm == best_norm) {
        for (int j = 0; j < c.size(); ++j) {
          if (c[j] != best[j]) {
            take = c[j] < best[j];
            break;
          }
        }
      }
      if (take) {
        best = c;
        best_norm = norm;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("nearest center with tie to the origin side") {
  GridPartition g2(2, 1);
  CHECK(g2.nearest_center(vec1(0.5))[0] == doctest::Approx(0.25));
  CHECK(g2.nearest_center(vec1(0.51))[0] == doctest::Approx(0.75));
  CHECK(g2.nearest_center(vec1(0.0))[0] == doctest::Approx(0.25));
  CHECK(g2.nearest_center(vec1(1.0))[0] == doctest::Approx(0.75));

  GridPartition g3(3, 2);
  Eigen::VectorXd x(2);
  x << 0.1, 0.9;
  Eigen::VectorXd c = g3.nearest_center(x);
  CHECK(c[0] == doctest::Approx(1.0 / 6.0));
  CHECK(c[1] == doctest::Approx(5.0 / 6.0));

  GridPartition g1(1, 3);
  Eigen::VectorXd any(3);
  any << 0.12, 0.97, 0.5;
  Eigen::VectorXd mid = g1.nearest_center(any);
  for (int j = 0; j < 3; ++j) CHECK(mid[j] == doctest::Approx(0.5));

  CHECK_THROWS_AS(g2.nearest_center(vec1(1.2)), std::invalid_argument);
  CHECK_THROWS_AS(g2.nearest_center(vec1(-0.1)), std::invalid_argument);
}

TEST_CASE("nearest center agrees with exhaustive search") {
  RngStream rng(101);
  GridPartition g1(7, 1);
  GridPartition g2(5, 2);
  for (int trial = 0; trial < 100000; ++trial) {
    if (trial % 2 == 0) {
      Eigen::VectorXd x = vec1(rng.uniform01());
      // mix in exact boundary points
      if (trial % 10 == 0) x[0] = static_cast<double>(rng.below(8)) / 7.0;
      CHECK((g1.nearest_center(x) - exhaustive_nearest(g1, x)).norm() == 0.0);
    } else {
      Eigen::VectorXd x(2);
      x << rng.uniform01(), rng.uniform01();
      if (trial % 11 == 0) x[0] = static_cast<double>(rng.below(6)) / 5.0;
      CHECK((g2.nearest_center(x) - exhaustive_nearest(g2, x)).norm() == 0.0);
    }
  }
}

TEST_CASE("bandwidth tuning rule") {
  CHECK(tune_bandwidth(1.0, 1, 1000, 0.0, 2.0) ==
        doctest::Approx(std::pow(1000.0, -1.0 / 3.0)).epsilon(1e-15));
  CHECK(tune_bandwidth(1.0, 1, 1000, 0.5, 2.0) == doctest::Approx(0.5));
  double inf = std::numeric_limits<double>::infinity();
  CHECK(tune_bandwidth(1.0, 1, 15, 0.0, inf) ==
        doctest::Approx(std::pow(15.0 / std::log(15.0), -1.0 / 3.0)).epsilon(1e-15));
  CHECK(tune_bandwidth(0.5, 1, 2, 0.9, 2.0) <= 1.0);   // clamped into (0, 1]
  CHECK_THROWS_AS(tune_bandwidth(0.0, 1, 100, 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(tune_bandwidth(-1.0, 1, 100, 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(tune_bandwidth(1.0, 1, 1, 0.0, inf), std::invalid_argument);
}

TEST_CASE("piecewise fit reproduces a global polynomial") {
  RngStream rng(71);
  const int n = 2000;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  auto p = [](double t) { return 1.0 + 0.5 * t - 2.0 * t * t; };
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform01();
    y[i] = p(x(i, 0));
  }
  Dataset data(x, y);
  PPConfig cfg;
  cfg.cells_per_axis = 5;
  cfg.degree = 2;
  cfg.bandwidth = 0.25;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  PPEstimator pp = PPEstimator::fit(data, cfg);
  for (int i = 0; i < 1000; ++i) {
    double t = (i + 0.5) / 1000.0;
    CHECK(pp(vec1(t)) == doctest::Approx(p(t)).epsilon(1e-8));
  }
}

TEST_CASE("cells without data evaluate to zero") {
  Eigen::MatrixXd x(50, 1);
  Eigen::VectorXd y(50);
  RngStream rng(3);
  for (int i = 0; i < 50; ++i) {
    x(i, 0) = 0.1 * rng.uniform01();
    y[i] = 1.0 + x(i, 0);
  }
  Dataset data(x, y);
  PPConfig cfg;
  cfg.cells_per_axis = 4;
  cfg.degree = 1;
  cfg.bandwidth = 0.05;
  cfg.kernel = Kernel(Kernel::Shape::rectangular, 1);
  PPEstimator pp = PPEstimator::fit(data, cfg);
  CHECK(pp(vec1(0.6)) == 0.0);
  CHECK(pp(vec1(0.95)) == 0.0);
  CHECK(pp(vec1(0.05)) != 0.0);
}

TEST_CASE("single-cell grid reduces to one local fit at the midpoint") {
  RngStream rng(9);
  Eigen::MatrixXd x(100, 1);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) {
    x(i, 0) = rng.uniform01();
    y[i] = std::sin(x(i, 0));
  }
  Dataset data(x, y);
  PPConfig cfg;
  cfg.cells_per_axis = 1;
  cfg.degree = 1;
  cfg.bandwidth = 0.6;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  PPEstimator pp = PPEstimator::fit(data, cfg);
  auto basis = std::make_shared<const MultiIndexBasis>(1, 1);
  LocalFit direct = fit_local(data, vec1(0.5), 0.6, cfg.tau > 0 ? cfg.tau : tau_for(0.6, 100, 1),
                              cfg.kernel, basis);
  for (double t : {0.1, 0.5, 0.9})
    CHECK(pp(vec1(t)) == doctest::Approx(direct.eval(vec1(t))).epsilon(1e-15));
}

TEST_CASE("restriction to one cell is a polynomial of the fitted degree") {
  RngStream rng(77);
  const int n = 500;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform01();
    y[i] = std::sin(6.0 * x(i, 0)) + 0.1 * rng.normal();
  }
  Dataset data(x, y);
  PPConfig cfg;
  cfg.cells_per_axis = 4;
  cfg.degree = 2;
  cfg.bandwidth = 0.3;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  PPEstimator pp = PPEstimator::fit(data, cfg);

  // interpolate degree-2 through three points inside cell (0.25, 0.5]
  double t0 = 0.30, t1 = 0.38, t2 = 0.46;
  Eigen::Matrix3d vandermonde;
  vandermonde << 1, t0, t0 * t0, 1, t1, t1 * t1, 1, t2, t2 * t2;
  Eigen::Vector3d values(pp(vec1(t0)), pp(vec1(t1)), pp(vec1(t2)));
  Eigen::Vector3d coef = vandermonde.colPivHouseholderQr().solve(values);
  for (double t = 0.26; t < 0.499; t += 0.01) {
    double interp = coef[0] + coef[1] * t + coef[2] * t * t;
    CHECK(std::abs(pp(vec1(t)) - interp) <= 1e-9);
  }
}

TEST_CASE("fits are deterministic across runs and thread counts") {
  RngStream rng(13);
  const int n = 300;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform01();
    y[i] = rng.normal();
  }
  Dataset data(x, y);
  PPConfig cfg;
  cfg.cells_per_axis = 8;
  cfg.degree = 1;
  cfg.bandwidth = 0.2;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  PPEstimator a = PPEstimator::fit(data, cfg, 1);
  PPEstimator b = PPEstimator::fit(data, cfg, 4);
  for (long long k = 0; k < a.partition()->cell_count(); ++k) {
    REQUIRE(a.cell_fit(k).coeffs.size() == b.cell_fit(k).coeffs.size());
    for (int j = 0; j < a.cell_fit(k).coeffs.size(); ++j)
      CHECK(a.cell_fit(k).coeffs[j] == b.cell_fit(k).coeffs[j]);
  }
}

TEST_CASE("oversized grids are refused") {
  Eigen::MatrixXd x(10, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
  RngStream rng(1);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform01();
  Dataset data(x, y);
  PPConfig cfg;
  cfg.cells_per_axis = 400;   // 400^3 = 6.4e7 > 1e7
  cfg.degree = 0;
  cfg.bandwidth = 0.1;
  cfg.kernel = Kernel(Kernel::Shape::rectangular, 3);
  CHECK_THROWS_AS(PPEstimator::fit(data, cfg), ResourceError);
}
