#include <doctest.h>

#include <cmath>

#include "advreg/attacks.hpp"
#include "advreg/common.hpp"
#include "advreg/testbed.hpp"

using namespace advreg;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

// order-zero smoothness sweep: |f(x) - f(z)| <= c ||x - z||^beta over random pairs
double holder_quotient(const TruthFunction& f, int pairs, RngStream& rng) {
  double worst = 0.0;
  const int d = f.dim();
  Eigen::VectorXd a(d), b(d);
  for (int t = 0; t < pairs; ++t) {
    for (int j = 0; j < d; ++j) {
      a[j] = rng.uniform01();
      b[j] = rng.uniform01();
    }
    double gap = (a - b).norm();
    if (gap == 0.0) continue;
    worst = std::max(worst, std::abs(f(a) - f(b)) / std::pow(gap, f.beta()));
  }
  return worst;
}

}  // namespace

TEST_CASE("staircase profile branches") {
  CHECK(staircase_profile(0.1, 0.5) == 0.0);
  CHECK(staircase_profile(0.375, 0.5) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));
  CHECK(staircase_profile(0.6, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(staircase_profile(1.0, 0.5) == 0.0);
  // continuity at interior breakpoints
  for (double b : {0.25, 0.5, 0.75}) {
    CHECK(staircase_profile(b - 1e-12, 0.5) ==
          doctest::Approx(staircase_profile(b + 1e-12, 0.5)).epsilon(1e-5));
  }
  CHECK_THROWS_AS(staircase_profile(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("staircase hard instance") {
  TruthFunction f = TruthFunction::staircase(0.5, 2.0, 0.02);
  // K = floor(1/(8r)) = 6 full periods; flat-top value (C/2)(8r)^b 4^{-b}
  const double flat_top = 1.0 * std::pow(0.16, 0.5) * 0.5;
  CHECK(flat_top == doctest::Approx(0.2));
  CHECK(f.eval1(0.16 * 0.5 + 0.16 * 2) == doctest::Approx(flat_top));   // mid-plateau, 3rd period
  CHECK(f.eval1(0.99) == 0.0);                                          // beyond a_K = 0.96
  CHECK(f.eval1(0.0) == 0.0);

  // continuity on a dense probe
  double worst_jump = 0.0;
  for (int i = 0; i + 1 < 10000; ++i) {
    double a = static_cast<double>(i) / 9999.0;
    double b = static_cast<double>(i + 1) / 9999.0;
    worst_jump = std::max(worst_jump, std::abs(f.eval1(a) - f.eval1(b)));
  }
  CHECK(worst_jump <= 2.0 * std::pow(1.0 / 9999.0, 0.5) + 1e-9);

  CHECK_THROWS_AS(TruthFunction::staircase(0.5, 2.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(TruthFunction::staircase(1.5, 2.0, 0.02), std::invalid_argument);
}

TEST_CASE("smooth ramp hard instance") {
  CHECK(smooth_ramp_profile(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(smooth_ramp_profile(0.0) == 0.0);
  CHECK(smooth_ramp_profile(1e-9) <= 1e-12);   // continuous extension at 0

  TruthFunction f = TruthFunction::smooth_ramp(2.0, 1.0, 0.05);
  CHECK(f.eval1(0.01) == 0.0);
  CHECK(f.eval1(0.99) == doctest::Approx(std::exp(-1.0)));
  CHECK(f.eval1(0.5) > 0.0);
  CHECK(f.eval1(0.5) < std::exp(-1.0));
  // continuity across the three branches
  CHECK(f.eval1(0.1 - 1e-10) == doctest::Approx(f.eval1(0.1 + 1e-10)).epsilon(1e-6));
  CHECK(f.eval1(0.9 - 1e-10) == doctest::Approx(f.eval1(0.9 + 1e-10)).epsilon(1e-6));
}

TEST_CASE("holder battery certification at order zero") {
  RngStream rng(13);
  for (double beta : {0.5, 1.0}) {
    TruthFunction power = TruthFunction::holder_power(beta, 2.0);
    CHECK(holder_quotient(power, 10000, rng) <= 2.0 + 1e-9);
    TruthFunction stairs = TruthFunction::staircase(beta, 2.0, 0.02);
    CHECK(holder_quotient(stairs, 10000, rng) <= 2.0 + 1e-9);
  }
}

TEST_CASE("packing construction") {
  TruthFunction base = TruthFunction::staircase(0.5, 2.0, 0.02);
  SeededRng rng{777};
  PackingSet set = build_packing(base, 0.5, 2.0, 16, 8, rng);
  CHECK(set.count() == 8);

  // pairwise Hamming separation >= L/8 = 2
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) {
      int ham = 0;
      for (int i = 0; i < 16; ++i) ham += set.signs(a)[i] != set.signs(b)[i];
      CHECK(ham >= 2);
    }

  // disjoint supports make the bumps orthogonal under quadrature
  const int quad = 4096;
  for (int l = 0; l < 16; l += 5)
    for (int l2 = l + 1; l2 < 16; l2 += 3) {
      double inner = 0.0;
      for (int i = 0; i < quad; ++i) {
        Eigen::VectorXd x = vec1((i + 0.5) / quad);
        inner += set.bump_at(l, x) * set.bump_at(l2, x);
      }
      CHECK(std::abs(inner / quad) <= 1e-10);
    }

  // every member sits at the same L2 distance from the base
  RealFn base_fn = [&base](const Eigen::VectorXd& x) { return base(x); };
  std::vector<double> distances;
  for (int m = 0; m < set.count(); ++m) {
    TruthFunction member = set.member(m);
    RealFn fm = [&member](const Eigen::VectorXd& x) { return member(x); };
    distances.push_back(lq_distance(fm, base_fn, 2.0, 8192, 1));
  }
  for (std::size_t m = 1; m < distances.size(); ++m)
    CHECK(std::abs(distances[m] - distances[0]) <= 1e-9);
  CHECK(distances[0] > 0.0);

  // members stay in the full smoothness budget: base is certified at C/2 and
  // the bumps at C/2, so the sum obeys the order-zero C sweep
  RngStream sweep_rng(5);
  TruthFunction member = set.member(0);
  CHECK(holder_quotient(member, 10000, sweep_rng) <= 2.0 + 1e-9);

  CHECK_THROWS_AS(build_packing(base, 0.5, 2.0, 4, 2, rng), std::invalid_argument);
  // more members than sign vectors exist: refused up front
  CHECK_THROWS_AS(build_packing(base, 0.5, 2.0, 8, 300, rng), ResourceError);
}

TEST_CASE("mother bump scale certifies the half budget") {
  double scale = mother_bump_scale(0.5, 2.0);
  CHECK(scale > 0.0);
  // scaled bump respects |phi(x)-phi(z)| <= (C/2) ||x-z||^beta on a sweep
  RngStream rng(3);
  double worst = 0.0;
  for (int t = 0; t < 20000; ++t) {
    double a = rng.uniform(-0.6, 0.6), b = rng.uniform(-0.6, 0.6);
    if (a == b) continue;
    double va = scale * mother_bump(vec1(a));
    double vb = scale * mother_bump(vec1(b));
    worst = std::max(worst, std::abs(va - vb) / std::pow(std::abs(a - b), 0.5));
  }
  CHECK(worst <= 1.0 + 1e-6);
}

TEST_CASE("noise models") {
  RngStream rng(17);
  NoiseSpec quiet = NoiseSpec::gaussian(0.0);
  for (int i = 0; i < 10; ++i) CHECK(quiet.sample(rng) == 0.0);
  CHECK(NoiseSpec::gaussian(0.5).variance() == doctest::Approx(0.25));
  CHECK(NoiseSpec::bounded(0.3).variance() == doctest::Approx(0.09 / 3.0));
  NoiseSpec bounded = NoiseSpec::bounded(0.3);
  for (int i = 0; i < 1000; ++i) CHECK(std::abs(bounded.sample(rng)) <= 0.3);
}

TEST_CASE("piecewise design density") {
  DesignSpec design = DesignSpec::piecewise(1, 4, {1.0, 1.0, 3.0, 3.0});
  CHECK(design.density_min() == doctest::Approx(0.5));
  CHECK(design.density_max() == doctest::Approx(1.5));
  CHECK(design.density(vec1(0.1)) == doctest::Approx(0.5));
  CHECK(design.density(vec1(0.9)) == doctest::Approx(1.5));
  RngStream rng(23);
  int low = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i)
    if (design.sample(rng)[0] < 0.5) ++low;
  CHECK(low / static_cast<double>(draws) == doctest::Approx(0.25).epsilon(0.1));
  CHECK_THROWS_AS(DesignSpec::piecewise(1, 2, {1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("sampling: exact responses without noise, goodness of fit, determinism") {
  TruthFunction truth = TruthFunction::holder_power(1.0, 2.0);
  DesignSpec design = DesignSpec::uniform(1);
  SeededRng rng{20250809};

  Dataset clean = sample_dataset(truth, design, NoiseSpec::gaussian(0.0), 200, rng.stream(0));
  for (int i = 0; i < clean.size(); ++i)
    CHECK(clean.response(i) == truth(clean.point(i)));

  // uniform design chi-square over 10 bins at level 0.999 (critical 27.88)
  const int n = 100000;
  Dataset big = sample_dataset(truth, design, NoiseSpec::gaussian(0.0), n, rng.stream(1));
  int bins[10] = {0};
  for (int i = 0; i < n; ++i)
    ++bins[std::min(9, static_cast<int>(big.point(i)[0] * 10))];
  double chi2 = 0.0;
  for (int b = 0; b < 10; ++b) {
    double expect = n / 10.0;
    chi2 += (bins[b] - expect) * (bins[b] - expect) / expect;
  }
  CHECK(chi2 < 27.88);

  // bitwise reproducibility of equal (seed, index)
  Dataset again = sample_dataset(truth, design, NoiseSpec::gaussian(0.0), 200, rng.stream(0));
  for (int i = 0; i < 200; ++i) {
    CHECK(again.point(i)[0] == clean.point(i)[0]);
    CHECK(again.response(i) == clean.response(i));
  }
}
