#include <doctest.h>

#include <cmath>

#include "advreg/common.hpp"
#include "advreg/partition.hpp"
#include "advreg/risk.hpp"

using namespace advreg;

namespace {

// an estimator that ignores the data and returns a fixed function
class OracleEstimator final : public FittedEstimator {
 public:
  explicit OracleEstimator(RealFn f) : f_(std::move(f)) {}
  double operator()(const Eigen::VectorXd& x) const override { return f_(x); }
  double mean_selected_bandwidth() const override { return 0.0; }

 private:
  RealFn f_;
};

EstimatorFactory oracle_factory(RealFn f) {
  return [f](const Dataset&) { return std::make_shared<const OracleEstimator>(f); };
}

EstimatorFactory pp_factory(PPConfig cfg) {
  return [cfg](const Dataset& data) {
    return std::make_shared<const PPEstimator>(PPEstimator::fit(data, cfg));
  };
}

// standard L2 risk with no attack machinery at all, on the same substreams
double direct_standard_risk(const TruthFunction& truth, const EstimatorFactory& factory,
                            const DesignSpec& design, const NoiseSpec& noise, int n,
                            int test_draws, int replications, const SeededRng& rng) {
  std::vector<double> values(replications);
  for (int rep = 0; rep < replications; ++rep) {
    Dataset train = sample_dataset(truth, design, noise, n, rng.stream(2 * rep));
    auto fit = factory(train);
    RngStream test = rng.stream(2 * rep + 1);
    std::vector<double> terms(test_draws);
    for (int t = 0; t < test_draws; ++t) {
      Eigen::VectorXd x = design.sample(test);
      double err = (*fit)(x)-truth(x);
      terms[t] = err * err;
    }
    values[rep] = pairwise_sum(terms) / test_draws;
  }
  return pairwise_sum(values) / replications;
}

}  // namespace

TEST_CASE("oracle estimator has zero risk under any attack") {
  TruthFunction truth = TruthFunction::holder_power(1.0, 2.0);
  RealFn f = [&truth](const Eigen::VectorXd& x) { return truth(x); };
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.1);
  SeededRng rng{11};

  RiskSpec spec;
  spec.attack = AttackSpec::identity(1);
  spec.test_draws = 64;
  spec.replications = 4;
  RiskEstimate est = estimate_risk(truth, oracle_factory(f), spec, design, noise, 50, rng);
  CHECK(est.mean == 0.0);

  // constant truth and matching constant estimate stay at zero even attacked
  TruthFunction flat = TruthFunction::polynomial(0, 1, {1.5});
  RiskSpec attacked;
  attacked.attack = AttackSpec::lp_ball(1, 2.0, 0.2);
  attacked.test_draws = 64;
  attacked.replications = 4;
  attacked.q = 3.0;
  RealFn c = [](const Eigen::VectorXd&) { return 1.5; };
  CHECK(estimate_risk(flat, oracle_factory(c), attacked, design, noise, 50, rng).mean == 0.0);
}

TEST_CASE("identity risk equals the direct standard-risk path bitwise") {
  TruthFunction truth = TruthFunction::staircase(0.5, 2.0, 0.05);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{77};
  PPConfig cfg;
  cfg.cells_per_axis = 10;
  cfg.degree = 1;
  cfg.bandwidth = 0.1;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);

  RiskSpec spec;
  spec.q = 2.0;
  spec.attack = AttackSpec::identity(1);
  spec.test_draws = 128;
  spec.replications = 6;
  RiskEstimate est =
      estimate_risk(truth, pp_factory(cfg), spec, design, noise, 200, rng);
  double direct =
      direct_standard_risk(truth, pp_factory(cfg), design, noise, 200, 128, 6, rng);
  CHECK(std::abs(est.mean - direct) <= 1e-12);
}

TEST_CASE("attacked risk dominates clean risk and grows with the radius") {
  TruthFunction truth = TruthFunction::staircase(0.5, 2.0, 0.05);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{31};
  PPConfig cfg;
  cfg.cells_per_axis = 10;
  cfg.degree = 1;
  cfg.bandwidth = 0.1;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);

  auto risk_at = [&](double r, int resolution) {
    RiskSpec spec;
    spec.q = 2.0;
    spec.attack = r == 0.0 ? AttackSpec::identity(1) : AttackSpec::lp_ball(1, 2.0, r);
    spec.query.resolution = resolution;
    spec.test_draws = 128;
    spec.replications = 6;
    return estimate_risk(truth, pp_factory(cfg), spec, design, noise, 200, rng).mean;
  };
  double clean = risk_at(0.0, 17);
  double small = risk_at(0.05, 17);
  double large = risk_at(0.10, 33);
  CHECK(small >= clean);
  CHECK(large >= small);
}

TEST_CASE("root risks are nondecreasing in q on a common seed") {
  TruthFunction truth = TruthFunction::holder_power(0.5, 2.0);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.3);
  SeededRng rng{5};
  PPConfig cfg;
  cfg.cells_per_axis = 8;
  cfg.degree = 1;
  cfg.bandwidth = 0.125;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);

  auto root_risk = [&](double q) {
    RiskSpec spec;
    spec.q = q;
    spec.attack = AttackSpec::lp_ball(1, 2.0, 0.05);
    spec.test_draws = 256;
    spec.replications = 4;
    return std::pow(estimate_risk(truth, pp_factory(cfg), spec, design, noise, 300, rng).mean,
                    1.0 / q);
  };
  double r1 = root_risk(1.0);
  double r2 = root_risk(2.0);
  double r4 = root_risk(4.0);
  CHECK(r2 >= r1 - 1e-12);
  CHECK(r4 >= r2 - 1e-12);
}

TEST_CASE("sup-norm risk dominates the q-th root on common seeds") {
  TruthFunction truth = TruthFunction::holder_power(0.5, 2.0);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{9};
  PPConfig cfg;
  cfg.cells_per_axis = 8;
  cfg.degree = 1;
  cfg.bandwidth = 0.125;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);

  RiskSpec finite;
  finite.q = 2.0;
  finite.attack = AttackSpec::lp_ball(1, 2.0, 0.05);
  finite.test_draws = 256;
  finite.replications = 4;
  RiskSpec sup = finite;
  sup.q = std::numeric_limits<double>::infinity();
  sup.sup_grid = 512;

  double finite_root = std::pow(
      estimate_risk(truth, pp_factory(cfg), finite, design, noise, 300, rng).mean, 0.5);
  double sup_mean =
      estimate_risk(truth, pp_factory(cfg), sup, design, noise, 300, rng).mean;
  CHECK(sup_mean >= finite_root - 0.05);
}

TEST_CASE("sup-norm probe grid is stable under halving") {
  TruthFunction truth = TruthFunction::staircase(0.5, 2.0, 0.05);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{41};
  PPConfig cfg;
  cfg.cells_per_axis = 20;
  cfg.degree = 1;
  cfg.bandwidth = 0.05;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  RiskSpec spec;
  spec.q = std::numeric_limits<double>::infinity();
  spec.attack = AttackSpec::lp_ball(1, 2.0, 0.05);
  spec.replications = 8;
  spec.sup_grid = 2048;
  double full = estimate_risk(truth, pp_factory(cfg), spec, design, noise, 512, rng).mean;
  spec.sup_grid = 1024;
  double half = estimate_risk(truth, pp_factory(cfg), spec, design, noise, 512, rng).mean;
  CHECK(std::abs(full - half) / full < 0.02);
}

TEST_CASE("risk estimates are deterministic in the thread count") {
  TruthFunction truth = TruthFunction::staircase(0.5, 2.0, 0.05);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{123};
  PPConfig cfg;
  cfg.cells_per_axis = 6;
  cfg.degree = 1;
  cfg.bandwidth = 0.17;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  RiskSpec spec;
  spec.q = 2.0;
  spec.attack = AttackSpec::lp_ball(1, 2.0, 0.05);
  spec.test_draws = 64;
  spec.replications = 12;
  RiskEstimate a = estimate_risk(truth, pp_factory(cfg), spec, design, noise, 150, rng, 1);
  RiskEstimate b = estimate_risk(truth, pp_factory(cfg), spec, design, noise, 150, rng, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  for (int i = 0; i < spec.replications; ++i)
    CHECK(a.per_replication[i] == b.per_replication[i]);
}

TEST_CASE("failing replication aborts the estimate") {
  TruthFunction truth = TruthFunction::holder_power(1.0, 2.0);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.1);
  SeededRng rng{3};
  RiskSpec spec;
  spec.attack = AttackSpec::identity(1);
  spec.test_draws = 8;
  spec.replications = 4;
  EstimatorFactory bomb = [](const Dataset&) -> std::shared_ptr<const FittedEstimator> {
    throw NumericalError("synthetic failure");
  };
  CHECK_THROWS_AS(estimate_risk(truth, bomb, spec, design, noise, 20, rng),
                  NumericalError);
}

TEST_CASE("surrogate sandwich diagnostic") {
  TruthFunction truth = TruthFunction::staircase(0.5, 2.0, 0.05);
  DesignSpec design = DesignSpec::uniform(1);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{2024};

  // exact estimator, identity attack: both sides vanish
  OracleEstimator exact([&truth](const Eigen::VectorXd& x) { return truth(x); });
  SurrogateDiagnostic ident = trades_diagnostic(exact, truth, AttackSpec::identity(1), design,
                                                noise, 2000, rng.stream(900));
  CHECK(ident.risk == doctest::Approx(0.0));
  CHECK(ident.sandwich_ok);

  // fitted estimator under a ball attack
  Dataset train = sample_dataset(truth, design, noise, 1024, rng.stream(0));
  PPConfig cfg;
  cfg.cells_per_axis = 20;
  cfg.degree = 1;
  cfg.bandwidth = 0.05;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 1);
  PPEstimator pp = PPEstimator::fit(train, cfg);
  SurrogateDiagnostic diag = trades_diagnostic(pp, truth, AttackSpec::lp_ball(1, 2.0, 0.05),
                                               design, noise, 4000, rng.stream(901));
  CHECK(diag.sandwich_ok);
  CHECK(diag.risk >= 0.0);
}

TEST_CASE("two-dimensional pipeline: fit, box attack, risk") {
  TruthFunction truth = TruthFunction::polynomial(1, 2, {0.5, 1.0, -0.5});
  DesignSpec design = DesignSpec::uniform(2);
  NoiseSpec noise = NoiseSpec::gaussian(0.2);
  SeededRng rng{271};
  PPConfig cfg;
  cfg.cells_per_axis = 4;
  cfg.degree = 1;
  cfg.bandwidth = 0.3;
  cfg.kernel = Kernel(Kernel::Shape::epanechnikov, 2);

  RiskSpec clean;
  clean.q = 2.0;
  clean.attack = AttackSpec::identity(2);
  clean.test_draws = 128;
  clean.replications = 4;
  RiskSpec attacked = clean;
  attacked.attack = AttackSpec::lp_ball(2, 2.0, 0.1);
  attacked.query.resolution = 9;

  double base = estimate_risk(truth, pp_factory(cfg), clean, design, noise, 400, rng).mean;
  double worst = estimate_risk(truth, pp_factory(cfg), attacked, design, noise, 400, rng).mean;
  CHECK(base > 0.0);
  CHECK(worst >= base);
  // linear truth with gradient (1, -0.5): the attack shifts the target by at
  // most r ||grad||, so the attacked risk stays within the matching envelope
  double grad_norm = std::sqrt(1.0 + 0.25);
  CHECK(worst <= 4.0 * (base + 2.0 * 0.1 * grad_norm * std::sqrt(base) +
                        0.01 * grad_norm * grad_norm));
}

TEST_CASE("rate slope ordinary least squares") {
  std::vector<std::pair<double, double>> exact;
  for (double n : {256.0, 1024.0, 4096.0}) exact.push_back({n, std::pow(n, -2.0 / 3.0)});
  RateFit fit = rate_slope(exact);
  CHECK(fit.slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));

  std::vector<std::pair<double, double>> flat = {{10, 0.5}, {100, 0.5}, {1000, 0.5}};
  CHECK(rate_slope(flat).slope == doctest::Approx(0.0));

  std::vector<std::pair<double, double>> scaled;
  for (double n : {16.0, 64.0, 256.0}) scaled.push_back({n, 4.0 * std::pow(n, -0.5)});
  RateFit s = rate_slope(scaled);
  CHECK(s.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(s.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  CHECK_THROWS_AS(rate_slope({{10, 1.0}, {20, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(rate_slope({{10, 1.0}, {20, 0.5}, {30, -0.1}}), std::invalid_argument);
}
