#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "advreg/attacks.hpp"
#include "advreg/estimator.hpp"
#include "advreg/rng.hpp"
#include "advreg/testbed.hpp"

namespace advreg {

// What risk to estimate and how: the loss exponent (infinity for the
// sup-norm risk), the attack model, Monte Carlo sizes, and the resolution of
// the inner maximization.
struct RiskSpec {
  double q = 2.0;                     // >= 1, or infinity
  AttackSpec attack;
  int test_draws = 512;               // fresh test points per replication
  int replications = 32;
  int sup_grid = 0;                   // total probe points for q = infinity;
                                      // 0 = 2048 in d = 1, 64 per axis above
  SupQuery query;
};

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double mean_bandwidth = 0.0;   // mean of the fits' selected bandwidths
  std::vector<double> per_replication;
};

using EstimatorFactory =
    std::function<std::shared_ptr<const FittedEstimator>(const Dataset&)>;

// Monte Carlo adversarial risk: per replication, draw a training sample, fit,
// and average the worst-case q-th power error over fresh test draws (finite
// q) or take the sup over a deterministic probe grid (q = infinity).
// Replication k uses substreams (2k) for training and (2k+1) for testing, so
// replications are independent and order-insensitive. A replication failure
// aborts the whole estimate.
RiskEstimate estimate_risk(const TruthFunction& truth, const EstimatorFactory& factory,
                           const RiskSpec& spec, const DesignSpec& design,
                           const NoiseSpec& noise, int n, const SeededRng& rng,
                           int jobs = 1);

// Surrogate-objective diagnostic at q = 2: the Monte Carlo estimate of
// T - E|xi|^2 (squared prediction loss plus worst-case self-deviation, noise
// floor removed) must sandwich the adversarial risk between 1/5 and 2 times
// itself. Both sides are estimated on common draws; the check allows 3
// standard errors of slack.
struct SurrogateDiagnostic {
  double t_minus_noise = 0.0;
  double risk = 0.0;
  double lower_slack = 0.0;    // mean of risk - (T - noise)/5 per draw
  double upper_slack = 0.0;    // mean of 2 (T - noise) - risk per draw
  double lower_se = 0.0;
  double upper_se = 0.0;
  bool sandwich_ok = false;
};

SurrogateDiagnostic trades_diagnostic(const FittedEstimator& fit, const TruthFunction& truth,
                                      const AttackSpec& attack, const DesignSpec& design,
                                      const NoiseSpec& noise, int draws, RngStream stream,
                                      const SupQuery& query = {});

// Ordinary least squares of log(risk) on log(n); rejects fewer than 3 points
// or nonpositive risks.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

RateFit rate_slope(const std::vector<std::pair<double, double>>& n_risk_pairs);

}  // namespace advreg
