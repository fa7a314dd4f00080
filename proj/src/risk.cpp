#include "advreg/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "advreg/common.hpp"

namespace advreg {

namespace {

double sample_std_error(const std::vector<double>& values, double mean) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

}  // namespace

RiskEstimate estimate_risk(const TruthFunction& truth, const EstimatorFactory& factory,
                           const RiskSpec& spec, const DesignSpec& design,
                           const NoiseSpec& noise, int n, const SeededRng& rng, int jobs) {
  if (!(spec.q >= 1.0)) throw std::invalid_argument("estimate_risk: q must be >= 1");
  if (spec.test_draws < 1 || spec.replications < 1 || spec.sup_grid < 0)
    throw std::invalid_argument("estimate_risk: Monte Carlo sizes must be positive");

  const bool sup_norm = std::isinf(spec.q);
  RiskEstimate out;
  out.per_replication.resize(spec.replications);
  std::vector<double> bandwidths(spec.replications);

  parallel_for(spec.replications, jobs, [&](long long rep) {
    Dataset train = sample_dataset(truth, design, noise, n,
                                   rng.stream(2 * static_cast<std::uint64_t>(rep)));
    std::shared_ptr<const FittedEstimator> fit = factory(train);
    bandwidths[rep] = fit->mean_selected_bandwidth();
    const GridPartition* part = fit->partition();
    RealFn fhat = [&fit](const Eigen::VectorXd& z) { return (*fit)(z); };

    double value;
    if (sup_norm) {
      const int d = design.dim();
      int per_axis =
          spec.sup_grid == 0
              ? (d == 1 ? 2048 : 64)
              : std::max(2, static_cast<int>(std::llround(
                                std::pow(static_cast<double>(spec.sup_grid), 1.0 / d))));
      long long total = 1;
      for (int j = 0; j < d; ++j) total *= per_axis;
      double worst = 0.0;
      std::vector<int> idx(d, 0);
      Eigen::VectorXd x(d);
      for (long long c = 0; c < total; ++c) {
        for (int j = 0; j < d; ++j) x[j] = (idx[j] + 0.5) / per_axis;
        double fx = truth(x);
        auto candidates = attack_candidates(x, spec.attack, spec.query, part);
        for (const auto& z : candidates) worst = std::max(worst, std::abs(fhat(z) - fx));
        int j = d - 1;
        while (j >= 0 && ++idx[j] == per_axis) idx[j--] = 0;
      }
      value = worst;
    } else {
      RngStream test = rng.stream(2 * static_cast<std::uint64_t>(rep) + 1);
      std::vector<double> terms(spec.test_draws);
      for (int t = 0; t < spec.test_draws; ++t) {
        Eigen::VectorXd x = design.sample(test);
        double fx = truth(x);
        auto candidates = attack_candidates(x, spec.attack, spec.query, part);
        double worst = 0.0;
        for (const auto& z : candidates) worst = std::max(worst, std::abs(fhat(z) - fx));
        terms[t] = std::pow(worst, spec.q);
      }
      value = pairwise_sum(terms) / static_cast<double>(spec.test_draws);
    }
    out.per_replication[rep] = value;
  });

  out.mean = pairwise_sum(out.per_replication) / static_cast<double>(spec.replications);
  out.std_error = sample_std_error(out.per_replication, out.mean);
  out.mean_bandwidth = pairwise_sum(bandwidths) / static_cast<double>(spec.replications);
  return out;
}

SurrogateDiagnostic trades_diagnostic(const FittedEstimator& fit, const TruthFunction& truth,
                                      const AttackSpec& attack, const DesignSpec& design,
                                      const NoiseSpec& noise, int draws, RngStream stream,
                                      const SupQuery& query) {
  if (draws < 2) throw std::invalid_argument("trades_diagnostic: needs at least 2 draws");
  const GridPartition* part = fit.partition();
  RealFn fhat = [&fit](const Eigen::VectorXd& z) { return fit(z); };
  const double noise_var = noise.variance();

  std::vector<double> t_terms(draws), r_terms(draws), lower(draws), upper(draws);
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXd x = design.sample(stream);
    double y = truth(x) + noise.sample(stream);
    double fx = fit(x);
    auto candidates = attack_candidates(x, attack, query, part);
    double self_dev = 0.0, adv = 0.0;
    for (const auto& z : candidates) {
      double fz = fit(z);
      self_dev = std::max(self_dev, (fz - fx) * (fz - fx));
      double err = fz - truth(x);
      adv = std::max(adv, err * err);
    }
    double t_i = (fx - y) * (fx - y) + self_dev - noise_var;
    t_terms[i] = t_i;
    r_terms[i] = adv;
    lower[i] = adv - t_i / 5.0;
    upper[i] = 2.0 * t_i - adv;
  }

  SurrogateDiagnostic diag;
  diag.t_minus_noise = pairwise_sum(t_terms) / draws;
  diag.risk = pairwise_sum(r_terms) / draws;
  diag.lower_slack = pairwise_sum(lower) / draws;
  diag.upper_slack = pairwise_sum(upper) / draws;
  diag.lower_se = sample_std_error(lower, diag.lower_slack);
  diag.upper_se = sample_std_error(upper, diag.upper_slack);
  diag.sandwich_ok = diag.lower_slack >= -3.0 * diag.lower_se &&
                     diag.upper_slack >= -3.0 * diag.upper_se;
  return diag;
}

RateFit rate_slope(const std::vector<std::pair<double, double>>& n_risk_pairs) {
  if (n_risk_pairs.size() < 3)
    throw std::invalid_argument("rate_slope: needs at least 3 points");
  const std::size_t m = n_risk_pairs.size();
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, risk] : n_risk_pairs) {
    if (!(risk > 0.0)) throw std::invalid_argument("rate_slope: risks must be positive");
    if (!(n > 0.0)) throw std::invalid_argument("rate_slope: n must be positive");
    sx += std::log(n);
    sy += std::log(risk);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [n, risk] : n_risk_pairs) {
    double dx = std::log(n) - mx, dy = std::log(risk) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("rate_slope: n values must not be all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace advreg
