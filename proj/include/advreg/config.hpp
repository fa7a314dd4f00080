#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "advreg/adaptive.hpp"
#include "advreg/attacks.hpp"
#include "advreg/partition.hpp"
#include "advreg/risk.hpp"
#include "advreg/testbed.hpp"

namespace advreg {

// Everything one experiment needs, parsed from a JSON config file with strict
// validation: every field is checked before any computation and unknown keys
// are rejected with their location.
struct ExperimentConfig {
  std::uint64_t seed = 20250809;
  int n = 100;
  std::string out;              // empty = stdout
  std::string format = "csv";   // csv | json
  int jobs = 0;                 // 0 = hardware concurrency
  bool timestamp = true;

  struct Truth {
    std::string kind = "staircase";   // polynomial | holder_power | staircase | smooth_ramp
    int dim = 1;
    double beta = 0.5;
    double c_beta = 2.0;
    double r = 0.02;
    double amplitude = 0.2;           // smooth_ramp
    int degree = 1;                   // polynomial
    std::vector<double> coeffs{0.0, 1.0};
  } truth;

  struct Design {
    std::string kind = "uniform";     // uniform | piecewise
    int cells_per_axis = 1;
    std::vector<double> weights;
  } design;

  struct Noise {
    std::string kind = "gaussian";    // gaussian | bounded
    double sigma = 0.2;
    double scale = 0.2;
  } noise;

  struct Estimator {
    std::string kind = "pp";          // pp | adaptive
    int degree = 1;
    std::string kernel = "epanechnikov";   // rectangular | epanechnikov
    double beta = 1.0;                // smoothness the bandwidth rule assumes
    double c_h = 1.0;
    double bandwidth = 0.0;           // 0 = tuned from (beta, r, q)
    int cells_per_axis = 0;           // 0 = ceil(1/h) for pp, n for adaptive
    double tau = 0.0;                 // 0 = 1/(n h^d)
    double beta_max = 1.0;            // adaptive
    double c_lep = 0.0;               // 0 = data-driven default
  } estimator;

  struct Attack {
    std::string kind = "identity";    // identity | lp_ball | soda
    double p = 2.0;                   // may be infinity
    double r = 0.0;
    std::vector<double> direction{1.0};
    double c_lo = 1.0;
    double c_hi = 1.0;
  } attack;

  struct Risk {
    double q = 2.0;                   // may be infinity
    int test_draws = 512;
    int replications = 32;
    int sup_grid = 0;              // 0 = dimension-aware default
    int resolution = 0;               // inner-sup candidates; 0 = defaults
  } risk;

  struct Sweep {
    std::vector<int> n;
    std::vector<double> r;
    std::vector<double> beta;
    std::vector<double> q;
    double plateau_lo = 0.6;
    double plateau_hi = 1.5;
  } sweep;

  struct LowerBound {
    int quad = 16384;
    int packing_cells = 16;
    int packing_count = 8;
  } lower_bound;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string to_json_text() const;

  // validated component builders
  TruthFunction make_truth() const;
  DesignSpec make_design() const;
  NoiseSpec make_noise() const;
  AttackSpec make_attack(double r_override) const;
  AttackSpec make_attack() const { return make_attack(attack.r); }
  Kernel make_kernel() const;
  SupQuery make_query() const;
  int effective_jobs() const;

  // factory for one sweep cell; h tuned from (beta, r, q) unless fixed
  EstimatorFactory make_factory(int n_cell, double beta_cell, double r_cell,
                                double q_cell) const;
};

// Subcommand drivers; each writes its data to `out` and progress to `log`.
void cmd_fit(const ExperimentConfig& config, std::ostream& out, std::ostream& log);
void cmd_evaluate(const ExperimentConfig& config, std::ostream& out, std::ostream& log);
void cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& log);
void cmd_adapt(const ExperimentConfig& config, std::ostream& out, std::ostream& log);
void cmd_demo_lower_bound(const ExperimentConfig& config, std::ostream& out, std::ostream& log);
void cmd_dump_config(const ExperimentConfig& config, std::ostream& out);

}  // namespace advreg
