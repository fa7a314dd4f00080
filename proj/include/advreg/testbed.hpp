#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "advreg/dataset.hpp"
#include "advreg/rng.hpp"

namespace advreg {

// The four-branch profile on [0,1] used by the staircase hard instance:
// flat zero, a beta-power rise, a flat top, and a beta-power fall.
// Only defined for beta in (0, 1].
double staircase_profile(double x, double beta);

// The smooth ramp profile exp(-1 / (1 - (x-1)^2)) on [0,1], rising from 0 to
// exp(-1), extended by 0 below and exp(-1) above.
double smooth_ramp_profile(double x);

// Ground-truth regression functions on [0,1]^d.
class TruthFunction {
 public:
  enum class Kind { polynomial, holder_power, staircase, smooth_ramp, packed };

  // sum_s coeffs[s] * x^s over the multi-index enumeration of the degree
  static TruthFunction polynomial(int degree, int dim, std::vector<double> coeffs);
  // c_beta * |x_1 - 1/2|^beta, a certified (beta, c_beta)-smooth function
  static TruthFunction holder_power(double beta, double c_beta, int dim = 1);
  // periodic staircase of beta-power bumps with period 8r; requires r < 1/8
  static TruthFunction staircase(double beta, double c_beta, double r, int dim = 1);
  // 0 below 2r, amplitude * exp(-1) above 1 - 2r, smooth in between (beta > 1)
  static TruthFunction smooth_ramp(double beta, double amplitude, double r, int dim = 1);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double beta() const { return beta_; }
  double c_beta() const { return c_beta_; }
  double r() const { return r_; }

  double operator()(const Eigen::VectorXd& x) const;
  double eval1(double x1) const;   // convenience for d = 1 style evaluation

  const char* name() const;

 private:
  friend class PackingSet;
  TruthFunction() = default;

  Kind kind_ = Kind::polynomial;
  int dim_ = 1;
  double beta_ = 1.0;
  double c_beta_ = 1.0;
  double r_ = 0.0;
  double amplitude_ = 0.0;
  // polynomial data
  int degree_ = 0;
  std::vector<double> coeffs_;
  std::vector<int> exponents_;
  // packing data
  std::shared_ptr<const TruthFunction> base_;
  int packing_cells_ = 0;                       // L_n per axis
  double bump_scale_ = 0.0;                     // mother bump amplitude
  std::shared_ptr<const std::vector<std::int8_t>> signs_;
};

// Infinitely smooth mother bump exp(-1/(1 - 4 ||z||^2)) supported on
// ||z|| < 1/2, and the scale that certifies it as (beta, c_beta/2)-smooth at
// order zero (found by maximizing the radial difference quotient).
double mother_bump(const Eigen::VectorXd& z);
double mother_bump_scale(double beta, double c_beta);

// A family of hard-instance perturbations of a base function: per-hypercube
// mother bumps with signs chosen pairwise at least L^d/8 apart in Hamming
// distance.
class PackingSet {
 public:
  int cells_per_axis() const { return cells_; }
  int count() const { return static_cast<int>(signs_.size()); }
  double bump_scale() const { return scale_; }
  const std::vector<std::int8_t>& signs(int j) const { return signs_[j]; }
  const TruthFunction& base() const { return *base_; }

  // base + sum_l w_l phi_l as an evaluable truth
  TruthFunction member(int j) const;

  // the bump phi_l for one cell (mostly for orthogonality checks)
  double bump_at(int cell, const Eigen::VectorXd& x) const;

  friend PackingSet build_packing(const TruthFunction& base, double beta, double c_beta,
                                  int cells_per_axis, int count, const SeededRng& rng);

 private:
  std::shared_ptr<const TruthFunction> base_;
  int cells_ = 0;
  double beta_ = 0.0;
  double scale_ = 0.0;
  std::vector<std::vector<std::int8_t>> signs_;
};

// Rejection-samples `count` sign vectors with pairwise Hamming distance at
// least L^d/8. Requires L^d >= 8; fails after a bounded retry budget when the
// separation cannot be met.
PackingSet build_packing(const TruthFunction& base, double beta, double c_beta,
                         int cells_per_axis, int count, const SeededRng& rng);

// Sub-Gaussian noise models.
struct NoiseSpec {
  enum class Kind { gaussian, bounded };

  Kind kind = Kind::gaussian;
  double param = 0.0;   // sigma for gaussian, half-width for bounded uniform

  static NoiseSpec gaussian(double sigma);
  static NoiseSpec bounded(double scale);

  double sample(RngStream& stream) const;
  double variance() const;
  double sub_gaussian_proxy() const { return param; }
  const char* name() const { return kind == Kind::gaussian ? "gaussian" : "bounded"; }
};

// Design densities on [0,1]^d bounded away from zero and infinity.
class DesignSpec {
 public:
  static DesignSpec uniform(int dim);
  // piecewise constant over a uniform grid of cells_per_axis^d boxes;
  // weights are normalized to a density
  static DesignSpec piecewise(int dim, int cells_per_axis, std::vector<double> weights);

  int dim() const { return dim_; }
  double density_min() const { return mu_min_; }
  double density_max() const { return mu_max_; }
  double density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(RngStream& stream) const;
  const char* name() const { return cells_ == 0 ? "uniform" : "piecewise"; }

 private:
  int dim_ = 1;
  int cells_ = 0;                  // 0 = uniform
  std::vector<double> weights_;    // normalized cell probabilities
  std::vector<double> cumulative_;
  double mu_min_ = 1.0;
  double mu_max_ = 1.0;
};

// Draws n i.i.d. pairs (X_i, f(X_i) + xi_i); fully deterministic given the
// stream.
Dataset sample_dataset(const TruthFunction& truth, const DesignSpec& design,
                       const NoiseSpec& noise, int n, RngStream stream);

}  // namespace advreg
