#include "advreg/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "advreg/basis.hpp"
#include "advreg/common.hpp"

namespace advreg {

double staircase_profile(double x, double beta) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("staircase_profile: requires beta in (0, 1]");
  if (x < 0.25) return 0.0;
  if (x < 0.5) return std::pow(x - 0.25, beta);
  if (x < 0.75) return std::pow(0.25, beta);
  return std::pow(std::max(1.0 - x, 0.0), beta);
}

double smooth_ramp_profile(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return std::exp(-1.0);
  double t = x - 1.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

TruthFunction TruthFunction::polynomial(int degree, int dim, std::vector<double> coeffs) {
  MultiIndexBasis basis(degree, dim);
  if (static_cast<int>(coeffs.size()) != basis.size())
    throw std::invalid_argument("TruthFunction: coefficient count must match the basis size");
  TruthFunction f;
  f.kind_ = Kind::polynomial;
  f.dim_ = dim;
  f.degree_ = degree;
  f.coeffs_ = std::move(coeffs);
  f.exponents_.reserve(static_cast<std::size_t>(basis.size()) * dim);
  for (int k = 0; k < basis.size(); ++k)
    for (int j = 0; j < dim; ++j) f.exponents_.push_back(basis.exponent(k, j));
  f.beta_ = std::max(1.0, static_cast<double>(degree));
  return f;
}

TruthFunction TruthFunction::holder_power(double beta, double c_beta, int dim) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("TruthFunction: holder_power requires beta in (0, 1]");
  if (!(c_beta > 0.0)) throw std::invalid_argument("TruthFunction: c_beta must be positive");
  TruthFunction f;
  f.kind_ = Kind::holder_power;
  f.dim_ = dim;
  f.beta_ = beta;
  f.c_beta_ = c_beta;
  return f;
}

TruthFunction TruthFunction::staircase(double beta, double c_beta, double r, int dim) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("TruthFunction: staircase requires beta in (0, 1]");
  if (!(c_beta > 0.0)) throw std::invalid_argument("TruthFunction: c_beta must be positive");
  if (!(r > 0.0 && r < 0.125))
    throw std::invalid_argument("TruthFunction: staircase requires r in (0, 1/8)");
  TruthFunction f;
  f.kind_ = Kind::staircase;
  f.dim_ = dim;
  f.beta_ = beta;
  f.c_beta_ = c_beta;
  f.r_ = r;
  return f;
}

TruthFunction TruthFunction::smooth_ramp(double beta, double amplitude, double r, int dim) {
  if (!(beta > 1.0)) throw std::invalid_argument("TruthFunction: smooth_ramp requires beta > 1");
  if (!(amplitude > 0.0)) throw std::invalid_argument("TruthFunction: amplitude must be positive");
  if (!(r > 0.0 && r < 0.125))
    throw std::invalid_argument("TruthFunction: smooth_ramp requires r in (0, 1/8)");
  TruthFunction f;
  f.kind_ = Kind::smooth_ramp;
  f.dim_ = dim;
  f.beta_ = beta;
  f.amplitude_ = amplitude;
  f.r_ = r;
  return f;
}

double TruthFunction::eval1(double x1) const {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(dim_, 0.5);
  x[0] = x1;
  return (*this)(x);
}

double TruthFunction::operator()(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case Kind::polynomial: {
      double acc = 0.0;
      const int m = static_cast<int>(coeffs_.size());
      for (int k = 0; k < m; ++k) {
        double term = coeffs_[k];
        for (int j = 0; j < dim_; ++j) {
          int e = exponents_[static_cast<std::size_t>(k) * dim_ + j];
          for (int t = 0; t < e; ++t) term *= x[j];
        }
        acc += term;
      }
      return acc;
    }
    case Kind::holder_power:
      return c_beta_ * std::pow(std::abs(x[0] - 0.5), beta_);
    case Kind::staircase: {
      const double period = 8.0 * r_;
      const int k_top = static_cast<int>(std::floor(1.0 / period));
      double x1 = x[0];
      if (x1 >= k_top * period) return 0.0;
      int k = std::min(static_cast<int>(std::floor(x1 / period)), k_top - 1);
      double local = (x1 - k * period) / period;
      return 0.5 * c_beta_ * std::pow(period, beta_) * staircase_profile(local, beta_);
    }
    case Kind::smooth_ramp: {
      double x1 = x[0];
      if (x1 < 2.0 * r_) return 0.0;
      if (x1 >= 1.0 - 2.0 * r_) return amplitude_ * std::exp(-1.0);
      return amplitude_ * smooth_ramp_profile((x1 - 2.0 * r_) / (1.0 - 4.0 * r_));
    }
    case Kind::packed: {
      double value = (*base_)(x);
      const int L = packing_cells_;
      long long cell = 0;
      Eigen::VectorXd z(dim_);
      for (int j = 0; j < dim_; ++j) {
        int lj = std::min(static_cast<int>(std::floor(x[j] * L)), L - 1);
        cell = cell * L + lj;
        z[j] = L * (x[j] - (lj + 0.5) / L);
      }
      double w = static_cast<double>((*signs_)[static_cast<std::size_t>(cell)]);
      return value + w * bump_scale_ * mother_bump(z) / std::pow(static_cast<double>(L), beta_);
    }
  }
  return 0.0;
}

const char* TruthFunction::name() const {
  switch (kind_) {
    case Kind::polynomial: return "polynomial";
    case Kind::holder_power: return "holder_power";
    case Kind::staircase: return "staircase";
    case Kind::smooth_ramp: return "smooth_ramp";
    case Kind::packed: return "packed";
  }
  return "?";
}

double mother_bump(const Eigen::VectorXd& z) {
  double t = 4.0 * z.squaredNorm();
  if (t >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t));
}

double mother_bump_scale(double beta, double c_beta) {
  // The bump is radial, so its order-zero difference quotient is attained on
  // a radial line; maximize over a dense grid of radii.
  const int grid = 4001;
  std::vector<double> radius(grid), value(grid);
  for (int i = 0; i < grid; ++i) {
    radius[i] = 0.5 * static_cast<double>(i) / (grid - 1);
    Eigen::VectorXd z(1);
    z[0] = radius[i];
    value[i] = mother_bump(z);
  }
  double quotient = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = i + 1; j < grid; ++j) {
      double gap = radius[j] - radius[i];
      quotient = std::max(quotient, std::abs(value[j] - value[i]) / std::pow(gap, beta));
    }
  // A pair straddling two opposite-sign bumps adds their values while the
  // points can sit 2^{1-beta} closer than the sum of their edge distances, so
  // the field of bumps needs that much extra headroom over a single bump.
  double cross_cell = std::pow(2.0, std::min(beta, 1.0) - 1.0);
  return cross_cell * 0.5 * c_beta / quotient;
}

PackingSet build_packing(const TruthFunction& base, double beta, double c_beta,
                         int cells_per_axis, int count, const SeededRng& rng) {
  if (cells_per_axis < 1) throw std::invalid_argument("build_packing: cells must be positive");
  if (count < 1) throw std::invalid_argument("build_packing: count must be positive");
  const int d = base.dim();
  long long total = 1;
  for (int j = 0; j < d; ++j) {
    total *= cells_per_axis;
    if (total > 1'000'000LL) throw ResourceError("build_packing: too many cells");
  }
  if (total < 8)
    throw std::invalid_argument("build_packing: separation requires at least 8 cells");
  if (total < 62 && static_cast<long long>(count) > (1LL << total))
    throw ResourceError("build_packing: count exceeds the number of sign vectors");

  const long long min_hamming = total / 8;
  RngStream stream = rng.stream(0x7061636bULL);  // fixed derivation for packing draws
  std::vector<std::vector<std::int8_t>> accepted;
  long long budget = 2000LL * count;
  while (static_cast<int>(accepted.size()) < count && budget-- > 0) {
    std::vector<std::int8_t> w(static_cast<std::size_t>(total));
    for (auto& s : w) s = (stream.next_u64() & 1ULL) ? 1 : -1;
    bool ok = true;
    for (const auto& prev : accepted) {
      long long hamming = 0;
      for (std::size_t i = 0; i < w.size(); ++i) hamming += (w[i] != prev[i]);
      if (hamming < min_hamming) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(std::move(w));
  }
  if (static_cast<int>(accepted.size()) < count)
    throw ResourceError("build_packing: could not meet the separation; count too large for the grid");

  PackingSet set;
  set.base_ = std::make_shared<const TruthFunction>(base);
  set.cells_ = cells_per_axis;
  set.beta_ = beta;
  set.scale_ = mother_bump_scale(beta, c_beta);
  set.signs_ = std::move(accepted);
  return set;
}

TruthFunction PackingSet::member(int j) const {
  TruthFunction f;
  f.kind_ = TruthFunction::Kind::packed;
  f.dim_ = base_->dim();
  f.beta_ = beta_;
  f.base_ = base_;
  f.packing_cells_ = cells_;
  f.bump_scale_ = scale_;
  f.signs_ = std::make_shared<const std::vector<std::int8_t>>(signs_[j]);
  return f;
}

double PackingSet::bump_at(int cell, const Eigen::VectorXd& x) const {
  const int d = base_->dim();
  const int L = cells_;
  Eigen::VectorXd z(d);
  long long rest = cell;
  for (int j = d - 1; j >= 0; --j) {
    int lj = static_cast<int>(rest % L);
    rest /= L;
    z[j] = L * (x[j] - (lj + 0.5) / L);
  }
  return scale_ * mother_bump(z) / std::pow(static_cast<double>(L), beta_);
}

NoiseSpec NoiseSpec::gaussian(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("NoiseSpec: sigma must be nonnegative");
  return NoiseSpec{Kind::gaussian, sigma};
}

NoiseSpec NoiseSpec::bounded(double scale) {
  if (scale < 0.0) throw std::invalid_argument("NoiseSpec: scale must be nonnegative");
  return NoiseSpec{Kind::bounded, scale};
}

double NoiseSpec::sample(RngStream& stream) const {
  if (kind == Kind::gaussian) return param * stream.normal();
  return param * stream.uniform(-1.0, 1.0);
}

double NoiseSpec::variance() const {
  if (kind == Kind::gaussian) return param * param;
  return param * param / 3.0;
}

DesignSpec DesignSpec::uniform(int dim) {
  if (dim < 1) throw std::invalid_argument("DesignSpec: dimension must be positive");
  DesignSpec d;
  d.dim_ = dim;
  return d;
}

DesignSpec DesignSpec::piecewise(int dim, int cells_per_axis, std::vector<double> weights) {
  if (dim < 1) throw std::invalid_argument("DesignSpec: dimension must be positive");
  if (cells_per_axis < 1) throw std::invalid_argument("DesignSpec: cells must be positive");
  long long total = 1;
  for (int j = 0; j < dim; ++j) total *= cells_per_axis;
  if (static_cast<long long>(weights.size()) != total)
    throw std::invalid_argument("DesignSpec: weight count must be cells^dim");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("DesignSpec: weights must be positive");
    sum += w;
  }
  DesignSpec d;
  d.dim_ = dim;
  d.cells_ = cells_per_axis;
  d.weights_.resize(weights.size());
  d.cumulative_.resize(weights.size());
  double run = 0.0;
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    d.weights_[i] = weights[i] / sum;
    run += d.weights_[i];
    d.cumulative_[i] = run;
    double density = d.weights_[i] * static_cast<double>(total);
    dmin = std::min(dmin, density);
    dmax = std::max(dmax, density);
  }
  d.cumulative_.back() = 1.0;
  d.mu_min_ = dmin;
  d.mu_max_ = dmax;
  return d;
}

double DesignSpec::density(const Eigen::VectorXd& x) const {
  if (cells_ == 0) return 1.0;
  long long cell = 0;
  for (int j = 0; j < dim_; ++j) {
    int lj = std::min(static_cast<int>(std::floor(x[j] * cells_)), cells_ - 1);
    cell = cell * cells_ + lj;
  }
  long long total = static_cast<long long>(weights_.size());
  return weights_[static_cast<std::size_t>(cell)] * static_cast<double>(total);
}

Eigen::VectorXd DesignSpec::sample(RngStream& stream) const {
  Eigen::VectorXd x(dim_);
  if (cells_ == 0) {
    for (int j = 0; j < dim_; ++j) x[j] = stream.uniform01();
    return x;
  }
  double u = stream.uniform01();
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  long long cell = it - cumulative_.begin();
  for (int j = dim_ - 1; j >= 0; --j) {
    long long lj = cell % cells_;
    cell /= cells_;
    x[j] = (static_cast<double>(lj) + stream.uniform01()) / cells_;
  }
  return x;
}

Dataset sample_dataset(const TruthFunction& truth, const DesignSpec& design,
                       const NoiseSpec& noise, int n, RngStream stream) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be positive");
  if (truth.dim() != design.dim())
    throw std::invalid_argument("sample_dataset: truth/design dimension mismatch");
  Eigen::MatrixXd x(n, design.dim());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xi = design.sample(stream);
    x.row(i) = xi;
    y[i] = truth(xi) + noise.sample(stream);
  }
  return Dataset(std::move(x), std::move(y));
}

}  // namespace advreg
