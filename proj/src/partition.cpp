#include "advreg/partition.hpp"

#include <cmath>
#include <stdexcept>

#include "advreg/common.hpp"

namespace advreg {

GridPartition::GridPartition(int cells_per_axis, int dim) : m_(cells_per_axis), dim_(dim) {
  if (m_ < 1) throw std::invalid_argument("GridPartition: cells per axis must be positive");
  if (dim_ < 1) throw std::invalid_argument("GridPartition: dimension must be positive");
  double count = std::pow(static_cast<double>(m_), dim_);
  if (count > 4.0e18) throw ResourceError("GridPartition: cell count overflows");
  count_ = 1;
  for (int j = 0; j < dim_; ++j) count_ *= m_;
}

int GridPartition::axis_cell(double v) const {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument("GridPartition: coordinate outside [0,1]");
  // nearest of the candidate cells around floor(v*M), ties to the smaller
  // center (the one closer to the origin)
  int k = static_cast<int>(std::floor(v * m_));
  if (k < 0) k = 0;
  if (k > m_ - 1) k = m_ - 1;
  int best = k;
  double best_dist = std::abs(v - (2.0 * k + 1.0) / (2.0 * m_));
  for (int cand : {k - 1, k + 1}) {
    if (cand < 0 || cand > m_ - 1) continue;
    double dist = std::abs(v - (2.0 * cand + 1.0) / (2.0 * m_));
    if (dist < best_dist || (dist == best_dist && cand < best)) {
      best = cand;
      best_dist = dist;
    }
  }
  return best;
}

long long GridPartition::cell_index(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("GridPartition: dimension mismatch");
  long long index = 0;
  for (int j = 0; j < dim_; ++j) index = index * m_ + axis_cell(x[j]);
  return index;
}

Eigen::VectorXd GridPartition::center(long long index) const {
  Eigen::VectorXd c(dim_);
  for (int j = dim_ - 1; j >= 0; --j) {
    long long k = index % m_;
    index /= m_;
    c[j] = (2.0 * k + 1.0) / (2.0 * m_);
  }
  return c;
}

Eigen::VectorXd GridPartition::nearest_center(const Eigen::VectorXd& x) const {
  return center(cell_index(x));
}

void GridPartition::interior_boundaries(double lo, double hi, std::vector<double>& out) const {
  int first = static_cast<int>(std::ceil(lo * m_));
  if (first <= 0) first = 1;
  for (int k = first; k <= m_ - 1; ++k) {
    double b = static_cast<double>(k) / m_;
    if (b <= lo) continue;
    if (b >= hi) break;
    out.push_back(b);
  }
}

double tune_bandwidth(double beta, int dim, int n, double r, double q, double c_h) {
  if (!(beta > 0.0)) throw std::invalid_argument("tune_bandwidth: beta must be positive");
  if (n < 1) throw std::invalid_argument("tune_bandwidth: n must be positive");
  if (r < 0.0) throw std::invalid_argument("tune_bandwidth: r must be nonnegative");
  if (!(c_h > 0.0)) throw std::invalid_argument("tune_bandwidth: c_h must be positive");
  double base;
  if (std::isinf(q)) {
    if (n < 2) throw std::invalid_argument("tune_bandwidth: sup-norm rule needs n >= 2");
    base = std::pow(n / std::log(static_cast<double>(n)), -1.0 / (2.0 * beta + dim));
  } else {
    if (!(q >= 1.0)) throw std::invalid_argument("tune_bandwidth: q must be >= 1");
    base = std::pow(static_cast<double>(n), -1.0 / (2.0 * beta + dim));
  }
  double h = c_h * std::max(r, base);
  return std::min(h, 1.0);
}

PPEstimator PPEstimator::fit(const Dataset& data, const PPConfig& config, int jobs) {
  GridPartition partition(config.cells_per_axis, data.dim());
  if (partition.cell_count() > kMaxGridCells)
    throw ResourceError("fit_pp: grid has more than 10^7 cells");
  if (!(config.bandwidth > 0.0))
    throw std::invalid_argument("fit_pp: bandwidth must be positive");
  PPConfig cfg = config;
  if (!(cfg.tau > 0.0)) cfg.tau = tau_for(cfg.bandwidth, data.size(), data.dim());
  auto basis = std::make_shared<const MultiIndexBasis>(cfg.degree, data.dim());

  std::vector<LocalFit> fits(partition.cell_count());
  parallel_for(partition.cell_count(), jobs, [&](long long k) {
    fits[k] = fit_local(data, partition.center(k), cfg.bandwidth, cfg.tau, cfg.kernel, basis);
  });
  return PPEstimator(partition, std::move(cfg), std::move(fits));
}

double PPEstimator::operator()(const Eigen::VectorXd& x) const {
  return fits_[partition_.cell_index(x)].eval(x);
}

}  // namespace advreg
