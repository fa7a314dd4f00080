#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "advreg/estimator.hpp"
#include "advreg/localpoly.hpp"

namespace advreg {

// The uniform discretization of [0,1]^d with M cells per axis and centers
// (2k+1)/(2M). Every point maps to its nearest center; equidistant points go
// to the candidate closest to the origin, so cell boundaries attach to the
// lower cell.
class GridPartition {
 public:
  GridPartition(int cells_per_axis, int dim);

  int cells_per_axis() const { return m_; }
  int dim() const { return dim_; }
  long long cell_count() const { return count_; }

  // per-axis cell index of coordinate value v in [0, 1]
  int axis_cell(double v) const;

  long long cell_index(const Eigen::VectorXd& x) const;
  Eigen::VectorXd center(long long index) const;
  Eigen::VectorXd nearest_center(const Eigen::VectorXd& x) const;

  // axis boundaries k/M interior to [lo, hi], used to split attack segments
  void interior_boundaries(double lo, double hi, std::vector<double>& out) const;

 private:
  int m_;
  int dim_;
  long long count_;
};

// Theorem-style bandwidth rule: h = c_h * max(r, n^{-1/(2 beta + d)}) for
// finite q and h = c_h * max(r, (n / log n)^{-1/(2 beta + d)}) for q =
// infinity, clamped into (0, 1].
double tune_bandwidth(double beta, int dim, int n, double r, double q, double c_h = 1.0);

struct PPConfig {
  int cells_per_axis = 1;
  int degree = 1;
  double bandwidth = 0.1;
  double tau = 0.0;   // <= 0 means the 1/(n h^d) default
  Kernel kernel{Kernel::Shape::epanechnikov, 1};
};

// Piecewise local polynomial estimator: one regularized local fit per grid
// center, all computed eagerly so evaluation is pure and cheap.
class PPEstimator final : public FittedEstimator {
 public:
  static PPEstimator fit(const Dataset& data, const PPConfig& config, int jobs = 1);

  double operator()(const Eigen::VectorXd& x) const override;
  const GridPartition* partition() const override { return &partition_; }
  double mean_selected_bandwidth() const override { return config_.bandwidth; }

  const PPConfig& config() const { return config_; }
  const LocalFit& cell_fit(long long index) const { return fits_[index]; }
  const std::vector<LocalFit>& fits() const { return fits_; }

 private:
  PPEstimator(GridPartition partition, PPConfig config, std::vector<LocalFit> fits)
      : partition_(partition), config_(std::move(config)), fits_(std::move(fits)) {}

  GridPartition partition_;
  PPConfig config_;
  std::vector<LocalFit> fits_;
};

// Refuse per-cell fit counts beyond this; larger grids thrash rather than run.
inline constexpr long long kMaxGridCells = 10'000'000;

}  // namespace advreg
