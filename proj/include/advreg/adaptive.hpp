#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <vector>

#include "advreg/estimator.hpp"
#include "advreg/localpoly.hpp"
#include "advreg/partition.hpp"

namespace advreg {

// Geometric smoothness grid beta_j = (1 + 1/log n)^j and the matching
// candidate bandwidths h_j = n^{-1/(2 beta_j + d)}, ascending in j.
struct BandwidthGrid {
  int n = 0;
  int dim = 0;
  double beta_max = 0.0;
  long j_lo = 0;     // -J
  long j_hi = 0;     // J_max
  std::vector<double> betas;
  std::vector<double> bandwidths;

  int size() const { return static_cast<int>(bandwidths.size()); }
};

// Requires n >= 3 so that log log n > 0.
BandwidthGrid build_grid(int n, int dim, double beta_max);

// Largest grid bandwidth whose squared bias proxy h^{2 beta} stays below the
// variance proxy log(n) / (n h^d); empty when no grid element qualifies.
std::optional<double> oracle_bandwidth(const BandwidthGrid& grid, double beta);

// Comparison statistic between a candidate bandwidth h_big and a smaller
// h_small at center u: the sup-norm of the diagonally standardized mismatch
// between the h_small moment vector and the rescaled h_big fit. Defined as
// +infinity when the ball at h_big holds no sample points, so such a
// candidate always fails.
double lepski_statistic(const Dataset& data, const Eigen::VectorXd& u, double h_small,
                        double h_big, const Kernel& kernel, const MultiIndexBasis& basis);

// Threshold c_lep * sqrt(log n / (n h_small^d)).
double lepski_threshold(double c_lep, int n, int dim, double h_small);

// Largest grid bandwidth passing the comparison against every smaller one;
// falls back to the smallest grid element when none passes.
double select_bandwidth(const Dataset& data, const Eigen::VectorXd& u,
                        const BandwidthGrid& grid, double c_lep, const Kernel& kernel,
                        const MultiIndexBasis& basis);

// Practical default for the selector constant: 2 (degree + 1) sigma_hat
// K_max, with sigma_hat a robust noise scale from first differences of
// nearest-neighbor responses. Always overridable.
double default_lepski_constant(const Dataset& data, int degree, const Kernel& kernel);
double nn_difference_sigma(const Dataset& data);

struct AdaptiveConfig {
  double beta_max = 1.0;
  int degree = 1;
  Kernel kernel{Kernel::Shape::epanechnikov, 1};
  std::optional<double> c_lep;           // default_lepski_constant when unset
  std::optional<int> cells_per_axis;     // M = n when unset
};

// Fully data-driven estimator: per-cell bandwidth selection over the grid,
// then one regularized local fit per cell at its selected bandwidth with
// tau = 1/(n h^d).
class AdaptiveEstimator final : public FittedEstimator {
 public:
  static AdaptiveEstimator fit(const Dataset& data, const AdaptiveConfig& config, int jobs = 1);

  double operator()(const Eigen::VectorXd& x) const override;
  const GridPartition* partition() const override { return &partition_; }
  double mean_selected_bandwidth() const override;

  const BandwidthGrid& grid() const { return grid_; }
  double c_lep_used() const { return c_lep_; }
  const std::vector<double>& selected_bandwidths() const { return selected_; }
  const LocalFit& cell_fit(long long index) const { return fits_[index]; }

 private:
  AdaptiveEstimator(GridPartition partition, BandwidthGrid grid, double c_lep,
                    std::vector<double> selected, std::vector<LocalFit> fits)
      : partition_(partition),
        grid_(std::move(grid)),
        c_lep_(c_lep),
        selected_(std::move(selected)),
        fits_(std::move(fits)) {}

  GridPartition partition_;
  BandwidthGrid grid_;
  double c_lep_;
  std::vector<double> selected_;
  std::vector<LocalFit> fits_;
};

}  // namespace advreg
