#include "advreg/adaptive.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "advreg/common.hpp"

namespace advreg {

BandwidthGrid build_grid(int n, int dim, double beta_max) {
  if (n < 3) throw std::invalid_argument("build_grid: n must be at least 3");
  if (dim < 1) throw std::invalid_argument("build_grid: dimension must be positive");
  if (!(beta_max > 0.0)) throw std::invalid_argument("build_grid: beta_max must be positive");

  const double log_n = std::log(static_cast<double>(n));
  const long J = 2 * static_cast<long>(std::floor(log_n * std::log(log_n)));
  const long J_max =
      std::min(J, static_cast<long>(std::floor(log_n * std::log(beta_max))));

  BandwidthGrid grid;
  grid.n = n;
  grid.dim = dim;
  grid.beta_max = beta_max;
  grid.j_lo = -J;
  grid.j_hi = J_max;
  if (J_max < -J) throw std::invalid_argument("build_grid: empty grid (beta_max too small)");
  const double ratio = 1.0 + 1.0 / log_n;
  for (long j = -J; j <= J_max; ++j) {
    double beta = std::pow(ratio, static_cast<double>(j));
    grid.betas.push_back(beta);
    grid.bandwidths.push_back(std::pow(static_cast<double>(n), -1.0 / (2.0 * beta + dim)));
  }
  return grid;
}

std::optional<double> oracle_bandwidth(const BandwidthGrid& grid, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("oracle_bandwidth: beta must be positive");
  const double proxy = std::log(static_cast<double>(grid.n)) / grid.n;
  for (int k = grid.size() - 1; k >= 0; --k) {
    double h = grid.bandwidths[k];
    if (std::pow(h, 2.0 * beta) <= proxy / std::pow(h, grid.dim)) return h;
  }
  return std::nullopt;
}

double lepski_threshold(double c_lep, int n, int dim, double h_small) {
  return c_lep * std::sqrt(std::log(static_cast<double>(n)) / (n * std::pow(h_small, dim)));
}

namespace {

// ridge-floored coefficient solve of one assembly; empty vector when the
// ball holds no points
std::optional<Eigen::VectorXd> solve_theta(const LocalAssembly& assembly, double h, int n,
                                           int dim) {
  if (assembly.n_in_ball == 0) return std::nullopt;
  const double tau = tau_for(h, n, dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(assembly.gram, Eigen::EigenvaluesOnly);
  Eigen::MatrixXd ridged = assembly.gram;
  if (eig.eigenvalues().minCoeff() < tau) ridged.diagonal().array() += tau;
  return Eigen::LDLT<Eigen::MatrixXd>(ridged).solve(assembly.moment);
}

// Diagonally standardized mismatch between the small-bandwidth moment vector
// and the rescaled big-bandwidth fit. The ridge floors are bound to the
// bandwidth of the matrix they regularize: tau(h_big) inside theta_big,
// tau(h_small) for the standardizing diagonal.
double statistic_from(const LocalAssembly& small, const Eigen::VectorXd& theta_big,
                      double h_small, double h_big, int n, int dim,
                      const MultiIndexBasis& basis) {
  const int m = basis.size();
  Eigen::VectorXd rescale(m);
  const double rho = h_small / h_big;
  for (int k = 0; k < m; ++k) rescale[k] = std::pow(rho, basis.order(k));

  Eigen::VectorXd mismatch = small.moment - small.gram * rescale.cwiseProduct(theta_big);

  const double tau_small = tau_for(h_small, n, dim);
  Eigen::VectorXd diag = small.gram.diagonal();
  if (diag.minCoeff() < tau_small) diag.array() += tau_small;

  double stat = 0.0;
  for (int k = 0; k < m; ++k)
    stat = std::max(stat, std::abs(mismatch[k]) / std::sqrt(diag[k]));
  return stat;
}

struct AssemblyCache {
  const Dataset& data;
  const Eigen::VectorXd& u;
  const BandwidthGrid& grid;
  const Kernel& kernel;
  const MultiIndexBasis& basis;
  std::vector<std::optional<LocalAssembly>> slots;
  std::vector<std::optional<std::optional<Eigen::VectorXd>>> thetas;

  AssemblyCache(const Dataset& d, const Eigen::VectorXd& c, const BandwidthGrid& g,
                const Kernel& k, const MultiIndexBasis& b)
      : data(d), u(c), grid(g), kernel(k), basis(b), slots(g.size()), thetas(g.size()) {}

  const LocalAssembly& at(int idx) {
    if (!slots[idx])
      slots[idx] = assemble_local(data, u, grid.bandwidths[idx], kernel, basis);
    return *slots[idx];
  }

  // nullopt inside: empty ball, candidate fails outright
  const std::optional<Eigen::VectorXd>& theta(int idx) {
    if (!thetas[idx])
      thetas[idx] = solve_theta(at(idx), grid.bandwidths[idx], grid.n, grid.dim);
    return *thetas[idx];
  }
};

int select_index(AssemblyCache& cache, double c_lep) {
  const BandwidthGrid& grid = cache.grid;
  for (int hi = grid.size() - 1; hi >= 0; --hi) {
    const std::optional<Eigen::VectorXd>& theta = cache.theta(hi);
    if (!theta) continue;   // empty ball: the comparison is +infinity
    bool pass = true;
    for (int lo = 0; lo <= hi; ++lo) {
      double stat = statistic_from(cache.at(lo), *theta, grid.bandwidths[lo],
                                   grid.bandwidths[hi], grid.n, grid.dim, cache.basis);
      if (stat > lepski_threshold(c_lep, grid.n, grid.dim, grid.bandwidths[lo])) {
        pass = false;
        break;
      }
    }
    if (pass) return hi;
  }
  return 0;  // nothing passed: most local candidate
}

}  // namespace

double lepski_statistic(const Dataset& data, const Eigen::VectorXd& u, double h_small,
                        double h_big, const Kernel& kernel, const MultiIndexBasis& basis) {
  if (!(h_small <= h_big))
    throw std::invalid_argument("lepski_statistic: requires h_small <= h_big");
  LocalAssembly small = assemble_local(data, u, h_small, kernel, basis);
  LocalAssembly big = assemble_local(data, u, h_big, kernel, basis);
  auto theta = solve_theta(big, h_big, data.size(), data.dim());
  if (!theta) return std::numeric_limits<double>::infinity();
  return statistic_from(small, *theta, h_small, h_big, data.size(), data.dim(), basis);
}

double select_bandwidth(const Dataset& data, const Eigen::VectorXd& u,
                        const BandwidthGrid& grid, double c_lep, const Kernel& kernel,
                        const MultiIndexBasis& basis) {
  if (grid.size() == 0) throw std::invalid_argument("select_bandwidth: empty grid");
  AssemblyCache cache(data, u, grid, kernel, basis);
  return grid.bandwidths[select_index(cache, c_lep)];
}

double nn_difference_sigma(const Dataset& data) {
  const int n = data.size();
  if (n < 2) return 0.0;
  std::vector<double> diffs(n);
  if (data.dim() == 1) {
    const auto& order = data.scan_order();
    for (int p = 0; p < n; ++p) {
      int i = order[p];
      // nearer of the two sorted neighbors
      double best = std::numeric_limits<double>::infinity();
      int best_j = i;
      for (int q : {p - 1, p + 1}) {
        if (q < 0 || q >= n) continue;
        int j = order[q];
        double dist = std::abs(data.point(i)[0] - data.point(j)[0]);
        if (dist < best || (dist == best && j < best_j)) {
          best = dist;
          best_j = j;
        }
      }
      diffs[i] = (data.response(i) - data.response(best_j)) / std::sqrt(2.0);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_j = i;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double dist = (data.point(i) - data.point(j)).squaredNorm();
        if (dist < best || (dist == best && j < best_j)) {
          best = dist;
          best_j = j;
        }
      }
      diffs[i] = (data.response(i) - data.response(best_j)) / std::sqrt(2.0);
    }
  }
  for (double& v : diffs) v = std::abs(v);
  std::nth_element(diffs.begin(), diffs.begin() + n / 2, diffs.end());
  double median = diffs[n / 2];
  return 1.4826 * median;
}

double default_lepski_constant(const Dataset& data, int degree, const Kernel& kernel) {
  return 2.0 * (degree + 1) * nn_difference_sigma(data) * kernel.max_value();
}

AdaptiveEstimator AdaptiveEstimator::fit(const Dataset& data, const AdaptiveConfig& config,
                                         int jobs) {
  if (config.degree < smoothness_floor(config.beta_max))
    throw ConfigError("fit_adaptive: degree must be at least the greatest integer below beta_max");
  const int m_cells = config.cells_per_axis.value_or(data.size());
  GridPartition partition(m_cells, data.dim());
  if (partition.cell_count() > kMaxGridCells)
    throw ResourceError("fit_adaptive: grid has more than 10^7 cells");

  BandwidthGrid grid = build_grid(data.size(), data.dim(), config.beta_max);
  const double c_lep =
      config.c_lep ? *config.c_lep : default_lepski_constant(data, config.degree, config.kernel);
  auto basis = std::make_shared<const MultiIndexBasis>(config.degree, data.dim());

  std::vector<double> selected(partition.cell_count());
  std::vector<LocalFit> fits(partition.cell_count());
  parallel_for(partition.cell_count(), jobs, [&](long long k) {
    Eigen::VectorXd u = partition.center(k);
    AssemblyCache cache(data, u, grid, config.kernel, *basis);
    int idx = select_index(cache, c_lep);
    double h = grid.bandwidths[idx];
    selected[k] = h;
    fits[k] = fit_from_assembly(cache.at(idx), u, h, tau_for(h, grid.n, grid.dim), basis);
  });
  return AdaptiveEstimator(partition, std::move(grid), c_lep, std::move(selected),
                           std::move(fits));
}

double AdaptiveEstimator::operator()(const Eigen::VectorXd& x) const {
  return fits_[partition_.cell_index(x)].eval(x);
}

double AdaptiveEstimator::mean_selected_bandwidth() const {
  return pairwise_sum(selected_) / static_cast<double>(selected_.size());
}

}  // namespace advreg
