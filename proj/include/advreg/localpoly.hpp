#pragma once

#include <Eigen/Core>
#include <memory>

#include "advreg/basis.hpp"
#include "advreg/dataset.hpp"

namespace advreg {

// One pass over the sample window around (u, h): the local weighted Gram
// matrix, the response-weighted moment vector, and the count of points in the
// closed Euclidean ball B(u, h). The Gram diagonal doubles as the diagonal
// comparison matrix used by the bandwidth selector.
struct LocalAssembly {
  Eigen::MatrixXd gram;     // (1/(n h^d)) sum U U^T K
  Eigen::VectorXd moment;   // (1/(n h^d)) sum Y U K
  int n_in_ball = 0;        // points with ||X_i - u|| <= h
};

LocalAssembly assemble_local(const Dataset& data, const Eigen::VectorXd& u, double h,
                             const Kernel& kernel, const MultiIndexBasis& basis);

Eigen::MatrixXd gram_matrix(const Dataset& data, const Eigen::VectorXd& u, double h,
                            const Kernel& kernel, const MultiIndexBasis& basis);
Eigen::VectorXd moment_vector(const Dataset& data, const Eigen::VectorXd& u, double h,
                              const Kernel& kernel, const MultiIndexBasis& basis);
Eigen::VectorXd gram_diagonal(const Dataset& data, const Eigen::VectorXd& u, double h,
                              const Kernel& kernel, const MultiIndexBasis& basis);

// A solved local polynomial fit at center u with bandwidth h. `coeffs` is
// empty exactly when no sample point falls in the closed ball B(u, h); such a
// fit evaluates to zero everywhere.
struct LocalFit {
  Eigen::VectorXd center;
  double bandwidth = 0.0;
  double tau = 0.0;
  Eigen::VectorXd coeffs;
  int n_in_ball = 0;
  bool regularized = false;
  double gram_min_eigenvalue = 0.0;   // diagnostic, 0 for empty fits
  std::shared_ptr<const MultiIndexBasis> basis;

  bool empty() const { return coeffs.size() == 0; }
  double eval(const Eigen::VectorXd& x) const;
};

// Regularized local polynomial fit: when the smallest Gram eigenvalue falls
// below tau, a tau ridge is added before solving. The solve is Cholesky with
// one refinement step, falling back to an eigendecomposition solve if the
// factorization fails.
LocalFit fit_local(const Dataset& data, const Eigen::VectorXd& u, double h, double tau,
                   const Kernel& kernel, std::shared_ptr<const MultiIndexBasis> basis);

// As fit_local but reusing an existing assembly at (u, h).
LocalFit fit_from_assembly(const LocalAssembly& assembly, const Eigen::VectorXd& u, double h,
                           double tau, std::shared_ptr<const MultiIndexBasis> basis);

// Default ridge floor: tau = 1 / (n h^d).
double tau_for(double h, int n, int dim);

}  // namespace advreg
