#include "advreg/localpoly.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "advreg/common.hpp"

namespace advreg {

LocalAssembly assemble_local(const Dataset& data, const Eigen::VectorXd& u, double h,
                             const Kernel& kernel, const MultiIndexBasis& basis) {
  if (!(h > 0.0)) throw std::invalid_argument("assemble_local: bandwidth must be positive");
  const int d = data.dim();
  const int n = data.size();
  const int m = basis.size();

  LocalAssembly out;
  out.gram = Eigen::MatrixXd::Zero(m, m);
  out.moment = Eigen::VectorXd::Zero(m);

  auto [first, last] = data.axis0_window(u[0] - h, u[0] + h);
  const double h2 = h * h;
  Eigen::VectorXd z(d), ubuf(m);
  for (int pos = first; pos < last; ++pos) {
    int i = data.scan_order()[pos];
    auto x = data.point(i);
    double dist2 = 0.0;
    for (int j = 0; j < d; ++j) {
      double dj = x[j] - u[j];
      dist2 += dj * dj;
    }
    if (dist2 > h2) continue;
    ++out.n_in_ball;
    double w = kernel.from_norm2(dist2 / h2);
    if (w <= 0.0) continue;
    for (int j = 0; j < d; ++j) z[j] = (x[j] - u[j]) / h;
    basis.eval(z, ubuf);
    out.gram.selfadjointView<Eigen::Lower>().rankUpdate(ubuf, w);
    out.moment.noalias() += (w * data.response(i)) * ubuf;
  }
  out.gram.triangularView<Eigen::StrictlyUpper>() = out.gram.transpose();
  const double scale = 1.0 / (n * std::pow(h, d));
  out.gram *= scale;
  out.moment *= scale;
  return out;
}

Eigen::MatrixXd gram_matrix(const Dataset& data, const Eigen::VectorXd& u, double h,
                            const Kernel& kernel, const MultiIndexBasis& basis) {
  return assemble_local(data, u, h, kernel, basis).gram;
}

Eigen::VectorXd moment_vector(const Dataset& data, const Eigen::VectorXd& u, double h,
                              const Kernel& kernel, const MultiIndexBasis& basis) {
  return assemble_local(data, u, h, kernel, basis).moment;
}

Eigen::VectorXd gram_diagonal(const Dataset& data, const Eigen::VectorXd& u, double h,
                              const Kernel& kernel, const MultiIndexBasis& basis) {
  return assemble_local(data, u, h, kernel, basis).gram.diagonal();
}

double LocalFit::eval(const Eigen::VectorXd& x) const {
  if (empty()) return 0.0;
  Eigen::VectorXd z = (x - center) / bandwidth;
  Eigen::VectorXd ubuf;
  basis->eval(z, ubuf);
  return coeffs.dot(ubuf);
}

LocalFit fit_from_assembly(const LocalAssembly& assembly, const Eigen::VectorXd& u, double h,
                           double tau, std::shared_ptr<const MultiIndexBasis> basis) {
  if (!(tau > 0.0)) throw std::invalid_argument("fit_local: tau must be positive");
  LocalFit fit;
  fit.center = u;
  fit.bandwidth = h;
  fit.tau = tau;
  fit.basis = std::move(basis);
  fit.n_in_ball = assembly.n_in_ball;
  if (assembly.n_in_ball == 0) return fit;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(assembly.gram,
                                                     Eigen::EigenvaluesOnly);
  fit.gram_min_eigenvalue = eig.eigenvalues().minCoeff();
  fit.regularized = fit.gram_min_eigenvalue < tau;

  Eigen::MatrixXd ridged = assembly.gram;
  if (fit.regularized) ridged.diagonal().array() += tau;

  Eigen::LLT<Eigen::MatrixXd> llt(ridged);
  if (llt.info() == Eigen::Success) {
    fit.coeffs = llt.solve(assembly.moment);
    // one refinement step recovers the digits the normal-equations form loses
    Eigen::VectorXd residual = assembly.moment - ridged * fit.coeffs;
    fit.coeffs += llt.solve(residual);
    return fit;
  }
  if (!fit.regularized)
    throw NumericalError("fit_local: Cholesky failed on a Gram matrix with min eigenvalue >= tau");
  // fallback: ridged = V (L + tau) V^T with the same eigenvectors as the Gram
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(assembly.gram);
  Eigen::VectorXd inv = (full.eigenvalues().array() + tau).inverse();
  fit.coeffs = full.eigenvectors() * inv.asDiagonal() *
               (full.eigenvectors().transpose() * assembly.moment);
  return fit;
}

LocalFit fit_local(const Dataset& data, const Eigen::VectorXd& u, double h, double tau,
                   const Kernel& kernel, std::shared_ptr<const MultiIndexBasis> basis) {
  LocalAssembly assembly = assemble_local(data, u, h, kernel, *basis);
  return fit_from_assembly(assembly, u, h, tau, std::move(basis));
}

double tau_for(double h, int n, int dim) {
  return 1.0 / (n * std::pow(h, dim));
}

}  // namespace advreg
