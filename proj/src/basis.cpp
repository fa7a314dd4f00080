#include "advreg/basis.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "advreg/common.hpp"

namespace advreg {

namespace {

// Enumerates multi-indices of exact total order `total` in lexicographic
// order, appending to out.
void append_indices_of_order(int total, int dim, std::vector<int>& prefix,
                             std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == dim - 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = 0; e <= total; ++e) {
    prefix.push_back(e);
    append_indices_of_order(total - e, dim, prefix, out);
    prefix.pop_back();
  }
}

std::int64_t factorial64(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

MultiIndexBasis::MultiIndexBasis(int degree, int dim) : degree_(degree), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("MultiIndexBasis: dimension must be positive");
  if (degree < 0) throw std::invalid_argument("MultiIndexBasis: degree must be nonnegative");
  if (degree > 20)
    throw std::invalid_argument("MultiIndexBasis: degree > 20 overflows 64-bit factorials");

  std::vector<std::vector<int>> indices;
  std::vector<int> prefix;
  for (int total = 0; total <= degree; ++total)
    append_indices_of_order(total, dim, prefix, indices);

  size_ = static_cast<int>(indices.size());
  exponents_.reserve(static_cast<std::size_t>(size_) * dim_);
  orders_.reserve(size_);
  inv_fact_.reserve(size_);
  for (const auto& s : indices) {
    int order = 0;
    std::int64_t fact = 1;
    for (int j = 0; j < dim_; ++j) {
      exponents_.push_back(s[j]);
      order += s[j];
      fact *= factorial64(s[j]);
    }
    orders_.push_back(order);
    inv_fact_.push_back(1.0 / static_cast<double>(fact));
  }
}

void MultiIndexBasis::eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.resize(size_);
  // per-coordinate power table up to the degree
  double powers[21 * 8];
  const bool small = dim_ <= 8;
  std::vector<double> heap_powers;
  double* pw = powers;
  if (!small) {
    heap_powers.resize(static_cast<std::size_t>(degree_ + 1) * dim_);
    pw = heap_powers.data();
  }
  for (int j = 0; j < dim_; ++j) {
    double* col = pw + static_cast<std::size_t>(j) * (degree_ + 1);
    col[0] = 1.0;
    for (int e = 1; e <= degree_; ++e) col[e] = col[e - 1] * x[j];
  }
  const int* exp = exponents_.data();
  for (int k = 0; k < size_; ++k) {
    double v = inv_fact_[k];
    for (int j = 0; j < dim_; ++j)
      v *= pw[static_cast<std::size_t>(j) * (degree_ + 1) + exp[static_cast<std::size_t>(k) * dim_ + j]];
    out[k] = v;
  }
}

double unit_ball_volume(int dim) {
  return std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

Kernel::Kernel(Shape shape, int dim) : shape_(shape), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("Kernel: dimension must be positive");
  double vd = unit_ball_volume(dim);
  inv_volume_ = 1.0 / vd;
  amplitude_ = (dim + 2.0) / (2.0 * vd);
}

}  // namespace advreg
