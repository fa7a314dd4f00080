#include "advreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace advreg {

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y)
    : n_(static_cast<int>(x.rows())), dim_(static_cast<int>(x.cols())), y_(std::move(y)) {
  if (n_ < 1) throw std::invalid_argument("Dataset: needs at least one point");
  if (dim_ < 1) throw std::invalid_argument("Dataset: dimension must be positive");
  if (y_.size() != n_) throw std::invalid_argument("Dataset: X/Y size mismatch");
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(y_[i])) throw std::invalid_argument("Dataset: non-finite response");
    for (int j = 0; j < dim_; ++j) {
      double v = x(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("Dataset: design point outside [0,1]^d");
    }
  }
  flat_.resize(static_cast<std::size_t>(n_) * dim_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < dim_; ++j) flat_[static_cast<std::size_t>(i) * dim_ + j] = x(i, j);

  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
    return flat_[static_cast<std::size_t>(a) * dim_] < flat_[static_cast<std::size_t>(b) * dim_];
  });
  keys_.resize(n_);
  for (int p = 0; p < n_; ++p) keys_[p] = flat_[static_cast<std::size_t>(order_[p]) * dim_];
}

std::pair<int, int> Dataset::axis0_window(double lo, double hi) const {
  auto first = std::lower_bound(keys_.begin(), keys_.end(), lo);
  auto last = std::upper_bound(keys_.begin(), keys_.end(), hi);
  return {static_cast<int>(first - keys_.begin()), static_cast<int>(last - keys_.begin())};
}

}  // namespace advreg
