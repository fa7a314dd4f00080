#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace advreg {

// An immutable regression sample: n design points in [0,1]^d with real
// responses. Points are additionally indexed by their first coordinate so
// that ball queries only scan a window of the sample.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

  int size() const { return n_; }
  int dim() const { return dim_; }

  Eigen::Map<const Eigen::VectorXd> point(int i) const {
    return Eigen::Map<const Eigen::VectorXd>(flat_.data() + static_cast<std::size_t>(i) * dim_, dim_);
  }
  double response(int i) const { return y_[i]; }
  const Eigen::VectorXd& responses() const { return y_; }

  // Positions [first, last) into scan_order() whose first coordinate lies in
  // [lo, hi]. Scanning in this order is deterministic.
  std::pair<int, int> axis0_window(double lo, double hi) const;
  const std::vector<int>& scan_order() const { return order_; }

 private:
  int n_;
  int dim_;
  std::vector<double> flat_;   // row-major, point-contiguous
  Eigen::VectorXd y_;
  std::vector<int> order_;     // indices sorted by first coordinate
  std::vector<double> keys_;   // first coordinate, sorted
};

}  // namespace advreg
