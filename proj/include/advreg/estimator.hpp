#pragma once

#include <Eigen/Core>

namespace advreg {

class GridPartition;

// An immutable fitted regression estimate, queryable at arbitrary points of
// [0,1]^d and safe for concurrent evaluation.
class FittedEstimator {
 public:
  virtual ~FittedEstimator() = default;
  virtual double operator()(const Eigen::VectorXd& x) const = 0;
  // Piecewise estimators expose their grid so worst-case searches can probe
  // every cell an attack set touches; null for estimators without one.
  virtual const GridPartition* partition() const { return nullptr; }
  virtual double mean_selected_bandwidth() const = 0;
};

}  // namespace advreg
