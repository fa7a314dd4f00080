#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

namespace advreg {

// Ordered enumeration of the multi-indices s in N^d with 0 <= |s| <= degree,
// ascending in |s| and lexicographic within equal |s|, together with the
// scaled monomial vector U(x) = (x^s / s!)_s. The first entry is always the
// all-zeros index, so U(x)[0] == 1 for every x.
class MultiIndexBasis {
 public:
  MultiIndexBasis(int degree, int dim);

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  int size() const { return size_; }

  // |s| of the k-th multi-index
  int order(int k) const { return orders_[k]; }
  const std::vector<int>& orders() const { return orders_; }

  // exponent s_j of the k-th multi-index
  int exponent(int k, int j) const { return exponents_[static_cast<std::size_t>(k) * dim_ + j]; }

  // U(x) written into out (resized to size())
  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out;
    eval(x, out);
    return out;
  }

 private:
  int degree_;
  int dim_;
  int size_;
  std::vector<int> exponents_;     // flat, size * dim
  std::vector<int> orders_;        // |s| per index
  std::vector<double> inv_fact_;   // 1 / s! per index
};

// Compactly supported kernels on the unit Euclidean ball, radially
// non-increasing and bounded below near the origin.
class Kernel {
 public:
  enum class Shape { rectangular, epanechnikov };

  Kernel(Shape shape, int dim);

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }

  double operator()(const Eigen::VectorXd& u) const { return from_norm2(u.squaredNorm()); }

  // kernel value from ||u||^2; zero outside the unit ball
  double from_norm2(double norm2) const {
    if (norm2 > 1.0) return 0.0;
    if (shape_ == Shape::rectangular) return inv_volume_;
    return amplitude_ * (1.0 - norm2);
  }

  double max_value() const { return shape_ == Shape::rectangular ? inv_volume_ : amplitude_; }

  const char* name() const {
    return shape_ == Shape::rectangular ? "rectangular" : "epanechnikov";
  }

 private:
  Shape shape_;
  int dim_;
  double inv_volume_;   // 1 / v_d
  double amplitude_;    // (d + 2) / (2 v_d)
};

// Volume of the unit ball in R^d, closed form via the Gamma function.
double unit_ball_volume(int dim);

}  // namespace advreg
