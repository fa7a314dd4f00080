#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include "advreg/partition.hpp"

namespace advreg {

using RealFn = std::function<double(const Eigen::VectorXd&)>;

// A perturbation-set model A(x) inside [0,1]^d. Every set contains x and
// stays within Euclidean distance r of it.
struct AttackSpec {
  enum class Kind { identity, lp_ball, soda };

  Kind kind = Kind::identity;
  int dim = 1;
  double r = 0.0;
  double p = 2.0;             // lp_ball exponent in (0, inf]
  Eigen::VectorXd direction;  // soda unit vector
  double c_lo = 1.0;          // soda backward reach fraction in [0, 1]
  double c_hi = 1.0;          // soda forward reach fraction in [0, 1]

  static AttackSpec identity(int dim);
  static AttackSpec lp_ball(int dim, double p, double r);
  static AttackSpec soda(Eigen::VectorXd direction, double r, double c_lo = 1.0,
                         double c_hi = 1.0);

  const char* name() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::lp_ball: return "lp_ball";
      default: return "soda";
    }
  }
};

// How the inner maximization discretizes an attack set. Candidate sets always
// contain x itself and the extreme admissible points along each probed
// direction; refining resolution to 2m-1 yields a superset of candidates.
struct SupQuery {
  enum class Mode { grid_line, grid_box, random_sample };

  Mode mode = Mode::grid_line;   // grid modes follow the attack geometry
  int resolution = 0;            // 0 = default: 65 on segments, 17 per axis on boxes

  int segment_points() const { return resolution > 0 ? std::max(2, resolution) : 65; }
  int box_points_per_axis() const { return resolution > 0 ? std::max(2, resolution) : 17; }
};

// Candidate perturbed inputs for x under the attack. When a partition is
// given and the attack set is a segment, candidates are refined at every cell
// boundary the segment crosses (both sides), so piecewise fits are probed in
// each touched cell.
std::vector<Eigen::VectorXd> attack_candidates(const Eigen::VectorXd& x,
                                               const AttackSpec& attack, const SupQuery& query,
                                               const GridPartition* partition = nullptr);

// max over the candidate set of g, with its argmax
std::pair<double, Eigen::VectorXd> sup_over_attack(const RealFn& g, const Eigen::VectorXd& x,
                                                   const AttackSpec& attack,
                                                   const SupQuery& query = {},
                                                   const GridPartition* partition = nullptr);

// sup over A(x) of |f(x') - f(x)|
double max_deviation(const RealFn& f, const Eigen::VectorXd& x, const AttackSpec& attack,
                     const SupQuery& query = {}, const GridPartition* partition = nullptr);

// [ integral of sup_{x' in A(x)} |f(x') - g(x)|^q dx ]^{1/q} by midpoint
// quadrature on a quad^d grid
double adversarial_distance(const RealFn& f, const RealFn& g, const AttackSpec& attack,
                            double q, int quad, const SupQuery& query = {},
                            const GridPartition* partition = nullptr);

// plain L_q distance on the same quadrature grid, no attack machinery
double lq_distance(const RealFn& f, const RealFn& g, double q, int quad, int dim);

// (1/2) [ integral of (sup_{A(x)} f - inf_{A(x)} f)^q dx ]^{1/q}
double deviation_functional(const RealFn& f, const AttackSpec& attack, double q, int quad,
                            const SupQuery& query = {},
                            const GridPartition* partition = nullptr);

}  // namespace advreg
