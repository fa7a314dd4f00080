#include "advreg/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "advreg/common.hpp"
#include "advreg/rng.hpp"

namespace advreg {

AttackSpec AttackSpec::identity(int dim) {
  AttackSpec a;
  a.kind = Kind::identity;
  a.dim = dim;
  a.r = 0.0;
  return a;
}

AttackSpec AttackSpec::lp_ball(int dim, double p, double r) {
  if (!(p > 0.0)) throw std::invalid_argument("AttackSpec: p must be positive");
  if (r < 0.0) throw std::invalid_argument("AttackSpec: r must be nonnegative");
  AttackSpec a;
  a.kind = Kind::lp_ball;
  a.dim = dim;
  a.p = p;
  a.r = r;
  return a;
}

AttackSpec AttackSpec::soda(Eigen::VectorXd direction, double r, double c_lo, double c_hi) {
  if (r < 0.0) throw std::invalid_argument("AttackSpec: r must be nonnegative");
  if (c_lo < 0.0 || c_lo > 1.0 || c_hi < 0.0 || c_hi > 1.0)
    throw std::invalid_argument("AttackSpec: reach fractions must lie in [0,1]");
  double norm = direction.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("AttackSpec: direction must be nonzero");
  AttackSpec a;
  a.kind = Kind::soda;
  a.dim = static_cast<int>(direction.size());
  a.direction = direction / norm;
  a.r = r;
  a.c_lo = c_lo;
  a.c_hi = c_hi;
  return a;
}

namespace {

void check_domain(const Eigen::VectorXd& x) {
  for (int j = 0; j < x.size(); ++j)
    if (!(x[j] >= 0.0 && x[j] <= 1.0))
      throw std::invalid_argument("attack: x outside [0,1]^d");
}

double lp_norm(const Eigen::VectorXd& v, double p) {
  if (std::isinf(p)) return v.lpNorm<Eigen::Infinity>();
  double s = 0.0;
  for (int j = 0; j < v.size(); ++j) s += std::pow(std::abs(v[j]), p);
  return std::pow(s, 1.0 / p);
}

// admissible offset range [k_lo, k_hi] of the line {x + k v} inside [0,1]^d
std::pair<double, double> clip_line(const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
  double k_lo = -std::numeric_limits<double>::infinity();
  double k_hi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < x.size(); ++j) {
    if (v[j] == 0.0) continue;
    double a = (0.0 - x[j]) / v[j];
    double b = (1.0 - x[j]) / v[j];
    if (a > b) std::swap(a, b);
    k_lo = std::max(k_lo, a);
    k_hi = std::min(k_hi, b);
  }
  if (!std::isfinite(k_lo)) k_lo = 0.0;
  if (!std::isfinite(k_hi)) k_hi = 0.0;
  return {k_lo, k_hi};
}

void clamp_unit_box(Eigen::VectorXd& z) {
  for (int j = 0; j < z.size(); ++j) z[j] = std::min(1.0, std::max(0.0, z[j]));
}

std::uint64_t hash_point(const Eigen::VectorXd& x, double r) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (int j = 0; j < x.size(); ++j) mix(x[j]);
  mix(r);
  return h;
}

// candidates along a segment {x + k v, k in [k_lo, k_hi]}, always including
// both endpoints and k = 0; cell boundaries crossed by the segment are probed
// on both sides
void segment_candidates(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double k_lo,
                        double k_hi, const SupQuery& query, const GridPartition* partition,
                        std::vector<Eigen::VectorXd>& out) {
  const int m = query.segment_points();
  std::vector<double> offsets;
  offsets.reserve(m + 8);
  if (k_hi <= k_lo) {
    offsets.push_back(k_lo);
  } else if (query.mode == SupQuery::Mode::random_sample) {
    RngStream stream(hash_point(x, k_hi - k_lo));
    for (int i = 0; i < m; ++i) offsets.push_back(stream.uniform(k_lo, k_hi));
    offsets.push_back(k_lo);
    offsets.push_back(k_hi);
  } else {
    for (int i = 0; i < m; ++i)
      offsets.push_back(k_lo + (k_hi - k_lo) * static_cast<double>(i) / (m - 1));
  }
  offsets.push_back(0.0);
  if (partition) {
    std::vector<double> bounds;
    for (int j = 0; j < x.size(); ++j) {
      if (v[j] == 0.0) continue;
      double c_lo = x[j] + k_lo * v[j];
      double c_hi = x[j] + k_hi * v[j];
      if (c_lo > c_hi) std::swap(c_lo, c_hi);
      bounds.clear();
      partition->interior_boundaries(c_lo, c_hi, bounds);
      for (double b : bounds) {
        double k = (b - x[j]) / v[j];
        double nudge = std::max(1e-12, (k_hi - k_lo) * 1e-9);
        for (double cand : {k - nudge, k, k + nudge})
          if (cand >= k_lo && cand <= k_hi) offsets.push_back(cand);
      }
    }
  }
  for (double k : offsets) {
    Eigen::VectorXd z = x + k * v;
    clamp_unit_box(z);
    out.push_back(std::move(z));
  }
}

}  // namespace

std::vector<Eigen::VectorXd> attack_candidates(const Eigen::VectorXd& x,
                                               const AttackSpec& attack, const SupQuery& query,
                                               const GridPartition* partition) {
  check_domain(x);
  const int d = attack.dim;
  if (x.size() != d) throw std::invalid_argument("attack: dimension mismatch");

  std::vector<Eigen::VectorXd> out;
  if (attack.kind == AttackSpec::Kind::identity || attack.r == 0.0) {
    out.push_back(x);
    return out;
  }

  if (attack.kind == AttackSpec::Kind::soda) {
    auto [box_lo, box_hi] = clip_line(x, attack.direction);
    double k_lo = std::max(box_lo, -attack.c_lo * attack.r);
    double k_hi = std::min(box_hi, attack.c_hi * attack.r);
    k_lo = std::min(k_lo, 0.0);   // x itself is always admissible
    k_hi = std::max(k_hi, 0.0);
    segment_candidates(x, attack.direction, k_lo, k_hi, query, partition, out);
    return out;
  }

  // lp ball
  if (d == 1) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Ones(1);
    double k_lo = std::max(-attack.r, -x[0]);
    double k_hi = std::min(attack.r, 1.0 - x[0]);
    segment_candidates(x, e1, k_lo, k_hi, query, partition, out);
    return out;
  }

  const int m = query.box_points_per_axis();
  // the lp radius is r itself; for p > 2 candidates are additionally clipped
  // to the Euclidean ball so the diameter bound stays at r
  const bool euclid_clip = attack.p > 2.0;
  std::vector<std::vector<double>> axes(d);
  for (int j = 0; j < d; ++j) {
    double lo = std::max(0.0, x[j] - attack.r);
    double hi = std::min(1.0, x[j] + attack.r);
    auto& axis = axes[j];
    for (int i = 0; i < m; ++i)
      axis.push_back(lo + (hi - lo) * static_cast<double>(i) / (m - 1));
    axis.push_back(x[j]);
    if (partition) {
      std::vector<double> bounds;
      partition->interior_boundaries(lo, hi, bounds);
      for (double b : bounds) {
        axis.push_back(b);
        double above = std::nextafter(b, 2.0);
        if (above <= hi) axis.push_back(above);
      }
    }
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }

  if (query.mode == SupQuery::Mode::random_sample) {
    // deterministic draws derived from the query point
    RngStream stream(hash_point(x, attack.r));
    Eigen::VectorXd z(d);
    int kept = 0;
    int budget = 64 * std::max(2, query.segment_points());
    while (kept < std::max(2, query.segment_points()) && budget-- > 0) {
      for (int j = 0; j < d; ++j)
        z[j] = x[j] + attack.r * stream.uniform(-1.0, 1.0);
      if (lp_norm(z - x, attack.p) > attack.r) continue;
      if (euclid_clip && (z - x).norm() > attack.r) continue;
      Eigen::VectorXd c = z;
      clamp_unit_box(c);
      out.push_back(std::move(c));
      ++kept;
    }
  } else {
    const double tol = attack.r * (1.0 + 1e-12);
    std::vector<int> idx(d, 0);
    Eigen::VectorXd z(d);
    while (true) {
      for (int j = 0; j < d; ++j) z[j] = axes[j][idx[j]];
      if (lp_norm(z - x, attack.p) <= tol && (!euclid_clip || (z - x).norm() <= tol))
        out.push_back(z);
      int j = d - 1;
      while (j >= 0 && ++idx[j] == static_cast<int>(axes[j].size())) idx[j--] = 0;
      if (j < 0) break;
    }
  }

  // the center and the per-axis extremes are always candidates
  out.push_back(x);
  for (int j = 0; j < d; ++j) {
    for (double sign : {-1.0, 1.0}) {
      Eigen::VectorXd z = x;
      z[j] = x[j] + sign * attack.r;
      clamp_unit_box(z);
      out.push_back(std::move(z));
    }
  }
  return out;
}

std::pair<double, Eigen::VectorXd> sup_over_attack(const RealFn& g, const Eigen::VectorXd& x,
                                                   const AttackSpec& attack,
                                                   const SupQuery& query,
                                                   const GridPartition* partition) {
  if (attack.kind == AttackSpec::Kind::identity) {
    check_domain(x);
    return {g(x), x};
  }
  auto candidates = attack_candidates(x, attack, query, partition);
  double best = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd* arg = &candidates.front();
  for (const auto& z : candidates) {
    double v = g(z);
    if (v > best) {
      best = v;
      arg = &z;
    }
  }
  return {best, *arg};
}

double max_deviation(const RealFn& f, const Eigen::VectorXd& x, const AttackSpec& attack,
                     const SupQuery& query, const GridPartition* partition) {
  if (attack.kind == AttackSpec::Kind::identity) {
    check_domain(x);
    return 0.0;
  }
  auto candidates = attack_candidates(x, attack, query, partition);
  double fx = f(x);
  double dev = 0.0;
  for (const auto& z : candidates) dev = std::max(dev, std::abs(f(z) - fx));
  return dev;
}

namespace {

// midpoint quadrature over [0,1]^d: accumulates body(node)^q and returns the
// normalized q-th root
template <typename Body>
double quadrature_lq(int dim, int quad, double q, Body&& body) {
  if (!(q >= 1.0)) throw std::invalid_argument("attack quadrature: q must be >= 1");
  if (quad < 1) throw std::invalid_argument("attack quadrature: resolution must be positive");
  long long total = 1;
  for (int j = 0; j < dim; ++j) {
    total *= quad;
    if (total > 100'000'000LL) throw ResourceError("attack quadrature: grid too large");
  }
  std::vector<double> terms(static_cast<std::size_t>(total));
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd node(dim);
  for (long long c = 0; c < total; ++c) {
    for (int j = 0; j < dim; ++j) node[j] = (idx[j] + 0.5) / quad;
    terms[static_cast<std::size_t>(c)] = std::pow(body(node), q);
    int j = dim - 1;
    while (j >= 0 && ++idx[j] == quad) idx[j--] = 0;
  }
  double mean = pairwise_sum(terms) / static_cast<double>(total);
  return std::pow(mean, 1.0 / q);
}

}  // namespace

double adversarial_distance(const RealFn& f, const RealFn& g, const AttackSpec& attack,
                            double q, int quad, const SupQuery& query,
                            const GridPartition* partition) {
  return quadrature_lq(attack.dim, quad, q, [&](const Eigen::VectorXd& x) {
    double gx = g(x);
    auto candidates = attack_candidates(x, attack, query, partition);
    double worst = 0.0;
    for (const auto& z : candidates) worst = std::max(worst, std::abs(f(z) - gx));
    return worst;
  });
}

double lq_distance(const RealFn& f, const RealFn& g, double q, int quad, int dim) {
  return quadrature_lq(dim, quad, q,
                       [&](const Eigen::VectorXd& x) { return std::abs(f(x) - g(x)); });
}

double deviation_functional(const RealFn& f, const AttackSpec& attack, double q, int quad,
                            const SupQuery& query, const GridPartition* partition) {
  return 0.5 * quadrature_lq(attack.dim, quad, q, [&](const Eigen::VectorXd& x) {
    auto candidates = attack_candidates(x, attack, query, partition);
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& z : candidates) {
      double v = f(z);
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    return hi - lo;
  });
}

}  // namespace advreg
