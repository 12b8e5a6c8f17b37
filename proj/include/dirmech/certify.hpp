#pragma once

// Box-bound certification of f(r1, r2, g1, g2) <= c for the online rounding
// analysis. Every quantity in f is bracketed on a box through monotone
// closed forms; boxes that fail are bisected along the widest axis.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dirmech/error.hpp"
#include "dirmech/online.hpp"
#include "dirmech/parallel.hpp"
#include "dirmech/psi.hpp"
#include "dirmech/specialfn.hpp"

namespace dirmech {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// Axes in the order r1, r2, g1, g2.
struct Box4 {
  std::array<Interval, 4> axis;

  const Interval& r1() const { return axis[0]; }
  const Interval& r2() const { return axis[1]; }
  const Interval& g1() const { return axis[2]; }
  const Interval& g2() const { return axis[3]; }

  /// May contain a point with r2 + g2 <= r1 and r1 + g1 <= 1.
  bool feasible() const { return r2().lo + g2().lo <= r1().hi && r1().lo + g1().lo <= 1.0; }

  void validate() const {
    for (const auto& a : axis) {
      detail::require_domain(a.lo <= a.hi, "Box4: lower end exceeds upper end");
      detail::require_domain(a.lo >= 0.0 && a.hi <= 1.0, "Box4: intervals must lie in [0, 1]");
    }
  }

  std::size_t widest() const {
    std::size_t k = 0;
    for (std::size_t i = 1; i < 4; ++i) {
      if (axis[i].width() > axis[k].width()) k = i;
    }
    return k;
  }

  std::pair<Box4, Box4> split(std::size_t k) const {
    Box4 a = *this, b = *this;
    const double m = axis[k].mid();
    a.axis[k].hi = m;
    b.axis[k].lo = m;
    return {a, b};
  }
};

inline constexpr double kCertMargin = 1e-9;
inline constexpr int kCertOrder = 3;

/// f at a point, with Psi replaced by its (k1, k2) upper bound:
///   (Psi_up x1 x2 - beta (y1 - F(r1) g1) y2 / Q(0, r1)) / (F(r1) g1 y2).
template <class Real = double>
Real pointwise_f(const Real& r1, const Real& r2, const Real& g1, const Real& g2, const OnlineParams& p = {},
                 int k1 = kCertOrder, int k2 = kCertOrder) {
  p.validate();
  detail::require_domain(r1 > 0 && g1 > 0 && g2 > 0, "pointwise_f: need r1, g1, g2 > 0");
  const Real beta(p.beta), alpha(p.alpha);
  const Real y1 = cumulative_Q<Real>(r1, g1, p), y2 = cumulative_Q<Real>(r2, g2, p);
  const Real F1 = attenuation_F<Real>(r1, p), F2 = attenuation_F<Real>(r2, p);
  const Real x1 = (1 - beta) * F1 * g1 + beta * y1;
  const Real x2 = (1 - beta) * F2 * g2 + beta * y2;
  const Real psi = psi_upper_bound<Real>(BasicPsiQuery<Real>{x1, x2, alpha * y1, alpha * y2}, k1, k2);
  const Real num = psi * x1 * x2 - beta * (y1 - F1 * g1) * y2 / cumulative_Q<Real>(Real(0), r1, p);
  return num / (F1 * g1 * y2);
}

/// Interval images of y, rho and x for one side of a box.
template <class Real>
struct SideImage {
  Real y_min, y_max, rho_min, rho_max, x_max;
};

/// y_min = Q(r_min, g_min); y_max maximizes Q over the box part with r + g <= 1,
/// attained at r* = clamp(1 - g_max, r_min, r_max), g = min(g_max, 1 - r*).
template <class Real>
SideImage<Real> side_image(const Interval& r, const Interval& g, const OnlineParams& p) {
  SideImage<Real> s;
  s.y_min = detail::cumulative_Q_unchecked<Real>(Real(r.lo), Real(g.lo), p);
  const double rs = std::clamp(1.0 - g.hi, r.lo, r.hi);
  const double gs = std::max(0.0, std::min(g.hi, 1.0 - rs));
  s.y_max = detail::cumulative_Q_unchecked<Real>(Real(rs), Real(gs), p);
  s.rho_min = Real(p.alpha) * s.y_min;
  s.rho_max = Real(p.alpha) * s.y_max;
  // x <= g <= 1 pointwise, so the cap is free.
  const Real fg = attenuation_F<Real>(Real(std::min(r.hi, 1.0)), p) * Real(g.hi);
  const Real xm = (1 - Real(p.beta)) * fg + Real(p.beta) * s.y_max;
  s.x_max = xm < Real(1) ? xm : Real(1);
  return s;
}

/// Upper bound on f over a feasible box, plus kCertMargin.
/// Throws DomainError when F(r1_min) g1_min y2_min = 0 or r1_max = 0; such
/// boxes belong to the small-g regime.
template <class Real = double>
Real box_upper_bound(const Box4& box, const OnlineParams& p = {}, int k1 = kCertOrder, int k2 = kCertOrder) {
  using std::exp;
  using std::log;
  box.validate();
  p.validate();
  detail::require_domain(box.feasible(), "box_upper_bound: box is infeasible");
  detail::require_domain(k1 >= 0 && k2 >= 0 && k1 <= kCertOrder && k2 <= kCertOrder,
                         "box_upper_bound: orders must lie in [0, 3]");
  const SideImage<Real> s1 = side_image<Real>(box.r1(), box.g1(), p);
  const SideImage<Real> s2 = side_image<Real>(box.r2(), box.g2(), p);
  const Real F1min = attenuation_F<Real>(Real(box.r1().lo), p);
  const Real den = F1min * Real(box.g1().lo) * s2.y_min;
  if (!(den > 0) || !(box.r1().hi > 0)) {
    throw DomainError("box_upper_bound: degenerate denominator; use small_g_bound");
  }
  detail::require_domain(s1.rho_max <= 1 && s2.rho_max <= 1, "box_upper_bound: rho image leaves [0, 1]");

  // kappa+ = theta(rho_min, x_max) * [rho/(jx+rho) binom(rho/x+j, rho) G_j](rho_max, x_max)
  auto kappa_plus = [&](const SideImage<Real>& s, int k) {
    std::vector<Real> kap(static_cast<std::size_t>(k), Real(0));
    const Real q = Real(1) / s.x_max - 1;
    if (q == 0) {
      if (k > 0) kap[0] = 1;
      return kap;
    }
    if (s.rho_max == 0) {
      if (k > 0) kap[0] = 1;
      return kap;
    }
    const Real lth = log_theta<Real>(s.x_max, s.rho_min);
    for (int j = 0; j < k; ++j) {
      kap[static_cast<std::size_t>(j)] =
          detail::kappa_from_parts<Real>(s.x_max, s.rho_max, j, lth, g_coefficient<Real>(s.rho_max, q, j));
    }
    return kap;
  };
  const std::vector<Real> kap1 = kappa_plus(s1, k1);
  const std::vector<Real> kap2 = kappa_plus(s2, k2);
  const Real q1 = Real(1) / s1.x_max - 1, q2 = Real(1) / s2.x_max - 1;
  auto a_minus = [&](int j1, int j2) { return alpha_from_mass<Real>(s1.rho_max * q1, s2.rho_max * q2, j1, j2); };
  auto a_plus = [&](int j1, int j2) { return alpha_from_mass<Real>(s1.rho_min * q1, s2.rho_min * q2, j1, j2); };

  Real A1 = 0, A2 = 0, A3 = 0;
  for (int j1 = 0; j1 < k1; ++j1) {
    for (int j2 = 0; j2 < k2; ++j2) {
      Real c = a_plus(j1, j2) - a_minus(j1, k2) - a_minus(k1, j2) + a_plus(k1, k2);
      if (c < 0) c = 0;
      A1 += c * kap1[static_cast<std::size_t>(j1)] * kap2[static_cast<std::size_t>(j2)];
    }
  }
  for (int j1 = 0; j1 < k1; ++j1) A2 += (a_plus(j1, k2) - a_minus(k1, k2)) * kap1[static_cast<std::size_t>(j1)];
  for (int j2 = 0; j2 < k2; ++j2) A3 += (a_plus(k1, j2) - a_minus(k1, k2)) * kap2[static_cast<std::size_t>(j2)];
  const Real A4 = a_plus(k1, k2);

  const Real beta(p.beta);
  const Real sub = beta * (s1.y_min - F1min * Real(box.g1().lo)) * s2.y_min /
                   detail::cumulative_Q_unchecked<Real>(Real(0), Real(box.r1().hi), p);
  return ((A1 + A2 + A3 + A4) * s1.x_max * s2.x_max - sub) / den + Real(kCertMargin);
}

/// Both factors of the small-g certificate and their product.
struct SmallGBound {
  double ratio_factor = 0.0;     // sup x1 / (F(r1) g1)
  double binomial_factor = 0.0;  // 1 / binom(2 alpha (1 - g), alpha (1 - g))
  double product() const { return ratio_factor * binomial_factor; }
};

/// For g1, g2 <= g_max: x1/(F(r1) g1) = (1 - beta) + beta Q(r1, g1)/(F(r1) g1),
/// which grows with r1 and g1 by convexity of F, so its supremum sits at
/// g = g_max, r1 = 1 - g_max. The x2/y2 factor is at most 1.
inline SmallGBound small_g_bound(double g_max, const OnlineParams& p = {}) {
  p.validate();
  detail::require_domain(g_max > 0.0 && g_max <= 0.003, "small_g_bound: g_max must lie in (0, 0.003]");
  SmallGBound b;
  const double r = 1.0 - g_max;
  b.ratio_factor = (1.0 - p.beta) + p.beta * cumulative_Q(r, g_max, p) / (g_max * attenuation_F(r, p));
  const double a = p.alpha * (1.0 - g_max);
  b.binomial_factor = 1.0 / gen_binomial(2.0 * a, a);
  return b;
}

/// Region of the search space; infeasible parts are skipped.
struct CertRegion {
  Interval r1{0.0, 1.0};
  Interval r2{0.0, 1.0};
  Interval g1{0.3, 1.0};
  Interval g2{0.3, 1.0};
};

struct CertReport {
  CertRegion region;
  double epsilon = 0.0;
  double c = 0.0;
  int max_depth = 0;
  std::size_t boxes_checked = 0;  // feasible boxes of the initial grid
  std::size_t boxes_passed = 0;
  std::size_t leaves = 0;         // boxes evaluated after bisection
  double worst_bound = -std::numeric_limits<double>::infinity();
  std::optional<Box4> worst_box;
  std::optional<Box4> witness;    // first failing leaf in grid order
  double runtime_seconds = 0.0;
  bool pass = true;
};

namespace detail {

struct BoxOutcome {
  bool pass = true;
  std::size_t leaves = 0;
  double worst = -std::numeric_limits<double>::infinity();
  Box4 worst_box;
  std::optional<Box4> witness;
};

// `splits` counts remaining widest-axis bisections; four of them halve every side once.
inline void certify_box(const Box4& box, const OnlineParams& p, double c, int splits, BoxOutcome& out) {
  double b;
  try {
    b = box_upper_bound<double>(box, p);
  } catch (const DomainError&) {
    b = std::numeric_limits<double>::infinity();
  }
  if (b <= c || splits == 0) {
    ++out.leaves;
    if (b > out.worst) {
      out.worst = b;
      out.worst_box = box;
    }
    if (!(b <= c)) {
      out.pass = false;
      if (!out.witness) out.witness = box;
    }
    return;
  }
  const auto [lo, hi] = box.split(box.widest());
  if (lo.feasible()) certify_box(lo, p, c, splits - 1, out);
  if (hi.feasible()) certify_box(hi, p, c, splits - 1, out);
}

inline std::vector<Interval> grid_axis(const Interval& a, double eps) {
  std::vector<Interval> out;
  const auto n = std::max<long long>(1, static_cast<long long>(std::ceil((a.hi - a.lo) / eps - 1e-9)));
  for (long long i = 0; i < n; ++i) {
    out.push_back({a.lo + (a.hi - a.lo) * static_cast<double>(i) / static_cast<double>(n),
                   i + 1 == n ? a.hi : a.lo + (a.hi - a.lo) * static_cast<double>(i + 1) / static_cast<double>(n)});
  }
  return out;
}

}  // namespace detail

/// The feasible boxes of the initial grid, in lexicographic (r1, r2, g1, g2) order.
inline std::vector<Box4> certification_grid(const CertRegion& region, double epsilon) {
  std::vector<Box4> boxes;
  if (region.r1.lo > region.r1.hi || region.r2.lo > region.r2.hi || region.g1.lo > region.g1.hi ||
      region.g2.lo > region.g2.hi) {
    return boxes;
  }
  for (const auto& a : detail::grid_axis(region.r1, epsilon)) {
    for (const auto& b : detail::grid_axis(region.r2, epsilon)) {
      for (const auto& g : detail::grid_axis(region.g1, epsilon)) {
        for (const auto& h : detail::grid_axis(region.g2, epsilon)) {
          Box4 box{{a, b, g, h}};
          if (box.feasible()) boxes.push_back(box);
        }
      }
    }
  }
  return boxes;
}

/// Depth d lets a grid box be refined down to side epsilon / 2^d, one level
/// being four successive bisections of the widest axis.
inline CertReport certify_region(const CertRegion& region, double epsilon, double c, const OnlineParams& p = {},
                                 int depth = 6, unsigned threads = 1) {
  detail::require_domain(epsilon > 0.0, "certify_region: epsilon must be positive");
  detail::require_domain(depth >= 0, "certify_region: depth must be non-negative");
  for (const Interval* a : {&region.r1, &region.r2, &region.g1, &region.g2}) {
    detail::require_domain(a->lo >= 0.0 && a->hi <= 1.0, "certify_region: region must lie in [0, 1]^4");
  }
  detail::require_domain(region.g1.lo >= 0.003 && region.g2.lo >= 0.003,
                         "certify_region: g below 0.003 is covered by small_g_bound");
  p.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Box4> boxes = certification_grid(region, epsilon);
  std::vector<detail::BoxOutcome> outcomes(boxes.size());
  parallel_for(boxes.size(), threads, [&](std::size_t i) { detail::certify_box(boxes[i], p, c, 4 * depth, outcomes[i]); });

  CertReport rep;
  rep.region = region;
  rep.epsilon = epsilon;
  rep.c = c;
  rep.max_depth = depth;
  rep.boxes_checked = boxes.size();
  for (const auto& o : outcomes) {
    rep.leaves += o.leaves;
    if (o.pass) ++rep.boxes_passed;
    if (o.worst > rep.worst_bound) {
      rep.worst_bound = o.worst;
      rep.worst_box = o.worst_box;
    }
    if (!o.pass && !rep.witness) rep.witness = o.witness;
  }
  rep.pass = rep.boxes_passed == rep.boxes_checked;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

using Float50 = boost::multiprecision::cpp_bin_float_50;

struct SpotCheck {
  std::size_t boxes = 0;
  double max_abs_diff = 0.0;  // |double bound - 50-digit bound| without the margin
  bool covered = true;        // double bound (with margin) >= 50-digit bound everywhere
};

/// Re-evaluates up to 100 boxes in 50-digit arithmetic.
inline SpotCheck spot_check(const std::vector<Box4>& boxes, const OnlineParams& p = {}) {
  detail::require_domain(boxes.size() <= 100, "spot_check: at most 100 boxes");
  SpotCheck sc;
  for (const auto& b : boxes) {
    const double d = box_upper_bound<double>(b, p);
    const Float50 h = box_upper_bound<Float50>(b, p) - Float50(kCertMargin);
    const double hd = h.convert_to<double>();
    sc.max_abs_diff = std::max(sc.max_abs_diff, std::abs(d - kCertMargin - hd));
    if (Float50(d) < h) sc.covered = false;
    ++sc.boxes;
  }
  return sc;
}

}  // namespace dirmech
