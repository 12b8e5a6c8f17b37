#pragma once

// Special-function kernels: log-gamma, Beta, generalized binomial and the
// (regularized) incomplete Beta function. Everything is evaluated in log
// space so that arguments such as rho / x + j with tiny x do not overflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "dirmech/error.hpp"

namespace dirmech {

/// Convergence control for the iterative kernels.
struct RealTolerance {
  double rel_tol = 1e-12;
  int max_iter = 500;

  void validate() const {
    detail::require_domain(rel_tol > 0.0, "RealTolerance: rel_tol must be positive");
    detail::require_domain(max_iter >= 1, "RealTolerance: max_iter must be at least 1");
  }
};

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

// zeta(k) - 1 for k = 2, 3, ..., 60.
inline constexpr std::array<double, 59> kZetaMinusOne = {
    0.64493406684822644,     0.20205690315959429,     0.082323233711138192,    0.036927755143369926,
    0.01734306198444914,     0.0083492773819228268,   0.0040773561979443394,   0.0020083928260822144,
    0.00099457512781808534,  0.00049418860411946456,  0.0002460865533080483,   0.00012271334757848915,
    6.1248135058704829e-5,   3.0588236307020494e-5,   1.5282259408651872e-5,   7.6371976378997623e-6,
    3.8172932649998399e-6,   1.9082127165539389e-6,   9.5396203387279611e-7,   4.7693298678780646e-7,
    2.3845050272773299e-7,   1.1921992596531107e-7,   5.960818905125948e-8,    2.980350351465228e-8,
    1.4901554828365041e-8,   7.4507117898354295e-9,   3.7253340247884571e-9,   1.862659723513049e-9,
    9.3132743241966818e-10,  4.6566290650337841e-10,  2.3283118336765055e-10,  1.164155017270052e-10,
    5.8207720879027009e-11,  2.9103850444970997e-11,  1.4551921891041984e-11,  7.275959835057481e-12,
    3.6379795473786512e-12,  1.8189896503070659e-12,  9.0949478402638893e-13,  4.547473783042154e-13,
    2.2737368458246525e-13,  1.1368684076802278e-13,  5.6843419876275856e-14,  2.8421709768893018e-14,
    1.4210854828031607e-14,  7.1054273952108527e-15,  3.5527136913371137e-15,  1.7763568435791204e-15,
    8.8817842109308162e-16,  4.4408921031438141e-16,  2.2204460507980424e-16,  1.1102230251410657e-16,
    5.5511151248454798e-17,  2.7755575621361171e-17,  1.3877787809725275e-17,  6.9388939045442336e-18,
    3.469446952166015e-18,   1.7347234760476074e-18,  8.6736173801206937e-19,
};

// ln Gamma(1 + eps) for |eps| <= 0.5.
//   ln Gamma(1+e) = -gamma e + sum_{k>=2} (-1)^k zeta(k) e^k / k
// The zeta(k) = 1 part sums to e - log1p(e); what is left converges like (e/2)^k.
inline double log_gamma_1p(double eps) {
  double tail = 0.0;
  double pw = eps;
  for (std::size_t i = 0; i < kZetaMinusOne.size(); ++i) {
    const int k = static_cast<int>(i) + 2;
    pw *= -eps;  // (-1)^k eps^k up to the sign convention below
    const double term = kZetaMinusOne[i] * pw / k;
    tail += term;
    if (std::abs(term) < 1e-18 * std::abs(tail) + 1e-300) break;
  }
  // pw carries (-1)^(k-1) eps^k; flip once.
  return -kEulerGamma * eps + (eps - std::log1p(eps)) - tail;
}

// Stirling series, valid to double precision for x >= 15.
inline double log_gamma_stirling(double x) {
  static constexpr std::array<double, 8> kBernoulliTerms = {
      1.0 / 12.0,           -1.0 / 360.0,         1.0 / 1260.0,         -1.0 / 1680.0,
      1.0 / 1188.0,         -691.0 / 360360.0,    1.0 / 156.0,          -3617.0 / 122400.0,
  };
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double pw = inv;
  for (double c : kBernoulliTerms) {
    series += c * pw;
    pw *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + series;
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  if (std::isinf(x)) return x;
  if (x < 0.5) return detail::log_gamma_1p(x) - std::log(x);
  if (x < 1.5) return detail::log_gamma_1p(x - 1.0);
  if (x < 2.5) return std::log1p(x - 2.0) + detail::log_gamma_1p(x - 2.0);
  if (x < 8.0) {
    // Recur down into [1.5, 2.5); every factor exceeds one so nothing cancels.
    double prod = 1.0;
    double y = x;
    while (y >= 2.5) {
      y -= 1.0;
      prod *= y;
    }
    return std::log(prod) + std::log1p(y - 2.0) + detail::log_gamma_1p(y - 2.0);
  }
  if (x < 15.0) {
    double prod = 1.0;
    double y = x;
    while (y < 15.0) {
      prod *= y;
      y += 1.0;
    }
    return detail::log_gamma_stirling(y) - std::log(prod);
  }
  return detail::log_gamma_stirling(x);
}

/// ln B(a, b).
inline double log_beta(double a, double b) {
  detail::require_domain(a > 0.0 && b > 0.0, "log_beta: arguments must be positive");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b).
inline double beta(double a, double b) {
  detail::require_domain(a > 0.0 && b > 0.0, "beta: arguments must be positive");
  return std::exp(log_beta(a, b));
}

/// ln of the generalized binomial Gamma(x+1) / (Gamma(y+1) Gamma(x-y+1)).
inline double log_gen_binomial(double x, double y) {
  detail::require_domain(x + 1.0 > 0.0 && y + 1.0 > 0.0 && x - y + 1.0 > 0.0,
                         "gen_binomial: every Gamma argument must be positive");
  return log_gamma(x + 1.0) - log_gamma(y + 1.0) - log_gamma(x - y + 1.0);
}

/// Generalized binomial coefficient binom(x, y).
inline double gen_binomial(double x, double y) { return std::exp(log_gen_binomial(x, y)); }

/// ln(Gamma(1 + rho) Gamma(1 - rho)) = ln(pi rho / sin(pi rho)), rho in [0, 1).
inline double log_reflection_product(double rho) {
  detail::require_domain(rho >= 0.0 && rho < 1.0, "log_reflection_product: rho must lie in [0, 1)");
  const double u = std::numbers::pi * rho;
  if (u < 0.5) {
    // sin(u)/u - 1 by its alternating series; direct evaluation would cancel.
    const double u2 = u * u;
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 12; ++k) {
      term *= -u2 / ((2.0 * k) * (2.0 * k + 1.0));
      sum += term;
    }
    return -std::log1p(sum);
  }
  return std::log(u / std::sin(u));
}

namespace detail {

// sum_k (1-b)_k / k! * z^k / (a + k): the power series of z^{-a} B(z; a, b).
inline double incomplete_beta_series(double z, double a, double b, const RealTolerance& tol) {
  double coeff = 1.0;  // (1-b)_k / k! * z^k
  double sum = 1.0 / a;
  for (int k = 0; k < tol.max_iter; ++k) {
    coeff *= (k + 1.0 - b) / (k + 1.0) * z;
    const double term = coeff / (a + k + 1.0);
    sum += term;
    if (std::abs(term) <= tol.rel_tol * std::abs(sum) * (1.0 - z) || coeff == 0.0) return sum;
  }
  throw NumericError("incomplete_beta: power series did not converge", sum, tol.max_iter);
}

// Modified Lentz evaluation of the continued fraction h with
//   B(x; a, b) = x^a (1-x)^b / a * h.
inline double incomplete_beta_cf(double x, double a, double b, const RealTolerance& tol) {
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= tol.max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= tol.rel_tol) return h;
  }
  throw NumericError("incomplete_beta: continued fraction did not converge", h, tol.max_iter);
}

}  // namespace detail

/// Regularized incomplete Beta I(z; a, b) with a, b > 0 and ln B(a, b)
/// cached, for repeated evaluation at fixed shape parameters.
///
/// Below the crossover z < (a+1)/(a+b+2) the power series in z is used; above
/// it, the complement I(1-z; b, a) is evaluated by continued fraction. The
/// log-space entry point takes ln z and ln(1-z) separately so that callers
/// holding Dirichlet coordinates in log form keep full relative accuracy in
/// both tails.
class RegularizedBeta {
 public:
  RegularizedBeta(double a, double b, RealTolerance tol = {})
      : a_(a), b_(b), tol_(tol) {
    detail::require_domain(a > 0.0 && b > 0.0, "reg_incomplete_beta: shapes must be positive");
    tol_.validate();
    log_beta_ = log_beta(a, b);
    crossover_ = (a + 1.0) / (a + b + 2.0);
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double log_normalizer() const noexcept { return log_beta_; }
  double crossover() const noexcept { return crossover_; }

  double operator()(double z) const {
    detail::require_domain(z >= 0.0 && z <= 1.0, "reg_incomplete_beta: z must lie in [0, 1]");
    if (z == 0.0) return 0.0;
    if (z == 1.0) return 1.0;
    return std::exp(log_cdf(std::log(z), std::log1p(-z)));
  }

  /// ln I(z) given ln z and ln(1 - z).
  double log_cdf(double log_z, double log_1mz) const {
    if (log_z == -std::numeric_limits<double>::infinity()) return log_z;
    if (log_1mz == -std::numeric_limits<double>::infinity()) return 0.0;
    const double z = std::exp(log_z);
    if (z < crossover_) {
      const double s = detail::incomplete_beta_series(z, a_, b_, tol_);
      return std::min(0.0, a_ * log_z + std::log(s) - log_beta_);
    }
    return std::log1p(-upper_tail(log_z, log_1mz));
  }

  /// 1 - I(z) given ln z and ln(1 - z).
  double upper_tail(double log_z, double log_1mz) const {
    if (log_1mz == -std::numeric_limits<double>::infinity()) return 0.0;
    if (log_z == -std::numeric_limits<double>::infinity()) return 1.0;
    const double w = -std::expm1(log_z);  // 1 - z
    const double w_exact = std::exp(log_1mz);
    const double one_minus_z = w_exact > 0.0 ? w_exact : w;
    // Same test as log_cdf, so the two never hand the point back and forth.
    if (!(std::exp(log_z) < crossover_)) {
      const double h = detail::incomplete_beta_cf(one_minus_z, b_, a_, tol_);
      return std::min(1.0, std::exp(b_ * log_1mz + a_ * log_z - std::log(b_) - log_beta_) * h);
    }
    return -std::expm1(log_cdf(log_z, log_1mz));
  }

 private:
  double a_;
  double b_;
  RealTolerance tol_;
  double log_beta_ = 0.0;
  double crossover_ = 0.0;
};

/// Incomplete Beta B(z; a, b) = int_0^z t^{a-1} (1-t)^{b-1} dt.
///
/// b may be zero or negative as long as z < 1; that case is summed by the
/// power series alone, which converges for every z < 1 but slowly near 1.
inline double incomplete_beta(double z, double a, double b, const RealTolerance& tol = {}) {
  tol.validate();
  detail::require_domain(z >= 0.0 && z <= 1.0, "incomplete_beta: z must lie in [0, 1]");
  detail::require_domain(a > 0.0, "incomplete_beta: a must be positive");
  if (z == 0.0) return 0.0;
  if (b <= 0.0) {
    detail::require_domain(z < 1.0, "incomplete_beta: b <= 0 requires z < 1");
    try {
      return std::exp(a * std::log(z)) * detail::incomplete_beta_series(z, a, b, tol);
    } catch (const NumericError& e) {
      throw NumericError(e.what(), std::exp(a * std::log(z)) * e.partial_value(), e.iterations());
    }
  }
  if (z == 1.0) return beta(a, b);
  const RegularizedBeta reg(a, b, tol);
  const double log_z = std::log(z);
  const double log_1mz = std::log1p(-z);
  if (z < reg.crossover()) {
    return std::exp(a * log_z) * detail::incomplete_beta_series(z, a, b, tol);
  }
  // Symmetry: B(z; a, b) = B(a, b) - B(1-z; b, a).
  return std::exp(reg.log_normalizer()) * (1.0 - reg.upper_tail(log_z, log_1mz));
}

/// Regularized incomplete Beta I(z; a, b) = B(z; a, b) / B(a, b).
///
/// The degenerate shapes are the distributional limits: I(z; 0, b) = 1 for
/// z > 0 (point mass at 0) and I(z; a, 0) = 0 for z < 1 (point mass at 1).
inline double reg_incomplete_beta(double z, double a, double b, const RealTolerance& tol = {}) {
  detail::require_domain(z >= 0.0 && z <= 1.0, "reg_incomplete_beta: z must lie in [0, 1]");
  detail::require_domain(a >= 0.0 && b >= 0.0 && a + b > 0.0,
                         "reg_incomplete_beta: shapes must be non-negative and not both zero");
  if (a == 0.0) return z > 0.0 ? 1.0 : 0.0;
  if (b == 0.0) return z < 1.0 ? 0.0 : 1.0;
  return RegularizedBeta(a, b, tol)(z);
}

}  // namespace dirmech
