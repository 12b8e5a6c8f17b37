#pragma once

// Series machinery for the copula correlation function
//   Psi(x1, x2; rho1, rho2) = E[A1^{q1} A2^{q2}] / (x1 x2),  q_i = 1/x_i - 1.
//
// With f_rho(z) = sum_i a_i z^i, a_i = rho/(rho+i) binom(rho+i-1, i), the
// coefficients G_j(rho, q) = [z^j] f_rho(z)^q, and
//   Psi = sum_{j1, j2} alpha_{j1 j2} kappa_{1 j1} kappa_{2 j2}
// with every term non-negative and sum_j kappa_{i j} = 1.
//
// All routines are templates over the scalar type so the same code runs in
// double and in boost::multiprecision for spot checks.

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dirmech/error.hpp"
#include "dirmech/specialfn.hpp"

namespace dirmech {

namespace detail {

template <class Real>
Real lgamma_generic(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    return log_gamma(x);
  } else {
    if (!(x > 0)) throw DomainError("log_gamma: argument must be positive");
    return boost::math::lgamma(x);
  }
}

template <class Real>
Real log_binomial_generic(const Real& x, const Real& y) {
  return lgamma_generic<Real>(x + 1) - lgamma_generic<Real>(y + 1) - lgamma_generic<Real>(x - y + 1);
}

// ln(Gamma(1 + rho) Gamma(1 - rho)).
template <class Real>
Real log_reflection_generic(const Real& rho) {
  if constexpr (std::is_same_v<Real, double>) {
    return log_reflection_product(rho);
  } else {
    using std::log;
    using std::sin;
    if (rho == 0) return Real(0);
    const Real u = boost::math::constants::pi<Real>() * rho;
    return log(u / sin(u));
  }
}

}  // namespace detail

template <class Real>
struct BasicPsiQuery {
  Real x1;
  Real x2;
  Real rho1;
  Real rho2;

  Real q1() const { return Real(1) / x1 - 1; }
  Real q2() const { return Real(1) / x2 - 1; }

  void validate() const {
    detail::require_domain(x1 > 0 && x1 <= 1 && x2 > 0 && x2 <= 1, "PsiQuery: x must lie in (0, 1]");
    detail::require_domain(rho1 >= 0 && rho2 >= 0, "PsiQuery: rho must be non-negative");
    detail::require_domain(rho1 + rho2 <= 1 + 1e-12, "PsiQuery: rho1 + rho2 must not exceed 1");
  }

  /// Psi = 1 exactly: an exponent vanishes or a component is independent.
  bool trivial() const { return x1 == 1 || x2 == 1 || rho1 == 0 || rho2 == 0; }
};

using PsiQuery = BasicPsiQuery<double>;

/// Multiplicity vectors (k_1, ..., k_j) with sum_i i k_i = j, ordered by
/// increasing k_j, then k_{j-1}, and so on. j = 0 gives one empty tuple.
inline std::vector<std::vector<int>> faa_di_bruno_partitions(int j) {
  detail::require_domain(j >= 0, "faa_di_bruno_partitions: j must be non-negative");
  std::vector<std::vector<int>> out;
  std::vector<int> k(static_cast<std::size_t>(j), 0);
  // Fill part sizes from largest to smallest.
  auto rec = [&](auto&& self, int part, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(k);
      return;
    }
    if (part == 0) return;
    for (int m = 0; m <= remaining / part; ++m) {
      k[part - 1] = m;
      self(self, part - 1, remaining - m * part);
    }
    k[part - 1] = 0;
  };
  rec(rec, j, j);
  return out;
}

inline constexpr int kMaxMemoizedOrder = 12;

namespace detail {

inline const std::vector<std::vector<int>>& memoized_partitions(int j) {
  static const std::vector<std::vector<std::vector<int>>> table = [] {
    std::vector<std::vector<std::vector<int>>> t;
    for (int i = 0; i <= kMaxMemoizedOrder; ++i) t.push_back(faa_di_bruno_partitions(i));
    return t;
  }();
  return table.at(static_cast<std::size_t>(j));
}

}  // namespace detail

/// a_0..a_n of f_rho: a_0 = 1, a_i = rho/(rho+i) binom(rho+i-1, i).
template <class Real = double>
std::vector<Real> beta_series_coefficients(const Real& rho, int n) {
  std::vector<Real> a(static_cast<std::size_t>(n) + 1);
  a[0] = 1;
  Real b = 1;  // binom(rho+i-1, i) = prod_{m<i} (rho+m)/(m+1)
  for (int i = 1; i <= n; ++i) {
    b *= (rho + (i - 1)) / Real(i);
    a[static_cast<std::size_t>(i)] = rho / (rho + i) * b;
  }
  return a;
}

/// Closed form of a_i a_{i-2} / a_{i-1}^2 for i >= 2.
template <class Real = double>
Real beta_series_log_convexity_ratio(const Real& rho, int i) {
  const Real r = rho;
  const Real num = Real(i - 1) * (i + r - 1) * (i + r - 1) * (i + r - 1);
  const Real den = Real(i) * (i + r - 2) * (i + r - 2) * (i + r);
  return num / den;
}

/// G_j(rho, q) by the Faa di Bruno sum
///   sum_k (q)_K / prod k_i! * prod a_i^{k_i},  K = sum k_i,
/// where (q)_K is the falling factorial.
template <class Real = double>
Real g_coefficient(const Real& rho, const Real& q, int j) {
  detail::require_domain(j >= 0, "g_coefficient: j must be non-negative");
  detail::require_domain(rho >= 0 && rho <= 1 && q >= 0, "g_coefficient: need rho in [0, 1] and q >= 0");
  if (j == 0) return Real(1);
  const std::vector<Real> a = beta_series_coefficients<Real>(rho, j);
  std::vector<std::vector<int>> fresh;
  const auto& parts = j <= kMaxMemoizedOrder ? detail::memoized_partitions(j) : (fresh = faa_di_bruno_partitions(j));
  Real sum = 0;
  for (const auto& k : parts) {
    Real term = 1;
    int big_k = 0;
    for (int i = 1; i <= j; ++i) {
      const int ki = k[static_cast<std::size_t>(i - 1)];
      for (int m = 1; m <= ki; ++m) term *= a[static_cast<std::size_t>(i)] / Real(m);
      big_k += ki;
    }
    for (int m = 0; m < big_k; ++m) term *= q - m;
    sum += term;
  }
  return sum;
}

/// G_0..G_jmax through the power recurrence
///   G_n = (1/n) sum_{k=1}^{n} (k(q+1) - n) a_k G_{n-k},
/// an independent route to the same numbers.
template <class Real = double>
std::vector<Real> g_coefficients(const Real& rho, const Real& q, int jmax) {
  detail::require_domain(jmax >= 0, "g_coefficients: jmax must be non-negative");
  detail::require_domain(rho >= 0 && rho <= 1 && q >= 0, "g_coefficients: need rho in [0, 1] and q >= 0");
  const std::vector<Real> a = beta_series_coefficients<Real>(rho, jmax);
  std::vector<Real> g(static_cast<std::size_t>(jmax) + 1);
  g[0] = 1;
  for (int n = 1; n <= jmax; ++n) {
    Real s = 0;
    for (int k = 1; k <= n; ++k) {
      s += (Real(k) * (q + 1) - n) * a[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(n - k)];
    }
    g[static_cast<std::size_t>(n)] = s / n;
  }
  return g;
}

/// ln theta = (1 - 1/x) ln(Gamma(1+rho) Gamma(1-rho)).
template <class Real = double>
Real log_theta(const Real& x, const Real& rho) {
  return (Real(1) - Real(1) / x) * detail::log_reflection_generic<Real>(rho);
}

namespace detail {

// theta_i rho/(j x + rho) binom(rho/x + j, rho) G_j, assembled in log space.
// log_th is passed separately so box bounds can mix rho^min and rho^max.
template <class Real>
Real kappa_from_parts(const Real& x, const Real& rho, int j, const Real& log_th, const Real& g) {
  using std::exp;
  using std::log;
  if (!(g > 0)) return Real(0);
  const Real lb = log_binomial_generic<Real>(rho / x + j, rho);
  return exp(log_th + log(rho) - log(Real(j) * x + rho) + lb + log(g));
}

template <class Real>
void require_kappa_domain(const Real& x, const Real& rho) {
  require_domain(x > 0 && x <= 1, "kappa_coefficient: x must lie in (0, 1]");
  require_domain(rho >= 0 && rho <= 1, "kappa_coefficient: rho must lie in [0, 1]");
}

}  // namespace detail

/// kappa_0..kappa_jmax for one side.
///
/// rho = 0 is the independent limit (kappa_0 = 1). rho = 1 with x < 1 has
/// theta = 0, so every finite-index kappa vanishes and the mass sits at
/// infinity.
template <class Real = double>
std::vector<Real> kappa_coefficients(const Real& x, const Real& rho, int jmax) {
  detail::require_kappa_domain(x, rho);
  std::vector<Real> out(static_cast<std::size_t>(jmax) + 1, Real(0));
  const Real q = Real(1) / x - 1;
  if (rho == 0 || q == 0) {
    out[0] = 1;
    return out;
  }
  if (rho == 1) return out;
  const Real lth = log_theta<Real>(x, rho);
  const std::vector<Real> g = g_coefficients<Real>(rho, q, jmax);
  for (int j = 0; j <= jmax; ++j) {
    out[static_cast<std::size_t>(j)] = detail::kappa_from_parts<Real>(x, rho, j, lth, g[static_cast<std::size_t>(j)]);
  }
  return out;
}

template <class Real = double>
Real kappa_coefficient(const Real& x, const Real& rho, int j) {
  detail::require_domain(j >= 0, "kappa_coefficient: j must be non-negative");
  return kappa_coefficients<Real>(x, rho, j)[static_cast<std::size_t>(j)];
}

/// 1 - sum_{j <= jmax} kappa_j, the mass a truncated kappa sum leaves out.
/// The tail decays slowly (about 2e-4 at jmax = 40 for x = 1/2, rho = 0.3).
template <class Real = double>
Real kappa_tail_mass(const Real& x, const Real& rho, int jmax = 60) {
  detail::require_domain(jmax >= 0, "kappa_tail_mass: jmax must be non-negative");
  Real s = 0;
  for (const Real& k : kappa_coefficients<Real>(x, rho, jmax)) s += k;
  return Real(1) - s;
}

/// 1 / binom(s1 + s2 + j1 + j2, s1 + j1) with s_i = rho_i q_i.
template <class Real = double>
Real alpha_from_mass(const Real& s1, const Real& s2, int j1, int j2) {
  using std::exp;
  return exp(-detail::log_binomial_generic<Real>(s1 + s2 + j1 + j2, s1 + j1));
}

template <class Real = double>
Real alpha_coefficient(const BasicPsiQuery<Real>& query, int j1, int j2) {
  query.validate();
  detail::require_domain(j1 >= 0 && j2 >= 0, "alpha_coefficient: indices must be non-negative");
  return alpha_from_mass<Real>(query.rho1 * query.q1(), query.rho2 * query.q2(), j1, j2);
}

/// Coefficient tables for one query.
template <class Real = double>
struct SeriesCoefficients {
  std::vector<Real> G1, G2;
  std::vector<Real> kappa1, kappa2;
  Real theta1, theta2;
  Real s1, s2;  // rho_i q_i

  Real alpha(int j1, int j2) const { return alpha_from_mass<Real>(s1, s2, j1, j2); }
};

template <class Real = double>
SeriesCoefficients<Real> series_coefficients(const BasicPsiQuery<Real>& query, int jmax) {
  using std::exp;
  query.validate();
  SeriesCoefficients<Real> c;
  c.G1 = g_coefficients<Real>(query.rho1, query.q1(), jmax);
  c.G2 = g_coefficients<Real>(query.rho2, query.q2(), jmax);
  c.kappa1 = kappa_coefficients<Real>(query.x1, query.rho1, jmax);
  c.kappa2 = kappa_coefficients<Real>(query.x2, query.rho2, jmax);
  c.theta1 = query.rho1 < 1 ? exp(log_theta<Real>(query.x1, query.rho1)) : Real(query.x1 == 1 ? 1 : 0);
  c.theta2 = query.rho2 < 1 ? exp(log_theta<Real>(query.x2, query.rho2)) : Real(query.x2 == 1 ? 1 : 0);
  c.s1 = query.rho1 * query.q1();
  c.s2 = query.rho2 * query.q2();
  return c;
}

/// The (k1, k2)-order bound assembled from kappa_{1,j<k1}, kappa_{2,j<k2} and
/// a callable alpha(j1, j2) for j_i <= k_i:
///   sum_{j1<k1, j2<k2} (a_{j1 j2} - a_{j1 k2} - a_{k1 j2} + a_{k1 k2}) k1 k2
///   + sum_{j1<k1} (a_{j1 k2} - a_{k1 k2}) k1 + sum_{j2<k2} (a_{k1 j2} - a_{k1 k2}) k2
///   + a_{k1 k2}.
template <class Real, class Alpha>
Real psi_upper_from_parts(const std::vector<Real>& kappa1, const std::vector<Real>& kappa2, int k1, int k2,
                          Alpha alpha) {
  const Real akk = alpha(k1, k2);
  Real s = akk;
  for (int j1 = 0; j1 < k1; ++j1) {
    const Real a1 = alpha(j1, k2);
    s += (a1 - akk) * kappa1[static_cast<std::size_t>(j1)];
    for (int j2 = 0; j2 < k2; ++j2) {
      s += (alpha(j1, j2) - a1 - alpha(k1, j2) + akk) * kappa1[static_cast<std::size_t>(j1)] *
           kappa2[static_cast<std::size_t>(j2)];
    }
  }
  for (int j2 = 0; j2 < k2; ++j2) s += (alpha(k1, j2) - akk) * kappa2[static_cast<std::size_t>(j2)];
  return s;
}

/// Upper bound on Psi of order (k1, k2); order (0, 0) is 1 / binom(s1 + s2, s1).
/// Orders above kMaxMemoizedOrder are refused.
template <class Real = double>
Real psi_upper_bound(const BasicPsiQuery<Real>& query, int k1 = 3, int k2 = 3) {
  query.validate();
  detail::require_domain(k1 >= 0 && k2 >= 0, "psi_upper_bound: orders must be non-negative");
  detail::require_domain(k1 <= kMaxMemoizedOrder && k2 <= kMaxMemoizedOrder,
                         "psi_upper_bound: order exceeds the supported maximum of 12");
  if (query.trivial()) return Real(1);
  using std::exp;
  const Real q1 = query.q1();
  const Real q2 = query.q2();
  auto side = [](const Real& x, const Real& rho, const Real& q, int k) {
    std::vector<Real> kap(static_cast<std::size_t>(k));
    if (k == 0) return kap;
    const Real lth = log_theta<Real>(x, rho);
    for (int j = 0; j < k; ++j) {
      kap[static_cast<std::size_t>(j)] = detail::kappa_from_parts<Real>(x, rho, j, lth, g_coefficient<Real>(rho, q, j));
    }
    return kap;
  };
  const std::vector<Real> kap1 = side(query.x1, query.rho1, q1, k1);
  const std::vector<Real> kap2 = side(query.x2, query.rho2, q2, k2);
  const Real s1 = query.rho1 * q1;
  const Real s2 = query.rho2 * q2;
  return psi_upper_from_parts<Real>(kap1, kap2, k1, k2, [&](int a, int b) { return alpha_from_mass<Real>(s1, s2, a, b); });
}

/// sum_{j1, j2 <= jmax} alpha kappa kappa, a lower bound on Psi.
template <class Real = double>
Real psi_partial_sum(const BasicPsiQuery<Real>& query, int jmax) {
  query.validate();
  detail::require_domain(jmax >= 0, "psi_partial_sum: jmax must be non-negative");
  if (query.trivial()) return Real(1);
  const SeriesCoefficients<Real> c = series_coefficients<Real>(query, jmax);
  Real s = 0;
  for (int j1 = 0; j1 <= jmax; ++j1) {
    for (int j2 = 0; j2 <= jmax; ++j2) {
      s += c.alpha(j1, j2) * c.kappa1[static_cast<std::size_t>(j1)] * c.kappa2[static_cast<std::size_t>(j2)];
    }
  }
  return s;
}

/// lim Psi as x -> 0 with rho_i = lambda_i x: 1 / binom(lambda1 + lambda2, lambda1).
inline double psi_infinitesimal_limit(double lambda1, double lambda2) {
  detail::require_domain(lambda1 > 0.0 && lambda2 > 0.0, "psi_infinitesimal_limit: lambdas must be positive");
  return 1.0 / gen_binomial(lambda1 + lambda2, lambda1);
}

/// Taylor coefficients c_1..c_n of ln f given those of f (a_0 > 0), from
///   k a_0 c_k = k a_k - sum_{i=1}^{k-1} i a_{k-i} c_i.
template <class Real = double>
std::vector<Real> log_monotone_coefficients(const std::vector<Real>& a) {
  detail::require_domain(!a.empty() && a[0] > 0, "log_monotone_coefficients: a_0 must be positive");
  const std::size_t n = a.size() - 1;
  std::vector<Real> c(n + 1, Real(0));  // c[0] unused
  for (std::size_t k = 1; k <= n; ++k) {
    Real s = Real(k) * a[k];
    for (std::size_t i = 1; i < k; ++i) s -= Real(i) * a[k - i] * c[i];
    c[k] = s / (Real(k) * a[0]);
  }
  return std::vector<Real>(c.begin() + 1, c.end());
}

}  // namespace dirmech
