#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dirmech/error.hpp"
#include "dirmech/rng.hpp"

namespace dirmech {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace detail

/// ln of a Gamma(shape, 1) variate. Shapes below one use the boost
/// G(a) = G(a + 1) U^{1/a}, kept in log form: for shape 1e-3 the variate
/// itself underflows about half the time.
inline double sample_log_gamma(double shape, RngState& rng) {
  detail::require_domain(shape > 0.0, "sample_gamma: shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  const double boosted = std::log(g(rng));
  return boosted + std::log(rng.uniform_open()) / shape;
}

inline double sample_gamma(double shape, RngState& rng) { return std::exp(sample_log_gamma(shape, rng)); }

/// (ln B, ln(1 - B)) for B ~ Beta(a, b).
struct LogBetaDraw {
  double log_b;
  double log_1mb;
};

inline LogBetaDraw sample_log_beta(double a, double b, RngState& rng) {
  detail::require_domain(a > 0.0 && b > 0.0, "sample_beta: shapes must be positive");
  const double ga = sample_log_gamma(a, rng);
  const double gb = sample_log_gamma(b, rng);
  const double total = detail::log_add_exp(ga, gb);
  return {ga - total, gb - total};
}

inline double sample_beta(double a, double b, RngState& rng) {
  return std::exp(sample_log_beta(a, b, rng).log_b);
}

/// Shape vector of a Dirichlet over {sum T_i <= 1}; the implicit last
/// component has shape slack() = 1 - sum rho.
struct DirichletParams {
  std::vector<double> rho;

  static constexpr double kSumSlack = 1e-12;

  double slack() const {
    double s = 0.0;
    for (double r : rho) s += r;
    return std::max(0.0, 1.0 - s);
  }

  void validate() const {
    double s = 0.0;
    for (double r : rho) {
      detail::require_domain(r >= 0.0 && r <= 1.0, "DirichletParams: rho_i must lie in [0, 1]");
      s += r;
    }
    detail::require_domain(s <= 1.0 + kSumSlack, "DirichletParams: sum of rho exceeds 1");
  }
};

/// Dirichlet draw in log form: ln T_i and ln(1 - T_i), both accurate when
/// T_i is tiny or close to one.
struct LogDirichletDraw {
  std::vector<double> log_t;
  std::vector<double> log_1mt;
};

inline LogDirichletDraw sample_log_dirichlet(const DirichletParams& params, RngState& rng) {
  params.validate();
  const std::size_t n = params.rho.size();
  std::vector<double> lg(n, detail::kNegInf);
  double total = detail::kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (params.rho[i] > 0.0) {
      lg[i] = sample_log_gamma(params.rho[i], rng);
      total = detail::log_add_exp(total, lg[i]);
    }
  }
  const double slack = params.slack();
  double slack_lg = detail::kNegInf;
  if (slack > DirichletParams::kSumSlack) {
    slack_lg = sample_log_gamma(slack, rng);
    total = detail::log_add_exp(total, slack_lg);
  }

  LogDirichletDraw out{std::vector<double>(n, detail::kNegInf), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (lg[i] == detail::kNegInf) continue;
    out.log_t[i] = std::min(0.0, lg[i] - total);
    const double t = std::exp(out.log_t[i]);
    if (t < 0.5) {
      out.log_1mt[i] = std::log1p(-t);
    } else {
      double rest = slack_lg;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i) rest = detail::log_add_exp(rest, lg[k]);
      }
      out.log_1mt[i] = rest - total;
    }
  }
  return out;
}

/// (T_1, ..., T_n) ~ Dir(rho_1, ..., rho_n, slack). Zero-shape components are
/// exactly 0 and consume no randomness.
inline std::vector<double> sample_dirichlet(const DirichletParams& params, RngState& rng) {
  const LogDirichletDraw d = sample_log_dirichlet(params, rng);
  std::vector<double> t(d.log_t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::exp(d.log_t[i]);
  return t;
}

/// Incremental Dirichlet by stick breaking, one offline node's edges at a time:
///   T_new = (1 - sum T_prev) * B,  B ~ Beta(rho_new, 1 - rho_new - sum rho_prev).
/// The remaining stick is tracked in log form on both sides.
class StickBreaker {
 public:
  struct Piece {
    double t;
    double log_t;
    double log_1mt;
  };

  /// Next component. rho_new = 0 consumes one draw and yields 0; a second
  /// Beta shape of 0 is the point mass at 1 and takes the whole stick.
  Piece next(double rho_new, RngState& rng) {
    detail::require_domain(rho_new >= 0.0 && rho_new <= 1.0, "stick_break_next: rho must lie in [0, 1]");
    detail::require_domain(rho_sum_ + rho_new <= 1.0 + DirichletParams::kSumSlack,
                           "stick_break_next: rho budget exceeded");
    if (rho_new == 0.0) {
      (void)rng();
      return {0.0, detail::kNegInf, 0.0};
    }
    const double b = 1.0 - rho_new - rho_sum_;
    LogBetaDraw beta{0.0, detail::kNegInf};
    if (b > DirichletParams::kSumSlack) beta = sample_log_beta(rho_new, b, rng);
    rho_sum_ += rho_new;

    const double log_t = log_rem_ + beta.log_b;
    // 1 - T = (1 - R) + R (1 - B)
    const double log_1mt = detail::log_add_exp(log_used_, log_rem_ + beta.log_1mb);
    log_used_ = detail::log_add_exp(log_used_, log_t);
    log_rem_ += beta.log_1mb;
    return {std::exp(log_t), log_t, std::min(0.0, log_1mt)};
  }

  double rho_sum() const noexcept { return rho_sum_; }
  double remaining() const noexcept { return std::exp(log_rem_); }
  double log_remaining() const noexcept { return log_rem_; }

 private:
  double rho_sum_ = 0.0;
  double log_rem_ = 0.0;               // ln(1 - sum T)
  double log_used_ = detail::kNegInf;  // ln(sum T)
};

/// Functional form of StickBreaker::next for a given prefix.
inline double stick_break_next(const std::vector<double>& prev_t, const std::vector<double>& prev_rho,
                               double rho_new, RngState& rng) {
  detail::require_domain(prev_t.size() == prev_rho.size(), "stick_break_next: prefix length mismatch");
  double rho_sum = 0.0;
  double t_sum = 0.0;
  for (std::size_t i = 0; i < prev_t.size(); ++i) {
    detail::require_domain(prev_t[i] >= 0.0 && prev_rho[i] >= 0.0, "stick_break_next: negative prefix entry");
    rho_sum += prev_rho[i];
    t_sum += prev_t[i];
  }
  detail::require_domain(t_sum <= 1.0 + DirichletParams::kSumSlack, "stick_break_next: prefix exceeds the simplex");
  detail::require_domain(rho_new >= 0.0 && rho_new <= 1.0, "stick_break_next: rho must lie in [0, 1]");
  detail::require_domain(rho_sum + rho_new <= 1.0 + DirichletParams::kSumSlack,
                         "stick_break_next: rho budget exceeded");
  if (rho_new == 0.0) {
    (void)rng();
    return 0.0;
  }
  const double b = 1.0 - rho_new - rho_sum;
  const double frac = b > DirichletParams::kSumSlack ? sample_beta(rho_new, b, rng) : 1.0;
  return std::max(0.0, 1.0 - t_sum) * frac;
}

}  // namespace dirmech
