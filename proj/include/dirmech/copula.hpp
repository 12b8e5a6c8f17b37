#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "dirmech/parallel.hpp"
#include "dirmech/randomness.hpp"
#include "dirmech/specialfn.hpp"
#include "dirmech/stats.hpp"

namespace dirmech {

struct CopulaDraw {
  std::vector<double> T;
  std::vector<double> A;
  std::vector<double> log_A;
};

/// Dirichlet copula with the per-component CDFs I(.; rho_i, 1 - rho_i)
/// prepared once. Components with rho_i in {0, 1} have no usable CDF and get
/// an independent fresh uniform, drawn after the Dirichlet vector in index
/// order.
class DirichletCopula {
 public:
  explicit DirichletCopula(DirichletParams params) : params_(std::move(params)) {
    params_.validate();
    cdf_.reserve(params_.rho.size());
    for (double r : params_.rho) {
      if (r > 0.0 && r < 1.0) {
        cdf_.emplace_back(RegularizedBeta(r, 1.0 - r));
      } else {
        cdf_.emplace_back(std::nullopt);
      }
    }
  }

  const DirichletParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.rho.size(); }

  /// Writes ln A_i into log_a (resized to size()); optionally T_i into t.
  void draw_log(RngState& rng, std::vector<double>& log_a, std::vector<double>* t = nullptr) const {
    const LogDirichletDraw d = sample_log_dirichlet(params_, rng);
    const std::size_t n = size();
    log_a.resize(n);
    if (t) t->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (t) (*t)[i] = std::exp(d.log_t[i]);
      if (cdf_[i]) log_a[i] = cdf_[i]->log_cdf(d.log_t[i], d.log_1mt[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!cdf_[i]) log_a[i] = std::log(rng.uniform_open());
    }
  }

  CopulaDraw draw(RngState& rng) const {
    CopulaDraw out;
    draw_log(rng, out.log_A, &out.T);
    out.A.resize(out.log_A.size());
    for (std::size_t i = 0; i < out.A.size(); ++i) out.A[i] = std::exp(out.log_A[i]);
    return out;
  }

 private:
  DirichletParams params_;
  std::vector<std::optional<RegularizedBeta>> cdf_;
};

inline CopulaDraw dirichlet_copula(const DirichletParams& params, RngState& rng) {
  return DirichletCopula(params).draw(rng);
}

enum class PsiMcMethod { Auto, Plain, Importance };

struct PsiMcResult {
  MonteCarloEstimate mc;
  PsiMcMethod method = PsiMcMethod::Plain;
};

namespace detail {

// A^q evaluated as exp(q ln A) with ln A clamped at -745; A = 0 gives 0.
inline double copula_power(double log_a, double q) {
  if (q == 0.0) return 1.0;
  if (log_a == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(q * std::max(log_a, -745.0));
}

}  // namespace detail

/// Monte Carlo estimate of Psi(x1, x2; rho1, rho2) = E[A1^{q1} A2^{q2}] / (x1 x2),
/// q_i = 1/x_i - 1.
///
/// Plain sampling averages the integrand over copula draws. Its relative
/// variance blows up like 1/x for small x, so Importance instead draws
/// A_i = U_i^{x_i} (density a^{q_i} / x_i) and averages the copula density
///   c(a1, a2) = Gamma(1-rho1) Gamma(1-rho2) / Gamma(rho0)
///               * (1-t1-t2)^{rho0-1} (1-t1)^{rho1} (1-t2)^{rho2},
/// t_i = I^{-1}(a_i; rho_i, 1-rho_i), rho0 = 1 - rho1 - rho2. Its variance is
/// finite only for rho0 > 1/2; Auto uses it when some x < 0.05 and
/// rho1 + rho2 < 0.5.
inline PsiMcResult psi_mc_oracle(double x1, double x2, double rho1, double rho2, std::uint64_t trials,
                                 const RngState& rng, unsigned threads = 1, PsiMcMethod method = PsiMcMethod::Auto) {
  detail::require_domain(x1 > 0.0 && x1 <= 1.0 && x2 > 0.0 && x2 <= 1.0, "psi_mc_oracle: x must lie in (0, 1]");
  detail::require_domain(rho1 >= 0.0 && rho2 >= 0.0 && rho1 + rho2 <= 1.0 + DirichletParams::kSumSlack,
                         "psi_mc_oracle: rho must be non-negative with sum at most 1");
  detail::require_domain(trials >= 1, "psi_mc_oracle: trials must be positive");
  const double q1 = 1.0 / x1 - 1.0;
  const double q2 = 1.0 / x2 - 1.0;
  const double rho0 = 1.0 - rho1 - rho2;

  if (method == PsiMcMethod::Auto) {
    method = (std::min(x1, x2) < 0.05 && rho1 + rho2 < 0.5) ? PsiMcMethod::Importance : PsiMcMethod::Plain;
  }
  if (method == PsiMcMethod::Importance && (rho1 == 0.0 || rho2 == 0.0 || !(rho0 > 0.0))) {
    method = PsiMcMethod::Plain;
  }

  MeanAccumulator acc;
  if (method == PsiMcMethod::Plain) {
    const DirichletCopula copula(DirichletParams{{rho1, rho2}});
    const double scale = 1.0 / (x1 * x2);
    acc = run_chunked(trials, rng, threads, MeanAccumulator{}, [&](RngState& r, std::uint64_t n, MeanAccumulator& a) {
      std::vector<double> la;
      for (std::uint64_t k = 0; k < n; ++k) {
        copula.draw_log(r, la);
        a.add(detail::copula_power(la[0], q1) * detail::copula_power(la[1], q2) * scale);
      }
    });
  } else {
    const double log_const = log_gamma(1.0 - rho1) + log_gamma(1.0 - rho2) - log_gamma(rho0);
    acc = run_chunked(trials, rng, threads, MeanAccumulator{}, [&](RngState& r, std::uint64_t n, MeanAccumulator& a) {
      for (std::uint64_t k = 0; k < n; ++k) {
        const double u1 = r.uniform_open();
        const double u2 = r.uniform_open();
        // 1 - a_i = -expm1(x_i ln u_i) keeps full precision when a_i is near 1.
        const double c1 = -std::expm1(x1 * std::log(u1));
        const double c2 = -std::expm1(x2 * std::log(u2));
        double s1 = 0.0, s2 = 0.0;  // s_i = 1 - t_i
        boost::math::ibetac_inv(rho1, 1.0 - rho1, c1, &s1);
        const double t2 = boost::math::ibetac_inv(rho2, 1.0 - rho2, c2, &s2);
        const double rest = s1 - t2;
        if (!(rest > 0.0)) {
          a.add(0.0);
          continue;
        }
        const double lc = log_const + (rho0 - 1.0) * std::log(rest) + rho1 * std::log(s1) + rho2 * std::log(s2);
        a.add(std::exp(lc));
      }
    });
  }
  return {MonteCarloEstimate::from(acc), method};
}

}  // namespace dirmech
