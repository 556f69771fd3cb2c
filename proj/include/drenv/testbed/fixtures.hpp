#pragma once

#include <drenv/core/catalog.hpp>
#include <drenv/drs/solver.hpp>

namespace drenv {

enum class FixtureKind { gamma_necessity, lambda_necessity };

struct TightnessFixture {
  FixtureKind kind;
  double L = 1.0;
  double sigma = 0.0;
  double param = 2.0;  ///< t (gamma fixture, t > 1) or p (lambda fixture, p > 1)
  CompositeProblem problem;
};

/// f = counterexample(L, sigma, t), g = indicator of {-1, 1}.
inline TightnessFixture gamma_fixture(double L, double sigma, double t) {
  if (!(t > 1.0)) throw PreconditionError("gamma fixture: need t > 1");
  return {FixtureKind::gamma_necessity, L, sigma, t,
          CompositeProblem(catalog::counterexample(L, sigma, t),
                           catalog::indicator_finite_set_1d({-1.0, 1.0}))};
}

/// f = counterexample(L, sigma, 1), g = indicator of {p}.
inline TightnessFixture lambda_fixture(double L, double sigma, double p) {
  if (!(p > 1.0)) throw PreconditionError("lambda fixture: need p > 1");
  return {FixtureKind::lambda_necessity, L, sigma, p,
          CompositeProblem(catalog::counterexample(L, sigma, 1.0),
                           catalog::indicator_finite_set_1d({p}))};
}

/// Fixed point of the lambda fixture: s* = (1 + gamma sigma) p + gamma (L - sigma).
inline double lambda_fixture_fixed_point(double L, double sigma, double p, double gamma) {
  return (1.0 + gamma * sigma) * p + gamma * (L - sigma);
}

struct ExperimentReport {
  long iterations = 0;
  bool converged = false;  ///< residual <= tol max(1, |u|)
  bool diverged = false;   ///< |s| blew past 1e12 or a prox was ill posed
  double final_residual = 0.0;
  double tail_min_residual = 0.0;  ///< min residual over the second half
  bool stalled = false;            ///< tail_min_residual > 10 tol
  std::vector<double> residuals;
  std::vector<double> u;
};

/// K unsafe DRS iterations on a fixture; stops early on convergence.
inline ExperimentReport run_fixture(const CompositeProblem& P, double gamma, double lambda,
                                    double s0, long K, double tol = 1e-8,
                                    bool keep_history = false) {
  ExperimentReport r;
  Vec s = Vec::Constant(1, s0);
  std::vector<double> res;
  res.reserve(keep_history ? static_cast<std::size_t>(K) + 1 : 0);
  double tail_min = kInf;
  long k = 0;
  try {
    for (; k <= K; ++k) {
      const auto st = drs_step(P, gamma, lambda, s);
      const double rk = (st.u - st.v).norm();
      if (keep_history) {
        r.residuals.push_back(rk);
        r.u.push_back(st.u(0));
      }
      if (k >= K / 2) tail_min = std::min(tail_min, rk);
      r.final_residual = rk;
      if (rk <= tol * scale_of(st.u)) {
        r.converged = true;
        tail_min = std::min(tail_min, rk);
        break;
      }
      if (k == K) break;
      s = st.s_next;
      if (!(std::abs(s(0)) < 1e12)) {
        r.diverged = true;
        break;
      }
    }
  } catch (const StepsizeInfeasible&) {
    r.diverged = true;
  }
  r.iterations = k;
  r.tail_min_residual = tail_min;
  r.stalled = !r.converged && (r.diverged || tail_min > 10.0 * tol);
  return r;
}

inline ExperimentReport gamma_necessity_experiment(double L, double sigma, double t,
                                                   double gamma, double lambda, double s0,
                                                   long K, double tol = 1e-8) {
  const auto fx = gamma_fixture(L, sigma, t);
  return run_fixture(fx.problem, gamma, lambda, s0, K, tol);
}

struct LambdaExperimentReport {
  ExperimentReport run;
  double expected_ratio = 0.0;  ///< |1 - lambda/(1 + gamma sigma)|
  /// Observed |u^{k+1} - p| / |u^k - p| over steps with u^k, u^{k+1} > 1 and
  /// |u^k - p| > 1e-6.
  double observed_ratio_mean = 0.0;
  double max_ratio_error = 0.0;
  std::size_t ratio_samples = 0;
  bool nondecreasing = false;  ///< |u^k - p| never shrinks on those steps
};

inline LambdaExperimentReport lambda_necessity_experiment(double L, double sigma, double p,
                                                          double gamma, double lambda,
                                                          double s0, long K,
                                                          double tol = 1e-8) {
  if (!(gamma > 0.0 && gamma * L < 1.0))
    throw PreconditionError("lambda experiment: need 0 < gamma < 1/L");
  const double fixed = lambda_fixture_fixed_point(L, sigma, p, gamma);
  if (std::abs(s0 - fixed) <= 1e-14 * scale_of(fixed))
    throw PreconditionError("lambda experiment: s0 is the fixed point");
  const auto fx = lambda_fixture(L, sigma, p);
  LambdaExperimentReport r;
  r.run = run_fixture(fx.problem, gamma, lambda, s0, K, tol, true);
  r.expected_ratio = std::abs(1.0 - lambda / (1.0 + gamma * sigma));
  double sum = 0.0;
  bool nondec = true;
  const auto& u = r.run.u;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    const double e0 = std::abs(u[k] - p), e1 = std::abs(u[k + 1] - p);
    if (!(u[k] > 1.0 && u[k + 1] > 1.0) || e0 <= 1e-6) continue;
    const double ratio = e1 / e0;
    sum += ratio;
    r.max_ratio_error = std::max(r.max_ratio_error, std::abs(ratio - r.expected_ratio));
    if (e1 < e0 * (1.0 - 1e-12)) nondec = false;
    ++r.ratio_samples;
  }
  r.observed_ratio_mean = r.ratio_samples ? sum / static_cast<double>(r.ratio_samples) : 0.0;
  r.nondecreasing = r.ratio_samples > 0 && nondec;
  return r;
}

// ---------------------------------------------------------- transitions ----

/// Bisection on a monotone predicate stalled(x) (false below, true above).
template <class Pred>
double bisect_transition(Pred&& stalled, double lo, double hi, double width) {
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (stalled(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct TransitionOptions {
  long K = 10000;          ///< iterations per run
  double tol = 1e-8;
  double width = 1e-4;     ///< bisection stops below this bracket width
  double t = 2.0;          ///< gamma fixture parameter
  double p = 2.0;          ///< lambda fixture parameter
  double s0 = 0.5;         ///< gamma fixture start
  double s0_offset = 0.1;  ///< lambda fixture start: fixed point + offset
};

/// gamma at which the gamma fixture switches from convergence to stalling.
inline double gamma_transition(double L, double sigma, double lambda,
                               const TransitionOptions& o = {}) {
  const auto fx = gamma_fixture(L, sigma, o.t);
  auto stalled = [&](double g) {
    return run_fixture(fx.problem, g, lambda, o.s0, o.K, o.tol).stalled;
  };
  return bisect_transition(stalled, 1e-3 / L, 2.0 / L, o.width);
}

/// Same, counting a stepsize as failing when either fixture stalls. Its
/// transition tracks min{1/L, (2 - lambda)/(2 [sigma]_-)}.
inline double combined_gamma_transition(double L, double sigma, double lambda,
                                        const TransitionOptions& o = {}) {
  const auto gf = gamma_fixture(L, sigma, o.t);
  const auto lf = lambda_fixture(L, sigma, o.p);
  auto stalled = [&](double g) {
    if (run_fixture(gf.problem, g, lambda, o.s0, o.K, o.tol).stalled) return true;
    if (g * L >= 1.0) return false;  // lambda fixture only defined for gamma < 1/L
    const double s0 = lambda_fixture_fixed_point(L, sigma, o.p, g) + o.s0_offset;
    return run_fixture(lf.problem, g, lambda, s0, o.K, o.tol).stalled;
  };
  return bisect_transition(stalled, 1e-3 / L, 2.0 / L, o.width);
}

/// lambda at which the lambda fixture switches from convergence to stalling.
inline double lambda_transition(double L, double sigma, double gamma,
                                const TransitionOptions& o = {}) {
  const auto lf = lambda_fixture(L, sigma, o.p);
  const double s0 = lambda_fixture_fixed_point(L, sigma, o.p, gamma) + o.s0_offset;
  auto stalled = [&](double lam) {
    return run_fixture(lf.problem, gamma, lam, s0, o.K, o.tol).stalled;
  };
  return bisect_transition(stalled, 1e-2, 4.0 * (1.0 + gamma * std::abs(sigma)), o.width);
}

}  // namespace drenv
