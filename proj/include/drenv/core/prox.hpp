#pragma once

#include <drenv/core/oracles.hpp>

#include <sstream>

namespace drenv {

/// Inner solver settings for smooth proxes without a closed form.
struct InnerSolverOptions {
  double tolerance = 1e-12;
  int max_steps = 10000;
};

/// prox_{gamma g}(x). Throws StepsizeInfeasible unless 0 < gamma < threshold.
inline Vec eval_prox(const ProxableOracle& g, double gamma, const Vec& x) {
  if (!(gamma > 0.0) || !(gamma < g.prox_threshold)) {
    std::ostringstream os;
    os << g.name << ": stepsize " << gamma << " outside (0, "
       << g.prox_threshold << ")";
    throw StepsizeInfeasible(os.str());
  }
  return g.prox(gamma, x);
}

/// g^gamma(x) = min_w g(w) + |w - x|^2 / (2 gamma).
inline double moreau_envelope(const ProxableOracle& g, double gamma,
                              const Vec& x) {
  const Vec p = eval_prox(g, gamma, x);
  return g.value(p) + (p - x).squaredNorm() / (2.0 * gamma);
}

namespace detail {

inline void require_smooth_stepsize(const SmoothOracle& f, double gamma) {
  if (!(gamma > 0.0) || !(gamma < inv_neg(f.hypoconvexity))) {
    std::ostringstream os;
    os << f.name << ": stepsize " << gamma
       << " does not make the prox single valued (need 0 < gamma < "
       << inv_neg(f.hypoconvexity) << ")";
    throw StepsizeInfeasible(os.str());
  }
}

/// Damped fixed-point iteration u <- u - (u + gamma grad f(u) - s)/(1 + gamma L)
/// started at s. `lipschitz` is the damping modulus, possibly an estimate.
inline Vec smooth_prox_fixed_point(const SmoothOracle& f, double gamma,
                                   const Vec& s, double lipschitz,
                                   const InnerSolverOptions& opts) {
  const double damping = 1.0 / (1.0 + gamma * lipschitz);
  const double tol = opts.tolerance * scale_of(s);
  Vec u = s;
  double res = kInf;
  for (int it = 0; it < opts.max_steps; ++it) {
    const Vec r = u + gamma * f.gradient(u) - s;
    res = r.norm();
    if (res <= tol) return u;
    if (!std::isfinite(res)) break;
    u -= damping * r;
  }
  std::ostringstream os;
  os << f.name << ": smooth prox inner solver stopped with residual " << res;
  throw SolverError(os.str(), res);
}

}  // namespace detail

/// prox_{gamma f}(s): the unique u with s = u + gamma grad f(u).
/// Requires 0 < gamma < 1/[sigma_f]_-.
inline Vec smooth_prox(const SmoothOracle& f, double gamma, const Vec& s,
                       const InnerSolverOptions& opts = {}) {
  detail::require_smooth_stepsize(f, gamma);
  if (f.has_closed_form_prox()) return f.prox(gamma, s);
  if (f.is_affine()) return s - gamma * f.gradient(s);
  return detail::smooth_prox_fixed_point(f, gamma, s, f.lipschitz, opts);
}

/// View a smooth function as a prox-friendly term (threshold 1/[sigma]_-).
inline ProxableOracle as_proxable(const SmoothOracle& f) {
  ProxableOracle g;
  g.name = f.name;
  g.dim = f.dim;
  g.prox_threshold = inv_neg(f.hypoconvexity);
  g.value = f.value;
  g.prox = [f](double gamma, const Vec& x) { return smooth_prox(f, gamma, x); };
  return g;
}

/// x -> g(x - shift). Its prox is shift + prox_g(x - shift).
inline ProxableOracle translate(const ProxableOracle& g, const Vec& shift) {
  ProxableOracle out = g;
  out.name = g.name + "(. - b)";
  out.separable = false;
  out.value = [g, shift](const Vec& x) { return g.value(x - shift); };
  out.prox = [g, shift](double gamma, const Vec& x) {
    return Vec(shift + g.prox(gamma, x - shift));
  };
  return out;
}

}  // namespace drenv
