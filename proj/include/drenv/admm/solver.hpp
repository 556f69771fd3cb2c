#pragma once

#include <drenv/admm/certificate.hpp>
#include <drenv/admm/problem.hpp>
#include <drenv/drs/solver.hpp>

namespace drenv {

struct AdmmConfig {
  double beta = 0.0;
  double lambda = 1.0;
  long max_iter = 100000;
  double tol = 1e-8;
  bool unsafe = false;
  double decrease_slack = 1e-10;

  void validate() const {
    if (!(beta > 0.0)) throw PreconditionError("admm: beta must be > 0");
    if (!(lambda > 0.0 && lambda < 4.0))
      throw PreconditionError("admm: lambda must lie in (0, 4)");
    if (max_iter < 0) throw PreconditionError("admm: max_iter must be >= 0");
    if (!(tol > 0.0)) throw PreconditionError("admm: tol must be > 0");
  }
};

namespace detail {

inline bool admm_states_close(const AdmmState& a, const AdmmState& b, double tol) {
  auto close = [tol](const Vec& p, const Vec& q) {
    return (p - q).norm() <= tol * scale_of(p);
  };
  return close(a.x, b.x) && close(a.z, b.z) && close(a.y, b.y);
}

inline IterationRecord admm_record(const AdmmProblem& P, double beta, const AdmmState& st,
                                   long k, long long ns, double c, double L) {
  return {k, constraint_residual(P, st.x, st.z).norm(), admm_lagrangian(P, beta, st),
          1.0 / beta, ns, c, L};
}

inline void finish_admm_trace(IterationTrace& tr, const AdmmProblem& P, double beta,
                              const AdmmState& st) {
  tr.x = st.x;
  tr.z = st.z;
  tr.y = st.y;
  const auto d = admm_to_drs_vars(P, st, beta);
  tr.s = d.s;
  tr.u = d.u;
  tr.v = d.v;
}

}  // namespace detail

/// Relaxed ADMM. Certified (beta, lambda) use the DRS certificate of the
/// declared (L, sigma) of A|>f at gamma = 1/beta and assert
///   L(k+1) <= L(k) - c lambda^2/(1 + L/beta)^2 |Ax^k + Bz^k - b|^2
/// for k >= 1 (the initial state need not come from an ADMM step).
///
/// Stops when |Ax + Bz - b| <= tol max(1, |b|) after a step; the initial
/// state stops the run only if it is also a fixed point of the update.
inline IterationTrace run_admm(const AdmmProblem& P, const AdmmConfig& cfg,
                               const AdmmState& state0) {
  cfg.validate();
  P.validate();
  std::optional<double> c;
  if (P.L > 0.0 && cfg.lambda <= 2.0) {
    const auto cert = tight_penalty_certificate(P.L, P.sigma, cfg.lambda);
    if (cert.contains(cfg.beta)) c = cert.c(cfg.beta);
  }
  if (!c && !cfg.unsafe) {
    std::ostringstream os;
    os << P.name << ": (beta, lambda) = (" << cfg.beta << ", " << cfg.lambda
       << ") is not certified for L = " << P.L << ", sigma = " << P.sigma
       << "; set the unsafe flag to run anyway";
    throw StepsizeInfeasible(os.str());
  }
  const bool certified = c.has_value() && !cfg.unsafe;
  const double beta = cfg.beta;
  const double gl = 1.0 + P.L / beta;
  const double coef = certified ? *c * cfg.lambda * cfg.lambda / (gl * gl) : 0.0;
  const double stop = cfg.tol * scale_of(P.b);

  IterationTrace tr;
  tr.certified = certified;
  tr.lambda = cfg.lambda;
  tr.gamma = 1.0 / beta;
  tr.c = certified ? *c : 0.0;
  tr.L = P.L;
  detail::Stopwatch clock;

  AdmmState st = state0;
  st.beta = beta;
  st.lambda = cfg.lambda;
  tr.push(detail::admm_record(P, beta, st, 0, clock.ns(), tr.c, P.L));
  for (long k = 0;; ++k) {
    const auto& last = tr.records.back();
    if (k >= cfg.max_iter) {
      tr.reason = Termination::max_iter;
      break;
    }
    AdmmState nx = admm_step(P, beta, cfg.lambda, st);
    if (k == 0 && last.residual <= stop && detail::admm_states_close(st, nx, cfg.tol)) {
      tr.reason = Termination::converged;
      break;
    }
    const auto rec = detail::admm_record(P, beta, nx, k + 1, clock.ns(), tr.c, P.L);
    if (certified && k >= 1) {
      const double bound = last.merit - coef * last.residual * last.residual;
      const double excess = rec.merit - bound;
      if (excess > cfg.decrease_slack * scale_of(last.merit)) {
        std::ostringstream os;
        os << P.name << ": certified Lagrangian decrease violated at iteration " << k + 1
           << " by " << excess;
        throw InvariantViolation(os.str(), k + 1, excess);
      }
    }
    st = std::move(nx);
    tr.push(rec);
    tr.iterations = k + 1;
    if (rec.residual <= stop) {
      tr.reason = Termination::converged;
      break;
    }
  }
  detail::finish_admm_trace(tr, P, beta, st);
  return tr;
}

// ------------------------------------------------------------- adaptive ----

enum class AdmmGuard { automatic, inverse_a, lower_bound, none };

struct AdaptiveAdmmOptions {
  long max_iter = 100000;
  double tol = 1e-8;
  bool convex = false;  ///< use the convex row (beta > L) for c
  AdmmGuard guard = AdmmGuard::automatic;
  double slack = 1e-10;
  int max_doublings = 64;
};

/// ADMM (lambda = 1) with penalty backtracking: on insufficient decrease of
/// the augmented Lagrangian, or a failed lower-bound guard, beta <- 2 beta,
/// c <- 2c, L <- 2L and the last step is recomputed. The guard is
/// phi(v) = f(A^-1(b - Bz)) + g(z) <= L_k when A^-1 is known, or
/// phi_lb <= L_k when a lower bound is supplied.
inline IterationTrace run_adaptive_admm(const AdmmProblem& P, double beta_init,
                                        double L_init, const AdmmState& state0,
                                        std::optional<double> phi_lb = std::nullopt,
                                        const AdaptiveAdmmOptions& opt = {}) {
  P.validate();
  if (!(beta_init > 0.0) || !(L_init > 0.0))
    throw PreconditionError("adaptive admm: beta_init and L_init must be > 0");
  const double lambda = 1.0;
  const auto rule = penalty_certificate(L_init, opt.convex ? 0.0 : -1.0, lambda, 1.0);
  if (!(beta_init > rule.beta_lo))
    throw PreconditionError("adaptive admm: beta_init must exceed " +
                            std::to_string(rule.beta_lo) + " for L_init");
  double beta = beta_init;
  double L = L_init;
  double c = rule.c(beta);

  AdmmGuard guard = opt.guard;
  if (guard == AdmmGuard::automatic)
    guard = P.A_inverse ? AdmmGuard::inverse_a
                        : (phi_lb ? AdmmGuard::lower_bound : AdmmGuard::none);
  if (guard == AdmmGuard::inverse_a && !P.A_inverse)
    throw PreconditionError("adaptive admm: inverse-A guard needs A_inverse");
  if (guard == AdmmGuard::lower_bound && !phi_lb)
    throw PreconditionError("adaptive admm: lower-bound guard needs phi_lb");

  IterationTrace tr;
  tr.certified = true;
  tr.lambda = lambda;
  tr.guard = guard == AdmmGuard::inverse_a     ? "inverse-A"
             : guard == AdmmGuard::lower_bound ? "lower-bound"
                                               : "none";
  detail::Stopwatch clock;

  auto double_beta = [&](long k) {
    if (tr.halvings >= opt.max_doublings) {
      std::ostringstream os;
      os << P.name << ": more than " << opt.max_doublings
         << " penalty doublings (beta = " << beta << ")";
      throw SolverError(os.str(), tr.min_residual);
    }
    beta *= 2.0;
    c *= 2.0;
    L *= 2.0;
    ++tr.halvings;
    tr.halving_iterations.push_back(k);
  };
  auto try_step = [&](const AdmmState& from) -> std::optional<AdmmState> {
    try {
      return admm_step(P, beta, lambda, from);
    } catch (const SolverError&) {
      return std::nullopt;
    } catch (const StepsizeInfeasible&) {
      return std::nullopt;
    }
  };
  auto guard_ok = [&](const AdmmState& st, double lag) {
    const double tol_abs = opt.slack * scale_of(lag);
    if (guard == AdmmGuard::inverse_a) {
      const double phi = P.f_eval(*P.A_inverse * (P.b - P.B * st.z)) + P.g_eval(st.z);
      return phi <= lag + tol_abs;
    }
    if (guard == AdmmGuard::lower_bound) return *phi_lb <= lag + tol_abs;
    return true;
  };

  // initialization: one step from (y^-1, z^-1)
  AdmmState before = state0;  // state k-1
  std::optional<AdmmState> cur;
  while (!(cur = try_step(before))) double_beta(0);
  tr.push(detail::admm_record(P, beta, *cur, 0, clock.ns(), c, L));

  const double stop = opt.tol * scale_of(P.b);
  for (long k = 0;; ++k) {
    if (tr.records.back().residual <= stop && k > 0) {
      tr.reason = Termination::converged;
      break;
    }
    if (k >= opt.max_iter) {
      tr.reason = Termination::max_iter;
      break;
    }
    while (true) {
      auto next = try_step(*cur);
      bool ok = next.has_value();
      if (ok) {
        const auto& last = tr.records.back();
        const double lag = admm_lagrangian(P, beta, *next);
        const double gl = 1.0 + L / beta;
        const double bound = last.merit - c * lambda * lambda / (gl * gl) *
                                              last.residual * last.residual;
        ok = lag <= bound + opt.slack * scale_of(last.merit) && guard_ok(*next, lag);
      }
      if (ok) {
        before = std::move(*cur);
        cur = std::move(next);
        break;
      }
      double_beta(k);
      // recompute state k from state k-1
      std::optional<AdmmState> redo;
      while (!(redo = try_step(before))) double_beta(k);
      cur = std::move(redo);
      tr.records.pop_back();
      tr.push(detail::admm_record(P, beta, *cur, k, clock.ns(), c, L));
    }
    tr.push(detail::admm_record(P, beta, *cur, k + 1, clock.ns(), c, L));
    tr.iterations = k + 1;
  }
  tr.min_residual = kInf;
  for (const auto& r : tr.records) tr.min_residual = std::min(tr.min_residual, r.residual);
  tr.gamma = 1.0 / beta;
  tr.c = c;
  tr.L = L;
  detail::finish_admm_trace(tr, P, beta, *cur);
  return tr;
}

}  // namespace drenv
