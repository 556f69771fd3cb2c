#pragma once

#include <drenv/drs/certificate.hpp>
#include <drenv/envelope.hpp>

#include <chrono>
#include <optional>
#include <sstream>
#include <vector>

namespace drenv {

struct DrsConfig {
  double gamma = 0.0;
  double lambda = 1.0;
  long max_iter = 100000;
  double tol = 1e-8;
  /// Run outside the certified range without decrease assertions.
  bool unsafe = false;
  /// Relative slack of the certified decrease test.
  double decrease_slack = 1e-10;

  void validate() const {
    if (!(gamma > 0.0)) throw PreconditionError("drs: gamma must be > 0");
    if (!(lambda > 0.0 && lambda < 4.0))
      throw PreconditionError("drs: lambda must lie in (0, 4)");
    if (max_iter < 0) throw PreconditionError("drs: max_iter must be >= 0");
    if (!(tol > 0.0)) throw PreconditionError("drs: tol must be > 0");
  }
};

enum class Termination { converged, max_iter };

inline const char* to_string(Termination t) {
  return t == Termination::converged ? "converged" : "max_iter";
}

struct IterationRecord {
  long k = 0;
  double residual = 0.0;  ///< |u - v| (DRS) or |Ax + Bz - b| (ADMM)
  double merit = 0.0;     ///< DRE or augmented Lagrangian value
  double gamma = 0.0;     ///< stepsize, 1/beta for ADMM
  long long elapsed_ns = 0;
  double c = 0.0;         ///< decrease constant in force (0 when uncertified)
  double L_est = 0.0;     ///< modulus in force
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  Termination reason = Termination::max_iter;
  long iterations = 0;  ///< steps taken
  double min_residual = kInf;
  bool certified = false;
  double lambda = 0.0;
  double gamma = 0.0;  ///< final stepsize
  double c = 0.0;      ///< final decrease constant
  double L = 0.0;      ///< final modulus
  int halvings = 0;    ///< adaptive runs: stepsize halvings / penalty doublings
  std::vector<long> halving_iterations;
  std::string guard;   ///< adaptive ADMM: lower-bound guard mode
  Vec s, u, v;         ///< final DRS triple (ADMM: bridged variables)
  Vec x, z, y;         ///< final ADMM state

  void push(IterationRecord r) {
    min_residual = std::min(min_residual, r.residual);
    records.push_back(r);
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  long long ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

struct DrsStep {
  Vec u, v, s_next;
};

inline DrsStep drs_step(const CompositeProblem& P, double gamma, double lambda,
                        const Vec& s) {
  if (!(lambda > 0.0)) throw PreconditionError("drs: lambda must be > 0");
  DrsStep st;
  st.u = smooth_prox(P.f, gamma, s);
  st.v = eval_prox(P.g, gamma, 2.0 * st.u - s);
  st.s_next = s + lambda * (st.v - st.u);
  return st;
}

/// Decrease constant c for (f, gamma, lambda) when certified. Affine f
/// (L = 0) is certified for lambda < 2 with c = (2 - lambda)/(2 lambda gamma).
inline std::optional<double> certified_constant(const SmoothOracle& f, double gamma,
                                                double lambda) {
  if (f.lipschitz == 0.0) {
    if (lambda < 2.0 && gamma > 0.0) return (2.0 - lambda) / (2.0 * lambda * gamma);
    return std::nullopt;
  }
  const auto cert = stepsize_certificate(f.lipschitz, f.hypoconvexity, lambda);
  if (!cert.contains(gamma)) return std::nullopt;
  return sufficient_decrease_constant(f.lipschitz, f.hypoconvexity, gamma, lambda);
}

/// Runs DRS from s0. Certified configurations assert
///   DRE(s+) <= DRE(s) - c/(1 + gamma L)^2 |s - s+|^2
/// at every step (relative slack config.decrease_slack).
inline IterationTrace run_drs(const CompositeProblem& P, const DrsConfig& cfg,
                              const Vec& s0) {
  cfg.validate();
  if (s0.size() != P.dim()) throw PreconditionError("drs: s0 has wrong dimension");
  const auto c = certified_constant(P.f, cfg.gamma, cfg.lambda);
  if (!c && !cfg.unsafe) {
    std::ostringstream os;
    os << "drs: (gamma, lambda) = (" << cfg.gamma << ", " << cfg.lambda
       << ") is not certified for L = " << P.f.lipschitz
       << ", sigma = " << P.f.hypoconvexity << "; set the unsafe flag to run anyway";
    throw StepsizeInfeasible(os.str());
  }
  const bool certified = c.has_value() && !cfg.unsafe;
  const double L = P.f.lipschitz;
  const double coef = certified ? *c / ((1.0 + cfg.gamma * L) * (1.0 + cfg.gamma * L)) : 0.0;

  IterationTrace tr;
  tr.certified = certified;
  tr.lambda = cfg.lambda;
  tr.gamma = cfg.gamma;
  tr.c = certified ? *c : 0.0;
  tr.L = L;
  detail::Stopwatch clock;

  Vec s = s0;
  DreEvaluation e = eval_dre(P, cfg.gamma, s);
  for (long k = 0;; ++k) {
    const double res = (e.u - e.v).norm();
    tr.push({k, res, e.dre_value, cfg.gamma, clock.ns(), tr.c, L});
    if (res <= cfg.tol * scale_of(e.u)) {
      tr.reason = Termination::converged;
      break;
    }
    if (k >= cfg.max_iter) {
      tr.reason = Termination::max_iter;
      break;
    }
    const Vec s_next = s + cfg.lambda * (e.v - e.u);
    DreEvaluation e_next = eval_dre(P, cfg.gamma, s_next);
    if (certified) {
      const double bound = e.dre_value - coef * (s - s_next).squaredNorm();
      const double excess = e_next.dre_value - bound;
      if (excess > cfg.decrease_slack * scale_of(e.dre_value)) {
        std::ostringstream os;
        os << "drs: certified decrease violated at iteration " << k + 1 << " by "
           << excess << " (DRE " << e.dre_value << " -> " << e_next.dre_value << ")";
        throw InvariantViolation(os.str(), k + 1, excess);
      }
    }
    s = s_next;
    e = std::move(e_next);
    tr.iterations = k + 1;
  }
  tr.s = s;
  tr.u = e.u;
  tr.v = e.v;
  return tr;
}

struct StationarityWitness {
  Vec xi;                ///< (u - v)/gamma + grad f(v) - grad f(u), a subgradient of phi at v
  double norm = 0.0;
  double bound = 0.0;        ///< (1/gamma + L) |u - v|
  double scaled_bound = 0.0;  ///< (1 - gamma sigma)/(2 gamma) |u - v|, reported only
};

inline StationarityWitness stationarity_witness(const CompositeProblem& P, double gamma,
                                                const Vec& u, const Vec& v) {
  StationarityWitness w;
  w.xi = (u - v) / gamma + P.f.gradient(v) - P.f.gradient(u);
  w.norm = w.xi.norm();
  const double r = (u - v).norm();
  w.bound = (1.0 / gamma + P.f.lipschitz) * r;
  w.scaled_bound = (1.0 - gamma * P.f.hypoconvexity) / (2.0 * gamma) * r;
  return w;
}

// ------------------------------------------------------------- adaptive ----

struct AdaptiveDrsOptions {
  long max_iter = 100000;
  double tol = 1e-8;
  /// Initialize with the convex row of the simple rule instead of the
  /// nonconvex one.
  bool convex = false;
  double init_factor = 0.9;  ///< gamma_0 = init_factor * (row bound)
  double slack = 1e-10;
  int max_halvings = 64;
};

namespace detail {

/// prox_{gamma f} for an f whose moduli are not trusted: the closed form when
/// present, otherwise the fixed-point solver damped with the current estimate.
inline Vec adaptive_smooth_prox(const SmoothOracle& f, double gamma, const Vec& s,
                                double L_est) {
  if (f.has_closed_form_prox()) return f.prox(gamma, s);
  if (f.is_affine()) return s - gamma * f.gradient(s);
  return smooth_prox_fixed_point(f, gamma, s, L_est, {});
}

struct AdaptiveDrsState {
  Vec s, u, v, s_next;
  double lag = kInf;
  double phi_v = kInf;
};

inline AdaptiveDrsState adaptive_drs_eval(const CompositeProblem& P, double gamma,
                                          double lambda, const Vec& s, double L_est) {
  AdaptiveDrsState st;
  st.s = s;
  st.u = adaptive_smooth_prox(P.f, gamma, s, L_est);
  st.v = eval_prox(P.g, gamma, 2.0 * st.u - s);
  st.s_next = s + lambda * (st.v - st.u);
  const Vec y = (st.u - s) / gamma;
  st.lag = augmented_lagrangian_drs(P.f.value(st.u), P.g.value(st.v), gamma, st.u,
                                    st.v, y);
  st.phi_v = P.objective(st.v);
  return st;
}

}  // namespace detail

/// DRS with backtracking on gamma. The declared moduli of f are not used;
/// (gamma, c) start from the simple rule with L_init and are updated by
/// gamma <- gamma/2, c <- 2c, L <- 2L whenever the Lagrangian fails to
/// decrease enough or drops below phi(v).
inline IterationTrace run_adaptive_drs(const CompositeProblem& P, const Vec& s0,
                                       double L_init, double lambda,
                                       const AdaptiveDrsOptions& opt = {}) {
  if (!(L_init > 0.0)) throw PreconditionError("adaptive drs: L_init must be > 0");
  if (!(lambda > 0.0 && lambda < 2.0))
    throw PreconditionError("adaptive drs: lambda must lie in (0, 2)");
  if (s0.size() != P.dim()) throw PreconditionError("adaptive drs: s0 dimension");
  const auto rule = simple_stepsize_rule(L_init, lambda, opt.convex);
  double L = L_init;
  double gamma = opt.init_factor * rule.gamma_hi;
  double c = rule.c(gamma);

  IterationTrace tr;
  tr.certified = true;
  tr.lambda = lambda;
  detail::Stopwatch clock;

  auto halve = [&](long k) {
    if (tr.halvings >= opt.max_halvings) {
      std::ostringstream os;
      os << "adaptive drs: more than " << opt.max_halvings
         << " stepsize halvings (gamma = " << gamma << ")";
      throw SolverError(os.str(), tr.min_residual);
    }
    gamma /= 2.0;
    c *= 2.0;
    L *= 2.0;
    ++tr.halvings;
    tr.halving_iterations.push_back(k);
  };
  // Evaluation that treats an ill-posed prox as a failed test.
  auto try_eval = [&](const Vec& s) -> std::optional<detail::AdaptiveDrsState> {
    try {
      return detail::adaptive_drs_eval(P, gamma, lambda, s, L);
    } catch (const StepsizeInfeasible&) {
      return std::nullopt;
    } catch (const SolverError&) {
      return std::nullopt;
    }
  };
  auto record = [&](long k, const detail::AdaptiveDrsState& st) {
    tr.push({k, (st.u - st.v).norm(), st.lag, gamma, clock.ns(), c, L});
  };

  std::optional<detail::AdaptiveDrsState> prev;
  while (!(prev = try_eval(s0))) halve(0);
  record(0, *prev);

  for (long k = 1;; ++k) {
    const double res_prev = (prev->u - prev->v).norm();
    if (res_prev <= opt.tol * scale_of(prev->u)) {
      tr.reason = Termination::converged;
      break;
    }
    if (k > opt.max_iter) {
      tr.reason = Termination::max_iter;
      break;
    }
    while (true) {
      auto cur = try_eval(prev->s_next);
      bool ok = cur.has_value();
      if (ok) {
        // residual of the (possibly recomputed) step k-1 at the current gamma
        const double r = (prev->u - prev->v).norm();
        const double gl = 1.0 + gamma * L;
        const double bound = prev->lag - c * lambda * lambda / (gl * gl) * r * r;
        const double tol_abs = opt.slack * scale_of(prev->lag);
        ok = cur->lag <= bound + tol_abs && cur->phi_v <= cur->lag + tol_abs;
      }
      if (ok) {
        prev = std::move(cur);
        break;
      }
      halve(k);
      // recompute step k-1 from the stored s^{k-1}
      auto redo = try_eval(prev->s);
      while (!redo) {
        halve(k);
        redo = try_eval(prev->s);
      }
      prev = std::move(redo);
      tr.records.pop_back();
      record(k - 1, *prev);
    }
    record(k, *prev);
    tr.iterations = k;
  }
  tr.min_residual = kInf;
  for (const auto& r : tr.records) tr.min_residual = std::min(tr.min_residual, r.residual);
  tr.gamma = gamma;
  tr.c = c;
  tr.L = L;
  tr.s = prev->s;
  tr.u = prev->u;
  tr.v = prev->v;
  return tr;
}

// ---------------------------------------------------------- diagnostics ----

struct RateReport {
  long K = 0;
  /// sqrt(k) * min_{i<=k} residual_i at k = K/4, K/2, K.
  double q_quarter = 0.0, q_half = 0.0, q_full = 0.0;
  bool tail_ok = false;
  bool finite_termination = false;
  /// First k with min residual at the rounding floor (-1 if never). The tail
  /// test is read on [0, floor_k] since sqrt(k) r_k only grows past it.
  long floor_k = -1;
  /// sum_k residual_k^2 over the steps taken vs
  /// (1 + gamma L)^2/(c lambda^2) (merit_0 - min merit).
  double telescoped_sum = 0.0;
  double telescoped_bound = kInf;
  bool telescoping_ok = false;
};

/// Tail test for min_{i<=k} |u^i - v^i| = o(1/sqrt(k)) plus the telescoped
/// decrease bound, both read off a certified constant-stepsize trace.
/// The rounding floor is floor_rel * max(1, residual_0).
inline RateReport residual_rate_report(const IterationTrace& tr, double band = 1.05,
                                       double floor_rel = 1e-13) {
  RateReport rep;
  if (tr.records.empty()) throw PreconditionError("rate report: empty trace");
  const long K = static_cast<long>(tr.records.size()) - 1;
  rep.K = K;
  std::vector<double> rmin(tr.records.size());
  double m = kInf;
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    m = std::min(m, tr.records[i].residual);
    rmin[i] = m;
  }
  rep.finite_termination = rmin.back() == 0.0;
  const double floor = floor_rel * std::max(1.0, tr.records.front().residual);
  for (long k = 0; k <= K; ++k)
    if (rmin[k] <= floor) {
      rep.floor_k = k;
      break;
    }
  const long Kt = rep.floor_k >= 0 ? rep.floor_k : K;
  auto q = [&](long k) { return std::sqrt(static_cast<double>(k)) * rmin[k]; };
  if (Kt >= 4) {
    rep.q_quarter = q(Kt / 4);
    rep.q_half = q(Kt / 2);
    rep.q_full = q(Kt);
    rep.tail_ok = rep.finite_termination ||
                  (rep.q_half <= band * rep.q_quarter && rep.q_full <= band * rep.q_half);
  } else {
    rep.tail_ok = true;
  }

  // decrease steps are taken from records 0..K-1
  double sum = 0.0;
  double merit_min = tr.records.front().merit;
  for (long k = 0; k < K; ++k) sum += tr.records[k].residual * tr.records[k].residual;
  for (const auto& r : tr.records) merit_min = std::min(merit_min, r.merit);
  rep.telescoped_sum = sum;
  if (tr.certified && tr.c > 0.0) {
    const double gl = 1.0 + tr.gamma * tr.L;
    rep.telescoped_bound =
        gl * gl / (tr.c * tr.lambda * tr.lambda) * (tr.records.front().merit - merit_min);
    const double slack = 1e-10 * scale_of(tr.records.front().merit) * gl * gl /
                         (tr.c * tr.lambda * tr.lambda);
    rep.telescoping_ok = rep.telescoped_sum <= rep.telescoped_bound + slack;
  }
  return rep;
}

}  // namespace drenv
