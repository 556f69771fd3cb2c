#pragma once

#include <drenv/core/prox.hpp>
#include <drenv/lattice.hpp>

#include <vector>

namespace drenv {

/// One evaluation of the Douglas-Rachford envelope
///   DRE(s) = f(u) + g(v) + <grad f(u), v - u> + |v - u|^2 / (2 gamma)
/// with u = prox_{gamma f}(s), v = prox_{gamma g}(2u - s).
struct DreEvaluation {
  Vec s, u, v;
  double dre_value = 0.0;
  double phi_u = 0.0;
  double phi_v = 0.0;
  double gamma = 0.0;
  /// gamma >= 1/L_f: u is still unique but the envelope theory does not apply.
  bool outside_theory = false;
};

namespace detail {

inline double dre_formula(const SmoothOracle& f, double gval, double gamma,
                          const Vec& u, const Vec& v) {
  if (gval == kInf) return kInf;
  const Vec d = v - u;
  return f.value(u) + gval + f.gradient(u).dot(d) + d.squaredNorm() / (2.0 * gamma);
}

}  // namespace detail

inline DreEvaluation eval_dre(const CompositeProblem& P, double gamma, const Vec& s) {
  DreEvaluation e;
  e.s = s;
  e.gamma = gamma;
  e.u = smooth_prox(P.f, gamma, s);
  e.v = eval_prox(P.g, gamma, 2.0 * e.u - s);
  e.dre_value = detail::dre_formula(P.f, P.g.value(e.v), gamma, e.u, e.v);
  e.phi_u = P.objective(e.u);
  e.phi_v = P.objective(e.v);
  e.outside_theory = !(gamma * P.f.lipschitz < 1.0);
  return e;
}

/// Forward-backward envelope at u, v = prox_{gamma g}(u - gamma grad f(u)).
inline double eval_fbe(const CompositeProblem& P, double gamma, const Vec& u) {
  const Vec v = eval_prox(P.g, gamma, u - gamma * P.f.gradient(u));
  return detail::dre_formula(P.f, P.g.value(v), gamma, u, v);
}

/// f(x) + g(z) + <y, Ax + Bz - b> + beta/2 |Ax + Bz - b|^2
inline double augmented_lagrangian(double f_val, double g_val, double beta,
                                   const Vec& x, const Vec& z, const Vec& y,
                                   const Mat& A, const Mat& B, const Vec& b) {
  if (!(beta > 0.0)) throw PreconditionError("augmented Lagrangian: beta must be > 0");
  if (A.cols() != x.size() || B.cols() != z.size() || A.rows() != B.rows() ||
      A.rows() != b.size() || y.size() != b.size())
    throw PreconditionError("augmented Lagrangian: dimension mismatch");
  if (f_val == kInf || g_val == kInf) return kInf;
  const Vec r = A * x + B * z - b;
  return f_val + g_val + y.dot(r) + 0.5 * beta * r.squaredNorm();
}

/// DRS specialization (A = I, B = -I, b = 0, beta = 1/gamma):
/// f(u) + g(v) + <y, u - v> + |u - v|^2 / (2 gamma).
inline double augmented_lagrangian_drs(double f_val, double g_val, double gamma,
                                       const Vec& u, const Vec& v, const Vec& y) {
  if (!(gamma > 0.0)) throw PreconditionError("augmented Lagrangian: gamma must be > 0");
  if (u.size() != v.size() || u.size() != y.size())
    throw PreconditionError("augmented Lagrangian: dimension mismatch");
  if (f_val == kInf || g_val == kInf) return kInf;
  const Vec r = u - v;
  return f_val + g_val + y.dot(r) + r.squaredNorm() / (2.0 * gamma);
}

struct SandwichReport {
  DreEvaluation eval;
  double upper_slack = 0.0;  ///< phi(u) - DRE(s)
  double lower_slack = 0.0;  ///< DRE(s) - (1 - gamma L)/(2 gamma)|u - v|^2 - phi(v)
  /// max(0, -slack) / max(1, |DRE|) over both inequalities.
  double violation = 0.0;
};

/// DRE(s) <= phi(u) and phi(v) <= DRE(s) - (1 - gamma L)/(2 gamma) |u - v|^2.
inline SandwichReport sandwich_check(const CompositeProblem& P, double gamma,
                                     const Vec& s) {
  if (!(gamma > 0.0 && gamma * P.f.lipschitz < 1.0))
    throw StepsizeInfeasible("sandwich check requires 0 < gamma < 1/L_f");
  SandwichReport r;
  r.eval = eval_dre(P, gamma, s);
  const auto& e = r.eval;
  const double L = P.f.lipschitz;
  r.upper_slack = e.phi_u - e.dre_value;
  r.lower_slack = e.dre_value -
                  (1.0 - gamma * L) / (2.0 * gamma) * (e.u - e.v).squaredNorm() -
                  e.phi_v;
  const double scale = scale_of(e.dre_value);
  r.violation = std::max(neg(r.upper_slack), neg(r.lower_slack)) / scale;
  return r;
}

struct MinEquivalenceReport {
  LatticeMin phi;
  LatticeMin dre;
  double inf_gap = 0.0;  ///< |min phi - min DRE| over the lattice
  double value_tolerance = 0.0;
  Vec prox_of_dre_argmin;  ///< prox_{gamma f} of the DRE lattice argmin
  /// Distance from prox_of_dre_argmin to the nearest near-optimal phi point.
  double argmin_gap = 0.0;
  double argmin_tolerance = 0.0;
  bool values_agree = false;
  bool argmins_agree = false;
};

namespace detail {

/// max_i |h(x + res e_i) - h(x)| / res over coordinates with finite values.
inline double lattice_slope(const std::function<double(const Vec&)>& h, const Vec& x,
                            double res) {
  const double h0 = h(x);
  double slope = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      Vec y = x;
      y(i) += sgn * res;
      const double hy = h(y);
      if (std::isfinite(hy) && std::isfinite(h0))
        slope = std::max(slope, std::abs(hy - h0) / res);
    }
  }
  return slope;
}

}  // namespace detail

/// Compares inf phi with inf DRE and argmin phi with prox_{gamma f}(argmin DRE)
/// by brute force on a lattice (dimension <= 2).
inline MinEquivalenceReport check_min_equivalence(const CompositeProblem& P,
                                                  double gamma,
                                                  const Lattice& lat = {}) {
  if (P.dim() > 2)
    throw PreconditionError("min-equivalence check: dimension must be <= 2");
  if (!(gamma > 0.0 && gamma * P.f.lipschitz < 1.0))
    throw StepsizeInfeasible("min-equivalence check requires 0 < gamma < 1/L_f");
  const std::function<double(const Vec&)> phi = [&](const Vec& x) {
    return P.objective(x);
  };
  const std::function<double(const Vec&)> dre = [&](const Vec& s) {
    return eval_dre(P, gamma, s).dre_value;
  };
  MinEquivalenceReport r;
  r.phi = lattice_minimize(phi, P.dim(), lat);
  r.dre = lattice_minimize(dre, P.dim(), lat);
  const double res = lat.resolution;
  const double slope = detail::lattice_slope(phi, r.phi.argmin, res) +
                       detail::lattice_slope(dre, r.dre.argmin, res);
  r.value_tolerance = (1.0 + slope) * res * std::sqrt(static_cast<double>(P.dim()));
  r.inf_gap = std::abs(r.phi.value - r.dre.value);
  r.values_agree = r.inf_gap <= r.value_tolerance;

  r.prox_of_dre_argmin = smooth_prox(P.f, gamma, r.dre.argmin);
  const double contraction = 1.0 / (1.0 + gamma * std::min(P.f.hypoconvexity, 0.0));
  r.argmin_tolerance =
      (1.0 + contraction) * res * std::sqrt(static_cast<double>(P.dim())) + 1e-12;
  r.argmin_gap = kInf;
  for (const auto& c : r.phi.candidates) {
    if (c.value > r.phi.value + r.value_tolerance) continue;
    r.argmin_gap = std::min(r.argmin_gap, (c.x - r.prox_of_dre_argmin).norm());
  }
  r.argmins_agree = r.argmin_gap <= r.argmin_tolerance;
  return r;
}

struct RayProbeReport {
  std::vector<double> radii;
  std::vector<double> phi;
  std::vector<double> dre;
  bool phi_exceeds = false;  ///< phi at the largest radius exceeds the threshold
  bool dre_exceeds = false;
};

/// Samples phi and DRE along the ray t * direction. Used to compare level
/// boundedness of phi and of the envelope.
inline RayProbeReport ray_growth_probe(const CompositeProblem& P, double gamma,
                                       const Vec& direction,
                                       const std::vector<double>& radii,
                                       double threshold) {
  if (direction.size() != P.dim() || direction.norm() == 0.0)
    throw PreconditionError("ray probe: bad direction");
  if (radii.empty()) throw PreconditionError("ray probe: no radii");
  RayProbeReport r;
  r.radii = radii;
  for (double t : radii) {
    const Vec s = t * direction;
    r.phi.push_back(P.objective(s));
    r.dre.push_back(eval_dre(P, gamma, s).dre_value);
  }
  r.phi_exceeds = r.phi.back() > threshold;
  r.dre_exceeds = r.dre.back() > threshold;
  return r;
}

}  // namespace drenv
