#pragma once

#include <drenv/core/catalog.hpp>
#include <drenv/drs/solver.hpp>

namespace drenv {

struct MarpReport {
  Vec drs_next;   ///< s+ from one DRS step on alpha/2 dist_A^2 + beta/2 dist_B^2
  Vec marp_next;  ///< (1 - lambda/2) s + lambda/2 P_{B,q} P_{A,p} s
  double p = 0.0;
  double q = 0.0;
  double discrepancy = 0.0;
};

/// P_{C,t} = (1 - t) id + t P_C.
inline Vec relaxed_projection(const catalog::ConvexSet& C, double t, const Vec& x) {
  return (1.0 - t) * x + t * C.project(x);
}

/// One DRS step on alpha/2 dist_A^2 + beta/2 dist_B^2 against the relaxed
/// alternating projection form with p = 2 alpha gamma/(1 + alpha gamma) and
/// q = 2 beta gamma/(1 + beta gamma). beta = +inf means g is the indicator of
/// B, and q = 2 (reflection through B).
inline MarpReport marp_equivalence_check(const catalog::ConvexSet& A,
                                         const catalog::ConvexSet& B, double alpha,
                                         double beta, double gamma, double lambda,
                                         const Vec& s) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0) || !(lambda > 0.0))
    throw PreconditionError("marp: alpha, beta, gamma, lambda must be positive");
  if (alpha == kInf)
    throw PreconditionError("marp: alpha = inf makes f nonsmooth; swap the roles");
  if (A.dim != B.dim || A.dim != s.size())
    throw PreconditionError("marp: dimension mismatch");
  const SmoothOracle f = catalog::half_sq_distance(A, alpha);
  const ProxableOracle g = beta == kInf ? catalog::indicator_set(B)
                                        : as_proxable(catalog::half_sq_distance(B, beta));
  const CompositeProblem P(f, g);

  MarpReport r;
  r.drs_next = drs_step(P, gamma, lambda, s).s_next;
  r.p = 2.0 * alpha * gamma / (1.0 + alpha * gamma);
  r.q = beta == kInf ? 2.0 : 2.0 * beta * gamma / (1.0 + beta * gamma);
  r.marp_next = (1.0 - lambda / 2.0) * s +
                (lambda / 2.0) * relaxed_projection(B, r.q, relaxed_projection(A, r.p, s));
  r.discrepancy = (r.drs_next - r.marp_next).norm();
  return r;
}

}  // namespace drenv
