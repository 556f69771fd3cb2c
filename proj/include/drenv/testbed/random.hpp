#pragma once

#include <drenv/admm/problem.hpp>
#include <drenv/core/catalog.hpp>
#include <drenv/testbed/rng.hpp>

#include <string>

namespace drenv {

enum class InstanceKind {
  convex_quadratic_l1,
  nonconvex_quadratic_l1,
  quadratic_l0,
  quadratic_finite_set,
};

inline const char* to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::convex_quadratic_l1: return "convex-quadratic+l1";
    case InstanceKind::nonconvex_quadratic_l1: return "nonconvex-quadratic+l1";
    case InstanceKind::quadratic_l0: return "quadratic+l0";
    case InstanceKind::quadratic_finite_set: return "quadratic+finite-set";
  }
  return "?";
}

inline InstanceKind instance_kind_from_string(const std::string& s) {
  for (auto k : {InstanceKind::convex_quadratic_l1, InstanceKind::nonconvex_quadratic_l1,
                 InstanceKind::quadratic_l0, InstanceKind::quadratic_finite_set})
    if (s == to_string(k)) return k;
  throw PreconditionError("unknown instance kind '" + s + "'");
}

/// Random f(x) = 1/2 x'Qx + q'x plus a prox-friendly g, with an ADMM twin
///   minimize f(x) + g(z)  s.t.  Ax - z = b
/// whose DRS reformulation is f_hat(s) = f(A^-1 s), g_hat(s) = g(s - b).
struct RandomInstance {
  InstanceKind kind;
  std::uint64_t seed = 0;
  Mat Q;
  Vec q;
  double mu = 0.0;  ///< weight of the nonsmooth term
  CompositeProblem problem;

  Mat A;  ///< invertible, singular values in [0.5, 2]
  Mat A_inv;
  Vec b;
  AdmmProblem admm;
  CompositeProblem bridged;  ///< (f_hat, g_hat)
};

inline RandomInstance random_instance(std::uint64_t seed, Index n, InstanceKind kind) {
  if (n <= 0 || n > 100) throw PreconditionError("random instance: need 1 <= n <= 100");
  Rng rng(seed);
  RandomInstance r;
  r.kind = kind;
  r.seed = seed;

  // spectrum: convex kinds in [0.1, 2]; nonconvex ones get one eigenvalue in [-1, -0.2]
  const bool nonconvex = kind == InstanceKind::nonconvex_quadratic_l1 ||
                         kind == InstanceKind::quadratic_finite_set;
  Vec eig = rng.uniform_vec(n, nonconvex ? -1.0 : 0.1, 2.0);
  if (nonconvex) eig(0) = rng.uniform(-1.0, -0.2);
  const Mat V = rng.orthogonal(n);
  r.Q = V * eig.asDiagonal() * V.transpose();
  r.Q = 0.5 * (r.Q + r.Q.transpose()).eval();
  r.q = rng.normal_vec(n);
  r.mu = rng.uniform(0.1, 1.0);

  ProxableOracle g;
  switch (kind) {
    case InstanceKind::convex_quadratic_l1:
      g = catalog::scaled_one_norm(r.mu, n);
      break;
    case InstanceKind::nonconvex_quadratic_l1:
      // the box keeps phi bounded below along negative-curvature directions
      g = catalog::one_norm_box(r.mu, 5.0, n);
      break;
    case InstanceKind::quadratic_l0:
      g = catalog::zero_norm(r.mu, n);
      break;
    case InstanceKind::quadratic_finite_set:
      g = catalog::indicator_product_set({-1.0, 1.0}, n);
      break;
  }
  r.problem = CompositeProblem(catalog::quadratic(r.Q, r.q), g);

  // ADMM twin
  const Mat U = rng.orthogonal(n), W = rng.orthogonal(n);
  const Vec sv = rng.uniform_vec(n, 0.5, 2.0);
  r.A = U * sv.asDiagonal() * W.transpose();
  r.A_inv = W * sv.cwiseInverse().asDiagonal() * U.transpose();
  r.b = rng.normal_vec(n);
  const Mat Qh = r.A_inv.transpose() * r.Q * r.A_inv;
  const Vec qh = r.A_inv.transpose() * r.q;
  auto f_hat = catalog::quadratic(0.5 * (Qh + Qh.transpose()), qh);
  r.bridged = CompositeProblem(f_hat, translate(g, r.b));

  const Mat B = -Mat::Identity(n, n);
  AdmmProblem& P = r.admm;
  P.name = std::string("random ") + to_string(kind);
  P.A = r.A;
  P.B = B;
  P.b = r.b;
  const Mat Q = r.Q;
  const Vec q = r.q;
  P.f_eval = [Q, q](const Vec& x) { return 0.5 * x.dot(Q * x) + q.dot(x); };
  P.f_grad = [Q, q](const Vec& x) { return Vec(Q * x + q); };
  P.g_eval = g.value;
  P.x_solver = quadratic_x_solver(Q, q, r.A, B, r.b);
  P.z_solver = prox_z_solver(g, -Vec::Ones(n), r.A, r.b);
  P.L = f_hat.lipschitz;
  P.sigma = f_hat.hypoconvexity;
  P.sigma_f = eig.minCoeff();
  P.A_inverse = r.A_inv;
  return r;
}

}  // namespace drenv
