#pragma once

#include <drenv/core/prox.hpp>
#include <drenv/envelope.hpp>

#include <map>
#include <mutex>
#include <optional>
#include <sstream>

namespace drenv {

/// x-subproblem: argmin_x f(x) + <y, Ax> + beta/2 |Ax + Bz - b|^2.
using XSolver = std::function<Vec(double beta, const Vec& z, const Vec& y)>;
/// z-subproblem: argmin_z g(z) + <y, Bz> + beta/2 |Ax + Bz - b|^2.
using ZSolver = std::function<Vec(double beta, const Vec& x, const Vec& y)>;

/// minimize f(x) + g(z) subject to Ax + Bz = b.
struct AdmmProblem {
  std::string name = "admm";
  Mat A;  ///< p x m, surjective
  Mat B;  ///< p x n
  Vec b;  ///< p
  std::function<double(const Vec&)> f_eval;
  std::function<double(const Vec&)> g_eval;
  std::function<Vec(const Vec&)> f_grad;  ///< optional, for KKT audits
  XSolver x_solver;
  ZSolver z_solver;
  /// Declared moduli of the image function A|>f.
  double L = 0.0;
  double sigma = 0.0;
  /// Strong convexity modulus of f itself (used by the lambda = 2 row).
  double sigma_f = 0.0;
  std::optional<Mat> A_inverse;

  Index p() const { return A.rows(); }
  Index m() const { return A.cols(); }
  Index n() const { return B.cols(); }

  void validate() const {
    if (A.rows() == 0 || A.cols() == 0 || B.cols() == 0)
      throw PreconditionError(name + ": empty matrices");
    if (B.rows() != A.rows() || b.size() != A.rows())
      throw PreconditionError(name + ": A, B, b have inconsistent row counts");
    if (!f_eval || !g_eval || !x_solver || !z_solver)
      throw PreconditionError(name + ": value oracles and subproblem solvers required");
    if (A.rows() > A.cols() || smallest_singular_value(A) <= 1e-10)
      throw PreconditionError(name + ": A must be surjective");
    if (!(L >= 0.0) || std::abs(sigma) > L * (1.0 + 1e-12))
      throw PreconditionError(name + ": declared moduli need L >= 0, |sigma| <= L");
    if (A_inverse && (A_inverse->rows() != A.cols() || A_inverse->cols() != A.rows()))
      throw PreconditionError(name + ": A_inverse has wrong shape");
  }
};

struct AdmmState {
  Vec x, z, y, y_half;
  double beta = 0.0;
  double lambda = 1.0;
};

inline AdmmState make_admm_state(const AdmmProblem& P, const Vec& x, const Vec& z,
                                 const Vec& y) {
  if (x.size() != P.m() || z.size() != P.n() || y.size() != P.p())
    throw PreconditionError(P.name + ": state dimensions do not match the problem");
  AdmmState s;
  s.x = x;
  s.z = z;
  s.y = y;
  s.y_half = y;
  return s;
}

inline Vec constraint_residual(const AdmmProblem& P, const Vec& x, const Vec& z) {
  return P.A * x + P.B * z - P.b;
}

inline double admm_lagrangian(const AdmmProblem& P, double beta, const AdmmState& st) {
  return augmented_lagrangian(P.f_eval(st.x), P.g_eval(st.z), beta, st.x, st.z, st.y,
                              P.A, P.B, P.b);
}

/// y+/2 = y - beta(1 - lambda)(Ax + Bz - b); x+ = argmin L(., z, y+/2);
/// y+ = y+/2 + beta(Ax+ + Bz - b); z+ = argmin L(x+, ., y+).
inline AdmmState admm_step(const AdmmProblem& P, double beta, double lambda,
                           const AdmmState& st) {
  if (!(beta > 0.0) || !(lambda > 0.0))
    throw PreconditionError("admm: beta and lambda must be positive");
  AdmmState nx;
  nx.beta = beta;
  nx.lambda = lambda;
  nx.y_half = st.y - beta * (1.0 - lambda) * constraint_residual(P, st.x, st.z);
  try {
    nx.x = P.x_solver(beta, st.z, nx.y_half);
  } catch (const std::exception& e) {
    throw SolverError(P.name + ": x-subproblem failed (beta = " + std::to_string(beta) +
                          "): " + e.what(),
                      kInf);
  }
  nx.y = nx.y_half + beta * constraint_residual(P, nx.x, st.z);
  try {
    nx.z = P.z_solver(beta, nx.x, nx.y);
  } catch (const std::exception& e) {
    throw SolverError(P.name + ": z-subproblem failed (beta = " + std::to_string(beta) +
                          "): " + e.what(),
                      kInf);
  }
  return nx;
}

struct DrsVars {
  Vec s, u, v;
};

/// s = Ax - y/beta, u = Ax, v = b - Bz.
inline DrsVars admm_to_drs_vars(const AdmmProblem& P, const AdmmState& st, double beta) {
  DrsVars d;
  d.u = P.A * st.x;
  d.s = d.u - st.y / beta;
  d.v = P.b - P.B * st.z;
  return d;
}

struct KktResiduals {
  double primal = 0.0;        ///< |Ax + Bz - b|
  double dual_f = 0.0;        ///< |grad f(x) + A'y|, 0 when no gradient is known
  bool dual_f_structural = false;  ///< dual_f not measured: holds by construction
  double dual_g_bound = 0.0;  ///< beta |B| primal, bounds dist(-B'y, subdiff g(z))
};

inline KktResiduals kkt_residuals(const AdmmProblem& P, const AdmmState& st,
                                  double beta) {
  KktResiduals r;
  r.primal = constraint_residual(P, st.x, st.z).norm();
  if (P.f_grad) {
    r.dual_f = (P.f_grad(st.x) + P.A.transpose() * st.y).norm();
  } else {
    r.dual_f_structural = true;
  }
  r.dual_g_bound = beta * spectral_norm(P.B) * r.primal;
  return r;
}

// ------------------------------------------------------ shipped solvers ----

/// Exact x-solver for f(x) = 1/2 x'Qx + q'x and any A:
/// (Q + beta A'A) x = -q - A'y - beta A'(Bz - b). Factorizations are cached
/// per beta.
inline XSolver quadratic_x_solver(const Mat& Q, const Vec& q, const Mat& A, const Mat& B,
                                  const Vec& b) {
  struct Cache {
    std::mutex mu;
    std::map<double, std::shared_ptr<Eigen::LLT<Mat>>> llt;
  };
  auto cache = std::make_shared<Cache>();
  const Mat AtA = A.transpose() * A;
  return [=](double beta, const Vec& z, const Vec& y) -> Vec {
    std::shared_ptr<Eigen::LLT<Mat>> fac;
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      auto it = cache->llt.find(beta);
      if (it == cache->llt.end()) {
        auto f = std::make_shared<Eigen::LLT<Mat>>(Mat(Q + beta * AtA));
        if (f->info() != Eigen::Success) {
          std::ostringstream os;
          os << "Q + beta A'A is not positive definite for beta = " << beta
             << " (subproblem unbounded)";
          throw SolverError(os.str(), kInf);
        }
        it = cache->llt.emplace(beta, f).first;
      }
      fac = it->second;
    }
    const Vec rhs = -q - A.transpose() * y - beta * A.transpose() * (B * z - b);
    return fac->solve(rhs);
  };
}

/// Exact z-solver for diagonal B = diag(d) (all d_i != 0):
/// z_i = prox_{g/(beta d_i^2)}(w_i), w = -(Ax - b + y/beta) ./ d.
/// Non-separable g requires all |d_i| equal.
inline ZSolver prox_z_solver(const ProxableOracle& g, const Vec& d, const Mat& A,
                             const Vec& b) {
  if ((d.array() == 0.0).any())
    throw PreconditionError("prox z-solver: diagonal of B must be nonzero");
  const double d0 = std::abs(d(0));
  const bool uniform = (d.array().abs() == d0).all();
  if (!uniform && !g.separable)
    throw PreconditionError("prox z-solver: non-uniform diagonal needs a separable g");
  return [=](double beta, const Vec& x, const Vec& y) -> Vec {
    const Vec w = (-(A * x - b + y / beta)).cwiseQuotient(d);
    if (uniform) return eval_prox(g, 1.0 / (beta * d0 * d0), w);
    Vec z(w.size());
    for (Index i = 0; i < w.size(); ++i)
      z(i) = eval_prox(g, 1.0 / (beta * d(i) * d(i)), Vec::Constant(1, w(i)))(0);
    return z;
  };
}

}  // namespace drenv
