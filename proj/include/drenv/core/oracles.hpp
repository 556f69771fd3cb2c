#pragma once

#include <drenv/types.hpp>

#include <functional>
#include <memory>
#include <string>
#include <utility>

namespace drenv {

/// Smooth term: value, gradient, and the declared curvature moduli
/// sigma <= <grad h(x) - grad h(y), x - y> / |x - y|^2 <= L.
///
/// `prox` is optional. When present it must return the unique solution u of
/// s = u + gamma * grad h(u) and throw StepsizeInfeasible when gamma is outside
/// the range where that solution is a minimizer.
struct SmoothOracle {
  std::string name;
  Index dim = 0;
  double lipschitz = 0.0;
  double hypoconvexity = 0.0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(double, const Vec&)> prox;

  bool is_affine() const { return lipschitz == 0.0; }
  bool has_closed_form_prox() const { return static_cast<bool>(prox); }

  void validate() const {
    if (dim <= 0) throw PreconditionError(name + ": dimension must be positive");
    if (!(lipschitz >= 0.0)) throw PreconditionError(name + ": L must be >= 0");
    if (std::abs(hypoconvexity) > lipschitz * (1.0 + 1e-12) + 1e-300)
      throw PreconditionError(name + ": |sigma| must not exceed L");
    if (!value || !gradient)
      throw PreconditionError(name + ": value and gradient are required");
  }
};

/// Nonsmooth term: extended-real value and a deterministic prox selection.
/// `prox(gamma, x)` returns one minimizer of g(w) + |w - x|^2 / (2 gamma); the
/// tie-break for set-valued proxes is the lexicographically largest minimizer.
struct ProxableOracle {
  std::string name;
  Index dim = 0;
  /// Supremum of gamma for which g + |.|^2/(2 gamma) is bounded below.
  double prox_threshold = kInf;
  /// Separable oracles accept vectors of any length, coordinatewise.
  bool separable = false;
  std::function<double(const Vec&)> value;
  std::function<Vec(double, const Vec&)> prox;

  void validate() const {
    if (dim <= 0) throw PreconditionError(name + ": dimension must be positive");
    if (!(prox_threshold > 0.0))
      throw PreconditionError(name + ": prox threshold must be positive");
    if (!value || !prox)
      throw PreconditionError(name + ": value and prox are required");
  }
};

/// minimize f(s) + g(s) with f smooth and g proper lsc.
struct CompositeProblem {
  SmoothOracle f;
  ProxableOracle g;

  CompositeProblem() = default;
  CompositeProblem(SmoothOracle f_, ProxableOracle g_)
      : f(std::move(f_)), g(std::move(g_)) {
    validate();
  }

  Index dim() const { return f.dim; }

  void validate() const {
    f.validate();
    g.validate();
    if (f.dim != g.dim)
      throw PreconditionError("composite problem: dimensions of f (" +
                              std::to_string(f.dim) + ") and g (" +
                              std::to_string(g.dim) + ") differ");
  }

  /// phi(x) = f(x) + g(x) on the extended reals.
  double objective(const Vec& x) const {
    const double gv = g.value(x);
    if (gv == kInf) return kInf;
    return f.value(x) + gv;
  }
};

}  // namespace drenv
