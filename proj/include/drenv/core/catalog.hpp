#pragma once

#include <drenv/core/prox.hpp>

#include <algorithm>
#include <memory>
#include <vector>

/// Built-in functions with closed-form proxes and exactly known moduli.
namespace drenv::catalog {

/// Membership tolerance for indicator functions of finite sets: lattice points
/// that hit a set element up to accumulated rounding still count as members.
inline constexpr double kMembershipTol = 1e-9;

// ---------------------------------------------------------------- smooth ----

/// f(x) = 1/2 x'Qx + q'x + c0 with Q symmetric. L = max |eig Q|, sigma = min eig Q.
inline SmoothOracle quadratic(const Mat& Q, const Vec& q, double c0 = 0.0) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size() || Q.rows() == 0)
    throw PreconditionError("quadratic: Q must be square and match q");
  if ((Q - Q.transpose()).norm() > 1e-12 * std::max(1.0, Q.norm()))
    throw PreconditionError("quadratic: Q must be symmetric");

  struct Data {
    Mat Q;
    Vec q;
    double c0;
    Mat V;
    Vec eig;
  };
  auto d = std::make_shared<Data>();
  d->Q = 0.5 * (Q + Q.transpose());
  d->q = q;
  d->c0 = c0;
  Eigen::SelfAdjointEigenSolver<Mat> es(d->Q);
  d->V = es.eigenvectors();
  d->eig = es.eigenvalues();

  SmoothOracle f;
  f.name = "quadratic";
  f.dim = Q.rows();
  const double lo = d->eig.minCoeff();
  const double hi = d->eig.maxCoeff();
  f.lipschitz = std::max(std::abs(lo), std::abs(hi));
  f.hypoconvexity = lo;
  f.value = [d](const Vec& x) {
    return 0.5 * x.dot(d->Q * x) + d->q.dot(x) + d->c0;
  };
  f.gradient = [d](const Vec& x) { return Vec(d->Q * x + d->q); };
  f.prox = [d](double gamma, const Vec& s) {
    const Vec denom = (1.0 + gamma * d->eig.array()).matrix();
    if (!(denom.minCoeff() > 0.0))
      throw StepsizeInfeasible("quadratic: 1 + gamma*eig(Q) must be positive");
    const Vec w = d->V.transpose() * (s - gamma * d->q);
    return Vec(d->V * (w.array() / denom.array()).matrix());
  };
  return f;
}

inline SmoothOracle zero_smooth(Index n) {
  auto f = quadratic(Mat::Zero(n, n), Vec::Zero(n));
  f.name = "zero";
  return f;
}

/// One-dimensional function equal to L/2 x^2 for x <= t and to
/// L/2 x^2 - (L - sigma)/2 (x - t)^2 beyond t. L-smooth, sigma-hypoconvex.
inline SmoothOracle counterexample(double L, double sigma, double t) {
  if (!(L > 0.0) || sigma < -L || sigma > L)
    throw PreconditionError("counterexample: need L > 0 and |sigma| <= L");
  SmoothOracle f;
  f.name = "counterexample";
  f.dim = 1;
  f.lipschitz = L;
  f.hypoconvexity = sigma;
  f.value = [=](const Vec& x) {
    const double v = x(0);
    if (v <= t) return 0.5 * L * v * v;
    return 0.5 * L * v * v - 0.5 * (L - sigma) * (v - t) * (v - t);
  };
  f.gradient = [=](const Vec& x) {
    const double v = x(0);
    Vec g(1);
    g(0) = v <= t ? L * v : L * v - (L - sigma) * (v - t);
    return g;
  };
  f.prox = [=](double gamma, const Vec& s) {
    if (!(gamma < inv_neg(sigma)))
      throw StepsizeInfeasible("counterexample: need gamma < 1/[sigma]_-");
    const double x = s(0);
    Vec u(1);
    if (x <= t * (1.0 + gamma * L))
      u(0) = x / (1.0 + gamma * L);
    else
      u(0) = (x - gamma * (L - sigma) * t) / (1.0 + gamma * sigma);
    return u;
  };
  return f;
}

// ----------------------------------------------------------- convex sets ----

/// Closed set with a (single-valued) projection.
struct ConvexSet {
  std::string kind;
  Index dim = 0;
  std::function<Vec(const Vec&)> project;

  double distance(const Vec& x) const { return (x - project(x)).norm(); }
};

inline ConvexSet ball(const Vec& center, double radius) {
  if (!(radius >= 0.0)) throw PreconditionError("ball: radius must be >= 0");
  return {"ball", center.size(), [center, radius](const Vec& x) {
            const Vec d = x - center;
            const double n = d.norm();
            if (n <= radius) return Vec(x);
            return Vec(center + d * (radius / n));
          }};
}

/// {x : a'x <= beta}
inline ConvexSet halfspace(const Vec& a, double beta) {
  if (a.norm() == 0.0) throw PreconditionError("halfspace: a must be nonzero");
  return {"halfspace", a.size(), [a, beta](const Vec& x) {
            const double r = a.dot(x) - beta;
            if (r <= 0.0) return Vec(x);
            return Vec(x - a * (r / a.squaredNorm()));
          }};
}

/// {x : a'x = beta}
inline ConvexSet hyperplane(const Vec& a, double beta) {
  if (a.norm() == 0.0) throw PreconditionError("hyperplane: a must be nonzero");
  return {"affine", a.size(), [a, beta](const Vec& x) {
            const double r = a.dot(x) - beta;
            return Vec(x - a * (r / a.squaredNorm()));
          }};
}

inline ConvexSet whole_space(Index n) {
  return {"whole-space", n, [](const Vec& x) { return x; }};
}

/// f(x) = weight/2 dist^2(x, C). Convex, L = weight, sigma = 0; the prox is
/// the relaxed projection x + t (P_C x - x) with t = weight*gamma/(1 + weight*gamma).
inline SmoothOracle half_sq_distance(const ConvexSet& set, double weight = 1.0) {
  if (!(weight > 0.0))
    throw PreconditionError("half_sq_distance: weight must be positive");
  SmoothOracle f;
  f.name = "half-sq-distance-" + set.kind;
  f.dim = set.dim;
  f.lipschitz = weight;
  f.hypoconvexity = 0.0;
  f.value = [set, weight](const Vec& x) {
    return 0.5 * weight * (x - set.project(x)).squaredNorm();
  };
  f.gradient = [set, weight](const Vec& x) {
    return Vec(weight * (x - set.project(x)));
  };
  f.prox = [set, weight](double gamma, const Vec& s) {
    const double t = weight * gamma / (1.0 + weight * gamma);
    return Vec(s + t * (set.project(s) - s));
  };
  return f;
}

// ------------------------------------------------------------- nonsmooth ----

inline ProxableOracle zero(Index n) {
  ProxableOracle g;
  g.name = "zero";
  g.dim = n;
  g.separable = true;
  g.value = [](const Vec&) { return 0.0; };
  g.prox = [](double, const Vec& x) { return x; };
  return g;
}

/// mu * |x|_1, soft thresholding.
inline ProxableOracle scaled_one_norm(double mu, Index n) {
  if (!(mu >= 0.0)) throw PreconditionError("one-norm: mu must be >= 0");
  ProxableOracle g;
  g.name = "one-norm";
  g.dim = n;
  g.separable = true;
  g.value = [mu](const Vec& x) { return mu * x.lpNorm<1>(); };
  g.prox = [mu](double gamma, const Vec& x) {
    const double k = gamma * mu;
    Vec p(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double a = std::abs(x(i)) - k;
      p(i) = a > 0.0 ? std::copysign(a, x(i)) : 0.0;
    }
    return p;
  };
  return g;
}

/// mu * |x|_0, hard thresholding at sqrt(2 gamma mu). On the threshold both 0
/// and x_i are minimizers; the larger one is returned.
inline ProxableOracle zero_norm(double mu, Index n) {
  if (!(mu >= 0.0)) throw PreconditionError("zero-norm: mu must be >= 0");
  ProxableOracle g;
  g.name = "zero-norm";
  g.dim = n;
  g.separable = true;
  g.value = [mu](const Vec& x) {
    return mu * static_cast<double>((x.array() != 0.0).count());
  };
  g.prox = [mu](double gamma, const Vec& x) {
    const double thr = 2.0 * gamma * mu;
    Vec p(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double sq = x(i) * x(i);
      if (sq > thr)
        p(i) = x(i);
      else if (sq < thr)
        p(i) = 0.0;
      else
        p(i) = std::max(x(i), 0.0);
    }
    return p;
  };
  return g;
}

/// mu * |x|_1 restricted to the box [-R, R]^n.
inline ProxableOracle one_norm_box(double mu, double R, Index n) {
  if (!(R > 0.0)) throw PreconditionError("one-norm-box: R must be positive");
  auto base = scaled_one_norm(mu, n);
  ProxableOracle g = base;
  g.name = "one-norm-box";
  g.value = [mu, R](const Vec& x) {
    if (x.lpNorm<Eigen::Infinity>() > R * (1.0 + kMembershipTol)) return kInf;
    return mu * x.lpNorm<1>();
  };
  g.prox = [base, R](double gamma, const Vec& x) {
    return Vec(base.prox(gamma, x).cwiseMax(-R).cwiseMin(R));
  };
  return g;
}

/// Indicator of [lo, hi] (coordinatewise).
inline ProxableOracle indicator_box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any())
    throw PreconditionError("box: need lo <= hi of equal size");
  ProxableOracle g;
  g.name = "box";
  g.dim = lo.size();
  g.value = [lo, hi](const Vec& x) {
    const double tol = kMembershipTol;
    for (Index i = 0; i < x.size(); ++i)
      if (x(i) < lo(i) - tol * scale_of(lo(i)) ||
          x(i) > hi(i) + tol * scale_of(hi(i)))
        return kInf;
    return 0.0;
  };
  g.prox = [lo, hi](double, const Vec& x) {
    return Vec(x.cwiseMax(lo).cwiseMin(hi));
  };
  return g;
}

namespace detail {
/// Lexicographic comparison a > b.
inline bool lex_greater(const Vec& a, const Vec& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i) > b(i)) return true;
    if (a(i) < b(i)) return false;
  }
  return false;
}
}  // namespace detail

/// Indicator of a finite set of points; prox = nearest point, ties resolved
/// toward the lexicographically largest candidate.
inline ProxableOracle indicator_finite_set(std::vector<Vec> points) {
  if (points.empty()) throw PreconditionError("finite set: empty");
  const Index n = points.front().size();
  for (const auto& p : points)
    if (p.size() != n) throw PreconditionError("finite set: mixed dimensions");
  auto pts = std::make_shared<const std::vector<Vec>>(std::move(points));
  ProxableOracle g;
  g.name = "finite-set";
  g.dim = n;
  g.value = [pts](const Vec& x) {
    for (const auto& p : *pts)
      if ((x - p).norm() <= kMembershipTol * scale_of(p)) return 0.0;
    return kInf;
  };
  g.prox = [pts](double, const Vec& x) {
    const Vec* best = nullptr;
    double best_d = kInf;
    for (const auto& p : *pts) {
      const double d = (x - p).squaredNorm();
      if (d < best_d || (d == best_d && detail::lex_greater(p, *best))) {
        best = &p;
        best_d = d;
      }
    }
    return *best;
  };
  return g;
}

/// Convenience: indicator of a finite subset of the real line.
inline ProxableOracle indicator_finite_set_1d(const std::vector<double>& values) {
  std::vector<Vec> pts;
  for (double v : values) pts.push_back(Vec::Constant(1, v));
  return indicator_finite_set(std::move(pts));
}

/// Indicator of V^n for a finite V of reals: every coordinate must lie in V.
/// Finite, separable; ties go to the larger value.
inline ProxableOracle indicator_product_set(std::vector<double> values, Index n) {
  if (values.empty()) throw PreconditionError("product set: empty");
  std::sort(values.begin(), values.end());
  ProxableOracle g;
  g.name = "product-set";
  g.dim = n;
  g.separable = true;
  g.value = [values](const Vec& x) {
    for (Index i = 0; i < x.size(); ++i) {
      bool hit = false;
      for (double v : values)
        if (std::abs(x(i) - v) <= kMembershipTol * scale_of(v)) hit = true;
      if (!hit) return kInf;
    }
    return 0.0;
  };
  g.prox = [values](double, const Vec& x) {
    Vec p(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      double best = values.front();
      double best_d = kInf;
      for (double v : values) {
        const double d = std::abs(x(i) - v);
        if (d <= best_d) {  // ascending order: ties keep the larger value
          best = v;
          best_d = d;
        }
      }
      p(i) = best;
    }
    return p;
  };
  return g;
}

/// Indicator of a closed convex set; prox = projection.
inline ProxableOracle indicator_set(const ConvexSet& set) {
  ProxableOracle g;
  g.name = "indicator-" + set.kind;
  g.dim = set.dim;
  g.value = [set](const Vec& x) {
    return set.distance(x) <= kMembershipTol * scale_of(x) ? 0.0 : kInf;
  };
  g.prox = [set](double, const Vec& x) { return set.project(x); };
  return g;
}

}  // namespace drenv::catalog
