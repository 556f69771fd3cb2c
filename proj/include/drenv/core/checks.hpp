#pragma once

#include <drenv/core/prox.hpp>

#include <utility>
#include <vector>

namespace drenv {

struct ProxRegularityReport {
  /// Largest violation over all pairs and inequalities, normalized by
  /// max(1, |s - s'|^2) (inner products) or max(1, |s - s'|) (norms).
  double max_violation = 0.0;
  std::size_t pairs = 0;
};

/// For u = prox_{gamma f}(s), u' = prox_{gamma f}(s'):
///   <u - u', s - s'> >= |s - s'|^2 / (1 + gamma L)
///   <u - u', s - s'> >= (1 + gamma sigma) |u - u'|^2
///   |s - s'|/(1 + gamma L) <= |u - u'| <= |s - s'|/(1 + gamma sigma)
inline ProxRegularityReport check_smooth_prox_regularity(
    const SmoothOracle& f, double gamma,
    const std::vector<std::pair<Vec, Vec>>& samples) {
  const double L = f.lipschitz;
  const double sigma = f.hypoconvexity;
  ProxRegularityReport rep;
  for (const auto& [s1, s2] : samples) {
    const Vec u1 = smooth_prox(f, gamma, s1);
    const Vec u2 = smooth_prox(f, gamma, s2);
    const Vec ds = s1 - s2;
    const Vec du = u1 - u2;
    const double ip = du.dot(ds);
    const double ds2 = ds.squaredNorm();
    const double sq_scale = std::max(1.0, ds2);
    const double lin_scale = std::max(1.0, ds.norm());
    const double v1 = (ds2 / (1.0 + gamma * L) - ip) / sq_scale;
    const double v2 = ((1.0 + gamma * sigma) * du.squaredNorm() - ip) / sq_scale;
    const double v3 = (ds.norm() / (1.0 + gamma * L) - du.norm()) / lin_scale;
    const double v4 = (du.norm() - ds.norm() / (1.0 + gamma * sigma)) / lin_scale;
    rep.max_violation = std::max({rep.max_violation, v1, v2, v3, v4});
    ++rep.pairs;
  }
  return rep;
}

struct MoreauGradientReport {
  Vec analytic;
  Vec central;
  double central_rel_error = 0.0;
  double forward_rel_error = 0.0;
  double backward_rel_error = 0.0;
  /// The envelope's second derivative jumps at s (a prox branch change).
  bool kink_detected = false;
  /// Central differences match the analytic gradient to 1e-6 relative.
  bool agrees = false;
  /// Only the one-sided differences are meaningful at s.
  bool one_sided_only = false;
};

/// Compares grad f^gamma(s) = (s - prox_{gamma f}(s)) / gamma with finite
/// differences of the Moreau envelope, step 1e-5 max(1, |s|).
inline MoreauGradientReport check_moreau_gradient(const SmoothOracle& f,
                                                  double gamma, const Vec& s) {
  auto envelope = [&](const Vec& x) {
    const Vec u = smooth_prox(f, gamma, x);
    return f.value(u) + (u - x).squaredNorm() / (2.0 * gamma);
  };
  const double h = 1e-5 * scale_of(s);
  const Index n = s.size();
  MoreauGradientReport rep;
  rep.analytic = (s - smooth_prox(f, gamma, s)) / gamma;
  rep.central = Vec(n);
  Vec fwd(n), bwd(n);
  const double e0 = envelope(s);
  for (Index i = 0; i < n; ++i) {
    Vec p1 = s, m1 = s, p2 = s, m2 = s;
    p1(i) += h;
    m1(i) -= h;
    p2(i) += 2.0 * h;
    m2(i) -= 2.0 * h;
    const double ep1 = envelope(p1), em1 = envelope(m1);
    const double ep2 = envelope(p2), em2 = envelope(m2);
    rep.central(i) = (ep1 - em1) / (2.0 * h);
    fwd(i) = (ep1 - e0) / h;
    bwd(i) = (e0 - em1) / h;
    const double d2p = (ep2 - 2.0 * ep1 + e0) / (h * h);
    const double d2m = (e0 - 2.0 * em1 + em2) / (h * h);
    if (std::abs(d2p - d2m) > 1e-3 * std::max({1.0, std::abs(d2p), std::abs(d2m)}))
      rep.kink_detected = true;
  }
  const double scale = scale_of(rep.analytic);
  rep.central_rel_error = (rep.central - rep.analytic).norm() / scale;
  rep.forward_rel_error = (fwd - rep.analytic).norm() / scale;
  rep.backward_rel_error = (bwd - rep.analytic).norm() / scale;
  rep.agrees = !rep.kink_detected && rep.central_rel_error <= 1e-6;
  rep.one_sided_only = rep.kink_detected;
  return rep;
}

enum class LowerBoundVariant { simple, mixed };

struct LowerBoundReport {
  double lhs = 0.0;  ///< f(y)
  double rhs = 0.0;  ///< f(x) + <grad f(x), y - x> + rho(y, x)
  double violation = 0.0;  ///< max(0, rhs - lhs) / max(1, |lhs|)
};

/// f(y) >= f(x) + <grad f(x), y - x> + rho(y, x), with rho = sigma/2 |y - x|^2
/// (simple) or, when -L < sigma <= 0,
/// rho = sigma L / (2(L + sigma)) |y - x|^2 + |grad f(y) - grad f(x)|^2 / (2(L + sigma)).
inline LowerBoundReport check_hypoconvex_lower_bound(const SmoothOracle& f,
                                                     LowerBoundVariant variant,
                                                     const Vec& x, const Vec& y) {
  const double L = f.lipschitz;
  const double sigma = f.hypoconvexity;
  if (variant == LowerBoundVariant::mixed && !(sigma <= 0.0 && sigma > -L))
    throw PreconditionError("mixed lower bound requires -L < sigma <= 0");
  const Vec gx = f.gradient(x);
  const Vec d = y - x;
  double rho = 0.0;
  if (variant == LowerBoundVariant::simple) {
    rho = 0.5 * sigma * d.squaredNorm();
  } else {
    const Vec dg = f.gradient(y) - gx;
    rho = sigma * L / (2.0 * (L + sigma)) * d.squaredNorm() +
          dg.squaredNorm() / (2.0 * (L + sigma));
  }
  LowerBoundReport rep;
  rep.lhs = f.value(y);
  rep.rhs = f.value(x) + gx.dot(d) + rho;
  rep.violation = pos(rep.rhs - rep.lhs) / scale_of(rep.lhs);
  return rep;
}

struct SmoothnessEstimate {
  double lipschitz = 0.0;      ///< max of <v1 - v2, x1 - x2> / |x1 - x2|^2
  double hypoconvexity = 0.0;  ///< min of the same ratio
  std::size_t pairs = 0;
};

/// Empirical curvature range from (point, gradient) samples over all distinct
/// pairs. Coincident points are skipped.
inline SmoothnessEstimate check_subdiff_smoothness(
    const std::vector<std::pair<Vec, Vec>>& samples) {
  if (samples.size() < 2)
    throw PreconditionError("subdifferential audit needs at least 2 samples");
  SmoothnessEstimate est;
  est.lipschitz = -kInf;
  est.hypoconvexity = kInf;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const Vec dx = samples[i].first - samples[j].first;
      const double nx = dx.squaredNorm();
      if (nx == 0.0) continue;
      const double r = (samples[i].second - samples[j].second).dot(dx) / nx;
      est.lipschitz = std::max(est.lipschitz, r);
      est.hypoconvexity = std::min(est.hypoconvexity, r);
      ++est.pairs;
    }
  }
  if (est.pairs == 0)
    throw PreconditionError("subdifferential audit: all sample points coincide");
  return est;
}

}  // namespace drenv
