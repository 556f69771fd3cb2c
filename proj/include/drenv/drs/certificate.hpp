#pragma once

#include <drenv/types.hpp>

#include <functional>
#include <sstream>
#include <string>

namespace drenv {

enum class CertificateBranch {
  relaxed,          ///< lambda in (0, 2)
  strongly_convex,  ///< lambda in [2, 4), needs sigma > 0
};

inline const char* to_string(CertificateBranch b) {
  return b == CertificateBranch::relaxed ? "lambda<2" : "lambda>=2";
}

/// Feasible stepsizes for given (L, sigma, lambda) and the sufficient decrease
/// constant c(gamma) on that range.
struct StepsizeCertificate {
  double L = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double p = 0.0;      ///< sigma / L
  double delta = std::numeric_limits<double>::quiet_NaN();  ///< lambda >= 2 only
  CertificateBranch branch = CertificateBranch::relaxed;
  bool feasible = false;
  std::string reason;  ///< why the range is empty
  /// Open interval (gamma_lo, gamma_hi); for lambda >= 2 the stored ends are the
  /// exact ones and `contains` shrinks them by a relative margin 1e-12.
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;

  static constexpr double kMargin = 1e-12;

  bool contains(double gamma) const {
    if (!feasible) return false;
    if (branch == CertificateBranch::relaxed) return gamma > gamma_lo && gamma < gamma_hi;
    const double m = kMargin * gamma_hi;
    return gamma > gamma_lo + m && gamma < gamma_hi - m;
  }

  /// Decrease constant at gamma, by the branch formula. Defined for any
  /// gamma > 0 (positive exactly on the certified range); see
  /// sufficient_decrease_constant for the checked version.
  double c(double gamma) const;
};

namespace detail {

/// lambda < 2, two-case form.
inline double c_relaxed_piecewise(double L, double sigma, double gamma, double lambda) {
  const double p = sigma / L;
  const double base = (2.0 - lambda) / (2.0 * lambda * gamma);
  if (p >= lambda / 2.0 - 1.0) {
    const double pm = neg(p);
    return base - L * std::max(pm / (2.0 * (1.0 - pm)), gamma * L / lambda - 0.5);
  }
  return base - neg(sigma) / lambda;
}

/// lambda < 2, single-expression form.
inline double c_relaxed_one_line(double L, double sigma, double gamma, double lambda) {
  const double pm = neg(sigma / L);
  const double a = pm < 1.0 ? pm / (2.0 * (1.0 - pm)) : kInf;
  return (2.0 - lambda) / (2.0 * lambda * gamma) -
         L * std::max(std::min(a, pm / lambda), gamma * L / lambda - 0.5);
}

/// lambda >= 2, strongly convex.
inline double c_strongly_convex(double L, double sigma, double gamma, double lambda) {
  return (2.0 - lambda) / (2.0 * lambda * gamma) +
         sigma / lambda * (lambda / 2.0 - gamma * L);
}

}  // namespace detail

inline double StepsizeCertificate::c(double gamma) const {
  if (branch == CertificateBranch::relaxed)
    return detail::c_relaxed_piecewise(L, sigma, gamma, lambda);
  return detail::c_strongly_convex(L, sigma, gamma, lambda);
}

inline StepsizeCertificate stepsize_certificate(double L, double sigma, double lambda) {
  if (!(L > 0.0)) throw PreconditionError("certificate: L must be > 0");
  if (std::abs(sigma) > L * (1.0 + 1e-12))
    throw PreconditionError("certificate: |sigma| must not exceed L");
  if (!(lambda > 0.0 && lambda < 4.0))
    throw PreconditionError("certificate: lambda must lie in (0, 4)");
  StepsizeCertificate cert;
  cert.L = L;
  cert.sigma = sigma;
  cert.lambda = lambda;
  cert.p = sigma / L;
  if (lambda < 2.0) {
    cert.branch = CertificateBranch::relaxed;
    cert.gamma_lo = 0.0;
    cert.gamma_hi = std::min((2.0 - lambda) / (2.0 * neg(sigma)), 1.0 / L);
    cert.feasible = true;
    return cert;
  }
  cert.branch = CertificateBranch::strongly_convex;
  if (!(sigma > 0.0)) {
    cert.reason = "lambda >= 2 requires a strongly convex f (sigma > 0)";
    return cert;
  }
  const double p = cert.p;
  const double lambda_max = 4.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - p)));
  if (!(lambda < lambda_max)) {
    std::ostringstream os;
    os << "lambda must be < 4/(1 + sqrt(1 - sigma/L)) = " << lambda_max;
    cert.reason = os.str();
    return cert;
  }
  const double disc = (p * lambda) * (p * lambda) - 8.0 * p * (lambda - 2.0);
  cert.delta = std::sqrt(std::max(0.0, disc));
  cert.gamma_lo = (p * lambda - cert.delta) / (4.0 * sigma);
  cert.gamma_hi = (p * lambda + cert.delta) / (4.0 * sigma);
  cert.feasible = cert.gamma_hi > cert.gamma_lo;
  if (!cert.feasible) cert.reason = "empty stepsize interval";
  return cert;
}

/// c(gamma) for a certified (gamma, lambda). For lambda < 2 both the two-case
/// and the single-expression forms are evaluated and must agree to 1e-14
/// relative.
inline double sufficient_decrease_constant(double L, double sigma, double gamma,
                                           double lambda) {
  const auto cert = stepsize_certificate(L, sigma, lambda);
  if (!cert.contains(gamma)) {
    std::ostringstream os;
    os << "gamma = " << gamma << " is not certified for (L, sigma, lambda) = (" << L
       << ", " << sigma << ", " << lambda << ")";
    if (!cert.feasible) os << ": " << cert.reason;
    throw StepsizeInfeasible(os.str());
  }
  if (cert.branch == CertificateBranch::strongly_convex)
    return detail::c_strongly_convex(L, sigma, gamma, lambda);
  const double a = detail::c_relaxed_piecewise(L, sigma, gamma, lambda);
  const double b = detail::c_relaxed_one_line(L, sigma, gamma, lambda);
  // both forms subtract O(1/gamma) terms, so compare on that scale
  const double scale = std::max({1.0, std::abs(a), (2.0 - lambda) / (2.0 * lambda * gamma)});
  if (std::abs(a - b) > 1e-13 * scale)
    throw InvariantViolation("decrease constant: two-case and one-line forms disagree",
                             -1, std::abs(a - b));
  return a;
}

/// Conservative rows using sigma = 0 (convex f) or sigma = -L otherwise.
struct SimpleStepsizeRule {
  bool feasible = false;
  double gamma_hi = 0.0;
  double c(double gamma) const { return c_fn(gamma); }
  std::function<double(double)> c_fn;
};

inline SimpleStepsizeRule simple_stepsize_rule(double L, double lambda, bool convex,
                                               double sigma = 0.0) {
  if (!(L > 0.0)) throw PreconditionError("simple rule: L must be > 0");
  if (!(lambda > 0.0 && lambda <= 2.0))
    throw PreconditionError("simple rule: lambda must lie in (0, 2]");
  SimpleStepsizeRule r;
  if (lambda < 2.0) {
    r.feasible = true;
    if (convex) {
      r.gamma_hi = 1.0 / L;
      r.c_fn = [=](double g) {
        return (2.0 - lambda) / (2.0 * lambda * g) - L * pos(g * L / lambda - 0.5);
      };
    } else {
      r.gamma_hi = (2.0 - lambda) / (2.0 * L);
      r.c_fn = [=](double g) { return (2.0 - lambda) / (2.0 * lambda * g) - L / lambda; };
    }
    return r;
  }
  if (sigma > 0.0) {
    r.feasible = true;
    r.gamma_hi = 1.0 / L;
    r.c_fn = [=](double g) { return sigma / 2.0 * (1.0 - g * L); };
  } else {
    r.c_fn = [](double) { return 0.0; };
  }
  return r;
}

}  // namespace drenv
