#pragma once

#include <drenv/drs/certificate.hpp>

namespace drenv {

/// Feasible penalties (beta_lo, beta_hi) and the decrease constant c(beta).
struct PenaltyCertificate {
  double lambda = 0.0;
  bool feasible = false;
  std::string reason;
  double beta_lo = kInf;  ///< open lower end
  double beta_hi = kInf;  ///< open upper end (finite only for lambda > 2)
  std::function<double(double)> c_fn;

  bool contains(double beta) const {
    if (!feasible) return false;
    const double m = StepsizeCertificate::kMargin * beta_lo;
    return beta > beta_lo + m && beta < beta_hi;
  }
  double c(double beta) const { return c_fn ? c_fn(beta) : 0.0; }
  /// 1 / beta_lo, the stepsize gamma = 1/beta at the boundary.
  double inv_beta_lo() const { return feasible ? 1.0 / beta_lo : 0.0; }
};

/// Conservative rows for lambda in (0, 2]: L = L_{A|>f}, sigma_f the
/// hypoconvexity of f (sigma_f >= 0 selects the convex row).
inline PenaltyCertificate penalty_certificate(double L, double sigma_f, double lambda,
                                              double normA) {
  if (!(L > 0.0)) throw PreconditionError("penalty certificate: L must be > 0");
  if (!(lambda > 0.0 && lambda <= 2.0))
    throw PreconditionError("penalty certificate: lambda must lie in (0, 2]");
  PenaltyCertificate r;
  r.lambda = lambda;
  if (lambda < 2.0) {
    r.feasible = true;
    if (sigma_f >= 0.0) {
      r.beta_lo = L;
      r.c_fn = [=](double beta) {
        return beta * (2.0 - lambda) / (2.0 * lambda) - L * pos(L / (lambda * beta) - 0.5);
      };
    } else {
      r.beta_lo = 2.0 * L / (2.0 - lambda);
      r.c_fn = [=](double beta) { return beta * (2.0 - lambda) / (2.0 * lambda) - L / lambda; };
    }
    return r;
  }
  if (!(sigma_f > 0.0)) {
    r.reason = "lambda = 2 requires a strongly convex f";
    return r;
  }
  if (!(normA > 0.0)) throw PreconditionError("penalty certificate: |A| must be > 0");
  r.feasible = true;
  r.beta_lo = L;
  r.c_fn = [=](double beta) {
    return sigma_f / (2.0 * normA * normA) * (1.0 - L / beta);
  };
  return r;
}

/// Tight range from the DRS certificate of the image function with
/// gamma = 1/beta: beta in (1/gamma_hi, 1/gamma_lo), c(beta) = c_DRS(1/beta).
inline PenaltyCertificate tight_penalty_certificate(double L_img, double sigma_img,
                                                    double lambda) {
  const auto cert = stepsize_certificate(L_img, sigma_img, lambda);
  PenaltyCertificate r;
  r.lambda = lambda;
  r.feasible = cert.feasible;
  r.reason = cert.reason;
  if (!cert.feasible) return r;
  r.beta_lo = 1.0 / cert.gamma_hi;
  r.beta_hi = cert.gamma_lo > 0.0 ? 1.0 / cert.gamma_lo : kInf;
  r.c_fn = [cert](double beta) { return cert.c(1.0 / beta); };
  return r;
}

}  // namespace drenv
