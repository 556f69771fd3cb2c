#pragma once

#include <drenv/admm/certificate.hpp>
#include <drenv/testbed/fixtures.hpp>

#include <vector>

namespace drenv {

struct BoundRow {
  double sigma_over_L = 0.0;
  double lambda = 0.0;
  double gamma_sup_certified = 0.0;  ///< 0 when the certified range is empty
  double gamma_transition_empirical = std::numeric_limits<double>::quiet_NaN();
  /// 1/beta_lo of the ADMM penalty range for A = I (NaN for lambda > 2).
  double admm_inv_beta_certified = std::numeric_limits<double>::quiet_NaN();
};

/// Supremum of the certified stepsize range for each sigma of the grid.
inline std::vector<BoundRow> bound_curve(double lambda, double L,
                                         const std::vector<double>& sigma_grid) {
  if (!(lambda > 0.0 && lambda < 4.0)) throw PreconditionError("bound curve: lambda in (0, 4)");
  if (!(L > 0.0)) throw PreconditionError("bound curve: L must be > 0");
  std::vector<BoundRow> rows;
  for (double sigma : sigma_grid) {
    if (std::abs(sigma) > L * (1.0 + 1e-12))
      throw PreconditionError("bound curve: sigma grid must lie in [-L, L]");
    BoundRow r;
    r.sigma_over_L = sigma / L;
    r.lambda = lambda;
    const auto cert = stepsize_certificate(L, sigma, lambda);
    r.gamma_sup_certified = cert.feasible ? cert.gamma_hi : 0.0;
    if (lambda <= 2.0) {
      const auto pc = tight_penalty_certificate(L, sigma, lambda);
      r.admm_inv_beta_certified = pc.inv_beta_lo();
    }
    rows.push_back(r);
  }
  return rows;
}

struct SweepOptions {
  double L = 1.0;
  bool empirical = false;  ///< also bisect the fixtures (lambda < 2 only)
  TransitionOptions transition{100000};
};

inline std::vector<BoundRow> run_sweep(const std::vector<double>& lambdas,
                                       const std::vector<double>& sigma_over_L,
                                       const SweepOptions& opt = {}) {
  std::vector<double> sigmas;
  for (double r : sigma_over_L) sigmas.push_back(r * opt.L);
  std::vector<BoundRow> out;
  for (double lam : lambdas) {
    auto rows = bound_curve(lam, opt.L, sigmas);
    if (opt.empirical && lam < 2.0)
      for (auto& row : rows)
        row.gamma_transition_empirical =
            combined_gamma_transition(opt.L, row.sigma_over_L * opt.L, lam, opt.transition);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace drenv
