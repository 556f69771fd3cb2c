// drenv command line: solve, certificate, sweep, selftest.

#include <drenv/admm/solver.hpp>
#include <drenv/drs/solver.hpp>
#include <drenv/io/config.hpp>
#include <drenv/io/csv.hpp>
#include <drenv/testbed/sweep.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace drenv;

namespace {

enum Exit { kConverged = 0, kFailure = 1, kMaxIter = 2, kViolation = 3, kConfig = 4 };

std::string output_path(const std::string& requested) {
  if (const char* dir = std::getenv("DRENV_OUTPUT_DIR"); dir && *dir) {
    fs::create_directories(dir);
    return (fs::path(dir) / fs::path(requested).filename()).string();
  }
  return requested;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::ConfigError("cannot read config '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

IterationTrace run(const io::RunConfig& c, const io::BuiltProblem& p) {
  if (c.algorithm == "drs" || c.algorithm == "prs") {
    DrsConfig cfg;
    cfg.gamma = *c.gamma;
    cfg.lambda = c.lambda;
    cfg.max_iter = c.max_iter;
    cfg.tol = c.tol;
    cfg.unsafe = c.unsafe;
    return run_drs(*p.composite, cfg, p.start);
  }
  if (c.algorithm == "adaptive-drs") {
    AdaptiveDrsOptions opt;
    opt.max_iter = c.max_iter;
    opt.tol = c.tol;
    return run_adaptive_drs(*p.composite, p.start, *c.L_init, c.lambda, opt);
  }
  const auto& P = *p.admm;
  const auto st0 = make_admm_state(P, p.start, Vec::Zero(P.n()), Vec::Zero(P.p()));
  if (c.algorithm == "admm") {
    AdmmConfig cfg;
    cfg.beta = *c.beta;
    cfg.lambda = c.lambda;
    cfg.max_iter = c.max_iter;
    cfg.tol = c.tol;
    cfg.unsafe = c.unsafe;
    return run_admm(P, cfg, st0);
  }
  AdaptiveAdmmOptions opt;
  opt.max_iter = c.max_iter;
  opt.tol = c.tol;
  return run_adaptive_admm(P, *c.beta, *c.L_init, st0, std::nullopt, opt);
}

int cmd_solve(const std::string& config_path) {
  io::RunConfig c;
  io::BuiltProblem p;
  try {
    c = io::parse_config_text(read_file(config_path));
    p = io::build_problem(c);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  IterationTrace tr;
  try {
    tr = run(c, p);
  } catch (const InvariantViolation& e) {
    std::cerr << "certificate violation at iteration " << e.iteration() << ": " << e.what()
              << " (excess " << e.excess() << ")\n";
    return kViolation;
  } catch (const StepsizeInfeasible& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kFailure;
  }
  const auto path = output_path(c.output);
  io::write_file(path, [&](std::ostream& os) { io::write_trace_csv(os, tr); });
  const auto& last = tr.records.back();
  std::cout << c.algorithm << ": " << to_string(tr.reason) << " after " << tr.iterations
            << " iterations, residual " << io::format_double(last.residual) << ", merit "
            << io::format_double(last.merit) << ", gamma " << io::format_double(tr.gamma);
  if (tr.halvings) std::cout << ", " << tr.halvings << " halvings";
  std::cout << "\ntrace: " << path << "\n";
  return tr.reason == Termination::converged ? kConverged : kMaxIter;
}

int cmd_certificate(double L, double sigma, double lambda) {
  StepsizeCertificate cert;
  try {
    cert = stepsize_certificate(L, sigma, lambda);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  std::cout << "L = " << io::format_double(L) << ", sigma = " << io::format_double(sigma)
            << ", lambda = " << io::format_double(lambda) << "\n";
  if (!cert.feasible) {
    std::cout << "infeasible: " << cert.reason << "\n";
    return kConverged;
  }
  std::cout << "branch: " << to_string(cert.branch) << "\n"
            << "interval: (" << io::format_double(cert.gamma_lo) << ", "
            << io::format_double(cert.gamma_hi) << ")\n"
            << "gamma,c\n";
  for (int k = 1; k <= 3; ++k) {
    const double g = cert.gamma_lo + 0.25 * k * (cert.gamma_hi - cert.gamma_lo);
    std::cout << io::format_double(g) << "," << io::format_double(cert.c(g)) << "\n";
  }
  return kConverged;
}

struct SweepArgs {
  std::vector<double> lambdas{1.0};
  std::vector<double> sigmas;
  bool sigmas_given = false;  ///< an explicit (possibly empty) list
  int grid = 41;
  double L = 1.0;
  bool empirical = false;
  long K = 100000;
  std::string output = "sweep.csv";
  std::string config;
};

int cmd_sweep(SweepArgs a) {
  try {
    if (!a.config.empty()) {
      const auto j = io::json::parse(read_file(a.config));
      io::detail::check_keys(j, {"lambdas", "sigma_over_L", "grid", "L", "empirical", "K", "output"},
                             "sweep");
      if (j.contains("lambdas")) a.lambdas = j.at("lambdas").get<std::vector<double>>();
      if (j.contains("sigma_over_L")) {
        a.sigmas = j.at("sigma_over_L").get<std::vector<double>>();
        a.sigmas_given = true;
      }
      a.grid = j.value("grid", a.grid);
      a.L = j.value("L", a.L);
      a.empirical = j.value("empirical", a.empirical);
      a.K = j.value("K", a.K);
      a.output = j.value("output", a.output);
    }
    if (!a.sigmas.empty()) a.sigmas_given = true;
    if (!a.sigmas_given) {
      if (a.grid < 2) throw io::ConfigError("sweep: grid needs at least 2 points");
      for (int i = 0; i < a.grid; ++i) a.sigmas.push_back(-1.0 + 2.0 * i / (a.grid - 1));
    }
    for (double r : a.sigmas)
      if (!(r >= -1.0 && r <= 1.0)) throw io::ConfigError("sweep: sigma/L must lie in [-1, 1]");
    for (double l : a.lambdas)
      if (!(l > 0.0 && l < 4.0)) throw io::ConfigError("sweep: lambda must lie in (0, 4)");
    if (!(a.L > 0.0) || a.K < 1) throw io::ConfigError("sweep: need L > 0 and K >= 1");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  SweepOptions opt;
  opt.L = a.L;
  opt.empirical = a.empirical;
  opt.transition.K = a.K;
  const auto rows = run_sweep(a.lambdas, a.sigmas, opt);
  const auto path = output_path(a.output);
  io::write_file(path, [&](std::ostream& os) { io::write_sweep_csv(os, rows); });
  io::write_sweep_csv(std::cout, rows);
  std::cerr << "sweep: " << rows.size() << " rows -> " << path << "\n";
  return kConverged;
}

// Quick invariant checks on small instances.
int cmd_selftest() {
  int failed = 0;
  auto check = [&](const std::string& name, auto&& body) {
    bool ok = false;
    std::string note;
    try {
      ok = body();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    std::cout << (ok ? "PASS " : "FAIL ") << name << note << "\n";
    if (!ok) ++failed;
  };

  check("certificate intervals", [] {
    const auto a = stepsize_certificate(1.0, -0.5, 1.0);
    const auto b = stepsize_certificate(1.0, 1.0, 2.0);
    const auto c = stepsize_certificate(1.0, 0.0, 2.0);
    return a.feasible && a.gamma_hi == 1.0 && b.feasible && std::abs(b.gamma_hi - 1.0) < 1e-14 &&
           !c.feasible;
  });

  check("envelope identities", [] {
    for (auto kind : {InstanceKind::convex_quadratic_l1, InstanceKind::nonconvex_quadratic_l1,
                      InstanceKind::quadratic_l0, InstanceKind::quadratic_finite_set}) {
      const auto inst = random_instance(7, 5, kind);
      const auto& P = inst.problem;
      const double gamma = 0.4 / P.f.lipschitz;
      Rng rng(11);
      for (int i = 0; i < 5; ++i) {
        const Vec s = rng.normal_vec(5);
        const auto e = eval_dre(P, gamma, s);
        const double fbe = eval_fbe(P, gamma, e.u);
        const double lag = augmented_lagrangian_drs(P.f.value(e.u), P.g.value(e.v), gamma, e.u,
                                                    e.v, (e.u - s) / gamma);
        const double tol = 1e-9 * scale_of(e.dre_value);
        if (std::abs(e.dre_value - fbe) > tol || std::abs(e.dre_value - lag) > tol) return false;
        if (e.dre_value > e.phi_u + tol) return false;
      }
    }
    return true;
  });

  check("certified DRS decrease", [] {
    for (auto kind : {InstanceKind::convex_quadratic_l1, InstanceKind::nonconvex_quadratic_l1}) {
      const auto inst = random_instance(3, 6, kind);
      const auto& f = inst.problem.f;
      const auto cert = stepsize_certificate(f.lipschitz, f.hypoconvexity, 1.0);
      DrsConfig cfg;
      cfg.gamma = 0.5 * (cert.gamma_lo + cert.gamma_hi);
      cfg.max_iter = 5000;
      run_drs(inst.problem, cfg, Vec::Zero(6));  // throws on a violated decrease
    }
    return true;
  });

  check("ADMM matches DRS under the bridge", [] {
    const auto inst = random_instance(5, 4, InstanceKind::convex_quadratic_l1);
    const double beta = 2.0 * inst.admm.L + 1.0, lambda = 1.3;
    auto st = make_admm_state(inst.admm, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4));
    st = admm_step(inst.admm, beta, lambda, st);
    Vec s = admm_to_drs_vars(inst.admm, st, beta).s;
    for (int k = 0; k < 10; ++k) {
      st = admm_step(inst.admm, beta, lambda, st);
      const auto d = drs_step(inst.bridged, 1.0 / beta, lambda, s);
      const auto vars = admm_to_drs_vars(inst.admm, st, beta);
      if ((vars.s - d.s_next).norm() > 1e-8 * scale_of(s)) return false;
      s = d.s_next;
    }
    return true;
  });

  check("gamma fixture stalls beyond 1/L", [] {
    return gamma_necessity_experiment(1.0, 0.0, 2.0, 1.25, 1.0, 0.5, 2000).stalled &&
           !gamma_necessity_experiment(1.0, 0.0, 2.0, 0.5, 1.0, 0.5, 2000).stalled;
  });

  check("lambda fixture contraction ratio", [] {
    const auto r = lambda_necessity_experiment(1.0, 0.0, 2.0, 0.5, 1.5, 2.6, 200);
    return r.ratio_samples > 0 && r.max_ratio_error < 1e-9;
  });

  check("adaptive DRS halvings", [] {
    const auto inst = random_instance(9, 5, InstanceKind::nonconvex_quadratic_l1);
    AdaptiveDrsOptions opt;
    opt.max_iter = 5000;
    const auto tr = run_adaptive_drs(inst.problem, Vec::Zero(5),
                                     inst.problem.f.lipschitz / 16.0, 1.0, opt);
    return tr.halvings <= 5;
  });

  std::cout << (failed ? "selftest: FAILED " + std::to_string(failed) : std::string("selftest: ok"))
            << "\n";
  return failed ? kFailure : kConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Douglas-Rachford / ADMM toolkit with envelope certificates"};
  app.require_subcommand(1);

  std::string config;
  auto* solve = app.add_subcommand("solve", "run a solver from a JSON config, write a CSV trace");
  solve->add_option("config", config, "config file")->required();

  double L = 1.0, sigma = 0.0, lambda = 1.0;
  auto* cert = app.add_subcommand("certificate", "print the certified stepsize interval");
  cert->add_option("--L", L, "Lipschitz modulus of grad f")->required();
  cert->add_option("--sigma", sigma, "hypoconvexity modulus of f")->required();
  cert->add_option("--lambda", lambda, "relaxation parameter")->required();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "certified stepsize bounds over a sigma/L grid");
  sweep->add_option("--config", sw.config, "JSON sweep config");
  sweep->add_option("--lambda", sw.lambdas, "relaxation values")->delimiter(',');
  sweep->add_option("--sigma", sw.sigmas, "sigma/L values")->delimiter(',');
  sweep->add_option("--grid", sw.grid, "uniform sigma/L grid size on [-1, 1]");
  sweep->add_option("--L", sw.L, "Lipschitz modulus");
  sweep->add_flag("--empirical", sw.empirical, "bisect the fixtures as well (lambda < 2)");
  sweep->add_option("--K", sw.K, "iterations per fixture run");
  sweep->add_option("-o,--output", sw.output, "summary CSV");

  auto* self = app.add_subcommand("selftest", "run the quick invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*solve) return cmd_solve(config);
    if (*cert) return cmd_certificate(L, sigma, lambda);
    if (*sweep) return cmd_sweep(sw);
    if (*self) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
