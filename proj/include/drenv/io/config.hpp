#pragma once

// Run configuration: a JSON document, parsed and validated before any
// numerics. Grammar (all keys optional unless noted):
//
//   {
//     "algorithm": "drs" | "prs" | "admm" | "adaptive-drs" | "adaptive-admm",  (required)
//     "gamma": number,        stepsize, drs / prs
//     "beta": number,         penalty, admm / adaptive-admm (initial value)
//     "lambda": number,       relaxation, default 1 (2 for prs)
//     "L_init": number,       adaptive variants
//     "tol": number,          default 1e-8
//     "max_iter": integer,    default 100000
//     "seed": integer,        default 0
//     "unsafe": bool,         default false
//     "output": string,       default "trace.csv"
//     "start": [numbers],     initial s (drs family) or x (admm family)
//     "problem": { ... }      (required)
//   }
//
// problem.kind is one of
//   "random"          instance: string, n: integer
//   "gamma-fixture"   L, sigma, t (default 2)
//   "lambda-fixture"  L, sigma, p (default 2)
//   "composite"       smooth: {...}, nonsmooth: {...}
//   "admm"            f: {type: "quadratic", Q, q}, g: {...nonsmooth}, A, B, b,
//                     optional L, sigma (required when A is not square)
// smooth.type:    "quadratic" (Q, q, c0) | "counterexample" (L, sigma, t) |
//                 "half-sq-distance" (set, weight) | "zero" (n)
// nonsmooth.type: "zero" | "one-norm" (mu) | "zero-norm" (mu) |
//                 "one-norm-box" (mu, R) | "box" (lo, hi) | "finite-set" (points) |
//                 "product-set" (values) | "indicator" (set)
// set.type:       "ball" (center, radius) | "halfspace" (a, beta) |
//                 "hyperplane" (a, beta)
// Matrices are arrays of rows. Unknown keys anywhere are rejected.

#include <drenv/admm/problem.hpp>
#include <drenv/core/catalog.hpp>
#include <drenv/testbed/fixtures.hpp>
#include <drenv/testbed/random.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>

namespace drenv::io {

using nlohmann::json;

class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct RunConfig {
  std::string algorithm;
  json problem;
  std::optional<double> gamma;
  std::optional<double> beta;
  double lambda = 1.0;
  std::optional<double> L_init;
  double tol = 1e-8;
  long max_iter = 100000;
  std::uint64_t seed = 0;
  bool unsafe = false;
  std::string output = "trace.csv";
  std::optional<std::vector<double>> start;

  bool admm_family() const { return algorithm == "admm" || algorithm == "adaptive-admm"; }
  bool adaptive() const {
    return algorithm == "adaptive-drs" || algorithm == "adaptive-admm";
  }
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown field '" + k + "'");
}

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
  return x;
}

inline double num_field(const json& j, const char* key, const std::string& where) {
  return number(need(j, key, where), where + "." + key);
}

inline double num_field(const json& j, const char* key, const std::string& where,
                        double dflt) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : dflt;
}

inline Vec vec(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
  Vec out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Index>(i)) = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

inline Mat mat(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected an array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw ConfigError(where + ": rows must be arrays");
  const std::size_t cols = v[0].size();
  Mat M(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols)
      throw ConfigError(where + ": ragged matrix");
    for (std::size_t k = 0; k < cols; ++k)
      M(static_cast<Index>(i), static_cast<Index>(k)) =
          number(v[i][k], where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  return M;
}

inline void validate_set(const json& j, const std::string& where) {
  const std::string type = need(j, "type", where).is_string() ? j.at("type").get<std::string>() : "";
  if (type == "ball") {
    check_keys(j, {"type", "center", "radius"}, where);
    vec(need(j, "center", where), where + ".center");
    if (!(num_field(j, "radius", where) >= 0.0)) throw ConfigError(where + ".radius: must be >= 0");
  } else if (type == "halfspace" || type == "hyperplane") {
    check_keys(j, {"type", "a", "beta"}, where);
    if (vec(need(j, "a", where), where + ".a").norm() == 0.0)
      throw ConfigError(where + ".a: must be nonzero");
    num_field(j, "beta", where);
  } else {
    throw ConfigError(where + ".type: expected ball, halfspace or hyperplane");
  }
}

inline Index set_dim(const json& j) { return static_cast<Index>(j.contains("center") ? j.at("center").size() : j.at("a").size()); }

inline catalog::ConvexSet build_set(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "ball") return catalog::ball(vec(j.at("center"), "center"), j.at("radius").get<double>());
  if (type == "halfspace") return catalog::halfspace(vec(j.at("a"), "a"), j.at("beta").get<double>());
  return catalog::hyperplane(vec(j.at("a"), "a"), j.at("beta").get<double>());
}

/// Validates a smooth spec and returns its dimension.
inline Index validate_smooth(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ConfigError(where + ": needs a string 'type'");
  const auto type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    check_keys(j, {"type", "Q", "q", "c0"}, where);
    const Mat Q = mat(need(j, "Q", where), where + ".Q");
    if (Q.rows() != Q.cols()) throw ConfigError(where + ".Q: must be square");
    if (j.contains("q") && vec(j.at("q"), where + ".q").size() != Q.rows())
      throw ConfigError(where + ".q: dimension mismatch");
    num_field(j, "c0", where, 0.0);
    return Q.rows();
  }
  if (type == "counterexample") {
    check_keys(j, {"type", "L", "sigma", "t"}, where);
    const double L = num_field(j, "L", where), s = num_field(j, "sigma", where);
    num_field(j, "t", where, 2.0);
    if (!(L > 0.0) || std::abs(s) > L) throw ConfigError(where + ": need L > 0, |sigma| <= L");
    return 1;
  }
  if (type == "half-sq-distance") {
    check_keys(j, {"type", "set", "weight"}, where);
    validate_set(need(j, "set", where), where + ".set");
    if (!(num_field(j, "weight", where, 1.0) > 0.0)) throw ConfigError(where + ".weight: must be > 0");
    return set_dim(j.at("set"));
  }
  if (type == "zero") {
    check_keys(j, {"type", "n"}, where);
    const auto& n = need(j, "n", where);
    if (!n.is_number_integer() || n.get<long>() < 1) throw ConfigError(where + ".n: positive integer");
    return static_cast<Index>(n.get<long>());
  }
  throw ConfigError(where + ".type: unknown smooth type '" + type + "'");
}

inline SmoothOracle build_smooth(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    const Mat Q = mat(j.at("Q"), "Q");
    const Vec q = j.contains("q") ? vec(j.at("q"), "q") : Vec::Zero(Q.rows());
    return catalog::quadratic(Q, q, j.value("c0", 0.0));
  }
  if (type == "counterexample")
    return catalog::counterexample(j.at("L").get<double>(), j.at("sigma").get<double>(),
                                   j.value("t", 2.0));
  if (type == "half-sq-distance")
    return catalog::half_sq_distance(build_set(j.at("set")), j.value("weight", 1.0));
  return catalog::zero_smooth(static_cast<Index>(j.at("n").get<long>()));
}

inline void validate_nonsmooth(const json& j, Index n, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ConfigError(where + ": needs a string 'type'");
  const auto type = j.at("type").get<std::string>();
  auto dim_is = [&](const Vec& v, const char* key) {
    if (v.size() != n) throw ConfigError(where + "." + key + ": dimension mismatch");
  };
  if (type == "zero") {
    check_keys(j, {"type"}, where);
  } else if (type == "one-norm" || type == "zero-norm") {
    check_keys(j, {"type", "mu"}, where);
    if (!(num_field(j, "mu", where) >= 0.0)) throw ConfigError(where + ".mu: must be >= 0");
  } else if (type == "one-norm-box") {
    check_keys(j, {"type", "mu", "R"}, where);
    if (!(num_field(j, "mu", where) >= 0.0)) throw ConfigError(where + ".mu: must be >= 0");
    if (!(num_field(j, "R", where) > 0.0)) throw ConfigError(where + ".R: must be > 0");
  } else if (type == "box") {
    check_keys(j, {"type", "lo", "hi"}, where);
    const Vec lo = vec(need(j, "lo", where), where + ".lo");
    const Vec hi = vec(need(j, "hi", where), where + ".hi");
    dim_is(lo, "lo");
    dim_is(hi, "hi");
    if ((lo.array() > hi.array()).any()) throw ConfigError(where + ": need lo <= hi");
  } else if (type == "finite-set") {
    check_keys(j, {"type", "points"}, where);
    const auto& pts = need(j, "points", where);
    if (!pts.is_array() || pts.empty()) throw ConfigError(where + ".points: non-empty array");
    for (std::size_t i = 0; i < pts.size(); ++i)
      dim_is(vec(pts[i], where + ".points[" + std::to_string(i) + "]"), "points");
  } else if (type == "product-set") {
    check_keys(j, {"type", "values"}, where);
    vec(need(j, "values", where), where + ".values");
  } else if (type == "indicator") {
    check_keys(j, {"type", "set"}, where);
    validate_set(need(j, "set", where), where + ".set");
    if (set_dim(j.at("set")) != n) throw ConfigError(where + ".set: dimension mismatch");
  } else {
    throw ConfigError(where + ".type: unknown nonsmooth type '" + type + "'");
  }
}

inline ProxableOracle build_nonsmooth(const json& j, Index n) {
  const auto type = j.at("type").get<std::string>();
  if (type == "zero") return catalog::zero(n);
  if (type == "one-norm") return catalog::scaled_one_norm(j.at("mu").get<double>(), n);
  if (type == "zero-norm") return catalog::zero_norm(j.at("mu").get<double>(), n);
  if (type == "one-norm-box")
    return catalog::one_norm_box(j.at("mu").get<double>(), j.at("R").get<double>(), n);
  if (type == "box") return catalog::indicator_box(vec(j.at("lo"), "lo"), vec(j.at("hi"), "hi"));
  if (type == "finite-set") {
    std::vector<Vec> pts;
    for (const auto& p : j.at("points")) pts.push_back(vec(p, "points"));
    return catalog::indicator_finite_set(std::move(pts));
  }
  if (type == "product-set") {
    const Vec v = vec(j.at("values"), "values");
    return catalog::indicator_product_set(std::vector<double>(v.data(), v.data() + v.size()), n);
  }
  return catalog::indicator_set(build_set(j.at("set")));
}

/// Validates the problem section; returns its dimension (DRS variable or x).
inline Index validate_problem(const json& j, bool admm) {
  const std::string where = "problem";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("problem: needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "random") {
    check_keys(j, {"kind", "instance", "n"}, where);
    const auto& inst = need(j, "instance", where);
    if (!inst.is_string()) throw ConfigError("problem.instance: expected a string");
    try {
      instance_kind_from_string(inst.get<std::string>());
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("problem.instance: ") + e.what());
    }
    const auto& n = need(j, "n", where);
    if (!n.is_number_integer() || n.get<long>() < 1 || n.get<long>() > 100)
      throw ConfigError("problem.n: integer in [1, 100]");
    return static_cast<Index>(n.get<long>());
  }
  if (kind == "gamma-fixture" || kind == "lambda-fixture") {
    const char* par = kind == "gamma-fixture" ? "t" : "p";
    check_keys(j, {"kind", "L", "sigma", par}, where);
    const double L = num_field(j, "L", where), s = num_field(j, "sigma", where);
    if (!(L > 0.0) || std::abs(s) > L) throw ConfigError("problem: need L > 0, |sigma| <= L");
    if (!(num_field(j, par, where, 2.0) > 1.0)) throw ConfigError(std::string("problem.") + par + ": must be > 1");
    if (admm) throw ConfigError("problem: fixtures are DRS problems; use a drs-family algorithm");
    return 1;
  }
  if (kind == "composite") {
    check_keys(j, {"kind", "smooth", "nonsmooth"}, where);
    const Index n = validate_smooth(need(j, "smooth", where), "problem.smooth");
    validate_nonsmooth(need(j, "nonsmooth", where), n, "problem.nonsmooth");
    if (admm) throw ConfigError("problem: composite problems need a drs-family algorithm");
    return n;
  }
  if (kind == "admm") {
    check_keys(j, {"kind", "f", "g", "A", "B", "b", "L", "sigma"}, where);
    const auto& f = need(j, "f", where);
    if (!f.is_object() || f.value("type", "") != "quadratic")
      throw ConfigError("problem.f: only type 'quadratic' is supported for ADMM");
    const Index m = validate_smooth(f, "problem.f");
    const Mat A = mat(need(j, "A", where), "problem.A");
    const Mat B = mat(need(j, "B", where), "problem.B");
    const Vec b = vec(need(j, "b", where), "problem.b");
    if (A.cols() != m) throw ConfigError("problem.A: column count must match f");
    if (B.rows() != A.rows() || B.cols() != A.rows() || b.size() != A.rows())
      throw ConfigError("problem: B must be square with the row count of A, b likewise");
    const Mat off = B - Mat(B.diagonal().asDiagonal());
    const double d0 = std::abs(B(0, 0));
    if (off.norm() != 0.0 || d0 == 0.0 || (B.diagonal().array().abs() != d0).any())
      throw ConfigError("problem.B: must be a nonzero multiple of a signed identity (|B_ii| equal)");
    validate_nonsmooth(need(j, "g", where), B.cols(), "problem.g");
    if (A.rows() != A.cols() && !(j.contains("L") && j.contains("sigma")))
      throw ConfigError("problem: L and sigma are required when A is not square");
    if (j.contains("L")) num_field(j, "L", where);
    if (j.contains("sigma")) num_field(j, "sigma", where);
    if (!admm) throw ConfigError("problem: ADMM problems need an admm-family algorithm");
    return m;
  }
  throw ConfigError("problem.kind: unknown kind '" + kind + "'");
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  detail::check_keys(j, {"algorithm", "problem", "gamma", "beta", "lambda", "L_init", "tol",
                         "max_iter", "seed", "unsafe", "output", "start"},
                     "config");
  RunConfig c;
  const auto& alg = detail::need(j, "algorithm", "config");
  if (!alg.is_string()) throw ConfigError("config.algorithm: expected a string");
  c.algorithm = alg.get<std::string>();
  static const std::set<std::string> algs{"drs", "prs", "admm", "adaptive-drs", "adaptive-admm"};
  if (!algs.count(c.algorithm)) throw ConfigError("config.algorithm: unknown '" + c.algorithm + "'");

  if (j.contains("gamma")) c.gamma = detail::number(j.at("gamma"), "config.gamma");
  if (j.contains("beta")) c.beta = detail::number(j.at("beta"), "config.beta");
  if (j.contains("L_init")) c.L_init = detail::number(j.at("L_init"), "config.L_init");
  c.lambda = detail::num_field(j, "lambda", "config", c.algorithm == "prs" ? 2.0 : 1.0);
  c.tol = detail::num_field(j, "tol", "config", c.tol);
  if (j.contains("max_iter")) {
    if (!j.at("max_iter").is_number_integer() || j.at("max_iter").get<long>() < 1)
      throw ConfigError("config.max_iter: positive integer");
    c.max_iter = j.at("max_iter").get<long>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config.seed: non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("unsafe")) {
    if (!j.at("unsafe").is_boolean()) throw ConfigError("config.unsafe: expected a bool");
    c.unsafe = j.at("unsafe").get<bool>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string() || j.at("output").get<std::string>().empty())
      throw ConfigError("config.output: non-empty string");
    c.output = j.at("output").get<std::string>();
  }

  if (!(c.lambda > 0.0 && c.lambda < 4.0)) throw ConfigError("config.lambda: must lie in (0, 4)");
  if (!(c.tol > 0.0)) throw ConfigError("config.tol: must be > 0");
  if (c.algorithm == "prs" && c.lambda != 2.0) throw ConfigError("config.lambda: prs means lambda = 2");
  if (c.gamma && !(*c.gamma > 0.0)) throw ConfigError("config.gamma: must be > 0");
  if (c.beta && !(*c.beta > 0.0)) throw ConfigError("config.beta: must be > 0");
  if (c.L_init && !(*c.L_init > 0.0)) throw ConfigError("config.L_init: must be > 0");
  if ((c.algorithm == "drs" || c.algorithm == "prs") && !c.gamma)
    throw ConfigError("config: " + c.algorithm + " needs 'gamma'");
  if (c.algorithm == "admm" && !c.beta) throw ConfigError("config: admm needs 'beta'");
  if (c.adaptive() && !c.L_init) throw ConfigError("config: " + c.algorithm + " needs 'L_init'");
  if (c.algorithm == "adaptive-admm" && !c.beta)
    throw ConfigError("config: adaptive-admm needs an initial 'beta'");
  if (c.algorithm == "adaptive-drs" && !(c.lambda < 2.0))
    throw ConfigError("config.lambda: adaptive-drs needs lambda < 2");
  if (c.algorithm == "adaptive-admm" && c.lambda != 1.0)
    throw ConfigError("config.lambda: adaptive-admm runs with lambda = 1");

  const Index n = detail::validate_problem(detail::need(j, "problem", "config"), c.admm_family());
  c.problem = j.at("problem");
  if (j.contains("start")) {
    const Vec s = detail::vec(j.at("start"), "config.start");
    if (s.size() != n) throw ConfigError("config.start: dimension mismatch");
    c.start = std::vector<double>(s.data(), s.data() + s.size());
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

inline json to_json(const RunConfig& c) {
  json j;
  j["algorithm"] = c.algorithm;
  j["problem"] = c.problem;
  if (c.gamma) j["gamma"] = *c.gamma;
  if (c.beta) j["beta"] = *c.beta;
  j["lambda"] = c.lambda;
  if (c.L_init) j["L_init"] = *c.L_init;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["seed"] = c.seed;
  j["unsafe"] = c.unsafe;
  j["output"] = c.output;
  if (c.start) j["start"] = *c.start;
  return j;
}

inline std::string serialize(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

// ------------------------------------------------------------ building ----

/// Numerical objects for a validated config.
struct BuiltProblem {
  std::optional<CompositeProblem> composite;
  std::optional<AdmmProblem> admm;
  Vec start;  ///< s0 or x0
};

inline BuiltProblem build_problem(const RunConfig& c) {
  const json& j = c.problem;
  const auto kind = j.at("kind").get<std::string>();
  BuiltProblem out;
  if (kind == "random") {
    const auto inst = random_instance(c.seed, static_cast<Index>(j.at("n").get<long>()),
                                      instance_kind_from_string(j.at("instance").get<std::string>()));
    if (c.admm_family())
      out.admm = inst.admm;
    else
      out.composite = inst.problem;
    out.start = Vec::Zero(inst.problem.dim());
  } else if (kind == "gamma-fixture") {
    out.composite = gamma_fixture(j.at("L").get<double>(), j.at("sigma").get<double>(),
                                  j.value("t", 2.0)).problem;
    out.start = Vec::Constant(1, 0.5);
  } else if (kind == "lambda-fixture") {
    out.composite = lambda_fixture(j.at("L").get<double>(), j.at("sigma").get<double>(),
                                   j.value("p", 2.0)).problem;
    out.start = Vec::Constant(1, 0.5);
  } else if (kind == "composite") {
    const auto f = detail::build_smooth(j.at("smooth"));
    out.composite = CompositeProblem(f, detail::build_nonsmooth(j.at("nonsmooth"), f.dim));
    out.start = Vec::Zero(f.dim);
  } else {  // admm
    const auto& fj = j.at("f");
    const Mat Q = detail::mat(fj.at("Q"), "Q");
    const Vec q = fj.contains("q") ? detail::vec(fj.at("q"), "q") : Vec::Zero(Q.rows());
    const Mat A = detail::mat(j.at("A"), "A"), B = detail::mat(j.at("B"), "B");
    const Vec b = detail::vec(j.at("b"), "b");
    const auto g = detail::build_nonsmooth(j.at("g"), B.cols());
    AdmmProblem P;
    P.name = "config admm";
    P.A = A;
    P.B = B;
    P.b = b;
    const Mat Qs = 0.5 * (Q + Q.transpose());
    P.f_eval = [Qs, q](const Vec& x) { return 0.5 * x.dot(Qs * x) + q.dot(x); };
    P.f_grad = [Qs, q](const Vec& x) { return Vec(Qs * x + q); };
    P.g_eval = g.value;
    P.x_solver = quadratic_x_solver(Qs, q, A, B, b);
    P.z_solver = prox_z_solver(g, B.diagonal(), A, b);
    P.sigma_f = Eigen::SelfAdjointEigenSolver<Mat>(Qs).eigenvalues().minCoeff();
    if (A.rows() == A.cols()) {
      if (smallest_singular_value(A) <= 1e-10) throw ConfigError("problem.A: singular");
      const Mat Ai = A.inverse();
      P.A_inverse = Ai;
      Mat Qh = Ai.transpose() * Qs * Ai;
      Qh = 0.5 * (Qh + Qh.transpose()).eval();
      const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(Qh).eigenvalues();
      P.L = ev.cwiseAbs().maxCoeff();
      P.sigma = ev.minCoeff();
    }
    if (j.contains("L")) P.L = j.at("L").get<double>();
    if (j.contains("sigma")) P.sigma = j.at("sigma").get<double>();
    P.validate();
    out.admm = std::move(P);
    out.start = Vec::Zero(A.cols());
  }
  if (c.start) out.start = Eigen::Map<const Vec>(c.start->data(), static_cast<Index>(c.start->size()));
  return out;
}

}  // namespace drenv::io
