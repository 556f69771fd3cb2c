#pragma once

#include <drenv/lattice.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace drenv {

enum class ImageMode { closed_form, lattice, penalty_limit };

/// (C |> h)(s) = inf { h(x) : Cx = s }.
///
/// Lattice mode writes x = C^+ s + N t with N a kernel basis of C and
/// minimizes over t on `lattice`; penalty-limit mode minimizes
/// h(x) + beta/2 |Cx - s|^2 over x for each beta of `beta_schedule` and
/// reports the last value.
struct ImageFunction {
  std::function<double(const Vec&)> h;
  std::function<Vec(const Vec&)> h_grad;         ///< optional
  std::function<double(const Vec&)> closed_form;  ///< optional
  Mat C;
  ImageMode mode = ImageMode::lattice;
  Lattice lattice;
  std::vector<double> beta_schedule{1e2, 1e4, 1e6};

  ImageFunction() = default;
  ImageFunction(std::function<double(const Vec&)> h_, Mat C_,
                ImageMode mode_ = ImageMode::lattice, Lattice lat = {})
      : h(std::move(h_)), C(std::move(C_)), mode(mode_), lattice(lat) {
    init();
  }

  void init() {
    if (C.size() == 0 || C.norm() == 0.0) throw PreconditionError("image function: C must be nonzero");
    if (!h) throw PreconditionError("image function: h is required");
    if (mode != ImageMode::closed_form && C.cols() > 3)
      throw PreconditionError("image function: lattice modes need n <= 3");
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thr = 1e-12 * sv(0);
    rank_ = 0;
    while (rank_ < sv.size() && sv(rank_) > thr) ++rank_;
    pinv_ = svd.matrixV().leftCols(rank_) *
            sv.head(rank_).cwiseInverse().asDiagonal() *
            svd.matrixU().leftCols(rank_).transpose();
    kernel_ = svd.matrixV().rightCols(C.cols() - rank_);
  }

  Index rank() const { return rank_; }
  const Mat& kernel() const { return kernel_; }
  const Mat& pinv() const { return pinv_; }

 private:
  Index rank_ = 0;
  Mat pinv_;
  Mat kernel_;
};

struct ImageEvaluation {
  double value = kInf;
  Vec x;                  ///< minimizer found (lattice and penalty modes)
  bool reachable = true;  ///< s lies in range(C)
  /// The minimizer sits on the lattice boundary: the infimum over the whole
  /// affine set is likely approached only along an unbounded sequence.
  bool escaped = false;
};

inline ImageEvaluation image_evaluate(const ImageFunction& F, const Vec& s) {
  if (s.size() != F.C.rows()) throw PreconditionError("image function: s has wrong size");
  ImageEvaluation r;
  if (F.mode == ImageMode::closed_form) {
    if (!F.closed_form) throw PreconditionError("image function: no closed form set");
    r.value = F.closed_form(s);
    return r;
  }
  if (F.mode == ImageMode::penalty_limit) {
    Vec center = F.pinv() * s;
    for (double beta : F.beta_schedule) {
      auto m = lattice_minimize(
          [&](const Vec& x) {
            const double hv = F.h(x);
            return hv == kInf ? kInf : hv + 0.5 * beta * (F.C * x - s).squaredNorm();
          },
          F.C.cols(), F.lattice, center);
      r.value = m.value;
      r.x = m.argmin;
      r.escaped = m.on_boundary;
    }
    return r;
  }
  const Vec x0 = F.pinv() * s;
  if ((F.C * x0 - s).norm() > 1e-9 * scale_of(s)) {
    r.reachable = false;
    return r;
  }
  const Index k = F.kernel().cols();
  if (k == 0) {
    r.x = x0;
    r.value = F.h(x0);
    return r;
  }
  const Mat& N = F.kernel();
  auto m = lattice_minimize([&](const Vec& t) { return F.h(x0 + N * t); }, k, F.lattice);
  r.value = m.value;
  r.x = x0 + N * m.argmin;
  r.escaped = m.on_boundary;
  return r;
}

inline double image_value(const ImageFunction& F, const Vec& s) {
  return image_evaluate(F, s).value;
}

namespace detail {

inline double slope_at(const std::function<double(const Vec&)>& fn, const Vec& x,
                       double res) {
  const double f0 = fn(x);
  double slope = 0.0;
  for (Index i = 0; i < x.size(); ++i)
    for (double sg : {-1.0, 1.0}) {
      Vec y = x;
      y(i) += sg * res;
      const double fy = fn(y);
      if (std::isfinite(fy) && std::isfinite(f0))
        slope = std::max(slope, std::abs(fy - f0) / res);
    }
  return slope;
}

}  // namespace detail

struct ProxInclusionReport {
  Vec x_beta;       ///< lattice argmin of h + beta/2 |Cx - s_bar|^2
  Vec s_beta;       ///< C x_beta
  double psi_at_s_beta = 0.0;  ///< image(s_beta) + beta/2 |s_beta - s_bar|^2
  double psi_min = 0.0;        ///< lattice min of the same over s
  Vec s_min;
  double gap = 0.0;            ///< psi_at_s_beta - psi_min
  double exactness_gap = 0.0;  ///< |image(C x_beta) - h(x_beta)|
  double tolerance = 0.0;
  bool inclusion_holds = false;
  bool exact = false;
};

/// C x_beta minimizes s -> (C|>h)(s) + beta/2 |s - s_bar|^2, and
/// (C|>h)(C x_beta) = h(x_beta).
inline ProxInclusionReport image_prox_inclusion_check(const ImageFunction& F, double beta,
                                                      const Vec& s_bar,
                                                      const Lattice& outer = {10.0, 1e-3, 4001, 8}) {
  if (!(beta > 0.0)) throw PreconditionError("prox inclusion: beta must be > 0");
  ProxInclusionReport r;
  const std::function<double(const Vec&)> pen = [&](const Vec& x) {
    const double hv = F.h(x);
    return hv == kInf ? kInf : hv + 0.5 * beta * (F.C * x - s_bar).squaredNorm();
  };
  const auto xm = lattice_minimize(pen, F.C.cols(), F.lattice);
  r.x_beta = xm.argmin;
  r.s_beta = F.C * r.x_beta;
  const std::function<double(const Vec&)> psi = [&](const Vec& s) {
    const double iv = image_value(F, s);
    return iv == kInf ? kInf : iv + 0.5 * beta * (s - s_bar).squaredNorm();
  };
  const auto sm = lattice_minimize(psi, F.C.rows(), outer);
  r.psi_min = sm.value;
  r.s_min = sm.argmin;
  r.psi_at_s_beta = psi(r.s_beta);
  r.gap = r.psi_at_s_beta - r.psi_min;
  const double hval = F.h(r.x_beta);
  r.exactness_gap = std::abs(image_value(F, r.s_beta) - hval);
  const double res = std::max(outer.resolution, F.lattice.resolution);
  const double slope = detail::slope_at(psi, r.s_min, res) + detail::slope_at(pen, r.x_beta, res);
  r.tolerance = (1.0 + slope) * res * std::sqrt(static_cast<double>(F.C.cols()));
  r.inclusion_holds = r.gap <= r.tolerance;
  r.exact = r.exactness_gap <= r.tolerance;
  return r;
}

struct ImageSubgradientReport {
  Vec x_bar;     ///< minimizer attaining the image value at s_bar
  Vec v_bar;     ///< gradient of C|>h at s_bar (given or finite differences)
  Vec lhs;       ///< C' v_bar
  Vec grad_h;    ///< grad h(x_bar)
  double discrepancy = 0.0;  ///< |lhs - grad_h| / max(1, |grad_h|)
  bool holds = false;
};

/// C' v_bar = grad h(x_bar) for v_bar the gradient of C|>h at s_bar. When
/// v_bar is not given it is computed by central differences with step
/// 1e-5 max(1, |s_bar|).
inline ImageSubgradientReport image_subgradient_check(const ImageFunction& F,
                                                      const Vec& s_bar,
                                                      std::optional<Vec> v_bar = std::nullopt,
                                                      double tol = 1e-5) {
  if (!F.h_grad) throw PreconditionError("subgradient check: h_grad is required");
  ImageSubgradientReport r;
  const auto e = image_evaluate(F, s_bar);
  if (e.x.size() == 0) throw PreconditionError("subgradient check: no minimizer available");
  r.x_bar = e.x;
  if (v_bar) {
    r.v_bar = *v_bar;
  } else {
    const double step = 1e-5 * scale_of(s_bar);
    r.v_bar = Vec(s_bar.size());
    for (Index i = 0; i < s_bar.size(); ++i) {
      Vec p = s_bar, m = s_bar;
      p(i) += step;
      m(i) -= step;
      r.v_bar(i) = (image_value(F, p) - image_value(F, m)) / (2.0 * step);
    }
  }
  r.lhs = F.C.transpose() * r.v_bar;
  r.grad_h = F.h_grad(r.x_bar);
  r.discrepancy = (r.lhs - r.grad_h).norm() / scale_of(r.grad_h);
  r.holds = r.discrepancy <= tol;
  return r;
}

enum class ImageCase { invertible, lipschitz_minimizers, convex };

struct ImageConstants {
  double L = 0.0;
  double sigma = 0.0;
};

/// Smoothness and hypoconvexity moduli of A|>f in three special cases:
///  invertible A (M = 1/sigma_min(A)) or minimizers M-Lipschitz in s:
///    L = L_f M^2, sigma = sigma_f/|A|^2 if sigma_f >= 0 else sigma_f M^2;
///  convex f: L = L_f / sigma_+(A'A), sigma = sigma_f/|A|^2.
inline ImageConstants image_constants(ImageCase kind, double L_f, double sigma_f,
                                      const Mat& A, double M = 0.0) {
  if (A.size() == 0) throw PreconditionError("image constants: empty A");
  const double nA = spectral_norm(A);
  ImageConstants r;
  switch (kind) {
    case ImageCase::invertible: {
      if (A.rows() != A.cols() || smallest_singular_value(A) <= 1e-12 * nA)
        throw PreconditionError("image constants: A must be square and invertible");
      M = 1.0 / smallest_singular_value(A);
      [[fallthrough]];
    }
    case ImageCase::lipschitz_minimizers: {
      if (!(M > 0.0)) throw PreconditionError("image constants: M must be > 0");
      r.L = L_f * M * M;
      r.sigma = sigma_f >= 0.0 ? sigma_f / (nA * nA) : sigma_f * M * M;
      return r;
    }
    case ImageCase::convex: {
      if (sigma_f < 0.0) throw PreconditionError("image constants: convex case needs sigma_f >= 0");
      Eigen::SelfAdjointEigenSolver<Mat> es(A.transpose() * A);
      const auto& ev = es.eigenvalues();
      double smallest_pos = kInf;
      for (Index i = 0; i < ev.size(); ++i)
        if (ev(i) > 1e-12 * nA * nA) smallest_pos = std::min(smallest_pos, ev(i));
      r.L = L_f / smallest_pos;
      r.sigma = sigma_f / (nA * nA);
      return r;
    }
  }
  return r;
}

struct ImageLowerBoundReport {
  double modulus = 0.0;  ///< sigma_h / |C|^2
  double max_violation = 0.0;
  std::size_t pairs = 0;
};

/// Strong convexity transfer on sampled pairs (s1, s2) and t in {1/4, 1/2, 3/4}:
/// F(t s1 + (1-t) s2) <= t F(s1) + (1-t) F(s2) - mu/2 t(1-t) |s1 - s2|^2.
inline ImageLowerBoundReport image_strong_convexity_check(
    const ImageFunction& F, double sigma_h, const std::vector<std::pair<Vec, Vec>>& pairs) {
  ImageLowerBoundReport r;
  const double nC = spectral_norm(F.C);
  r.modulus = sigma_h / (nC * nC);
  for (const auto& [s1, s2] : pairs) {
    const double f1 = image_value(F, s1), f2 = image_value(F, s2);
    for (double t : {0.25, 0.5, 0.75}) {
      const double fm = image_value(F, t * s1 + (1.0 - t) * s2);
      const double rhs =
          t * f1 + (1.0 - t) * f2 - 0.5 * r.modulus * t * (1.0 - t) * (s1 - s2).squaredNorm();
      r.max_violation = std::max(r.max_violation, (fm - rhs) / scale_of(rhs));
    }
    ++r.pairs;
  }
  return r;
}

struct Cp2pReport {
  double reformulated_min = kInf;  ///< lattice min of A|>f(s) + B|>g(b - s)
  double constrained_min = kInf;   ///< lattice min of f(x) + g(B^-1(b - Ax))
  double gap = 0.0;
  double tolerance = 0.0;
  bool agree = false;
};

/// Reformulation check for invertible A = Fa.C and B = Gb.C: lattice minimum
/// of Fa(s) + Gb(b - s) against that of f(x) + g(B^-1(b - Ax)).
inline Cp2pReport cp2p_check(const ImageFunction& Fa, const ImageFunction& Gb,
                             const Vec& b, const Lattice& lat = {}) {
  const Mat& A = Fa.C;
  const Mat& B = Gb.C;
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != b.size())
    throw PreconditionError("cp2p check: A and B must be square and match b");
  if (A.rows() > 2) throw PreconditionError("cp2p check: dimension must be <= 2");
  const Mat Bi = B.inverse();
  Cp2pReport r;
  const std::function<double(const Vec&)> reform = [&](const Vec& s) {
    const double a = image_value(Fa, s);
    const double c = image_value(Gb, b - s);
    return (a == kInf || c == kInf) ? kInf : a + c;
  };
  const std::function<double(const Vec&)> constrained = [&](const Vec& x) {
    const double a = Fa.h(x);
    const double c = Gb.h(Bi * (b - A * x));
    return (a == kInf || c == kInf) ? kInf : a + c;
  };
  const auto m1 = lattice_minimize(reform, A.rows(), lat);
  const auto m2 = lattice_minimize(constrained, A.cols(), lat);
  r.reformulated_min = m1.value;
  r.constrained_min = m2.value;
  r.gap = std::abs(m1.value - m2.value);
  const double res = lat.resolution;
  const double slope = detail::slope_at(reform, m1.argmin, res) +
                       detail::slope_at(constrained, m2.argmin, res) * spectral_norm(A);
  r.tolerance = (1.0 + slope) * res * std::sqrt(static_cast<double>(A.rows()));
  r.agree = r.gap <= r.tolerance;
  return r;
}

}  // namespace drenv
