#pragma once

// Brute-force references used by the tests. Nothing here calls into the
// library's lattice or prox code.

#include <drenv/types.hpp>

#include <functional>
#include <limits>

namespace oracle {

using drenv::Vec;

struct Min1 {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

/// Minimum of fn over {lo, lo + h, ..., hi}; ties keep the larger point.
inline Min1 grid_min_1d(const std::function<double(double)>& fn, double lo, double hi,
                        double h) {
  Min1 best;
  const long n = static_cast<long>(std::floor((hi - lo) / h + 0.5));
  for (long i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    const double v = fn(x);
    if (v <= best.value) {
      best.value = v;
      best.x = x;
    }
  }
  return best;
}

/// Coarse grid followed by a finer grid around the best coarse point.
inline Min1 refined_min_1d(const std::function<double(double)>& fn, double lo, double hi,
                           double coarse, double fine) {
  const auto c = grid_min_1d(fn, lo, hi, coarse);
  const auto f = grid_min_1d(fn, std::max(lo, c.x - 2 * coarse), std::min(hi, c.x + 2 * coarse), fine);
  return f.value <= c.value ? f : c;
}

struct Min2 {
  Vec x = Vec::Zero(2);
  double value = std::numeric_limits<double>::infinity();
};

inline Min2 grid_min_2d(const std::function<double(const Vec&)>& fn, const Vec& center,
                        double radius, double h) {
  Min2 best;
  const long n = static_cast<long>(std::floor(radius / h + 0.5));
  Vec x(2);
  for (long i = -n; i <= n; ++i)
    for (long j = -n; j <= n; ++j) {
      x << center(0) + static_cast<double>(i) * h, center(1) + static_cast<double>(j) * h;
      const double v = fn(x);
      if (v < best.value) {
        best.value = v;
        best.x = x;
      }
    }
  return best;
}

inline Min2 refined_min_2d(const std::function<double(const Vec&)>& fn, const Vec& center,
                           double radius, double coarse, double fine) {
  const auto c = grid_min_2d(fn, center, radius, coarse);
  const auto f = grid_min_2d(fn, c.x, 2 * coarse, fine);
  return f.value <= c.value ? f : c;
}

/// Central finite-difference gradient.
inline Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (fn(p) - fn(m)) / (2 * h);
  }
  return g;
}

/// Scalar DRS on f = a/2 x^2, g = 0: u = s/(1 + gamma a), v = 2u - s.
inline double scalar_drs_next(double a, double gamma, double lambda, double s) {
  const double u = s / (1 + gamma * a);
  const double v = 2 * u - s;
  return s + lambda * (v - u);
}

inline Vec v1(double a) { return Vec::Constant(1, a); }
inline Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

}  // namespace oracle
