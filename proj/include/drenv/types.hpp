#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace drenv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// +infinity of the extended real line. Sums involving it stay at +infinity.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite(double x) { return std::isfinite(x); }

/// Positive part [x]_+.
inline double pos(double x) { return x > 0.0 ? x : 0.0; }
/// Negative part [x]_- = max(-x, 0), so that x = [x]_+ - [x]_-.
inline double neg(double x) { return x < 0.0 ? -x : 0.0; }

/// 1/[sigma]_-, with 1/0 read as +infinity.
inline double inv_neg(double sigma) {
  return sigma < 0.0 ? 1.0 / (-sigma) : kInf;
}

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stepsize (or penalty) outside the range where a prox is well posed.
class StepsizeInfeasible : public Error {
 public:
  using Error::Error;
};

/// Violated operation precondition (bad dimensions, bad moduli, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A certified inequality failed at run time. This points at a wrong declared
/// modulus or an implementation bug, never at the input data.
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& what, long iteration, double excess)
      : Error(what), iteration_(iteration), excess_(excess) {}
  long iteration() const { return iteration_; }
  double excess() const { return excess_; }

 private:
  long iteration_;
  double excess_;
};

/// Inner fixed-point or subproblem solver did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Relative scale used by tolerance comparisons: max(1, |x|).
inline double scale_of(double x) { return std::max(1.0, std::abs(x)); }
inline double scale_of(const Vec& x) { return std::max(1.0, x.norm()); }

/// Spectral norm (largest singular value).
inline double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

/// Smallest singular value over min(rows, cols).
inline double smallest_singular_value(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

}  // namespace drenv
