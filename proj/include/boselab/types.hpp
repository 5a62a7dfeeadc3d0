#ifndef BOSELAB_TYPES_HPP
#define BOSELAB_TYPES_HPP

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace boselab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Errors carrying the exit-code contract of the experiment runner.
class DimensionCapError : public std::runtime_error {
 public:
  explicit DimensionCapError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Matrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
  return hermiticity_defect(m) <= tol * std::max(1.0, max_abs(m));
}

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Operator 2-norm (largest singular value).
inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

/// Trace norm (sum of singular values); the paper's unnormalized 1-norm.
inline double trace_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues().sum();
}

}  // namespace boselab

#endif  // BOSELAB_TYPES_HPP
