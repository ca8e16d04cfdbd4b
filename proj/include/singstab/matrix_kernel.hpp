#pragma once

// Dense linear-algebra primitives shared by every other module.
// All matrices are real, dense, column-major Eigen::MatrixXd; dimensions stay
// small (d <= ~20), so robustness is preferred over asymptotic speed.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace singstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singularity threshold: sigma_min <= kSingularityTol * sigma_max
// marks a matrix as numerically singular.
inline constexpr double kSingularityTol = 1e-12;

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Eigenvalues plus the two reductions used throughout: spectral abscissa
/// (max real part) and spectral radius (max modulus).
struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  double abscissa = 0.0;
  double radius = 0.0;
};

/// Full spectrum of a square matrix. 1x1 and 2x2 are closed-form (exact for
/// repeated roots); larger sizes use a dense eigensolver.
Spectrum spectrum(const Matrix& m);

double spectral_abscissa(const Matrix& m);
double spectral_radius(const Matrix& m);

/// Induced 2-norm (largest singular value).
double operator_norm(const Matrix& m);

/// e^{t m} via scaling-and-squaring with a Pade core.
Matrix mat_exp(const Matrix& m, double t = 1.0);

/// True when every eigenvalue has real part < -margin.
bool is_hurwitz(const Matrix& m, double margin = 0.0);

struct Inversion {
  Matrix inverse;
  double condition = 0.0;  // sigma_max / sigma_min
};

/// Inverse plus a condition estimate. Throws SingularMatrixError when the
/// smallest singular value falls below tol * sigma_max.
Inversion invert(const Matrix& m, double tol = kSingularityTol);

/// 2x2 block partition of a square matrix at row/column l:
/// [a b; c d] with a of size l x l.
struct BlockSplit {
  Matrix a, b, c, d;
};
BlockSplit block_partition(const Matrix& m, int l);

/// diag(top, bottom) as a dense matrix.
Matrix block_diag(const Matrix& top, const Matrix& bottom);

/// m copied into the top-left corner of a d x d zero matrix.
Matrix embed_top_left(const Matrix& m, int d);

/// Leading rows x cols corner of m.
Matrix top_left(const Matrix& m, int rows, int cols);

/// Matrix with a running log-scale factor so long products neither overflow
/// nor underflow. Represents e^{log_scale} * value; value is renormalized
/// only when its Frobenius norm leaves [1e-100, 1e100], which keeps short
/// benign products bit-identical to naive multiplication.
struct ScaledMatrix {
  Matrix value;
  double log_scale = 0.0;
  bool zero = false;  // exact zero product; log norms are -inf

  static ScaledMatrix from(const Matrix& m);
  /// Replace by lhs * current (letters are applied chronologically from the
  /// right, so extending a word left-multiplies the new letter).
  void apply_left(const Matrix& lhs);
  /// log ||product||_F
  double log_frobenius() const;
  /// log ||product||_2
  double log_norm2() const;
  /// log rho(product); -inf for the zero product
  double log_radius() const;
};

}  // namespace singstab
