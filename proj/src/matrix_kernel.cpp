#include "singstab/matrix_kernel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <string>

namespace singstab {

namespace {

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(who) + ": square nonempty matrix required, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Roots of z^2 - tr z + det for a real 2x2 matrix. The discriminant is
// computed exactly enough that a repeated root comes out repeated, which a
// general QR eigensolver cannot promise.
void eig2(const Matrix& m, std::complex<double>& a, std::complex<double>& b) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = tr * tr / 4.0 - det;
  const double h = tr / 2.0;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    a = {h + s, 0.0};
    b = {h - s, 0.0};
  } else {
    const double s = std::sqrt(-disc);
    a = {h, s};
    b = {h, -s};
  }
}

}  // namespace

Spectrum spectrum(const Matrix& m) {
  require_square(m, "spectrum");
  Spectrum out;
  const auto n = m.rows();
  out.eigenvalues.resize(n);
  if (n == 1) {
    out.eigenvalues(0) = m(0, 0);
  } else if (n == 2) {
    std::complex<double> a, b;
    eig2(m, a, b);
    out.eigenvalues(0) = a;
    out.eigenvalues(1) = b;
  } else {
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("spectrum: eigensolver failed to converge");
    }
    out.eigenvalues = solver.eigenvalues();
  }
  out.abscissa = -std::numeric_limits<double>::infinity();
  out.radius = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.abscissa = std::max(out.abscissa, out.eigenvalues(i).real());
    out.radius = std::max(out.radius, std::abs(out.eigenvalues(i)));
  }
  return out;
}

double spectral_abscissa(const Matrix& m) { return spectrum(m).abscissa; }

double spectral_radius(const Matrix& m) { return spectrum(m).radius; }

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // Largest singular value; Jacobi is plenty accurate at these sizes.
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix mat_exp(const Matrix& m, double t) {
  require_square(m, "mat_exp");
  return (t * m).exp();
}

bool is_hurwitz(const Matrix& m, double margin) {
  return spectral_abscissa(m) < -margin;
}

Inversion invert(const Matrix& m, double tol) {
  require_square(m, "invert");
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > tol * smax) || smax == 0.0) {
    throw SingularMatrixError("invert: matrix singular within tolerance " +
                              std::to_string(tol) + " (sigma_min/sigma_max = " +
                              std::to_string(smax == 0.0 ? 0.0 : smin / smax) + ")");
  }
  Inversion out;
  out.inverse = m.partialPivLu().inverse();
  out.condition = smax / smin;
  return out;
}

BlockSplit block_partition(const Matrix& m, int l) {
  require_square(m, "block_partition");
  const int d = static_cast<int>(m.rows());
  if (l < 0 || l > d) {
    throw DimensionError("block_partition: l = " + std::to_string(l) +
                         " outside [0, " + std::to_string(d) + "]");
  }
  BlockSplit out;
  out.a = m.topLeftCorner(l, l);
  out.b = m.topRightCorner(l, d - l);
  out.c = m.bottomLeftCorner(d - l, l);
  out.d = m.bottomRightCorner(d - l, d - l);
  return out;
}

Matrix block_diag(const Matrix& top, const Matrix& bottom) {
  Matrix out = Matrix::Zero(top.rows() + bottom.rows(), top.cols() + bottom.cols());
  out.topLeftCorner(top.rows(), top.cols()) = top;
  out.bottomRightCorner(bottom.rows(), bottom.cols()) = bottom;
  return out;
}

Matrix embed_top_left(const Matrix& m, int d) {
  if (m.rows() > d || m.cols() > d) {
    throw DimensionError("embed_top_left: block larger than carrier");
  }
  Matrix out = Matrix::Zero(d, d);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

Matrix top_left(const Matrix& m, int rows, int cols) {
  if (rows > m.rows() || cols > m.cols()) {
    throw DimensionError("top_left: corner larger than matrix");
  }
  return m.topLeftCorner(rows, cols);
}

ScaledMatrix ScaledMatrix::from(const Matrix& m) {
  ScaledMatrix out;
  out.value = m;
  out.zero = (m.norm() == 0.0);
  return out;
}

void ScaledMatrix::apply_left(const Matrix& lhs) {
  if (zero) return;
  value = lhs * value;
  const double f = value.norm();
  if (f == 0.0 || !std::isfinite(f)) {
    if (f == 0.0) {
      zero = true;
      return;
    }
    throw std::runtime_error("ScaledMatrix: non-finite product");
  }
  if (f > 1e100 || f < 1e-100) {
    value /= f;
    log_scale += std::log(f);
  }
}

double ScaledMatrix::log_frobenius() const {
  if (zero) return -std::numeric_limits<double>::infinity();
  return log_scale + std::log(value.norm());
}

double ScaledMatrix::log_norm2() const {
  if (zero) return -std::numeric_limits<double>::infinity();
  return log_scale + std::log(operator_norm(value));
}

double ScaledMatrix::log_radius() const {
  if (zero) return -std::numeric_limits<double>::infinity();
  const double r = spectral_radius(value);
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  return log_scale + std::log(r);
}

}  // namespace singstab
