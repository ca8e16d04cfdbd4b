#include "singstab/chang_transform.hpp"

#include <cmath>
#include <string>

namespace singstab {

namespace {

std::string mode_tag(int mode_index) {
  return mode_index >= 0 ? "mode " + std::to_string(mode_index) : "mode";
}

Matrix assemble_t(const Mode& m, const Matrix& w) {
  const int d = static_cast<int>(m.P.rows());
  const int l = m.l;
  Matrix pre = Matrix::Identity(d, d);
  pre.bottomLeftCorner(d - l, l) = w;
  return pre * m.P;
}

}  // namespace

Matrix q_zero(const ModeBlocks& blocks) {
  const Matrix d_inv = invert(blocks.D).inverse;
  const Matrix m = blocks.A - blocks.B * d_inv * blocks.C;
  return d_inv * d_inv * blocks.C * m;
}

QSolve solve_q(const ModeBlocks& blocks, double eps, double tol, int max_iter) {
  if (eps < 0.0) throw std::invalid_argument("solve_q: eps must be >= 0");
  const Matrix d_inv = invert(blocks.D).inverse;
  const Matrix dc = d_inv * blocks.C;           // D^-1 C
  const Matrix base = dc * blocks.A - dc * blocks.B * dc;
  if (tol <= 0.0) {
    const double lam_norm = std::sqrt(blocks.A.squaredNorm() + blocks.B.squaredNorm() +
                                      blocks.C.squaredNorm() + blocks.D.squaredNorm());
    tol = 1e-12 * (1.0 + lam_norm);
  }
  auto residual_of = [&](const Matrix& q) {
    const Matrix w = dc + eps * q;
    return (blocks.D * q - (w * blocks.A - w * blocks.B * w)).norm();
  };
  QSolve out;
  out.Q = q_zero(blocks);
  out.residual = residual_of(out.Q);
  double prev_residual = out.residual;
  int stalled = 0;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    const Matrix& q = out.Q;
    const Matrix next = d_inv * (base + eps * (q * blocks.A - q * blocks.B * dc -
                                               dc * blocks.B * q - eps * q * blocks.B * q));
    out.Q = next;
    out.residual = residual_of(out.Q);
    if (!std::isfinite(out.residual)) break;
    // divergence guard: residual must keep making progress
    if (out.residual >= prev_residual) {
      if (++stalled >= 10) break;
    } else {
      stalled = 0;
    }
    prev_residual = out.residual;
  }
  out.converged = out.residual <= tol;
  return out;
}

ChangData build_transform(const Mode& m, double eps, int mode_index, double tol) {
  const ModeBlocks blocks = abcd(m);
  if (blocks.l == 0 || blocks.l == blocks.d) {
    throw DimensionError("build_transform: " + mode_tag(mode_index) +
                         " has no two-scale split (l = " + std::to_string(blocks.l) + ")");
  }
  ChangData out;
  out.eps = eps;
  const Matrix d_inv = invert(blocks.D).inverse;
  const Matrix dc = d_inv * blocks.C;
  if (eps == 0.0) {
    out.T = assemble_t(m, dc);
    out.T_inv = invert(out.T).inverse;
    out.residual = 0.0;
    return out;
  }
  if (!(eps > 0.0)) throw std::invalid_argument("build_transform: eps must be >= 0");
  const QSolve qs = solve_q(blocks, eps, tol);
  if (!qs.converged) {
    throw ConvergenceError("build_transform: coupling fixed point diverged for " +
                           mode_tag(mode_index) + " at eps = " + std::to_string(eps) +
                           " (residual " + std::to_string(qs.residual) + ")");
  }
  out.Q = qs.Q;
  out.iterations = qs.iterations;
  const Matrix w = dc + eps * qs.Q;
  out.T = assemble_t(m, w);
  out.T_inv = invert(out.T).inverse;

  const int l = blocks.l;
  const int d = blocks.d;
  Matrix gamma = Matrix::Zero(d, d);
  gamma.topLeftCorner(l, l) = blocks.A - blocks.B * dc - eps * blocks.B * qs.Q;
  gamma.topRightCorner(l, d - l) = blocks.B;
  gamma.bottomRightCorner(d - l, d - l) = blocks.D / eps + w * blocks.B;
  out.Gamma = gamma;

  // verification, not bookkeeping: how triangular is eps T G T^-1 really
  const Matrix conj = eps * (out.T * epsilon_generator(m, eps) * out.T_inv);
  out.residual = conj.bottomLeftCorner(d - l, l).norm();
  return out;
}

Matrix gamma_shifted(const ChangData& c, double mu) {
  if (!c.Gamma) {
    throw std::invalid_argument("gamma_shifted: no Gamma at eps = 0");
  }
  return *c.Gamma + mu * Matrix::Identity(c.Gamma->rows(), c.Gamma->cols());
}

ReducedMode reduced_mode(const Mode& m) {
  const ModeBlocks blocks = abcd(m);
  if (blocks.l == 0 || blocks.l == blocks.d) {
    throw DimensionError("reduced_mode: no two-scale split (l = " +
                         std::to_string(blocks.l) + ")");
  }
  ReducedMode out;
  out.l = blocks.l;
  const Matrix d_inv = invert(blocks.D).inverse;
  const Matrix dc = d_inv * blocks.C;
  out.M = blocks.A - blocks.B * dc;
  out.D = blocks.D;
  out.T = assemble_t(m, dc);
  out.T_inv = invert(out.T).inverse;
  out.R = m.R;
  return out;
}

}  // namespace singstab
