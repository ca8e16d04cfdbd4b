#pragma once

// Block-decoupling change of coordinates for one mode.
//
// For eps > 0 small enough, T^eps = [I 0; D^-1 C + eps Q, I] P brings the
// interval generator G = (1/eps) P^-1 E^eps_{l^c} Lambda to block upper
// triangular form Gamma^eps = T^eps G (T^eps)^-1 with
//   Gamma11 = A - B D^-1 C - eps B Q,   Gamma12 = B,
//   Gamma21 = 0,                        Gamma22 = D/eps + (D^-1 C + eps Q) B,
// where Q solves D Q = (D^-1 C + eps Q) A - (D^-1 C + eps Q) B (D^-1 C + eps Q).
// At eps = 0 the transform degenerates to T = [I 0; D^-1 C, I] P and the pair
// (M, D) with M = A - B D^-1 C stands in for Gamma.

#include "singstab/matrix_kernel.hpp"
#include "singstab/system_model.hpp"

#include <optional>

namespace singstab {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Closed-form Q at eps = 0: D^-2 C M with M = A - B D^-1 C.
Matrix q_zero(const ModeBlocks& blocks);

struct QSolve {
  Matrix Q;
  int iterations = 0;
  double residual = 0.0;  // ||D Q - rhs(Q)|| on the defining equation
  bool converged = false;
};

/// Fixed-point iteration
///   Q <- D^-1 [D^-1 C A - D^-1 C B D^-1 C
///              + eps (Q A - Q B D^-1 C - D^-1 C B Q - eps Q B Q)]
/// started from q_zero (eps = 0 converges there immediately). tol <= 0
/// selects 1e-12 * (1 + ||Lambda||).
QSolve solve_q(const ModeBlocks& blocks, double eps, double tol = -1.0,
               int max_iter = 200);

struct ChangData {
  double eps = 0.0;
  Matrix Q;                      // empty at eps = 0
  Matrix T;
  Matrix T_inv;
  std::optional<Matrix> Gamma;   // absent at eps = 0
  double residual = 0.0;         // ||lower-left block of eps T G T^-1||
  int iterations = 0;
};

/// Transform for one mode. Requires invertible P and D; for eps > 0 also
/// requires the fixed point to converge, otherwise throws ConvergenceError
/// naming the mode. mode_index is only used in error messages.
ChangData build_transform(const Mode& m, double eps, int mode_index = -1,
                          double tol = -1.0);

/// Gamma^{eps,mu} = Gamma + mu I.
Matrix gamma_shifted(const ChangData& c, double mu);

/// eps = 0 limit data for one mode: M = A - B D^-1 C, T = [I 0; D^-1 C I] P.
struct ReducedMode {
  int l = 0;
  Matrix M;        // l x l slow generator
  Matrix D;        // (d-l) x (d-l) fast generator
  Matrix T;        // d x d
  Matrix T_inv;
  Matrix R;        // jump out of this mode (copied from the mode)
};
ReducedMode reduced_mode(const Mode& m);

}  // namespace singstab
