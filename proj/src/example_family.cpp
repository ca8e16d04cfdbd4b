#include "singstab/example_family.hpp"

#include "singstab/matrix_kernel.hpp"

namespace singstab {

SwitchedFamily example_family(double r, ExampleVariant variant) {
  SwitchedFamily f;
  f.d = 2;
  f.tau = 0.0;

  Mode m1;
  m1.l = 1;
  m1.P = Matrix::Identity(2, 2);
  m1.Lambda = Matrix(2, 2);
  m1.Lambda << -1, 1, -1, -1;
  m1.R = Matrix(2, 2);
  m1.R << 2 * r, 2 * r, r, r;

  Mode m2;
  m2.l = 1;
  m2.P = Matrix(2, 2);
  m2.P << 0, 1, 1, 0;
  m2.Lambda = Matrix(2, 2);
  if (variant == ExampleVariant::Printed) {
    m2.Lambda << -1, -1, 1, -1;
  } else {
    m2.Lambda << 1, -1, -1, -1;
  }
  m2.R = Matrix(2, 2);
  m2.R << -2 * r, -2 * r, r, r;

  f.modes = {m1, m2};
  return f;
}

ExampleDiagnostics example_diagnostics(double r, ExampleVariant variant) {
  const SwitchedFamily f = example_family(r, variant);
  ExampleDiagnostics out;
  out.variant = variant;
  out.r = r;
  out.all_d_hurwitz = true;
  for (const Mode& m : f.modes) {
    const ModeBlocks b = abcd(m);
    const double a = spectral_abscissa(b.D);
    out.d_abscissas.push_back(a);
    out.all_d_hurwitz = out.all_d_hurwitz && a < 0.0;
  }
  out.rho_r1 = spectral_radius(f.modes[0].R);
  const ModeBlocks b0 = abcd(f.modes[0]);
  const Matrix m_slow =
      b0.A - b0.B * invert(b0.D).inverse * b0.C;
  out.slow_m = m_slow(0, 0);
  return out;
}

}  // namespace singstab
