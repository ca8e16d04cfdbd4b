#pragma once

// Built-in two-mode demonstration family, parametrized by the jump gain r.
//
// Mode 1: l=1, P = I,          Lambda = [-1  1; -1 -1], R = [2r 2r;  r  r]
// Mode 2: l=1, P = [0 1; 1 0], Lambda = [-1 -1;  1 -1], R = [-2r -2r; r r]
//
// As printed, mode 2's fast block is D = [+1] (not Hurwitz), which the
// premise checks flag. The Swapped variant replaces Lambda_2 by
// [1 -1; -1 -1], making both modes share the blocks A=-1, B=1, C=-1, D=-1;
// the quantitative sweep and trajectory demos run on that variant.

#include "singstab/system_model.hpp"

namespace singstab {

enum class ExampleVariant { Printed, Swapped };

SwitchedFamily example_family(double r, ExampleVariant variant);

struct ExampleDiagnostics {
  ExampleVariant variant = ExampleVariant::Printed;
  double r = 0.0;
  std::vector<double> d_abscissas;   // per-mode alpha(D)
  bool all_d_hurwitz = false;
  double rho_r1 = 0.0;               // spectral radius of mode 1's jump (= 3r)
  double slow_m = 0.0;               // shared M (both modes; -2)
};

ExampleDiagnostics example_diagnostics(double r, ExampleVariant variant);

}  // namespace singstab
