#pragma once

// Exact piecewise-exponential simulation of the four targets along a
// switching signal. Each inter-switch interval is integrated with one matrix
// exponential, so accuracy is limited only by mat_exp; jumps are applied at
// every switch using the departing mode's R (or its reduced counterpart).

#include "singstab/reduced_systems.hpp"
#include "singstab/system_model.hpp"

#include <iosfwd>
#include <vector>

namespace singstab {

/// Sampled trajectory. Jumps produce two consecutive rows with the same t:
/// pre-jump state with the old mode, post-jump state with the new mode.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> x;   // always d-dimensional (reduced states zero-padded)
  std::vector<int> mode;

  int dimension() const { return x.empty() ? 0 : static_cast<int>(x[0].size()); }
};

struct SimOptions {
  double dt_out = 0.01;               // sampling step, > 0
  double eps = 0.0;                   // required for SigmaEps
  /// Per-switch transient factors for SigmaTilde (identity when absent or
  /// exhausted); ignored by the other targets.
  std::vector<Matrix> transients;
};

/// Simulate target dynamics over [0, t_end]. x0 is given in original
/// coordinates; for SigmaBar/SigmaTilde the initial reduced state is the
/// first l_0 entries of T_0 x0 (zero-padded), for SigmaHat it is T_0 x0 and
/// time is the stretched variable s.
Trajectory simulate(const SwitchedFamily& f, const Signal& s, Target target,
                    const Vector& x0, double t_end, const SimOptions& opt);

/// Flow matrix of the target at the k-th switching time, jumps included
/// (columns are simulations of unit vectors composed analytically). Used to
/// cross-check word products.
Matrix flow_at_switch(const SwitchedFamily& f, const Signal& s, Target target,
                      int k, const SimOptions& opt);

/// Least-squares slope of log ||x(t)|| over samples with t in [t_lo, t_hi].
/// Rows with ||x|| = 0 are skipped; returns -inf if everything vanished.
double fit_decay_rate(const Trajectory& tr, double t_lo, double t_hi);

/// CSV with header t,x1,...,xd,mode; 17-significant-digit round-trip numbers.
void write_csv(const Trajectory& tr, std::ostream& out);

}  // namespace singstab
