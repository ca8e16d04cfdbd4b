#pragma once

// Limit systems and the weighted generator families the exponent engine
// searches over.
//
// Four targets are analyzed for a family with modes sigma = (l, P, Lambda, R),
// writing T, M, D for the per-mode reduced data and G_eps for the interval
// generator:
//   SigmaEps   the full system at a fixed eps > 0
//   SigmaHat   the fast (boundary-layer) system in stretched time s = t/eps
//   SigmaBar   the slow reduced system (dimension l_k, jumps truncated)
//   SigmaTilde SigmaBar with an extra transient factor F per jump accounting
//              for fast boundary-layer excursions; F ranges over products of
//              hat members.
//
// Each target yields a family of time-weighted matrices ("members"); a word
// is a finite sequence of members applied chronologically right to left, and
// its rate is log rho / total weight (or log norm / weight for upper bounds).

#include "singstab/chang_transform.hpp"
#include "singstab/matrix_kernel.hpp"
#include "singstab/system_model.hpp"

#include <string>
#include <vector>

namespace singstab {

enum class Target { SigmaEps, SigmaHat, SigmaBar, SigmaTilde };

std::string target_name(Target t);

struct ReducedFamily {
  int d = 0;
  double tau = 0.0;
  std::vector<ReducedMode> modes;
};

ReducedFamily reduce(const SwitchedFamily& f);

// --- jump maps between modes ------------------------------------------------

/// Slow-system jump into mode `to` from mode `from`:
/// (T_to R_from T_from^-1) truncated to l_to x l_from.
Matrix bar_jump(const ReducedFamily& rf, int to, int from);

/// Fast-system jump (full dimension): T_to R_from T_from^-1.
Matrix hat_jump(const ReducedFamily& rf, int to, int from);

/// Slow jump with a transient factor F inserted after R_from:
/// (T_to F R_from T_from^-1) truncated to l_to x l_from.
Matrix tilde_jump(const ReducedFamily& rf, int to, int from, const Matrix& F);

// --- transient factors -------------------------------------------------------

/// One hat member: R T^-1 diag(I_l, e^{s D}) T for mode index `mode`.
Matrix hat_member(const ReducedFamily& rf, int mode, double s);

/// Sampled transient set: identity plus products of up to n_max hat members
/// with s drawn from s_grid (all mode sequences, optionally without
/// consecutive repeats). Deduplicated to dedup_tol in Frobenius norm.
std::vector<Matrix> sample_transients(const ReducedFamily& rf, int n_max,
                                      const std::vector<double>& s_grid,
                                      bool forbid_self_switch = false,
                                      double dedup_tol = 1e-12);

/// Default log-spaced s grid on [0.05, 5], 7 points.
std::vector<double> default_s_grid();

// --- jump sets (zero-weight products; boundedness classification input) -----

std::vector<Matrix> jump_set(const SwitchedFamily& f);       // { R }
std::vector<Matrix> bar_jump_set(const ReducedFamily& rf);   // { R T^-1 diag(I_l,0) T }
std::vector<Matrix> tilde_jump_set(const ReducedFamily& rf,
                                   const std::vector<Matrix>& transients);

// --- time grids --------------------------------------------------------------

/// Log-spaced, dwell-respecting weight grid. Grids built with the same lo/hi
/// and a points_per_decade that doubles are nested, which keeps refinement
/// monotone for certified lower bounds.
struct TimeGrid {
  std::vector<double> points;

  static TimeGrid log_spaced(double lo, double hi, int points_per_decade);
  /// [max(tau, 1e-3), 50] at 24 points per decade.
  static TimeGrid dwell_default(double tau);
};

// --- generator families -------------------------------------------------------

/// One searchable family member: weight t, the matrix evaluated at mu = 0,
/// and bookkeeping for ordering, the self-switch policy, and pruning.
struct FamilyMember {
  int template_id = 0;   // (mode, transient) template, order-defining
  int mode = 0;          // mode whose R this member applies
  double t = 0.0;        // time weight, > 0
  Matrix N;              // member at mu = 0
  double norm2 = 0.0;    // ||N||_2, precomputed for optimistic bounds
};

struct GeneratorFamily {
  Target target = Target::SigmaBar;
  int d = 0;
  double tau = 0.0;
  double mu = 0.0;       // reported shift; members are stored at mu = 0
  double eps = 0.0;      // meaningful for SigmaEps only
  bool forbid_self_switch = false;
  double abscissa_floor0 = 0.0;  // floor at mu = 0; shifts by +mu except SigmaHat
  bool floor_shifts = true;      // false for SigmaHat (floor pinned at 0)
  std::vector<FamilyMember> members;

  double abscissa_floor() const {
    return floor_shifts ? abscissa_floor0 + mu : abscissa_floor0;
  }
};

struct TransientOptions {
  int n_max = 2;
  std::vector<double> s_grid;  // empty selects default_s_grid()
};

/// Members per target (evaluated at mu = 0; e^{mu t} is applied analytically
/// downstream):
///   SigmaEps:   R e^{t G_eps},                    t in grid, floor alpha(G_eps)
///   SigmaHat:   R T^-1 diag(I, e^{s D}) T,        s in grid, floor 0
///   SigmaBar:   R T^-1 diag(e^{t M}, 0) T,        t in grid, floor alpha(M)
///   SigmaTilde: F R T^-1 diag(e^{t M}, 0) T,      t in grid, floor alpha(M)
GeneratorFamily build_generators(const SwitchedFamily& f, Target target,
                                 double eps, double mu, const TimeGrid& grid,
                                 const TransientOptions& transients = {},
                                 bool forbid_self_switch = false);

/// Member matrix with the mu shift applied: e^{mu t} N (N unchanged for
/// SigmaHat, whose shift semantics do not apply).
Matrix member_at_mu(const GeneratorFamily& g, int member_index);

}  // namespace singstab
