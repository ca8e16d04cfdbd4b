#pragma once

// Problem data: impulsive linear switched families with two-time-scale
// structure, switching signals, JSON round-trip, and the per-mode derived
// matrices everything downstream consumes.
//
// A mode is (l, P, Lambda, R): on each inter-switch interval the state obeys
// E^eps_l P x' = Lambda x, and at a switch out of the mode x jumps to R x.
// E^eps_l = diag(1,...,1, eps,...,eps) with l ones; E^eps_{l^c} swaps the
// roles. The identity eps * (E^eps_l)^-1 = E^eps_{l^c} holds for eps > 0.

#include "singstab/matrix_kernel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace singstab {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Mode {
  int l = 0;       // slow block size, 0 <= l <= d
  Matrix P;        // invertible coordinate mix
  Matrix Lambda;   // right-hand side
  Matrix R;        // jump applied when leaving this mode
};

struct SwitchedFamily {
  int d = 0;
  double tau = 0.0;  // dwell time, >= 0
  std::vector<Mode> modes;
};

/// Piecewise-constant mode signal: pieces[k] is active on [t_k, t_{k+1});
/// final_mode takes over after the last listed piece.
struct Piece {
  int mode = 0;
  double duration = 0.0;  // > 0
};

struct Signal {
  std::vector<Piece> pieces;
  int final_mode = 0;
};

// --- scale matrices -------------------------------------------------------

Matrix eps_scale(int d, int l, double eps);             // E^eps_l
Matrix eps_scale_complement(int d, int l, double eps);  // E^eps_{l^c}

// --- per-mode derived data -------------------------------------------------

/// Blocks of Lambda * P^-1 partitioned at l: [A B; C D].
struct ModeBlocks {
  Matrix A, B, C, D;
  int l = 0;
  int d = 0;
};
ModeBlocks abcd(const Mode& m);

/// (1/eps) P^-1 E^eps_{l^c} Lambda, the interval generator at eps > 0.
Matrix epsilon_generator(const Mode& m, double eps);

/// P^-1 E^0_{l^c} Lambda, the eps -> 0 limit of eps * epsilon_generator.
/// Similar to [0 0; C D], so its abscissa is max(0, abscissa(D)).
Matrix slow_limit(const Mode& m);

// --- validation ------------------------------------------------------------

/// Structural validation: dimensions, l range, P invertibility, tau >= 0.
/// Throws ParseError with a path-style location ("modes[1].P: ...").
void validate(const SwitchedFamily& f);

struct ModePremise {
  bool d_hurwitz = false;
  double d_abscissa = 0.0;
  double p_condition = 0.0;
  bool p_ill_conditioned = false;  // condition > 1e8
};

/// Analysis premises that are NOT structural errors: D-block Hurwitz flags
/// and P conditioning. A family may be simulated and estimated with premises
/// violated; criteria report them instead of silently proceeding.
struct PremiseReport {
  std::vector<ModePremise> modes;
  bool all_d_hurwitz = false;
  bool any_ill_conditioned = false;
};
PremiseReport check_premises(const SwitchedFamily& f);

// --- JSON round-trip --------------------------------------------------------

// Numbers are emitted with shortest round-trip formatting, so
// parse(serialize(x)) reproduces every double bit-exactly.
SwitchedFamily parse_system(const std::string& json_text);
SwitchedFamily load_system(const std::string& path);
std::string serialize_system(const SwitchedFamily& f);

Signal parse_signal(const std::string& json_text);
Signal load_signal(const std::string& path);
std::string serialize_signal(const Signal& s);

// --- signal helpers ---------------------------------------------------------

/// Throws AdmissibilityError unless every piece has duration >= tau (within
/// 1e-12), a valid mode index, and (optionally) no consecutive repeats.
void check_admissible(const Signal& s, const SwitchedFamily& f,
                      bool forbid_self_switch = false);

double signal_duration(const Signal& s);
int mode_at(const Signal& s, double t);
/// Switch instants t_1 < t_2 < ... <= t_end (t_0 = 0 is not a switch).
std::vector<double> switching_times(const Signal& s, double t_end);

/// Cyclic repetition of `modes` with equal piece length until t_end is
/// covered; ceil(t_end / piece) pieces total.
Signal periodic_signal(const std::vector<int>& modes, double piece,
                       double t_end);

/// Reproducible random signal: durations tau + Exp(mean_extra), modes uniform
/// (never repeating the previous mode when forbid_self_switch). Pieces are
/// appended until they cover t_end, so the count is in [1, ceil(t_end/tau)]
/// for tau > 0.
Signal random_signal(std::uint64_t seed, const SwitchedFamily& f, double tau,
                     double mean_extra, double t_end,
                     bool forbid_self_switch = false);

}  // namespace singstab
