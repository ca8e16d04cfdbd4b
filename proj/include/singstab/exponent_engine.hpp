#pragma once

// Maximal Lyapunov exponent estimation over time-weighted matrix products.
//
// For a generator family with members (N_i, t_i) the exponent of interest is
//   max( abscissa_floor , sup over nonempty words w of log rho(Pi_w) / |w| )
// with Pi_w the chronological product and |w| the weight sum. Every word rate
// is a certified lower bound (repeat the word periodically); upper bounds
// come from exact-depth norm maxima: for any k,
//   sup_w log rho(Pi_w)/|w| <= max_{|w| = k letters} log ||Pi_w|| / |w|,
// because any power of any word splits into length-k blocks. Finite grids
// mean upper bounds are certified only for the sampled family; reports keep
// the distinction explicit.

#include "singstab/reduced_systems.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace singstab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Letter {
  int member_index = 0;
};

struct WitnessWord {
  std::vector<Letter> letters;
  double rate = -kInf;  // log rho / weight
};

struct SearchOptions {
  int depth = 8;                 // max word length for the lower search
  int closure_depth = 0;         // 0: same as depth; exact-depth norm closures
  std::int64_t budget = 2'000'000;  // max word evaluations overall
  double prune_slack = 1e-9;     // conservative margin so pruning never
                                 // discards a potential incumbent
};

struct ExponentEstimate {
  Target target = Target::SigmaBar;
  double eps = 0.0;
  double mu = 0.0;

  double certified_lower = -kInf;  // max(floor, best word rate); +inf when a
                                   // zero-dwell jump word certifies blow-up.
                                   // Under the no-self-switch policy only
                                   // words whose first and last modes differ
                                   // count (they tile into admissible
                                   // periodic signals; others do not)
  double heuristic_upper = kInf;   // max(floor, best norm closure)
  bool upper_certified = false;    // true when a full exact-depth norm
                                   // closure finished within budget (valid
                                   // for the sampled family)
  double abscissa_floor = -kInf;
  double best_word_rate = -kInf;   // word part of the lower bound
  std::optional<WitnessWord> witness;

  int depth_reached = 0;
  std::int64_t words_evaluated = 0;
  bool budget_exhausted = false;
  std::vector<std::string> notes;  // +inf certificates, boundedness caveats
};

/// Word-product exponent of a bare family (no floor, no jump-set analysis):
/// certified_lower is the exact maximum word rate over all words of length
/// <= depth (branch-and-bound prunes only subtrees that provably cannot beat
/// the incumbent, so the result equals exhaustive enumeration). The mu shift
/// is applied analytically to both bounds.
ExponentEstimate mu_estimate(const GeneratorFamily& g,
                             const SearchOptions& opt = {});

/// Exponent of the target system: mu_estimate combined with the abscissa
/// floor, plus the zero-dwell blow-up rule (tau = 0 and an unbounded jump
/// set force +inf; SigmaHat and SigmaTilde always use their zero-weight jump
/// sets, SigmaEps/SigmaBar only when tau = 0).
ExponentEstimate lambda_estimate(const SwitchedFamily& f, Target target,
                                 double eps, double mu,
                                 const SearchOptions& opt = {},
                                 const TimeGrid& grid = {},
                                 const TransientOptions& transients = {},
                                 bool forbid_self_switch = false);

// --- boundedness of jump-product semigroups ----------------------------------

enum class Boundedness { Bounded, Unbounded, Inconclusive };

std::string boundedness_name(Boundedness b);

struct BoundednessReport {
  Boundedness verdict = Boundedness::Inconclusive;
  int depth_reached = 0;
  /// Unbounded: spectral radius of the certificate word (> 1).
  /// Bounded: the level-k norm maximum (< 1) at depth `witness_depth`.
  double certificate_value = 0.0;
  int witness_depth = 0;
  std::vector<int> certificate_word;  // member indices, chronological
  std::int64_t products_checked = 0;
  bool budget_exhausted = false;
};

/// Classifies the multiplicative semigroup of a finite jump set:
/// Unbounded when some product has spectral radius > 1 + 1e-12 (certificate
/// word attached); Bounded when some exact depth k has every length-k product
/// norm < 1 - 1e-12 (then all long products decay); Inconclusive otherwise.
///
/// When `modes` tags the jumps and forbid_self_switch is set, products skip
/// consecutive equal tags, and an unbounded certificate additionally needs
/// first tag != last tag so the word tiles into an admissible sequence.
BoundednessReport classify_discrete(const std::vector<Matrix>& jumps,
                                    int depth = 8,
                                    std::int64_t budget = 200'000,
                                    const std::vector<int>& modes = {},
                                    bool forbid_self_switch = false);

// --- verdicts ----------------------------------------------------------------

enum class Verdict { ES, EU, Inconclusive };

std::string verdict_name(Verdict v);

/// ES requires a certified negative upper bound; EU a positive certified
/// lower bound. Anything else is Inconclusive.
Verdict verdict(const ExponentEstimate& e);

// --- word evaluation (shared with tests and witness replay) ------------------

/// Chronological product of the letters (letters[k] applied after
/// letters[k-1]; the product left-multiplies each new letter).
ScaledMatrix evaluate_word(const GeneratorFamily& g,
                           const std::vector<Letter>& word);

/// log rho(Pi)/|w| and log||Pi||_2/|w| at mu = 0.
double word_rate_rho(const GeneratorFamily& g, const std::vector<Letter>& word);
double word_rate_norm(const GeneratorFamily& g, const std::vector<Letter>& word);

}  // namespace singstab
