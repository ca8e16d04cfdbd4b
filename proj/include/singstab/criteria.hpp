#pragma once

// Stability criteria reports: each item names its hypothesis, whether the
// hypotheses could be checked (premises), the certified conclusion if any,
// and the numbers behind it. Upper-bound-based conclusions are labeled with
// their sampled-grid provenance; nothing here claims continuum certificates.

#include "singstab/exponent_engine.hpp"
#include "singstab/system_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace singstab {

enum class CriterionStatus { Applied, ViolatedPremise, Inconclusive };

std::string status_name(CriterionStatus s);

struct CriterionItem {
  std::string id;          // stable identifier, e.g. "slow-unstable-dwell"
  std::string statement;   // human-readable hypothesis -> conclusion
  CriterionStatus status = CriterionStatus::Inconclusive;
  Verdict conclusion = Verdict::Inconclusive;  // about SigmaEps for small eps
  std::string detail;      // numbers, certificates, caveats
  double value = 0.0;      // headline quantity (bound, radius, ...)
};

struct AnalysisOptions {
  SearchOptions search;
  TransientOptions transients;
  bool forbid_self_switch = false;
  std::vector<double> eps_grid = {1e-1, 1e-2, 1e-3};
  double mu = 0.0;
};

struct CriteriaReport {
  std::vector<CriterionItem> items;
  /// EU if any item certifies EU; ES if any certifies ES; else Inconclusive.
  Verdict combined = Verdict::Inconclusive;
};

/// Instability side: slow system unstable at tau > 0 (or tau = 0 with bounded
/// jump semigroups), fast system unstable with bounded jumps (order 1/eps),
/// unbounded zero-dwell jump products (lambda = +inf at every eps), and the
/// dwell-shrinking route from an expanding slow jump product.
CriteriaReport necessary_check(const SwitchedFamily& f,
                               const AnalysisOptions& opt = {});

/// Stability side: certified negative slow upper bound at tau > 0; at tau = 0
/// the transient-corrected slow system plus the fast-gate
/// (norm-closure-certified negative fast exponent at switching times).
CriteriaReport sufficient_check(const SwitchedFamily& f,
                                const AnalysisOptions& opt = {});

// --- slow-limit floor and the eps -> 0 trend ---------------------------------

struct Prop1Eps {
  double eps = 0.0;
  double eps_lambda_lower = 0.0;  // eps * certified_lower(lambda(SigmaEps))
  double eps_floor = 0.0;         // alpha(P^-1 E^eps_{l^c} Lambda), family sup
};

struct Prop1Report {
  double floor_alpha = 0.0;       // sup over modes alpha(P^-1 E^0_{l^c} Lambda)
  double z_lower = 0.0;           // certified lower for the zero-dwell limit
  double z_upper = 0.0;           //   system built from the slow limits
  bool z_upper_certified = false;
  double z_limit_lower = 0.0;     // max(0, z_lower): predicted limit of
                                  //   eps * lambda(SigmaEps)
  std::vector<Prop1Eps> per_eps;
  bool per_eps_floor_respected = false;  // eps_lambda_lower >= eps_floor - 1e-6
  bool jumps_bounded_known = false;      // limit formula needs bounded jumps
  std::string trend_note;
};

/// Scale-weighted floor: alpha of the slow limit is >= 0 (it equals
/// max(0, alpha(D))); eps * lambda(SigmaEps) respects the per-eps floor
/// alpha(P^-1 E^eps_{l^c} Lambda) at every grid eps; the trend toward
/// max(0, lambda of the zero-dwell slow-limit system) is reported, not gated.
Prop1Report prop1_check(const SwitchedFamily& f,
                        const AnalysisOptions& opt = {});

// --- complementary two-mode construction -------------------------------------

/// Input: square matrices M (all d x d) whose diagonal blocks at l are
/// Hurwitz. The built family has, per M, one mode (l, I, M, I) and one
/// swapped mode (d-l, J, J M, I) with J = [0 I_{d-l}; I_l 0], so each state
/// block is slow in one mode and fast in the other.
struct ComplementarySpec {
  std::vector<Matrix> m_set;
  int l = 0;
  double tau = 0.0;
};

SwitchedFamily build_complementary_family(const ComplementarySpec& spec);

struct Prop2Report {
  Verdict verdict = Verdict::Inconclusive;
  std::string branch;  // which test fired
  double value = 0.0;  // abscissa, radius, or the ES margin
  bool premises_ok = false;
  std::string detail;
};

/// Closed-form tests on the M-set: EU when some diagonal block has positive
/// abscissa or some pair has rho(M11^-1 M12 N22^-1 N21) > 1; ES (d = 2,
/// l = 1 only) when |M12 N21| < |M11 N22| for every ordered pair.
Prop2Report prop2_check(const ComplementarySpec& spec);

// --- two-scale approximation bounds -------------------------------------------

struct ApproxSample {
  double eps = 0.0;
  double t = 0.0;
  double deviation = 0.0;   // ||e^{t Gamma^{eps,mu}} - e^{mu t} diag(e^{t M}, e^{t D/eps})||
  double ratio = 0.0;       // deviation / min(eps, t), t > 0
};

struct ApproxModeReport {
  int mode = 0;
  std::vector<ApproxSample> samples;
  double fitted_k = 0.0;            // max ratio over the (eps, t) grid
  double k_at_eps_min = 0.0;        // max ratio at the smallest eps
  double k_at_eps_max = 0.0;        //   and at the largest eps
  double transformed_k_slow = 0.0;  // ||(T^eps)^-1 e^{tGamma} T^eps - T^-1 diag(e^{tM},0) T|| / eps,
                                    //   over t >= C eps |log eps|
  double transformed_k_fast = 0.0;  // same vs T^-1 diag(I, e^{tD/eps}) T, over
                                    //   t < C eps |log eps|, scaled by eps |log eps|
  bool blow_up = false;             // k_at_eps_min > 10 * k_at_eps_max
};

struct ApproxReport {
  std::vector<ApproxModeReport> modes;
  double c_split = 1.0;             // C = max(1, 1/gamma), regime boundary factor
};

/// Deviation of the triangular flow from the decoupled two-scale flow, per
/// mode, over an (eps, t) grid; checks the min(eps, t)-scaled ratio stays
/// bounded by a single constant across eps (no blow-up as eps -> 0).
ApproxReport approx_validate(const SwitchedFamily& f,
                             const std::vector<double>& eps_grid,
                             const std::vector<double>& t_grid,
                             double mu = 0.0);

}  // namespace singstab
