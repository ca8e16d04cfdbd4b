#include "singstab/criteria.hpp"

#include "singstab/chang_transform.hpp"
#include "singstab/reduced_systems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace singstab {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<int> mode_tags(std::size_t count, int n_modes) {
  std::vector<int> tags(count);
  for (std::size_t i = 0; i < count; ++i) tags[i] = static_cast<int>(i % n_modes);
  return tags;
}

std::string estimate_summary(const ExponentEstimate& e) {
  std::string s = "lower " + fmt(e.certified_lower);
  if (e.witness) {
    s += " (witness length " + std::to_string(e.witness->letters.size()) + ")";
  }
  s += ", upper " + fmt(e.heuristic_upper);
  s += e.upper_certified ? " (certified on the sampled family, depth " +
                               std::to_string(e.depth_reached) + ")"
                         : " (not certified)";
  return s;
}

}  // namespace

std::string status_name(CriterionStatus s) {
  switch (s) {
    case CriterionStatus::Applied: return "applied";
    case CriterionStatus::ViolatedPremise: return "violated-premise";
    case CriterionStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

static void combine(CriteriaReport& rep) {
  rep.combined = Verdict::Inconclusive;
  for (const CriterionItem& it : rep.items) {
    if (it.conclusion == Verdict::EU) rep.combined = Verdict::EU;
  }
  if (rep.combined == Verdict::Inconclusive) {
    for (const CriterionItem& it : rep.items) {
      if (it.conclusion == Verdict::ES) rep.combined = Verdict::ES;
    }
  }
}

CriteriaReport necessary_check(const SwitchedFamily& f,
                               const AnalysisOptions& opt) {
  validate(f);
  const PremiseReport prem = check_premises(f);
  const int n = static_cast<int>(f.modes.size());
  CriteriaReport rep;

  {
    CriterionItem it;
    it.id = "zero-dwell-blowup";
    it.statement =
        "tau = 0 with unbounded jump products -> lambda(SigmaEps) = +inf for "
        "every eps";
    if (f.tau > 0.0) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "minimal dwell tau = " + fmt(f.tau) + " is positive";
    } else {
      const std::vector<Matrix> jumps = jump_set(f);
      const BoundednessReport b = classify_discrete(
          jumps, 8, 200'000, mode_tags(jumps.size(), n), opt.forbid_self_switch);
      it.value = b.certificate_value;
      if (b.verdict == Boundedness::Unbounded) {
        it.status = CriterionStatus::Applied;
        it.conclusion = Verdict::EU;
        it.detail = "jump word of length " + std::to_string(b.witness_depth) +
                    " has spectral radius " + fmt(b.certificate_value);
      } else if (b.verdict == Boundedness::Bounded) {
        it.status = CriterionStatus::Applied;
        it.detail = "jump products decay from depth " +
                    std::to_string(b.witness_depth) + " on (level norm max " +
                    fmt(b.certificate_value) + ")";
      } else {
        it.status = CriterionStatus::Inconclusive;
        it.detail = "jump boundedness unresolved to depth " +
                    std::to_string(b.depth_reached);
      }
    }
    rep.items.push_back(std::move(it));
  }

  {
    CriterionItem it;
    it.id = "slow-jump-blowup";
    it.statement =
        "tau = 0 with an expanding slow jump product -> lambda(SigmaBar) = "
        "+inf, so SigmaEps is EU for small eps";
    if (f.tau > 0.0) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "minimal dwell tau = " + fmt(f.tau) + " is positive";
    } else if (!prem.all_d_hurwitz) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "a fast block is not Hurwitz; the slow reduction is invalid";
    } else {
      try {
        const std::vector<Matrix> jumps = bar_jump_set(reduce(f));
        const BoundednessReport b =
            classify_discrete(jumps, 8, 200'000, mode_tags(jumps.size(), n),
                              opt.forbid_self_switch);
        it.value = b.certificate_value;
        if (b.verdict == Boundedness::Unbounded) {
          it.status = CriterionStatus::Applied;
          it.conclusion = Verdict::EU;
          it.detail = "slow jump word of length " +
                      std::to_string(b.witness_depth) + " has spectral radius " +
                      fmt(b.certificate_value);
        } else if (b.verdict == Boundedness::Bounded) {
          it.status = CriterionStatus::Applied;
          it.detail = "slow jump products decay from depth " +
                      std::to_string(b.witness_depth) + " on";
        } else {
          it.status = CriterionStatus::Inconclusive;
          it.detail = "slow jump boundedness unresolved to depth " +
                      std::to_string(b.depth_reached);
        }
      } catch (const std::exception& e) {
        it.status = CriterionStatus::ViolatedPremise;
        it.detail = e.what();
      }
    }
    rep.items.push_back(std::move(it));
  }

  {
    CriterionItem it;
    it.id = "slow-unstable";
    it.statement =
        "certified lambda(SigmaBar) > 0 -> SigmaEps is EU for all small eps";
    if (!prem.all_d_hurwitz) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "a fast block is not Hurwitz; the slow reduction is invalid";
    } else {
      try {
        const ExponentEstimate est =
            lambda_estimate(f, Target::SigmaBar, 0.0, opt.mu, opt.search, {},
                            opt.transients, opt.forbid_self_switch);
        it.value = est.certified_lower;
        it.status = CriterionStatus::Applied;
        it.detail = estimate_summary(est);
        if (est.certified_lower > 0.0) it.conclusion = Verdict::EU;
      } catch (const std::exception& e) {
        it.status = CriterionStatus::ViolatedPremise;
        it.detail = e.what();
      }
    }
    rep.items.push_back(std::move(it));
  }

  {
    CriterionItem it;
    it.id = "fast-unstable";
    it.statement =
        "tau = 0 and certified fast word rate > 0 -> SigmaEps grows at order "
        "1/eps, EU for all small eps";
    if (f.tau > 0.0) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "fast words compress to zero real time; needs tau = 0";
    } else {
      try {
        GeneratorFamily hat = build_generators(f, Target::SigmaHat, 0.0, 0.0,
                                               TimeGrid::dwell_default(0.0),
                                               opt.transients,
                                               opt.forbid_self_switch);
        const ExponentEstimate est = mu_estimate(hat, opt.search);
        it.value = est.certified_lower;
        it.status = CriterionStatus::Applied;
        it.detail = "fast word part: " + estimate_summary(est);
        if (est.certified_lower > 0.0) it.conclusion = Verdict::EU;
      } catch (const std::exception& e) {
        it.status = CriterionStatus::ViolatedPremise;
        it.detail = e.what();
      }
    }
    rep.items.push_back(std::move(it));
  }

  {
    CriterionItem it;
    it.id = "transient-slow-unstable";
    it.statement =
        "certified lambda(SigmaTilde) > 0 (transient-corrected slow system) -> "
        "SigmaEps is EU for all small eps";
    if (!prem.all_d_hurwitz) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "a fast block is not Hurwitz; the slow reduction is invalid";
    } else {
      try {
        const ExponentEstimate est =
            lambda_estimate(f, Target::SigmaTilde, 0.0, opt.mu, opt.search, {},
                            opt.transients, opt.forbid_self_switch);
        it.value = est.certified_lower;
        it.status = CriterionStatus::Applied;
        it.detail = estimate_summary(est);
        if (est.certified_lower > 0.0) it.conclusion = Verdict::EU;
      } catch (const std::exception& e) {
        it.status = CriterionStatus::ViolatedPremise;
        it.detail = e.what();
      }
    }
    rep.items.push_back(std::move(it));
  }

  combine(rep);
  return rep;
}

CriteriaReport sufficient_check(const SwitchedFamily& f,
                                const AnalysisOptions& opt) {
  validate(f);
  const PremiseReport prem = check_premises(f);
  const int n = static_cast<int>(f.modes.size());
  CriteriaReport rep;

  {
    CriterionItem it;
    it.id = "slow-stable-dwell";
    it.statement =
        "tau > 0, fast blocks Hurwitz, certified lambda(SigmaBar) < 0 -> "
        "SigmaEps is ES for all small eps";
    if (f.tau <= 0.0) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "needs a positive minimal dwell";
    } else if (!prem.all_d_hurwitz) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "a fast block is not Hurwitz";
    } else {
      try {
        const ExponentEstimate est =
            lambda_estimate(f, Target::SigmaBar, 0.0, opt.mu, opt.search, {},
                            opt.transients, opt.forbid_self_switch);
        it.value = est.heuristic_upper;
        it.detail = estimate_summary(est);
        if (est.upper_certified && est.heuristic_upper < 0.0) {
          it.status = CriterionStatus::Applied;
          it.conclusion = Verdict::ES;
        } else if (!est.upper_certified) {
          it.status = CriterionStatus::Inconclusive;
        } else {
          it.status = CriterionStatus::Applied;
        }
      } catch (const std::exception& e) {
        it.status = CriterionStatus::ViolatedPremise;
        it.detail = e.what();
      }
    }
    rep.items.push_back(std::move(it));
  }

  {
    CriterionItem it;
    it.id = "zero-dwell-stable";
    it.statement =
        "tau = 0, decaying jump products, certified fast word rate < 0 and "
        "certified lambda(SigmaTilde) < 0 -> SigmaEps is ES for all small eps";
    if (f.tau > 0.0) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "needs zero minimal dwell (use slow-stable-dwell instead)";
    } else if (!prem.all_d_hurwitz) {
      it.status = CriterionStatus::ViolatedPremise;
      it.detail = "a fast block is not Hurwitz";
    } else {
      try {
        const std::vector<Matrix> jumps = jump_set(f);
        const BoundednessReport cls = classify_discrete(
            jumps, 8, 200'000, mode_tags(jumps.size(), n),
            opt.forbid_self_switch);
        GeneratorFamily hat = build_generators(f, Target::SigmaHat, 0.0, 0.0,
                                               TimeGrid::dwell_default(0.0),
                                               opt.transients,
                                               opt.forbid_self_switch);
        const ExponentEstimate fast = mu_estimate(hat, opt.search);
        const ExponentEstimate slow =
            lambda_estimate(f, Target::SigmaTilde, 0.0, opt.mu, opt.search, {},
                            opt.transients, opt.forbid_self_switch);
        const bool fast_gate = cls.verdict == Boundedness::Bounded &&
                               fast.upper_certified &&
                               fast.heuristic_upper < 0.0;
        const bool slow_gate = slow.upper_certified && slow.heuristic_upper < 0.0;
        it.value = slow.heuristic_upper;
        it.detail = "jump products " + boundedness_name(cls.verdict) +
                    "; fast word part: " + estimate_summary(fast) +
                    "; transient-corrected slow: " + estimate_summary(slow);
        if (fast_gate && slow_gate) {
          it.status = CriterionStatus::Applied;
          it.conclusion = Verdict::ES;
        } else if (!fast.upper_certified || !slow.upper_certified ||
                   cls.verdict == Boundedness::Inconclusive) {
          it.status = CriterionStatus::Inconclusive;
        } else {
          it.status = CriterionStatus::Applied;
        }
      } catch (const std::exception& e) {
        it.status = CriterionStatus::ViolatedPremise;
        it.detail = e.what();
      }
    }
    rep.items.push_back(std::move(it));
  }

  combine(rep);
  return rep;
}

Prop1Report prop1_check(const SwitchedFamily& f, const AnalysisOptions& opt) {
  validate(f);
  const int n = static_cast<int>(f.modes.size());
  Prop1Report rep;

  rep.floor_alpha = -kInf;
  for (const Mode& m : f.modes) {
    rep.floor_alpha = std::max(rep.floor_alpha, spectral_abscissa(slow_limit(m)));
  }

  // zero-dwell limit system: continuous generators slow_limit(m), jumps R
  {
    GeneratorFamily z;
    z.target = Target::SigmaEps;
    z.d = f.d;
    z.tau = 0.0;
    z.mu = 0.0;
    z.eps = 0.0;
    z.forbid_self_switch = opt.forbid_self_switch;
    z.abscissa_floor0 = rep.floor_alpha;
    const TimeGrid grid = TimeGrid::dwell_default(0.0);
    for (int i = 0; i < n; ++i) {
      const Matrix zgen = slow_limit(f.modes[i]);
      for (double t : grid.points) {
        FamilyMember mem;
        mem.template_id = i;
        mem.mode = i;
        mem.t = t;
        mem.N = f.modes[i].R * mat_exp(zgen, t);
        mem.norm2 = operator_norm(mem.N);
        z.members.push_back(std::move(mem));
      }
    }
    const std::vector<Matrix> jumps = jump_set(f);
    const BoundednessReport cls =
        classify_discrete(jumps, 8, 200'000, mode_tags(jumps.size(), n),
                          opt.forbid_self_switch);
    rep.jumps_bounded_known = cls.verdict == Boundedness::Bounded;
    if (cls.verdict == Boundedness::Unbounded) {
      rep.z_lower = kInf;
      rep.z_upper = kInf;
      rep.z_upper_certified = true;
    } else {
      const ExponentEstimate est = mu_estimate(z, opt.search);
      rep.z_lower = std::max(rep.floor_alpha, est.certified_lower);
      rep.z_upper = std::max(rep.floor_alpha, est.heuristic_upper);
      rep.z_upper_certified =
          est.upper_certified && cls.verdict == Boundedness::Bounded;
    }
    rep.z_limit_lower = std::max(0.0, rep.z_lower);
  }

  rep.per_eps_floor_respected = true;
  for (double eps : opt.eps_grid) {
    Prop1Eps pe;
    pe.eps = eps;
    const ExponentEstimate est =
        lambda_estimate(f, Target::SigmaEps, eps, 0.0, opt.search, {},
                        opt.transients, opt.forbid_self_switch);
    pe.eps_lambda_lower = eps * est.certified_lower;
    pe.eps_floor = -kInf;
    for (const Mode& m : f.modes) {
      const Matrix scaled =
          invert(m.P).inverse * eps_scale_complement(f.d, m.l, eps) * m.Lambda;
      pe.eps_floor = std::max(pe.eps_floor, spectral_abscissa(scaled));
    }
    if (!(pe.eps_lambda_lower >= pe.eps_floor - 1e-6)) {
      rep.per_eps_floor_respected = false;
    }
    rep.per_eps.push_back(pe);
  }

  {
    std::string note = "eps * lower: ";
    for (const Prop1Eps& pe : rep.per_eps) {
      note += "(" + fmt(pe.eps) + ": " + fmt(pe.eps_lambda_lower) + ") ";
    }
    if (f.tau > 0.0) {
      note += "; dwell tau = " + fmt(f.tau) +
              " forces long words, expected limit is the floor " +
              fmt(rep.floor_alpha);
    } else {
      note += "; predicted zero-dwell limit max(0, z) = " + fmt(rep.z_limit_lower);
    }
    if (!rep.jumps_bounded_known) {
      note += "; limit formula assumes bounded jump products (unverified)";
    }
    rep.trend_note = std::move(note);
  }
  return rep;
}

SwitchedFamily build_complementary_family(const ComplementarySpec& spec) {
  if (spec.m_set.empty()) throw std::invalid_argument("empty matrix set");
  const int d = static_cast<int>(spec.m_set[0].rows());
  if (spec.l <= 0 || spec.l >= d) {
    throw std::invalid_argument("slow dimension must split the state");
  }
  Matrix J = Matrix::Zero(d, d);
  J.topRightCorner(d - spec.l, d - spec.l) =
      Matrix::Identity(d - spec.l, d - spec.l);
  J.bottomLeftCorner(spec.l, spec.l) = Matrix::Identity(spec.l, spec.l);

  SwitchedFamily f;
  f.d = d;
  f.tau = spec.tau;
  for (const Matrix& m : spec.m_set) {
    if (m.rows() != d || m.cols() != d) {
      throw std::invalid_argument("matrix set dimensions disagree");
    }
    Mode slow;
    slow.l = spec.l;
    slow.P = Matrix::Identity(d, d);
    slow.Lambda = m;
    slow.R = Matrix::Identity(d, d);
    f.modes.push_back(std::move(slow));

    Mode fast;
    fast.l = d - spec.l;
    fast.P = J;
    fast.Lambda = J * m;
    fast.R = Matrix::Identity(d, d);
    f.modes.push_back(std::move(fast));
  }
  return f;
}

Prop2Report prop2_check(const ComplementarySpec& spec) {
  Prop2Report rep;
  if (spec.m_set.empty()) {
    rep.branch = "empty";
    rep.detail = "no matrices given";
    return rep;
  }
  const int d = static_cast<int>(spec.m_set[0].rows());
  const int l = spec.l;
  if (l <= 0 || l >= d) {
    rep.branch = "invalid-split";
    rep.detail = "slow dimension must satisfy 0 < l < d";
    return rep;
  }

  double worst_abscissa = -kInf;
  for (const Matrix& m : spec.m_set) {
    worst_abscissa =
        std::max(worst_abscissa, spectral_abscissa(m.topLeftCorner(l, l)));
    worst_abscissa = std::max(
        worst_abscissa, spectral_abscissa(m.bottomRightCorner(d - l, d - l)));
  }
  if (worst_abscissa > 0.0) {
    rep.verdict = Verdict::EU;
    rep.branch = "diagonal-block-unstable";
    rep.value = worst_abscissa;
    rep.detail =
        "a diagonal block with abscissa " + fmt(worst_abscissa) +
        " is the fast block of one mode, so the fast system blows up";
    return rep;
  }
  if (worst_abscissa == 0.0) {
    rep.branch = "marginal-block";
    rep.detail = "a diagonal block has abscissa 0; no test applies";
    return rep;
  }
  rep.premises_ok = true;

  // each switch between a matrix's two modes contributes the slow jump
  // -M22^-1 M21 (or -M11^-1 M12 back); an expanding cyclic pair certifies EU
  double max_radius = 0.0;
  for (const Matrix& m : spec.m_set) {
    for (const Matrix& nmat : spec.m_set) {
      const Matrix m11 = m.topLeftCorner(l, l);
      const Matrix m12 = m.topRightCorner(l, d - l);
      const Matrix n21 = nmat.bottomLeftCorner(d - l, l);
      const Matrix n22 = nmat.bottomRightCorner(d - l, d - l);
      const Matrix cycle =
          invert(m11).inverse * m12 * invert(n22).inverse * n21;
      max_radius = std::max(max_radius, spectral_radius(cycle));
    }
  }
  rep.value = max_radius;
  if (max_radius > 1.0) {
    rep.verdict = Verdict::EU;
    rep.branch = "slow-jump-radius";
    rep.detail = "a slow jump cycle has spectral radius " + fmt(max_radius);
    return rep;
  }
  if (d == 2 && l == 1) {
    if (max_radius < 1.0) {
      rep.verdict = Verdict::ES;
      rep.branch = "pair-contraction";
      rep.detail = "|M12 N21| < |M11 N22| for every ordered pair (max ratio " +
                   fmt(max_radius) + ")";
    } else {
      rep.branch = "marginal-pair";
      rep.detail = "a pair sits exactly on |M12 N21| = |M11 N22|";
    }
    return rep;
  }
  rep.branch = "no-scalar-test";
  rep.detail = "slow jump radius " + fmt(max_radius) +
               " <= 1, but the contraction test needs d = 2, l = 1";
  return rep;
}

ApproxReport approx_validate(const SwitchedFamily& f,
                             const std::vector<double>& eps_grid,
                             const std::vector<double>& t_grid, double mu) {
  validate(f);
  ApproxReport rep;

  double gamma = kInf;
  for (const Mode& m : f.modes) {
    if (m.l <= 0 || m.l >= f.d) continue;
    gamma = std::min(gamma, -spectral_abscissa(abcd(m).D));
  }
  rep.c_split = (gamma > 0.0 && gamma < kInf) ? std::max(1.0, 1.0 / gamma) : 1.0;

  double eps_min = kInf, eps_max = -kInf;
  for (double e : eps_grid) {
    eps_min = std::min(eps_min, e);
    eps_max = std::max(eps_max, e);
  }

  for (int i = 0; i < static_cast<int>(f.modes.size()); ++i) {
    const Mode& m = f.modes[i];
    if (m.l <= 0 || m.l >= f.d) continue;
    ApproxModeReport mr;
    mr.mode = i;
    const ReducedMode rm = reduced_mode(m);
    const Matrix m_mu = rm.M + mu * Matrix::Identity(m.l, m.l);
    const int lf = f.d - m.l;

    for (double eps : eps_grid) {
      if (!(eps > 0.0)) continue;
      ChangData cd;
      try {
        cd = build_transform(m, eps, i);
      } catch (const ConvergenceError&) {
        continue;  // eps too large for the decoupling; skip the column
      }
      const Matrix gamma_mu = gamma_shifted(cd, mu);
      const double boundary = rep.c_split * eps * std::abs(std::log(eps));
      const Matrix fast_mu =
          rm.D / eps + mu * Matrix::Identity(lf, lf);
      for (double t : t_grid) {
        if (t < 0.0) continue;
        if (t == 0.0) {
          // zero time: both flows are the identity, so the gap is exactly 0
          mr.samples.push_back(ApproxSample{eps, 0.0, 0.0, 0.0});
          continue;
        }
        const Matrix full = mat_exp(gamma_mu, t);
        const Matrix split = block_diag(mat_exp(m_mu, t), mat_exp(fast_mu, t));
        ApproxSample s;
        s.eps = eps;
        s.t = t;
        s.deviation = operator_norm(full - split);
        s.ratio = s.deviation / std::min(eps, t);
        mr.fitted_k = std::max(mr.fitted_k, s.ratio);
        if (eps == eps_min) mr.k_at_eps_min = std::max(mr.k_at_eps_min, s.ratio);
        if (eps == eps_max) mr.k_at_eps_max = std::max(mr.k_at_eps_max, s.ratio);
        mr.samples.push_back(s);

        // back in original coordinates, against the pure slow / pure fast
        // pictures on their own sides of the eps |log eps| boundary
        const Matrix flow = cd.T_inv * full * cd.T;
        if (t >= boundary) {
          const Matrix slow_pic =
              rm.T_inv *
              block_diag(mat_exp(m_mu, t), Matrix::Zero(lf, lf)) * rm.T;
          mr.transformed_k_slow = std::max(
              mr.transformed_k_slow, operator_norm(flow - slow_pic) / eps);
        } else {
          const Matrix fast_pic =
              rm.T_inv *
              (std::exp(mu * t) *
               block_diag(Matrix::Identity(m.l, m.l), mat_exp(rm.D, t / eps)))
                  .eval() *
              rm.T;
          mr.transformed_k_fast =
              std::max(mr.transformed_k_fast,
                       operator_norm(flow - fast_pic) /
                           (eps * std::abs(std::log(eps))));
        }
      }
    }
    mr.blow_up = mr.k_at_eps_min > 10.0 * mr.k_at_eps_max;
    rep.modes.push_back(std::move(mr));
  }
  return rep;
}

}  // namespace singstab
