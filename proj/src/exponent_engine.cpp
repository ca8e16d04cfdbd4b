#include "singstab/exponent_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace singstab {

namespace {

// Exploration state shared by the iterative-deepening runs.
//
// Lower bounds: every visited word contributes log rho / weight; pruning
// discards a subtree only when an optimistic norm bound proves every
// descendant stays strictly below the incumbent minus a guard, so the final
// incumbent equals exhaustive enumeration over the same depth.
//
// Upper bounds: a completed exact-depth run yields
//   U_K >= max over length-K words of log||Pi||/|w|,
// which bounds the whole word supremum (any long product splits into
// length-K blocks). Subtrees pruned for the lower search fold their
// optimistic exact-depth value into U_K instead of being enumerated, but only
// when that value is already below the closure target (default 0), so U_K
// keeps enough precision to decide stability signs.
struct Search {
  const GeneratorFamily* g = nullptr;
  const SearchOptions* opt = nullptr;

  double g_plus = 0.0;        // max per-letter log ||N||_2
  double pair_gain = 0.0;     // max admissible-pair log ||N_a N_b||_2 (refined bound)
  bool pair_gain_ready = false;
  double t_min = 0.0, t_max = 0.0;

  double best_lower = -kInf;  // incumbent word rho-rate at mu = 0
  std::vector<Letter> best_word;
  std::vector<double> u_k;         // per-depth norm maxima (valid when completed)
  std::vector<char> u_k_complete;  // run K finished within budget

  std::int64_t evaluated = 0;
  bool exhausted = false;

  // DFS scratch
  std::vector<Letter> word;

  double guard() const {
    if (best_lower == -kInf) return 0.0;
    return opt->prune_slack * (1.0 + std::abs(best_lower));
  }

  // Best possible log-norm gain of r extension letters.
  double gain_bound(int r) const {
    if (!pair_gain_ready) return r * g_plus;
    double gain = 0.0;  // assembled termwise: 0 * (-inf) is NaN
    if (r / 2 > 0) gain += (r / 2) * pair_gain;
    if (r % 2) gain += g_plus;
    return gain;
  }

  // Upper bound on the norm rate of any descendant exactly r letters below a
  // node with log Frobenius norm lf and accumulated weight w.
  double opt_at(double lf, double w, int r) const {
    const double num = lf + gain_bound(r);
    if (num == -kInf) return -kInf;
    return std::max(num / (w + r * t_min), num / (w + r * t_max));
  }

  double opt_any(double lf, double w, int r_max) const {
    double best = -kInf;
    for (int r = 1; r <= r_max; ++r) best = std::max(best, opt_at(lf, w, r));
    return best;
  }

  bool allowed_after(int member, int prev_mode) const {
    if (!g->forbid_self_switch || prev_mode < 0) return true;
    return g->members[member].mode != prev_mode;
  }

  // returns false when the budget ran out
  bool dfs(const ScaledMatrix& prod, double weight, int prev_mode, int k_target) {
    const int j = static_cast<int>(word.size());
    for (std::size_t i = 0; i < g->members.size(); ++i) {
      if (!allowed_after(static_cast<int>(i), prev_mode)) continue;
      if (evaluated >= opt->budget) {
        exhausted = true;
        return false;
      }
      ++evaluated;
      const FamilyMember& m = g->members[i];
      ScaledMatrix next = prod;
      if (j == 0) {
        next = ScaledMatrix::from(m.N);
      } else {
        next.apply_left(m.N);
      }
      word.push_back({static_cast<int>(i)});
      const double w = weight + m.t;
      const double lf = next.log_frobenius();
      const double rate_f = lf / w;

      if (next.zero) {
        // the zero product absorbs: every descendant rate is -inf
        if (j + 1 == k_target) u_k[k_target] = std::max(u_k[k_target], -kInf);
        word.pop_back();
        continue;
      }

      // Incumbent update, gated twice: a word certifies only if its periodic
      // repetition is admissible (first mode != last mode when self-switches
      // are forbidden), and rho-rate <= Frobenius-rate makes cheap skips safe.
      const bool seam_ok =
          !g->forbid_self_switch ||
          (j > 0 && g->members[word.front().member_index].mode != m.mode);
      if (seam_ok && rate_f >= best_lower - guard()) {
        const double rate_rho = next.log_radius() / w;
        if (rate_rho > best_lower) {
          best_lower = rate_rho;
          best_word = word;
        }
      }

      if (j + 1 == k_target) {
        u_k[k_target] = std::max(u_k[k_target], next.log_norm2() / w);
      } else {
        const int remaining = k_target - (j + 1);
        const bool lower_hopeless = opt_any(lf, w, remaining) < best_lower - guard();
        const double opt_exact = opt_at(lf, w, remaining);
        if (lower_hopeless && opt_exact < 0.0) {
          u_k[k_target] = std::max(u_k[k_target], opt_exact);
        } else {
          if (!dfs(next, w, m.mode, k_target)) {
            word.pop_back();
            return false;
          }
        }
      }
      word.pop_back();
    }
    return true;
  }
};

}  // namespace

ScaledMatrix evaluate_word(const GeneratorFamily& g, const std::vector<Letter>& word) {
  if (word.empty()) throw std::invalid_argument("evaluate_word: empty word");
  ScaledMatrix prod = ScaledMatrix::from(g.members.at(word[0].member_index).N);
  for (std::size_t k = 1; k < word.size(); ++k) {
    prod.apply_left(g.members.at(word[k].member_index).N);
  }
  return prod;
}

static double word_weight(const GeneratorFamily& g, const std::vector<Letter>& word) {
  double w = 0.0;
  for (const Letter& l : word) w += g.members.at(l.member_index).t;
  return w;
}

double word_rate_rho(const GeneratorFamily& g, const std::vector<Letter>& word) {
  return evaluate_word(g, word).log_radius() / word_weight(g, word);
}

double word_rate_norm(const GeneratorFamily& g, const std::vector<Letter>& word) {
  return evaluate_word(g, word).log_norm2() / word_weight(g, word);
}

ExponentEstimate mu_estimate(const GeneratorFamily& g, const SearchOptions& opt) {
  if (g.members.empty()) {
    throw std::invalid_argument("mu_estimate: family has no members");
  }
  const int depth = std::max(1, opt.depth);
  const int k_max = std::max(depth, opt.closure_depth);

  Search s;
  s.g = &g;
  s.opt = &opt;
  s.t_min = kInf;
  s.t_max = -kInf;
  s.g_plus = -kInf;
  for (const FamilyMember& m : g.members) {
    s.t_min = std::min(s.t_min, m.t);
    s.t_max = std::max(s.t_max, m.t);
    s.g_plus = std::max(s.g_plus, m.norm2 > 0.0 ? std::log(m.norm2) : -kInf);
  }
  // pairwise product norms sharpen the extension bound; quadratic cost, so
  // only for families of moderate size
  if (g.members.size() <= 1024) {
    double best = -kInf;
    for (std::size_t a = 0; a < g.members.size(); ++a) {
      for (std::size_t b = 0; b < g.members.size(); ++b) {
        if (g.forbid_self_switch && g.members[a].mode == g.members[b].mode) continue;
        const double n = operator_norm(g.members[a].N * g.members[b].N);
        best = std::max(best, n > 0.0 ? std::log(n) : -kInf);
      }
    }
    if (!g.forbid_self_switch || best > -kInf) {
      s.pair_gain = best;
      s.pair_gain_ready = true;
    }
  }

  s.u_k.assign(k_max + 1, -kInf);
  s.u_k_complete.assign(k_max + 1, 0);

  ExponentEstimate out;
  out.target = g.target;
  out.eps = g.eps;
  out.mu = g.mu;

  for (int k = 1; k <= k_max && !s.exhausted; ++k) {
    s.word.clear();
    const bool complete = s.dfs(ScaledMatrix{}, 0.0, -1, k);
    if (complete) {
      s.u_k_complete[k] = 1;
      out.depth_reached = k;
    }
  }

  out.words_evaluated = s.evaluated;
  out.budget_exhausted = s.exhausted;
  out.best_word_rate = s.best_lower == -kInf ? -kInf : s.best_lower + g.mu;
  out.certified_lower = out.best_word_rate;
  out.abscissa_floor = -kInf;

  double upper0 = kInf;
  bool any_complete = false;
  for (int k = 1; k <= k_max; ++k) {
    if (s.u_k_complete[k]) {
      any_complete = true;
      upper0 = std::min(upper0, s.u_k[k]);
    }
  }
  out.upper_certified = any_complete;
  if (any_complete) {
    out.heuristic_upper = upper0 == -kInf ? -kInf : upper0 + g.mu;
  } else {
    out.heuristic_upper = kInf;
    out.notes.push_back("no exact-depth norm closure completed within budget");
  }

  if (!s.best_word.empty()) {
    WitnessWord w;
    w.letters = s.best_word;
    w.rate = out.best_word_rate;
    out.witness = w;
  }
  return out;
}

std::string boundedness_name(Boundedness b) {
  switch (b) {
    case Boundedness::Bounded: return "bounded";
    case Boundedness::Unbounded: return "unbounded";
    case Boundedness::Inconclusive: return "inconclusive";
  }
  return "?";
}

BoundednessReport classify_discrete(const std::vector<Matrix>& jumps, int depth,
                                    std::int64_t budget,
                                    const std::vector<int>& modes,
                                    bool forbid_self_switch) {
  BoundednessReport out;
  if (jumps.empty()) {
    out.verdict = Boundedness::Bounded;
    out.certificate_value = 0.0;
    return out;
  }
  if (!modes.empty() && modes.size() != jumps.size()) {
    throw std::invalid_argument("classify_discrete: modes/jumps size mismatch");
  }
  const bool alternate = forbid_self_switch && !modes.empty();
  struct Node {
    ScaledMatrix prod;
    std::int64_t trail;  // index into the (parent, member) arena
    int first_mode = -1;
    int last_mode = -1;
  };
  std::vector<std::pair<std::int64_t, int>> arena;  // (parent trail, member)
  auto rebuild = [&](std::int64_t trail) {
    std::vector<int> word;
    while (trail >= 0) {
      word.push_back(arena[trail].second);
      trail = arena[trail].first;
    }
    std::reverse(word.begin(), word.end());
    return word;
  };

  const double log_hi = std::log1p(1e-12);   // rho above 1 + 1e-12
  const double log_lo = std::log1p(-1e-12);  // norms below 1 - 1e-12

  std::vector<Node> level;
  level.push_back({ScaledMatrix::from(Matrix::Identity(jumps[0].rows(), jumps[0].cols())),
                   -1, -1, -1});
  for (int k = 1; k <= depth; ++k) {
    std::vector<Node> next;
    double level_max_norm = -kInf;
    for (const Node& node : level) {
      for (std::size_t i = 0; i < jumps.size(); ++i) {
        const int tag = alternate ? modes[i] : -1;
        if (alternate && node.last_mode >= 0 && tag == node.last_mode) continue;
        if (out.products_checked >= budget) {
          out.budget_exhausted = true;
          out.verdict = Boundedness::Inconclusive;
          return out;
        }
        ++out.products_checked;
        Node child;
        child.prod = node.prod;
        if (k == 1) {
          child.prod = ScaledMatrix::from(jumps[i]);
        } else {
          child.prod.apply_left(jumps[i]);
        }
        arena.emplace_back(node.trail, static_cast<int>(i));
        child.trail = static_cast<std::int64_t>(arena.size()) - 1;
        child.first_mode = (k == 1) ? tag : node.first_mode;
        child.last_mode = tag;

        // the certificate tiles periodically, so under alternation the seam
        // must not self-switch
        const bool seam_ok = !alternate || (k > 1 && child.first_mode != tag);
        const double lr = child.prod.log_radius();
        if (seam_ok && lr > log_hi) {
          out.verdict = Boundedness::Unbounded;
          out.depth_reached = k;
          out.witness_depth = k;
          out.certificate_value = std::exp(lr);
          out.certificate_word = rebuild(child.trail);
          return out;
        }
        level_max_norm = std::max(level_max_norm, child.prod.log_norm2());
        if (!child.prod.zero) next.push_back(std::move(child));
      }
    }
    out.depth_reached = k;
    if (level_max_norm < log_lo) {
      out.verdict = Boundedness::Bounded;
      out.witness_depth = k;
      out.certificate_value = level_max_norm == -kInf ? 0.0 : std::exp(level_max_norm);
      return out;
    }
    if (next.empty()) {  // all products vanished
      out.verdict = Boundedness::Bounded;
      out.witness_depth = k;
      out.certificate_value = 0.0;
      return out;
    }
    level = std::move(next);
  }
  out.verdict = Boundedness::Inconclusive;
  return out;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ES: return "ES";
    case Verdict::EU: return "EU";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict verdict(const ExponentEstimate& e) {
  if (e.certified_lower > 0.0) return Verdict::EU;
  if (e.upper_certified && e.heuristic_upper < 0.0) return Verdict::ES;
  return Verdict::Inconclusive;
}

ExponentEstimate lambda_estimate(const SwitchedFamily& f, Target target,
                                 double eps, double mu, const SearchOptions& opt,
                                 const TimeGrid& grid,
                                 const TransientOptions& transients,
                                 bool forbid_self_switch) {
  const TimeGrid g = grid.points.empty()
                         ? TimeGrid::dwell_default(target == Target::SigmaHat ? 0.0 : f.tau)
                         : grid;
  GeneratorFamily fam =
      build_generators(f, target, eps, mu, g, transients, forbid_self_switch);

  // zero-dwell jump products decide blow-up before any word search
  std::vector<Matrix> jumps;
  std::vector<int> jump_modes;
  std::string jump_label;
  const int n_modes = static_cast<int>(f.modes.size());
  auto per_mode_tags = [&](std::size_t count) {
    std::vector<int> tags(count);
    for (std::size_t i = 0; i < count; ++i) tags[i] = static_cast<int>(i % n_modes);
    return tags;
  };
  if (target == Target::SigmaEps && f.tau == 0.0) {
    jumps = jump_set(f);
    jump_modes = per_mode_tags(jumps.size());
    jump_label = "jump set";
  } else if (target == Target::SigmaBar && f.tau == 0.0) {
    jumps = bar_jump_set(reduce(f));
    jump_modes = per_mode_tags(jumps.size());
    jump_label = "slow jump set";
  } else if (target == Target::SigmaHat) {
    jumps = jump_set(f);
    jump_modes = per_mode_tags(jumps.size());
    jump_label = "jump set";
  } else if (target == Target::SigmaTilde) {
    const ReducedFamily rf = reduce(f);
    TransientOptions to = transients;
    if (to.s_grid.empty()) to.s_grid = default_s_grid();
    jumps = tilde_jump_set(rf, sample_transients(rf, to.n_max, to.s_grid,
                                                 forbid_self_switch));
    jump_modes = per_mode_tags(jumps.size());  // transient-major layout
    jump_label = "transient-corrected slow jump set (sampled)";
  }

  std::optional<BoundednessReport> bounded;
  if (!jumps.empty()) {
    bounded = classify_discrete(jumps, 8, 200'000, jump_modes, forbid_self_switch);
  }

  if (bounded && bounded->verdict == Boundedness::Unbounded) {
    ExponentEstimate out;
    out.target = target;
    out.eps = eps;
    out.mu = mu;
    out.abscissa_floor = fam.abscissa_floor();
    out.certified_lower = kInf;
    out.heuristic_upper = kInf;
    out.upper_certified = true;
    std::string word = "[";
    for (std::size_t i = 0; i < bounded->certificate_word.size(); ++i) {
      word += (i ? " " : "") + std::to_string(bounded->certificate_word[i]);
    }
    word += "]";
    out.notes.push_back("+inf: zero-weight products of the " + jump_label +
                        " are unbounded (word " + word + ", spectral radius " +
                        std::to_string(bounded->certificate_value) + ")");
    return out;
  }

  ExponentEstimate out = mu_estimate(fam, opt);
  out.target = target;
  out.eps = eps;
  out.mu = mu;
  out.abscissa_floor = fam.abscissa_floor();
  out.certified_lower = std::max(out.abscissa_floor, out.certified_lower);
  out.heuristic_upper = std::max(out.abscissa_floor, out.heuristic_upper);
  if (bounded && bounded->verdict == Boundedness::Inconclusive) {
    out.upper_certified = false;
    out.notes.push_back("boundedness of the " + jump_label +
                        " unresolved; upper bound conditional on it");
  }
  if (target == Target::SigmaTilde && bounded &&
      bounded->verdict == Boundedness::Bounded) {
    out.notes.push_back("jump boundedness checked on the sampled transient set only");
  }
  return out;
}

}  // namespace singstab
