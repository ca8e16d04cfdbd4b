#include "singstab/reduced_systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace singstab {

std::string target_name(Target t) {
  switch (t) {
    case Target::SigmaEps: return "sigma-eps";
    case Target::SigmaHat: return "sigma-hat";
    case Target::SigmaBar: return "sigma-bar";
    case Target::SigmaTilde: return "sigma-tilde";
  }
  return "?";
}

ReducedFamily reduce(const SwitchedFamily& f) {
  validate(f);
  ReducedFamily out;
  out.d = f.d;
  out.tau = f.tau;
  out.modes.reserve(f.modes.size());
  for (const Mode& m : f.modes) out.modes.push_back(reduced_mode(m));
  return out;
}

Matrix bar_jump(const ReducedFamily& rf, int to, int from) {
  const ReducedMode& a = rf.modes.at(to);
  const ReducedMode& b = rf.modes.at(from);
  return top_left(a.T * b.R * b.T_inv, a.l, b.l);
}

Matrix hat_jump(const ReducedFamily& rf, int to, int from) {
  const ReducedMode& a = rf.modes.at(to);
  const ReducedMode& b = rf.modes.at(from);
  return a.T * b.R * b.T_inv;
}

Matrix tilde_jump(const ReducedFamily& rf, int to, int from, const Matrix& F) {
  const ReducedMode& a = rf.modes.at(to);
  const ReducedMode& b = rf.modes.at(from);
  return top_left(a.T * F * b.R * b.T_inv, a.l, b.l);
}

Matrix hat_member(const ReducedFamily& rf, int mode, double s) {
  const ReducedMode& m = rf.modes.at(mode);
  const Matrix fast = block_diag(Matrix::Identity(m.l, m.l), mat_exp(m.D, s));
  return m.R * m.T_inv * fast * m.T;
}

std::vector<double> default_s_grid() {
  std::vector<double> out;
  const double lo = 0.05, hi = 5.0;
  const int n = 7;
  for (int i = 0; i < n; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return out;
}

std::vector<Matrix> sample_transients(const ReducedFamily& rf, int n_max,
                                      const std::vector<double>& s_grid,
                                      bool forbid_self_switch, double dedup_tol) {
  const int nm = static_cast<int>(rf.modes.size());
  std::vector<Matrix> out;
  out.push_back(Matrix::Identity(rf.d, rf.d));
  if (n_max <= 0 || s_grid.empty()) return out;

  auto push_unique = [&](const Matrix& f) {
    for (const Matrix& g : out) {
      if ((f - g).norm() <= dedup_tol) return;
    }
    out.push_back(f);
  };

  // factors tagged with the mode of their trailing (chronologically first)
  // letter so the self-switch policy can be enforced across products
  struct Tagged { Matrix F; int first_mode; int last_mode; };
  std::vector<Tagged> layer;
  for (int mode = 0; mode < nm; ++mode) {
    for (double s : s_grid) {
      const Matrix h = hat_member(rf, mode, s);
      layer.push_back({h, mode, mode});
      push_unique(h);
    }
  }
  std::vector<Tagged> prev = layer;
  for (int n = 2; n <= n_max; ++n) {
    std::vector<Tagged> next;
    for (const Tagged& tail : prev) {
      for (int mode = 0; mode < nm; ++mode) {
        if (forbid_self_switch && mode == tail.last_mode) continue;
        for (double s : s_grid) {
          const Matrix h = hat_member(rf, mode, s);
          Tagged t{h * tail.F, tail.first_mode, mode};
          push_unique(t.F);
          next.push_back(std::move(t));
        }
      }
    }
    prev = std::move(next);
  }
  return out;
}

std::vector<Matrix> jump_set(const SwitchedFamily& f) {
  std::vector<Matrix> out;
  out.reserve(f.modes.size());
  for (const Mode& m : f.modes) out.push_back(m.R);
  return out;
}

std::vector<Matrix> bar_jump_set(const ReducedFamily& rf) {
  std::vector<Matrix> out;
  out.reserve(rf.modes.size());
  for (const ReducedMode& m : rf.modes) {
    const Matrix proj = block_diag(Matrix::Identity(m.l, m.l),
                                   Matrix::Zero(rf.d - m.l, rf.d - m.l));
    out.push_back(m.R * m.T_inv * proj * m.T);
  }
  return out;
}

std::vector<Matrix> tilde_jump_set(const ReducedFamily& rf,
                                   const std::vector<Matrix>& transients) {
  const std::vector<Matrix> base = bar_jump_set(rf);
  std::vector<Matrix> out;
  out.reserve(base.size() * transients.size());
  for (const Matrix& f : transients) {
    for (const Matrix& b : base) out.push_back(f * b);
  }
  return out;
}

TimeGrid TimeGrid::log_spaced(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || points_per_decade <= 0) {
    throw std::invalid_argument("TimeGrid::log_spaced: need 0 < lo < hi, points_per_decade > 0");
  }
  TimeGrid g;
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
  for (int i = 0; i < n; ++i) {
    g.points.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  g.points.back() = hi;
  return g;
}

TimeGrid TimeGrid::dwell_default(double tau) {
  return log_spaced(std::max(tau, 1e-3), 50.0, 24);
}

GeneratorFamily build_generators(const SwitchedFamily& f, Target target,
                                 double eps, double mu, const TimeGrid& grid,
                                 const TransientOptions& transients,
                                 bool forbid_self_switch) {
  validate(f);
  if (grid.points.empty()) {
    throw std::invalid_argument("build_generators: empty time grid");
  }
  for (double t : grid.points) {
    if (!(t > 0.0)) throw std::invalid_argument("build_generators: weights must be > 0");
    if (target != Target::SigmaHat && t < f.tau - 1e-12) {
      throw std::invalid_argument("build_generators: grid point below dwell time");
    }
  }

  GeneratorFamily g;
  g.target = target;
  g.d = f.d;
  g.tau = f.tau;
  // stretched-time members never see the shift, so pin it to keep every
  // downstream mu adjustment a no-op for the fast family
  g.mu = (target == Target::SigmaHat) ? 0.0 : mu;
  g.eps = eps;
  g.forbid_self_switch = forbid_self_switch;
  g.floor_shifts = target != Target::SigmaHat;
  g.abscissa_floor0 = -std::numeric_limits<double>::infinity();

  const ReducedFamily rf = (target == Target::SigmaEps) ? ReducedFamily{} : reduce(f);

  auto add_member = [&](int template_id, int mode, double t, Matrix n) {
    FamilyMember m;
    m.template_id = template_id;
    m.mode = mode;
    m.t = t;
    m.norm2 = operator_norm(n);
    m.N = std::move(n);
    g.members.push_back(std::move(m));
  };

  switch (target) {
    case Target::SigmaEps: {
      if (!(eps > 0.0)) throw std::invalid_argument("build_generators: eps must be > 0 for sigma-eps");
      for (std::size_t i = 0; i < f.modes.size(); ++i) {
        const Matrix gen = epsilon_generator(f.modes[i], eps);
        g.abscissa_floor0 = std::max(g.abscissa_floor0, spectral_abscissa(gen));
        for (double t : grid.points) {
          add_member(static_cast<int>(i), static_cast<int>(i), t,
                     f.modes[i].R * mat_exp(gen, t));
        }
      }
      break;
    }
    case Target::SigmaHat: {
      g.abscissa_floor0 = 0.0;
      for (std::size_t i = 0; i < rf.modes.size(); ++i) {
        for (double s : grid.points) {
          add_member(static_cast<int>(i), static_cast<int>(i), s,
                     hat_member(rf, static_cast<int>(i), s));
        }
      }
      break;
    }
    case Target::SigmaBar: {
      for (std::size_t i = 0; i < rf.modes.size(); ++i) {
        const ReducedMode& m = rf.modes[i];
        g.abscissa_floor0 = std::max(g.abscissa_floor0, spectral_abscissa(m.M));
        const Matrix pre = m.R * m.T_inv;
        for (double t : grid.points) {
          const Matrix core = block_diag(mat_exp(m.M, t), Matrix::Zero(rf.d - m.l, rf.d - m.l));
          add_member(static_cast<int>(i), static_cast<int>(i), t, pre * core * m.T);
        }
      }
      break;
    }
    case Target::SigmaTilde: {
      TransientOptions opts = transients;
      if (opts.s_grid.empty()) opts.s_grid = default_s_grid();
      const std::vector<Matrix> fs =
          sample_transients(rf, opts.n_max, opts.s_grid, forbid_self_switch);
      int template_id = 0;
      for (std::size_t i = 0; i < rf.modes.size(); ++i) {
        const ReducedMode& m = rf.modes[i];
        g.abscissa_floor0 = std::max(g.abscissa_floor0, spectral_abscissa(m.M));
        const Matrix pre = m.R * m.T_inv;
        for (const Matrix& fmat : fs) {
          for (double t : grid.points) {
            const Matrix core = block_diag(mat_exp(m.M, t), Matrix::Zero(rf.d - m.l, rf.d - m.l));
            add_member(template_id, static_cast<int>(i), t, fmat * (pre * core * m.T));
          }
          ++template_id;
        }
      }
      break;
    }
  }
  return g;
}

Matrix member_at_mu(const GeneratorFamily& g, int member_index) {
  const FamilyMember& m = g.members.at(member_index);
  if (g.target == Target::SigmaHat || g.mu == 0.0) return m.N;
  return std::exp(g.mu * m.t) * m.N;
}

}  // namespace singstab
