#pragma once

// Shared independent oracles and fixtures for the test suite. Everything here
// deliberately avoids the library code paths it is used to check: the matrix
// exponential is a plain scaling-and-squaring Taylor sum, word searches are
// exhaustive enumeration, and ODE flows come from boost::odeint.

#include "singstab/exponent_engine.hpp"
#include "singstab/reduced_systems.hpp"
#include "singstab/system_model.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracles {

using singstab::GeneratorFamily;
using singstab::Letter;
using singstab::Matrix;
using singstab::Mode;
using singstab::SwitchedFamily;
using singstab::Vector;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// --- independent matrix exponential -----------------------------------------

/// Plain Taylor series with scaling and squaring; accurate to ~1e-13 for the
/// moderate norms used in tests.
inline Matrix taylor_exp(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  int s = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++s;
  }
  const Matrix b = a / std::pow(2.0, s);
  Matrix term = Matrix::Identity(n, n);
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
    if (term.norm() < 1e-18 * sum.norm()) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// --- exhaustive word enumeration ---------------------------------------------

/// Exact maximum word rate over all words with 1..depth letters, using the
/// same product routine as the engine so ties are bitwise identical.
/// Internal adjacency respects forbid; a word counts toward the maximum only
/// when it could tile into an admissible periodic sequence (under forbid that
/// means >= 2 letters and first mode != last mode).
inline double brute_best_rate(const GeneratorFamily& g, int depth) {
  double best = kNegInf;
  std::vector<Letter> word;
  const auto recurse = [&](auto&& self, int remaining) -> void {
    for (int i = 0; i < static_cast<int>(g.members.size()); ++i) {
      if (g.forbid_self_switch && !word.empty() &&
          g.members[static_cast<std::size_t>(word.back().member_index)].mode ==
              g.members[static_cast<std::size_t>(i)].mode) {
        continue;
      }
      word.push_back(Letter{i});
      const bool admissible =
          !g.forbid_self_switch ||
          (word.size() >= 2 &&
           g.members[static_cast<std::size_t>(word.front().member_index)]
                   .mode !=
               g.members[static_cast<std::size_t>(word.back().member_index)]
                   .mode);
      if (admissible) {
        const auto p = singstab::evaluate_word(g, word);
        double w = 0.0;
        for (const auto& l : word)
          w += g.members[static_cast<std::size_t>(l.member_index)].t;
        best = std::max(best, p.log_radius() / w);
      }
      if (remaining > 1) self(self, remaining - 1);
      word.pop_back();
    }
  };
  recurse(recurse, depth);
  return best;
}

/// Exact-depth norm maximum: max over words with exactly k letters (internal
/// adjacency only) of log||Pi||_2 / weight. -inf when every product is zero
/// or no admissible word exists.
inline double brute_norm_closure(const GeneratorFamily& g, int k) {
  double best = kNegInf;
  std::vector<Letter> word;
  const auto recurse = [&](auto&& self) -> void {
    if (static_cast<int>(word.size()) == k) {
      const auto p = singstab::evaluate_word(g, word);
      double w = 0.0;
      for (const auto& l : word)
        w += g.members[static_cast<std::size_t>(l.member_index)].t;
      best = std::max(best, p.log_norm2() / w);
      return;
    }
    for (int i = 0; i < static_cast<int>(g.members.size()); ++i) {
      if (g.forbid_self_switch && !word.empty() &&
          g.members[static_cast<std::size_t>(word.back().member_index)].mode ==
              g.members[static_cast<std::size_t>(i)].mode) {
        continue;
      }
      word.push_back(Letter{i});
      self(self);
      word.pop_back();
    }
  };
  recurse(recurse);
  return best;
}

// --- reference ODE flow --------------------------------------------------------

/// x' = G x integrated with an adaptive Dormand-Prince pair at tight
/// tolerances; independent of the exact-exponential stepping under test.
inline Vector odeint_flow(const Matrix& gen, const Vector& x0, double t_end) {
  using state = std::vector<double>;
  state x(x0.data(), x0.data() + x0.size());
  const auto rhs = [&](const state& in, state& dxdt, double) {
    Eigen::Map<const Vector> xi(in.data(), static_cast<Eigen::Index>(in.size()));
    Vector out = gen * xi;
    dxdt.assign(out.data(), out.data() + out.size());
  };
  if (t_end > 0.0) {
    auto stepper = boost::numeric::odeint::make_controlled(
        1e-13, 1e-13,
        boost::numeric::odeint::runge_kutta_dopri5<state>());
    boost::numeric::odeint::integrate_adaptive(stepper, rhs, x, 0.0, t_end,
                                               t_end / 64.0);
  }
  return Eigen::Map<Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

// --- random fixtures -----------------------------------------------------------

inline Matrix rand_matrix(std::mt19937_64& rng, int rows, int cols,
                          double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

/// Random matrix shifted to spectral abscissa <= -margin.
inline Matrix hurwitz_matrix(std::mt19937_64& rng, int n, double margin) {
  Matrix m = rand_matrix(rng, n, n, 1.0);
  const double a = singstab::spectral_abscissa(m);
  m -= (a + margin) * Matrix::Identity(n, n);
  return m;
}

/// Random well-posed mode: P near identity, D Hurwitz with margin >= 1,
/// moderate coupling so the two-scale transform converges on eps <= 0.1.
inline Mode random_mode(std::mt19937_64& rng, int d, int l) {
  Mode m;
  m.l = l;
  m.P = Matrix::Identity(d, d) + rand_matrix(rng, d, d, 0.2);
  Matrix abcd(d, d);
  abcd.topLeftCorner(l, l) = rand_matrix(rng, l, l, 0.5);
  abcd.topRightCorner(l, d - l) = rand_matrix(rng, l, d - l, 0.4);
  abcd.bottomLeftCorner(d - l, l) = rand_matrix(rng, d - l, l, 0.4);
  std::uniform_real_distribution<double> mar(1.0, 1.6);
  abcd.bottomRightCorner(d - l, d - l) = hurwitz_matrix(rng, d - l, mar(rng));
  m.Lambda = abcd * m.P;
  m.R = rand_matrix(rng, d, d, 0.6);
  return m;
}

/// Two-mode family with a shared split; jumps scaled toward contraction so
/// discrete classifications stay finite.
inline SwitchedFamily random_family(std::uint64_t seed, int d, int l,
                                    double tau, double jump_scale = 0.5) {
  std::mt19937_64 rng(seed);
  SwitchedFamily f;
  f.d = d;
  f.tau = tau;
  for (int i = 0; i < 2; ++i) {
    Mode m = random_mode(rng, d, l);
    m.R = jump_scale * (Matrix::Identity(d, d) + rand_matrix(rng, d, d, 0.3));
    f.modes.push_back(m);
  }
  return f;
}

/// Deterministic zero-dwell family that every stability gate certifies:
/// diagonal-ish stable dynamics, strongly contractive jumps, no fast-slow
/// coupling in mode 1 (so its transform is the identity).
inline SwitchedFamily stable_zero_dwell_family() {
  SwitchedFamily f;
  f.d = 2;
  f.tau = 0.0;
  Mode a;
  a.l = 1;
  a.P = Matrix::Identity(2, 2);
  a.Lambda = Matrix{{-1.0, 0.3}, {0.0, -2.0}};
  a.R = 0.4 * Matrix::Identity(2, 2);
  Mode b;
  b.l = 1;
  b.P = Matrix::Identity(2, 2);
  b.Lambda = Matrix{{-1.2, 0.1}, {0.0, -1.5}};
  b.R = 0.3 * Matrix::Identity(2, 2);
  f.modes = {a, b};
  return f;
}

/// Hand-built two-member scalar family: rates are fully computable on paper.
/// Member 0: weight 1, matrix [2]; member 1: weight 2, matrix [1/2].
inline GeneratorFamily hand_scalar_family(bool forbid = false) {
  GeneratorFamily g;
  g.target = singstab::Target::SigmaBar;
  g.d = 1;
  g.tau = 1.0;
  g.mu = 0.0;
  g.forbid_self_switch = forbid;
  g.abscissa_floor0 = kNegInf;
  singstab::FamilyMember m0;
  m0.template_id = 0;
  m0.mode = 0;
  m0.t = 1.0;
  m0.N = Matrix{{2.0}};
  m0.norm2 = 2.0;
  singstab::FamilyMember m1;
  m1.template_id = 1;
  m1.mode = 1;
  m1.t = 2.0;
  m1.N = Matrix{{0.5}};
  m1.norm2 = 0.5;
  g.members = {m0, m1};
  return g;
}

inline bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).norm() <= tol * (1.0 + std::max(a.norm(), b.norm()));
}

}  // namespace oracles
