#include "singstab/exponent_engine.hpp"

#include "singstab/example_family.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace singstab;

namespace {

GeneratorFamily random_hand_family(std::uint64_t seed, int n_members,
                                   bool forbid) {
  std::mt19937_64 rng(seed);
  GeneratorFamily g;
  g.target = Target::SigmaBar;
  g.d = 2;
  g.tau = 0.5;
  g.forbid_self_switch = forbid;
  g.abscissa_floor0 = -kInf;
  const double weights[] = {0.5, 1.0, 2.0};
  for (int i = 0; i < n_members; ++i) {
    FamilyMember m;
    m.template_id = i;
    m.mode = i % 2;
    m.t = weights[rng() % 3];
    m.N = oracles::rand_matrix(rng, 2, 2, 1.2);
    m.norm2 = operator_norm(m.N);
    g.members.push_back(m);
  }
  return g;
}

TimeGrid grid_of(std::initializer_list<double> pts) {
  TimeGrid g;
  g.points = pts;
  return g;
}

}  // namespace

TEST_CASE("word evaluation is chronological") {
  GeneratorFamily g = random_hand_family(1, 2, false);
  g.members[0].N = Matrix{{0.0, 1.0}, {0.0, 0.0}};
  g.members[1].N = Matrix{{0.0, 0.0}, {1.0, 0.0}};
  // letters apply in order: x -> N0 x -> N1 N0 x
  const ScaledMatrix p = evaluate_word(g, {Letter{0}, Letter{1}});
  CHECK(p.value == g.members[1].N * g.members[0].N);
  CHECK_THROWS_AS(evaluate_word(g, {}), std::invalid_argument);

  GeneratorFamily s = oracles::hand_scalar_family();
  CHECK(word_rate_rho(s, {Letter{0}}) == std::log(2.0));
  CHECK(word_rate_rho(s, {Letter{1}}) == std::log(0.5) / 2.0);
  CHECK(word_rate_rho(s, {Letter{0}, Letter{0}}) == std::log(4.0) / 2.0);
  CHECK(word_rate_rho(s, {Letter{0}, Letter{1}}) == std::log(1.0) / 3.0);
  CHECK(word_rate_norm(s, {Letter{0}}) == std::log(2.0));
}

TEST_CASE("certified lower bound equals exhaustive enumeration") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    for (bool forbid : {false, true}) {
      const GeneratorFamily g =
          random_hand_family(seed, 2 + static_cast<int>(seed % 3), forbid);
      SearchOptions opt;
      opt.depth = 5;
      const ExponentEstimate est = mu_estimate(g, opt);
      const double brute = oracles::brute_best_rate(g, 5);
      CHECK(est.best_word_rate == brute);
      CHECK(est.certified_lower == brute);  // bare family: no floor folded
      CHECK_FALSE(est.budget_exhausted);
    }
  }
}

TEST_CASE("norm closures equal brute force when pruning is disabled") {
  for (std::uint64_t seed = 30; seed < 36; ++seed) {
    const GeneratorFamily g = random_hand_family(seed, 3, false);
    SearchOptions opt;
    opt.depth = 4;
    opt.prune_slack = 1e9;  // guard so large nothing is ever pruned
    const ExponentEstimate est = mu_estimate(g, opt);
    REQUIRE(est.upper_certified);
    double exact = kInf;
    for (int k = 1; k <= 4; ++k) {
      exact = std::min(exact, oracles::brute_norm_closure(g, k));
    }
    CHECK(est.heuristic_upper == exact);
    CHECK(est.heuristic_upper >= est.certified_lower);
  }
}

TEST_CASE("default pruning keeps the lower bound exact and the upper valid") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    for (bool forbid : {false, true}) {
      const GeneratorFamily g = random_hand_family(seed, 4, forbid);
      SearchOptions opt;
      opt.depth = 4;
      const ExponentEstimate est = mu_estimate(g, opt);
      CHECK(est.best_word_rate == oracles::brute_best_rate(g, 4));
      double exact = kInf;
      for (int k = 1; k <= 4; ++k) {
        exact = std::min(exact, oracles::brute_norm_closure(g, k));
      }
      // folding pruned subtrees into the closures can only raise them
      CHECK(est.heuristic_upper >= exact - 1e-15);
    }
  }
}

TEST_CASE("closures bound every longer word rate") {
  for (std::uint64_t seed = 50; seed < 56; ++seed) {
    for (bool forbid : {false, true}) {
      const GeneratorFamily g = random_hand_family(seed, 3, forbid);
      SearchOptions opt;
      opt.depth = 3;
      const ExponentEstimate est = mu_estimate(g, opt);
      REQUIRE(est.upper_certified);
      CHECK(est.heuristic_upper + 1e-9 >= oracles::brute_best_rate(g, 6));
    }
  }
}

TEST_CASE("the mu shift moves both bounds exactly") {
  const GeneratorFamily g0 = random_hand_family(60, 3, false);
  SearchOptions opt;
  opt.depth = 4;
  const ExponentEstimate base = mu_estimate(g0, opt);
  for (double mu : {-1.0, 0.5, 2.0}) {
    GeneratorFamily g = g0;
    g.mu = mu;
    const ExponentEstimate shifted = mu_estimate(g, opt);
    CHECK(shifted.certified_lower == base.certified_lower + mu);
    CHECK(shifted.heuristic_upper == base.heuristic_upper + mu);
    CHECK(shifted.best_word_rate == base.best_word_rate + mu);
  }
}

TEST_CASE("zero members absorb without breaking completeness") {
  GeneratorFamily g = random_hand_family(70, 3, false);
  g.members[1].N = Matrix::Zero(2, 2);
  g.members[1].norm2 = 0.0;
  SearchOptions opt;
  opt.depth = 4;
  opt.prune_slack = 1e9;
  const ExponentEstimate est = mu_estimate(g, opt);
  CHECK(est.best_word_rate == oracles::brute_best_rate(g, 4));
  double exact = kInf;
  for (int k = 1; k <= 4; ++k) {
    exact = std::min(exact, oracles::brute_norm_closure(g, k));
  }
  CHECK(est.heuristic_upper == exact);
  REQUIRE(est.upper_certified);

  // all-zero family: no growth at all, and the closure still certifies
  GeneratorFamily z = random_hand_family(71, 2, false);
  for (auto& m : z.members) {
    m.N = Matrix::Zero(2, 2);
    m.norm2 = 0.0;
  }
  const ExponentEstimate zest = mu_estimate(z, opt);
  CHECK(zest.best_word_rate == -kInf);
  CHECK(zest.certified_lower == -kInf);
  CHECK(zest.heuristic_upper == -kInf);
  CHECK(zest.upper_certified);
}

TEST_CASE("budget exhaustion is reported and degrades gracefully") {
  const GeneratorFamily g = random_hand_family(80, 4, false);
  SearchOptions opt;
  opt.depth = 12;
  opt.budget = 100;
  const ExponentEstimate est = mu_estimate(g, opt);
  CHECK(est.budget_exhausted);
  CHECK(est.depth_reached < 12);
  CHECK(est.upper_certified);  // depth-1 closure of 4 members fits in 100

  opt.budget = 2;  // not even one full level
  const ExponentEstimate starved = mu_estimate(g, opt);
  CHECK(starved.budget_exhausted);
  CHECK_FALSE(starved.upper_certified);
  bool noted = false;
  for (const auto& n : starved.notes) {
    noted = noted || n.find("no exact-depth norm closure") != std::string::npos;
  }
  CHECK(noted);

  CHECK_THROWS_AS(mu_estimate(GeneratorFamily{}, SearchOptions{}),
                  std::invalid_argument);
}

TEST_CASE("witness words replay to the reported rate") {
  for (bool forbid : {false, true}) {
    const GeneratorFamily g = random_hand_family(90, 4, forbid);
    SearchOptions opt;
    opt.depth = 5;
    const ExponentEstimate est = mu_estimate(g, opt);
    REQUIRE(est.witness.has_value());
    const auto& w = *est.witness;
    CHECK(word_rate_rho(g, w.letters) == est.best_word_rate);
    CHECK(w.rate == est.best_word_rate);
    if (forbid) {
      REQUIRE(w.letters.size() >= 2);
      const auto mode = [&](const Letter& l) {
        return g.members[static_cast<std::size_t>(l.member_index)].mode;
      };
      CHECK(mode(w.letters.front()) != mode(w.letters.back()));
      for (std::size_t i = 1; i < w.letters.size(); ++i) {
        CHECK(mode(w.letters[i]) != mode(w.letters[i - 1]));
      }
    }
  }
}

TEST_CASE("discrete product classification on simple sets") {
  CHECK(classify_discrete({}).verdict == Boundedness::Bounded);
  CHECK(classify_discrete({}).certificate_value == 0.0);

  const Matrix half = 0.5 * Matrix::Identity(2, 2);
  const Matrix tri{{0.3, 0.1}, {0.0, 0.2}};
  const BoundednessReport contract = classify_discrete({half, tri});
  CHECK(contract.verdict == Boundedness::Bounded);
  CHECK(contract.witness_depth == 1);
  CHECK(contract.certificate_value == doctest::Approx(0.5).epsilon(1e-12));

  const Matrix grow{{1.1, 0.0}, {0.0, 0.2}};
  const BoundednessReport unb = classify_discrete({half, grow});
  CHECK(unb.verdict == Boundedness::Unbounded);
  CHECK(unb.certificate_value == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(unb.certificate_word == std::vector<int>{1});

  // norm 1, radius 1, no decision at reachable depths
  const double c = std::cos(1.0), s = std::sin(1.0);
  const BoundednessReport rot = classify_discrete({Matrix{{c, -s}, {s, c}}}, 6);
  CHECK(rot.verdict == Boundedness::Inconclusive);
  CHECK(rot.depth_reached == 6);
  CHECK_FALSE(rot.budget_exhausted);

  CHECK_THROWS_AS(classify_discrete({half}, 8, 1000, {0, 1}),
                  std::invalid_argument);
}

TEST_CASE("example jump products: thresholds move with the switch policy") {
  const auto jumps_at = [](double r) {
    return jump_set(example_family(r, ExampleVariant::Swapped));
  };

  // free switching: rho(R1) = 3r decides at r = 1/3
  const BoundednessReport free06 = classify_discrete(jumps_at(0.6));
  CHECK(free06.verdict == Boundedness::Unbounded);
  CHECK(free06.certificate_word == std::vector<int>{0});
  CHECK(free06.certificate_value == doctest::Approx(1.8).epsilon(1e-12));

  // alternation forced: rho(R2 R1) = 3r^2 decides at r = 1/sqrt(3)
  const BoundednessReport alt06 =
      classify_discrete(jumps_at(0.6), 8, 200'000, {0, 1}, true);
  CHECK(alt06.verdict == Boundedness::Unbounded);
  REQUIRE(alt06.certificate_word.size() == 2);
  CHECK(alt06.certificate_word[0] != alt06.certificate_word[1]);
  CHECK(alt06.certificate_value == doctest::Approx(1.08).epsilon(1e-12));

  // below threshold the odd levels decay first: length 5 is the witness
  // (both length-5 alternating products collapse to 9 R^5-scale rank-1 maps)
  const BoundednessReport alt05 =
      classify_discrete(jumps_at(0.5), 8, 200'000, {0, 1}, true);
  CHECK(alt05.verdict == Boundedness::Bounded);
  CHECK(alt05.witness_depth == 5);
  CHECK(alt05.certificate_value ==
        doctest::Approx(9.0 * std::sqrt(10.0) * std::pow(0.5, 5))
            .epsilon(1e-12));

  // near the threshold no reachable level decays and no cycle expands
  const BoundednessReport alt0575 =
      classify_discrete(jumps_at(0.575), 8, 200'000, {0, 1}, true);
  CHECK(alt0575.verdict == Boundedness::Inconclusive);
  CHECK(alt0575.depth_reached == 8);

  const BoundednessReport small =
      classify_discrete(jumps_at(0.3), 8, 200'000, {0, 1}, true);
  CHECK(small.verdict == Boundedness::Bounded);
  CHECK(small.witness_depth == 1);
  CHECK(small.certificate_value ==
        doctest::Approx(0.3 * std::sqrt(10.0)).epsilon(1e-12));

  // a single mode can never switch under the policy: vacuously bounded
  const BoundednessReport lone =
      classify_discrete({Matrix{{1.2, 0.0}, {0.0, 1.0}}}, 8, 1000, {0}, true);
  CHECK(lone.verdict == Boundedness::Bounded);
  CHECK(lone.certificate_value == 0.0);
}

TEST_CASE("slow and transient-corrected exponents of the example are exact") {
  const SwitchedFamily f = example_family(0.45, ExampleVariant::Swapped);
  SearchOptions opt;
  opt.depth = 4;

  const ExponentEstimate bar =
      lambda_estimate(f, Target::SigmaBar, 0.0, 0.0, opt, grid_of({0.5, 1.0}));
  CHECK(bar.certified_lower == -2.0);
  CHECK(bar.heuristic_upper == -2.0);
  CHECK(bar.upper_certified);
  CHECK(bar.abscissa_floor == -2.0);
  CHECK(verdict(bar) == Verdict::ES);

  TransientOptions topt;
  topt.n_max = 1;
  topt.s_grid = {1.0};
  const ExponentEstimate tld = lambda_estimate(
      f, Target::SigmaTilde, 0.0, 0.0, opt, grid_of({0.5, 1.0}), topt);
  CHECK(tld.certified_lower == -2.0);
  CHECK(tld.heuristic_upper == -2.0);
  CHECK(tld.upper_certified);
  CHECK(verdict(tld) == Verdict::ES);
  bool caveat = false;
  for (const auto& n : tld.notes) {
    caveat = caveat || n.find("sampled transient set") != std::string::npos;
  }
  CHECK(caveat);

  // the mu shift at the lambda level moves the exact bounds too
  const ExponentEstimate barmu =
      lambda_estimate(f, Target::SigmaBar, 0.0, 0.6, opt, grid_of({0.5, 1.0}));
  CHECK(barmu.certified_lower == -2.0 + 0.6);
  CHECK(barmu.heuristic_upper == -2.0 + 0.6);
}

TEST_CASE("fast exponent of the example: floor pins the lower bound") {
  const SwitchedFamily f = example_family(0.45, ExampleVariant::Swapped);
  SearchOptions opt;
  opt.depth = 8;

  const ExponentEstimate hat =
      lambda_estimate(f, Target::SigmaHat, 0.0, 0.0, opt, grid_of({1.0}),
                      TransientOptions{}, true);
  CHECK(hat.certified_lower == 0.0);  // floor 0 beats every decaying word
  CHECK(hat.heuristic_upper == 0.0);  // closures certify decay of the jumps
  CHECK(hat.upper_certified);
  CHECK(verdict(hat) == Verdict::Inconclusive);
  CHECK(hat.best_word_rate ==
        doctest::Approx(-1.0 + std::log(3.0 * 0.45 * 0.45) / 2.0)
            .epsilon(1e-12));

  // with free switching the direct jump products expand: blow-up shortcut
  const SwitchedFamily loud = example_family(1.0, ExampleVariant::Swapped);
  const ExponentEstimate grow =
      lambda_estimate(loud, Target::SigmaHat, 0.0, 0.0, opt, grid_of({1.0}));
  CHECK(grow.certified_lower == kInf);
  CHECK(grow.heuristic_upper == kInf);
  CHECK(verdict(grow) == Verdict::EU);
}

TEST_CASE("unbounded zero-weight jump products force +inf") {
  SwitchedFamily f = example_family(0.6, ExampleVariant::Swapped);
  f.tau = 0.0;
  SearchOptions opt;
  opt.depth = 3;

  const ExponentEstimate eps_est =
      lambda_estimate(f, Target::SigmaEps, 0.1, 0.0, opt, grid_of({0.5, 1.0}));
  CHECK(eps_est.certified_lower == kInf);
  CHECK(eps_est.heuristic_upper == kInf);
  CHECK(eps_est.upper_certified);
  CHECK(verdict(eps_est) == Verdict::EU);
  bool noted = false;
  for (const auto& n : eps_est.notes) {
    noted = noted || n.find("zero-weight products") != std::string::npos;
  }
  CHECK(noted);

  // the fast system looks at direct jump products regardless of tau
  SwitchedFamily dwell = example_family(0.6, ExampleVariant::Swapped);
  const ExponentEstimate hat_est =
      lambda_estimate(dwell, Target::SigmaHat, 0.0, 0.0, opt, grid_of({1.0}));
  CHECK(hat_est.certified_lower == kInf);

  // the slow system's zero-weight jumps vanish: no blow-up at tau = 0
  const ExponentEstimate bar_est =
      lambda_estimate(f, Target::SigmaBar, 0.0, 0.0, opt, grid_of({0.5, 1.0}));
  CHECK(bar_est.certified_lower == -2.0);
  CHECK(bar_est.heuristic_upper == -2.0);

  // an unresolved classification only removes the upper certificate
  // (0.575 is just under the alternation threshold 1/sqrt(3): no level of
  // admissible products decays by depth 8 and no cycle expands)
  SwitchedFamily mid = example_family(0.575, ExampleVariant::Swapped);
  mid.tau = 0.0;
  const ExponentEstimate open_est =
      lambda_estimate(mid, Target::SigmaEps, 0.1, 0.0, opt,
                      grid_of({0.5, 1.0}), TransientOptions{}, true);
  CHECK_FALSE(open_est.upper_certified);
  noted = false;
  for (const auto& n : open_est.notes) {
    noted = noted || n.find("unresolved") != std::string::npos;
  }
  CHECK(noted);
}

TEST_CASE("verdicts come only from certified sides") {
  ExponentEstimate e;
  e.certified_lower = 0.1;
  e.heuristic_upper = kInf;
  CHECK(verdict(e) == Verdict::EU);

  e.certified_lower = -3.0;
  e.heuristic_upper = -0.5;
  e.upper_certified = false;
  CHECK(verdict(e) == Verdict::Inconclusive);
  e.upper_certified = true;
  CHECK(verdict(e) == Verdict::ES);

  e.heuristic_upper = 0.0;
  CHECK(verdict(e) == Verdict::Inconclusive);

  CHECK(verdict_name(Verdict::ES) == "ES");
  CHECK(verdict_name(Verdict::EU) == "EU");
  CHECK(verdict_name(Verdict::Inconclusive) == "inconclusive");
  CHECK(boundedness_name(Boundedness::Bounded) == "bounded");
  CHECK(boundedness_name(Boundedness::Unbounded) == "unbounded");
  CHECK(boundedness_name(Boundedness::Inconclusive) == "inconclusive");
  CHECK(target_name(Target::SigmaEps) == "sigma-eps");
  CHECK(target_name(Target::SigmaHat) == "sigma-hat");
  CHECK(target_name(Target::SigmaBar) == "sigma-bar");
  CHECK(target_name(Target::SigmaTilde) == "sigma-tilde");
}

TEST_CASE("full-system estimate stays above its abscissa floor") {
  SwitchedFamily f = example_family(0.45, ExampleVariant::Swapped);
  f.tau = 0.5;  // positive dwell: no zero-weight jump products to classify
  SearchOptions opt;
  opt.depth = 3;
  const ExponentEstimate est =
      lambda_estimate(f, Target::SigmaEps, 0.1, 0.0, opt, grid_of({0.5, 1.0}));
  const double floor =
      std::max(spectral_abscissa(epsilon_generator(f.modes[0], 0.1)),
               spectral_abscissa(epsilon_generator(f.modes[1], 0.1)));
  CHECK(est.abscissa_floor == doctest::Approx(floor).epsilon(1e-13));
  CHECK(est.certified_lower >= est.abscissa_floor);
  CHECK(est.certified_lower == std::max(est.abscissa_floor, est.best_word_rate));
  CHECK(est.heuristic_upper >= est.certified_lower);
  CHECK(est.eps == 0.1);
  CHECK(est.target == Target::SigmaEps);
}
