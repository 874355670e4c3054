#include "vnq/locality.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

using namespace vnq;
using namespace vnq::testing;

namespace {

constexpr double kThetaStar = 0.43469234516298555;

LhvStrategy strat(char a1, char a2, char b1, char b2) {
  auto o = [](char c) { return c == '+' ? Outcome::plus : Outcome::minus; };
  return LhvStrategy{o(a1), o(a2), o(b1), o(b2)};
}

}  // namespace

TEST_CASE("enumerate_lhv: 16 strategies, canonical order, no duplicates") {
  const auto all = enumerate_lhv();
  REQUIRE(all.size() == 16);
  REQUIRE(all.front() == strat('+', '+', '+', '+'));
  REQUIRE(all.back() == strat('-', '-', '-', '-'));
  REQUIRE(all[1] == strat('+', '+', '+', '-'));  // b2 is the fast index

  std::set<std::array<int, 4>> seen;
  for (const auto& s : all) {
    seen.insert({outcome_index(s.a1), outcome_index(s.a2),
                 outcome_index(s.b1), outcome_index(s.b2)});
  }
  REQUIRE(seen.size() == 16);
}

TEST_CASE("filter_strategies: the three certainties leave exactly 5 survivors") {
  const auto survivors = filter_strategies(enumerate_lhv(), ConstraintSet{});

  const std::vector<LhvStrategy> expected = {
      strat('+', '+', '-', '+'), strat('+', '+', '-', '-'),
      strat('+', '-', '+', '-'), strat('+', '-', '-', '-'),
      strat('-', '+', '-', '+')};
  REQUIRE(survivors == expected);

  // the implication ladder, exhaustively: any survivor with a1 = - has b1 = -
  for (const auto& s : survivors) {
    if (s.a1 == Outcome::minus) REQUIRE(s.b1 == Outcome::minus);
  }
}

TEST_CASE("filter_strategies: constraint subsets") {
  const auto all = enumerate_lhv();
  REQUIRE(filter_strategies(all, ConstraintSet{false, false, false}) == all);
  REQUIRE(filter_strategies(all, ConstraintSet{true, false, false}).size() == 12);
  REQUIRE(filter_strategies(all, ConstraintSet{false, true, false}).size() == 12);
  REQUIRE(filter_strategies(all, ConstraintSet{false, false, true}).size() == 12);
  REQUIRE(filter_strategies(all, ConstraintSet{true, true, false}).size() == 8);
}

TEST_CASE("lhv_hardy_bound: 0 under all constraints, 1 otherwise") {
  const auto all = enumerate_lhv();
  REQUIRE(lhv_hardy_bound(filter_strategies(all, ConstraintSet{})) == 0.0);
  REQUIRE(lhv_hardy_bound(all) == 1.0);
  REQUIRE(lhv_hardy_bound(
              filter_strategies(all, ConstraintSet{true, false, false})) == 1.0);
  REQUIRE(lhv_hardy_bound({}) == 0.0);
}

TEST_CASE("LHV impossibility against the quantum value") {
  const double q = verify_predictions(
                       construct_from_state(schmidt_state(kThetaStar)))
                       .q;
  const double bound =
      lhv_hardy_bound(filter_strategies(enumerate_lhv(), ConstraintSet{}));
  REQUIRE(bound == 0.0);
  REQUIRE(q > bound);
}

TEST_CASE("enumerate_causal_models: 64 models, r blind to L, no duplicates") {
  const auto models = enumerate_causal_models();
  REQUIRE(models.size() == 64);

  std::set<std::array<int, 6>> seen;
  for (const auto& m : models) {
    seen.insert({outcome_index(m.r_outcome(RSetting::R1)),
                 outcome_index(m.r_outcome(RSetting::R2)),
                 outcome_index(m.l_outcome(LSetting::L1, RSetting::R1)),
                 outcome_index(m.l_outcome(LSetting::L1, RSetting::R2)),
                 outcome_index(m.l_outcome(LSetting::L2, RSetting::R1)),
                 outcome_index(m.l_outcome(LSetting::L2, RSetting::R2))});
  }
  REQUIRE(seen.size() == 64);
  // r is a function of the R setting only, by construction of the type:
  // no L argument exists to read.
}

TEST_CASE("A(R2): forced by predictions 1 and 2 in every admissible model") {
  const auto models = enumerate_causal_models();
  const AssertionReport rep =
      check_assertion_A(models, RSetting::R2, PredictionSet{true, true, false});
  REQUIRE(rep.total_models == 64);
  REQUIRE(rep.admissible_models == 32);
  REQUIRE(rep.violations == 0);
  REQUIRE(rep.conclusion);
}

TEST_CASE("A(R1): with prediction 3 it kills the paradox event") {
  const auto models = enumerate_causal_models();
  const AssertionReport rep =
      check_assertion_A(models, RSetting::R1, PredictionSet{false, false, true});
  REQUIRE(rep.total_models == 64);
  REQUIRE(rep.admissible_models == 32);
  REQUIRE(rep.violations == 0);
  REQUIRE(rep.max_event_probability == 0.0);
  REQUIRE(rep.conclusion);
}

TEST_CASE("check_assertion_A: empty model list is vacuously true") {
  const AssertionReport rep =
      check_assertion_A({}, RSetting::R2, PredictionSet{true, true, false});
  REQUIRE(rep.admissible_models == 0);
  REQUIRE(rep.conclusion);
}

TEST_CASE("survivor strategies embed into A(R2)-passing causal models") {
  const auto survivors = filter_strategies(enumerate_lhv(), ConstraintSet{});
  std::set<std::array<int, 6>> images;
  for (const auto& s : survivors) {
    const CausalModel m = causal_model_from_strategy(s);
    REQUIRE(consistent_with(m, PredictionSet{true, true, false}));
    REQUIRE(assertion_holds(m, RSetting::R2));
    images.insert({outcome_index(m.r_outcome(RSetting::R1)),
                   outcome_index(m.r_outcome(RSetting::R2)),
                   outcome_index(m.l_outcome(LSetting::L1, RSetting::R1)),
                   outcome_index(m.l_outcome(LSetting::L1, RSetting::R2)),
                   outcome_index(m.l_outcome(LSetting::L2, RSetting::R1)),
                   outcome_index(m.l_outcome(LSetting::L2, RSetting::R2))});
  }
  REQUIRE(images.size() == survivors.size());  // injective
}

TEST_CASE("no-signaling: Hardy configurations and random states") {
  const HardyConfiguration optimal =
      construct_from_state(schmidt_state(kThetaStar));
  REQUIRE(check_no_signaling(optimal).pass);
  REQUIRE(check_no_signaling(optimal).max_deviation <= 1e-12);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.1, std::atan(1.0) - 0.1);
  for (int trial = 0; trial < 25; ++trial) {
    const Operator ul = random_unitary(2, rng);
    const Operator ur = random_unitary(2, rng);
    const State2Q psi = tensor(ul, ur) * schmidt_state(ang(rng));
    REQUIRE(check_no_signaling(construct_from_state(psi)).pass);
  }
}

TEST_CASE("no-signaling: product-state configuration deviates by roundoff only") {
  Projector2 p0;
  p0 << 1, 0, 0, 0;
  Projector2 px;
  px << 0.5, 0.5, 0.5, 0.5;
  State2Q ket00;
  ket00 << 1, 0, 0, 0;
  const HardyConfiguration cfg{ket00, p0, px, p0, px};
  const NoSignalingReport rep = check_no_signaling(cfg);
  REQUIRE(rep.max_deviation <= 1e-15);
}

TEST_CASE("no-signaling: a corrupted joint table is caught") {
  const HardyConfiguration cfg = construct_from_state(schmidt_state(0.5));
  auto tables = all_born_tables(cfg);
  tables[1].p[0][0] += 0.01;  // tamper with one (L1, R2) entry
  const NoSignalingReport rep = no_signaling_from_tables(tables);
  REQUIRE_FALSE(rep.pass);
  REQUIRE(rep.max_deviation == Catch::Approx(0.01).margin(1e-9));
}

TEST_CASE("order invariance: random two-qubit states, embedded pairs") {
  std::mt19937_64 rng(6);
  const SubsystemLayout layout = lr_layout();
  for (int trial = 0; trial < 60; ++trial) {
    const DensityOperator s(random_density_matrix(4, rng), layout);
    const EmbeddedProjector pl(random_projector(2, 1, rng), layout, "L");
    const EmbeddedProjector pr(random_projector(2, 1, rng), layout, "R");
    const OrderInvarianceReport rep = check_order_invariance(s, pl, pr);
    REQUIRE(rep.pass);
    REQUIRE(rep.max_deviation <= 1e-12);
  }
}

TEST_CASE("order invariance: both orders reproduce the Born table") {
  const HardyConfiguration cfg = construct_from_state(schmidt_state(kThetaStar));
  const SubsystemLayout layout = lr_layout();
  const DensityOperator rho(cfg.psi * cfg.psi.adjoint(), layout);
  const EmbeddedProjector pl(cfg.proj_l1p, layout, "L");
  const EmbeddedProjector pr(cfg.proj_r1p, layout, "R");

  REQUIRE(check_order_invariance(rho, pl, pr).pass);

  // sequential L-then-R joint equals the configuration's Born table
  const JointDistribution born = born_joint(cfg, LSetting::L1, RSetting::R1);
  const double p_l_yes = answer_probability(rho, pl);
  const DensityOperator after = apply_answer(rho, pl, Answer::yes);
  const double joint_pp = p_l_yes * answer_probability(after, pr);
  REQUIRE(joint_pp == Catch::Approx(born(Outcome::plus, Outcome::plus)).margin(1e-12));
}

TEST_CASE("order invariance: same-factor projectors are rejected") {
  std::mt19937_64 rng(9);
  const SubsystemLayout layout = lr_layout();
  const DensityOperator s(random_density_matrix(4, rng), layout);
  const EmbeddedProjector p1(random_projector(2, 1, rng), layout, "L");
  const EmbeddedProjector p2(random_projector(2, 1, rng), layout, "L");
  REQUIRE_THROWS_AS(check_order_invariance(s, p1, p2), std::invalid_argument);
}
