#pragma once

#include "vnq/hardy.hpp"

#include <array>
#include <vector>

namespace vnq {

//------------------------------------------------------------------------
// Local hidden variables
//------------------------------------------------------------------------

/// Pre-assigned outcomes for all four settings, independent of the distant
/// setting: a1, a2 answer L1, L2 and b1, b2 answer R1, R2.
struct LhvStrategy {
  Outcome a1 = Outcome::plus;
  Outcome a2 = Outcome::plus;
  Outcome b1 = Outcome::plus;
  Outcome b2 = Outcome::plus;

  bool operator==(const LhvStrategy&) const = default;
};

/// All 2^4 deterministic strategies, lexicographic in (a1, a2, b1, b2)
/// with + before -.
inline std::vector<LhvStrategy> enumerate_lhv() {
  std::vector<LhvStrategy> out;
  out.reserve(16);
  for (Outcome a1 : kOutcomes)
    for (Outcome a2 : kOutcomes)
      for (Outcome b1 : kOutcomes)
        for (Outcome b2 : kOutcomes) out.push_back({a1, a2, b1, b2});
  return out;
}

/// Which of the three zero-probability ("must") constraints to enforce.
/// The fourth prediction is a support-level existence condition handled by
/// lhv_hardy_bound, not a per-strategy predicate.
struct ConstraintSet {
  bool c1 = true;  // forbid (a1 = -, b2 = -)
  bool c2 = true;  // forbid (a2 = -, b2 = +)
  bool c3 = true;  // forbid (a2 = +, b1 = +)
};

inline bool satisfies(const LhvStrategy& s, const ConstraintSet& cs) {
  if (cs.c1 && s.a1 == Outcome::minus && s.b2 == Outcome::minus) return false;
  if (cs.c2 && s.a2 == Outcome::minus && s.b2 == Outcome::plus) return false;
  if (cs.c3 && s.a2 == Outcome::plus && s.b1 == Outcome::plus) return false;
  return true;
}

inline std::vector<LhvStrategy> filter_strategies(
    const std::vector<LhvStrategy>& strategies, const ConstraintSet& cs) {
  std::vector<LhvStrategy> out;
  for (const LhvStrategy& s : strategies) {
    if (satisfies(s, cs)) out.push_back(s);
  }
  return out;
}

/// Largest probability any mixture of the surviving strategies assigns to
/// the paradox event (a1 = -, b1 = +). A mixture maximum is attained at an
/// extreme point, so this is the max over individual survivors: 1.0 if any
/// survivor realizes the event, else 0.0.
inline double lhv_hardy_bound(const std::vector<LhvStrategy>& survivors) {
  for (const LhvStrategy& s : survivors) {
    if (s.a1 == Outcome::minus && s.b1 == Outcome::plus) return 1.0;
  }
  return 0.0;
}

//------------------------------------------------------------------------
// Counterfactual causal models
//------------------------------------------------------------------------

/// Deterministic outcome assignment with the built-in temporal asymmetry:
/// the R outcome function never reads the L setting (region R is earlier,
/// no backward-in-time influence), while the L outcome function may read
/// the R setting. Nothing more is assumed.
struct CausalModel {
  std::array<Outcome, 2> r{};                 // indexed by RSetting
  std::array<std::array<Outcome, 2>, 2> l{};  // indexed by (LSetting, RSetting)

  Outcome r_outcome(RSetting rs) const {
    return r[rs == RSetting::R1 ? 0 : 1];
  }
  Outcome l_outcome(LSetting ls, RSetting rs) const {
    return l[ls == LSetting::L1 ? 0 : 1][rs == RSetting::R1 ? 0 : 1];
  }

  bool operator==(const CausalModel&) const = default;
};

/// All 4 x 16 = 64 models, lexicographic in
/// (r(R1), r(R2), l(L1,R1), l(L1,R2), l(L2,R1), l(L2,R2)) with + before -.
inline std::vector<CausalModel> enumerate_causal_models() {
  std::vector<CausalModel> out;
  out.reserve(64);
  for (Outcome r1 : kOutcomes)
    for (Outcome r2 : kOutcomes)
      for (Outcome l11 : kOutcomes)
        for (Outcome l12 : kOutcomes)
          for (Outcome l21 : kOutcomes)
            for (Outcome l22 : kOutcomes) {
              out.push_back(CausalModel{{r1, r2}, {{{l11, l12}, {l21, l22}}}});
            }
  return out;
}

/// Which of the three certainty predictions a model must respect.
struct PredictionSet {
  bool p1 = false;  // (L1,R2): L1- forces R2+
  bool p2 = false;  // (L2,R2): R2+ forces L2+
  bool p3 = false;  // (L2,R1): L2+ forces R1-
};

inline bool consistent_with(const CausalModel& m, const PredictionSet& ps) {
  if (ps.p1 && m.l_outcome(LSetting::L1, RSetting::R2) == Outcome::minus &&
      m.r_outcome(RSetting::R2) != Outcome::plus)
    return false;
  if (ps.p2 && m.r_outcome(RSetting::R2) == Outcome::plus &&
      m.l_outcome(LSetting::L2, RSetting::R2) != Outcome::plus)
    return false;
  if (ps.p3 && m.l_outcome(LSetting::L2, RSetting::R1) == Outcome::plus &&
      m.r_outcome(RSetting::R1) != Outcome::minus)
    return false;
  return true;
}

/// The counterfactual assertion A(Rk) for a deterministic model: if the
/// performed pair (L1, Rk) yields L1-, then choosing L2 instead (same Rk,
/// same R outcome) would have yielded L2+.
inline bool assertion_holds(const CausalModel& m, RSetting which) {
  if (m.l_outcome(LSetting::L1, which) != Outcome::minus) return true;
  return m.l_outcome(LSetting::L2, which) == Outcome::plus;
}

/// Exhaustive check of assertion A(Rk) over a model list.
///
/// For which = R2 (enforce predictions 1 and 2): admissible models are the
/// prediction-consistent ones; violations counts those where A(R2) fails.
/// Expected: zero violations — A(R2) is forced.
///
/// For which = R1 (enforce prediction 3): admissible models are those where
/// A(R1) itself holds and the predictions hold; violations counts those
/// realizing the paradox event (l(L1,R1) = -, r(R1) = +), and
/// max_event_probability is the largest probability any mixture of
/// admissible models gives that event. Expected: 0 — A(R1) kills the
/// event the fourth prediction requires.
struct AssertionReport {
  RSetting which = RSetting::R2;
  int total_models = 0;
  int admissible_models = 0;
  int violations = 0;
  double max_event_probability = 0.0;
  bool conclusion = false;  // R2: assertion universal; R1: event impossible
};

inline AssertionReport check_assertion_A(const std::vector<CausalModel>& models,
                                         RSetting which,
                                         const PredictionSet& predictions) {
  AssertionReport rep;
  rep.which = which;
  rep.total_models = static_cast<int>(models.size());
  for (const CausalModel& m : models) {
    if (!consistent_with(m, predictions)) continue;
    if (which == RSetting::R2) {
      rep.admissible_models += 1;
      if (!assertion_holds(m, RSetting::R2)) rep.violations += 1;
    } else {
      if (!assertion_holds(m, RSetting::R1)) continue;
      rep.admissible_models += 1;
      const bool event = m.l_outcome(LSetting::L1, RSetting::R1) == Outcome::minus &&
                         m.r_outcome(RSetting::R1) == Outcome::plus;
      if (event) {
        rep.violations += 1;
        rep.max_event_probability = 1.0;
      }
    }
  }
  rep.conclusion = rep.violations == 0;
  return rep;
}

/// Embedding of an LHV strategy as a causal model: r reads off (b1, b2)
/// and l ignores the R setting.
inline CausalModel causal_model_from_strategy(const LhvStrategy& s) {
  return CausalModel{{s.b1, s.b2}, {{{s.a1, s.a1}, {s.a2, s.a2}}}};
}

//------------------------------------------------------------------------
// No-signaling
//------------------------------------------------------------------------

/// Marginal comparison over the four Born tables, indexed
/// (L1,R1), (L1,R2), (L2,R1), (L2,R2) as in all_born_tables.
struct NoSignalingReport {
  double max_l_deviation = 0.0;  // L marginals vs the R setting choice
  double max_r_deviation = 0.0;  // R marginals vs the L setting choice
  double max_deviation = 0.0;
  bool pass = false;
};

inline NoSignalingReport no_signaling_from_tables(
    const std::array<JointDistribution, 4>& tables, double tol = kAlgebraTol) {
  NoSignalingReport rep;
  for (int ls = 0; ls < 2; ++ls) {
    for (Outcome a : kOutcomes) {
      const double d = std::abs(tables[2 * ls + 0].l_marginal(a) -
                                tables[2 * ls + 1].l_marginal(a));
      rep.max_l_deviation = std::max(rep.max_l_deviation, d);
    }
  }
  for (int rs = 0; rs < 2; ++rs) {
    for (Outcome b : kOutcomes) {
      const double d = std::abs(tables[0 + rs].r_marginal(b) -
                                tables[2 + rs].r_marginal(b));
      rep.max_r_deviation = std::max(rep.max_r_deviation, d);
    }
  }
  rep.max_deviation = std::max(rep.max_l_deviation, rep.max_r_deviation);
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

/// Each wing's outcome marginals must not depend on the other wing's
/// setting choice.
inline NoSignalingReport check_no_signaling(const HardyConfiguration& cfg,
                                            double tol = kAlgebraTol) {
  return no_signaling_from_tables(all_born_tables(cfg), tol);
}

//------------------------------------------------------------------------
// Reduction-order invariance
//------------------------------------------------------------------------

/// Joint outcome distributions for two questions on distinct factors,
/// computed three ways: reducing L first, reducing R first, and directly
/// as Tr(P_L P_R s) / Tr(s). All three must agree.
struct OrderInvarianceReport {
  double max_deviation = 0.0;
  bool pass = false;
};

inline OrderInvarianceReport check_order_invariance(const DensityOperator& s,
                                                    const EmbeddedProjector& pl,
                                                    const EmbeddedProjector& pr,
                                                    double tol = kAlgebraTol) {
  require_same_system(s, pl);
  require_same_system(s, pr);
  if (pl.subsystem() == pr.subsystem()) {
    throw std::invalid_argument(
        "check_order_invariance: projectors act on the same factor; order "
        "invariance is not claimed there");
  }

  auto branch_projector = [](const EmbeddedProjector& p, Answer a) {
    return a == Answer::yes ? p : complement(p);
  };

  // Sequential composition: answer the first question, then the second on
  // the surviving branch. Branches below the probability floor contribute
  // zero.
  auto sequential = [&](const EmbeddedProjector& first,
                        const EmbeddedProjector& second, bool l_first) {
    std::array<std::array<double, 2>, 2> joint{};
    for (int i = 0; i < 2; ++i) {
      const EmbeddedProjector pf =
          branch_projector(first, i == 0 ? Answer::yes : Answer::no);
      const double p_first = answer_probability(s, pf);
      std::array<double, 2> p_second{0.0, 0.0};
      if (p_first >= kTraceFloor) {
        try {
          const DensityOperator after = apply_answer(s, pf, Answer::yes);
          p_second[0] = answer_probability(after, second);
          p_second[1] = answer_probability(after, complement(second));
        } catch (const impossible_outcome_error&) {
          // branch trace under the floor: contributes nothing
        }
      }
      for (int j = 0; j < 2; ++j) {
        const int a = l_first ? i : j;
        const int b = l_first ? j : i;
        joint[a][b] = p_first * p_second[j];
      }
    }
    return joint;
  };

  const auto lr = sequential(pl, pr, true);
  const auto rl = sequential(pr, pl, false);

  OrderInvarianceReport rep;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Operator pa = (a == 0 ? pl : complement(pl)).full();
      const Operator pb = (b == 0 ? pr : complement(pr)).full();
      const double direct = (pa * pb * s.op()).trace().real() / s.trace();
      rep.max_deviation = std::max(rep.max_deviation, std::abs(lr[a][b] - direct));
      rep.max_deviation = std::max(rep.max_deviation, std::abs(rl[a][b] - direct));
      rep.max_deviation = std::max(rep.max_deviation, std::abs(lr[a][b] - rl[a][b]));
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

}  // namespace vnq
