#pragma once

#include "vnq/operators.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <variant>
#include <vector>

namespace vnq {

/// Traces and branch probabilities below this floor count as exactly zero.
inline constexpr double kTraceFloor = 1e-12;

/// Thrown when a zero-probability reduction branch is selected.
struct impossible_outcome_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//------------------------------------------------------------------------
// Density operator
//------------------------------------------------------------------------

/// Evolving state of a system: Hermitian, positive semidefinite, trace > 0.
/// Normalization to unit trace is not required; probability formulas divide
/// by the trace explicitly.
class DensityOperator {
 public:
  DensityOperator(Operator op, SubsystemLayout layout,
                  double structural_tol = kStructuralTol)
      : op_(std::move(op)), layout_(std::move(layout)) {
    if (op_.rows() != op_.cols()) {
      throw std::invalid_argument("DensityOperator: operator must be square");
    }
    if (layout_.total_dim() != op_.rows()) {
      throw std::invalid_argument("DensityOperator: layout/dim mismatch");
    }
    const double herm = hermiticity_residual(op_);
    if (herm > structural_tol) {
      throw std::invalid_argument("DensityOperator: not Hermitian (residual " +
                                  std::to_string(herm) + ")");
    }
    const double lo = min_eigenvalue(op_);
    if (lo < -structural_tol) {
      throw std::invalid_argument(
          "DensityOperator: not positive semidefinite (eigenvalue " +
          std::to_string(lo) + ")");
    }
    if (op_.trace().real() <= kTraceFloor) {
      throw std::invalid_argument("DensityOperator: trace is vanishing");
    }
  }

  const Operator& op() const { return op_; }
  const SubsystemLayout& layout() const { return layout_; }
  Eigen::Index dim() const { return op_.rows(); }
  double trace() const { return op_.trace().real(); }

 private:
  Operator op_;
  SubsystemLayout layout_;
};

//------------------------------------------------------------------------
// Embedded projector
//------------------------------------------------------------------------

/// A yes/no question on one subsystem factor: the local projector padded
/// with identities on every other factor (first factor slow).
class EmbeddedProjector {
 public:
  EmbeddedProjector(Operator local, SubsystemLayout layout, std::string subsystem,
                    double tol = kStructuralTol)
      : local_(std::move(local)),
        layout_(std::move(layout)),
        subsystem_(std::move(subsystem)) {
    const std::size_t k = layout_.index_of(subsystem_);
    if (local_.rows() != local_.cols() ||
        local_.rows() != layout_.factors()[k].dim) {
      throw std::invalid_argument(
          "EmbeddedProjector: local dim does not match factor '" + subsystem_ +
          "'");
    }
    const ValidationReport check = validate(OperatorKind::projector, local_, tol);
    if (!check.ok) {
      throw std::invalid_argument("EmbeddedProjector: local operator is not a projector (" +
                                  check.detail + ")");
    }
    std::vector<Operator> pieces;
    pieces.reserve(layout_.size());
    for (std::size_t i = 0; i < layout_.size(); ++i) {
      pieces.push_back(i == k
                           ? local_
                           : Operator::Identity(layout_.factors()[i].dim,
                                                layout_.factors()[i].dim));
    }
    full_ = tensor_chain(pieces);
  }

  const Operator& local() const { return local_; }
  const Operator& full() const { return full_; }
  const SubsystemLayout& layout() const { return layout_; }
  const std::string& subsystem() const { return subsystem_; }

 private:
  Operator local_;
  SubsystemLayout layout_;
  std::string subsystem_;
  Operator full_;
};

/// The opposite question: local projector 1 - P on the same factor.
inline EmbeddedProjector complement(const EmbeddedProjector& p) {
  const Eigen::Index d = p.local().rows();
  return EmbeddedProjector(Operator::Identity(d, d) - p.local(), p.layout(),
                           p.subsystem());
}

//------------------------------------------------------------------------
// Process II and Process I
//------------------------------------------------------------------------

inline void require_same_system(const DensityOperator& s,
                                const EmbeddedProjector& p) {
  if (!(p.layout() == s.layout())) {
    throw std::invalid_argument("projector/state layout mismatch");
  }
}

/// Unitary segment: s -> U s U^dagger with U = exp(-i H dt).
inline DensityOperator evolve(const DensityOperator& s, const Hamiltonian& h,
                              double dt) {
  if (h.dim() != s.dim()) {
    throw std::invalid_argument("evolve: dimension mismatch");
  }
  const Operator u = expm_hermitian(h, dt);
  return DensityOperator(u * s.op() * u.adjoint(), s.layout());
}

/// Posing a question (Process I): s -> P s P + (1-P) s (1-P).
/// Kills the cross blocks between the P and 1-P sectors; trace preserved.
inline DensityOperator pose_question(const DensityOperator& s,
                                     const EmbeddedProjector& p) {
  require_same_system(s, p);
  const Operator& pr = p.full();
  const Operator co = Operator::Identity(s.dim(), s.dim()) - pr;
  return DensityOperator(pr * s.op() * pr + co * s.op() * co, s.layout());
}

/// Probability that nature answers yes: Tr(P s) / Tr(s), clamped to [0,1]
/// when within 1e-12 of either boundary.
inline double answer_probability(const DensityOperator& s,
                                 const EmbeddedProjector& p) {
  require_same_system(s, p);
  const double tr = s.trace();
  if (tr <= kTraceFloor) {
    throw std::invalid_argument("answer_probability: vanishing trace");
  }
  double q = (p.full() * s.op()).trace().real() / tr;
  if (q < 0.0 && q >= -kAlgebraTol) q = 0.0;
  if (q > 1.0 && q <= 1.0 + kAlgebraTol) q = 1.0;
  return q;
}

enum class Answer { yes, no };

/// Nature's answer: the selected branch P s P (yes) or (1-P) s (1-P) (no),
/// left unnormalized. Selecting a branch of trace <= 1e-12 is an
/// impossible outcome.
inline DensityOperator apply_answer(const DensityOperator& s,
                                    const EmbeddedProjector& p, Answer answer) {
  require_same_system(s, p);
  const Operator proj = (answer == Answer::yes)
                            ? p.full()
                            : Operator(Operator::Identity(s.dim(), s.dim()) -
                                       p.full());
  Operator branch = proj * s.op() * proj;
  if (branch.trace().real() <= kTraceFloor) {
    throw impossible_outcome_error(
        std::string("apply_answer: the '") +
        (answer == Answer::yes ? "yes" : "no") +
        "' branch has vanishing probability");
  }
  return DensityOperator(std::move(branch), s.layout());
}

/// Subsystem state S_b = Tr_b S: partial trace over all other factors.
inline DensityOperator subsystem_state(const DensityOperator& s,
                                       const std::vector<std::string>& keep) {
  Operator reduced = partial_trace(s.op(), s.layout(), keep);
  std::vector<SubsystemFactor> kept;
  for (const auto& f : s.layout().factors()) {
    for (const auto& label : keep) {
      if (f.label == label) kept.push_back(f);
    }
  }
  return DensityOperator(std::move(reduced), SubsystemLayout(std::move(kept)));
}

//------------------------------------------------------------------------
// Seeded sampling
//------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trajectory seed derived from a master seed and a (stream, index)
/// pair, e.g. (setting-pair, trajectory number). Pure mixing, no state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

/// Deterministic uniform generator: std::mt19937_64 under the hood, doubles
/// built from the top 53 bits, so sequences are identical across platforms
/// for a given seed. One instance per trajectory; no global state.
class TrajectoryRng {
 public:
  explicit TrajectoryRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

//------------------------------------------------------------------------
// Reduction events and trajectories
//------------------------------------------------------------------------

struct ReductionEvent {
  double time = 0.0;
  EmbeddedProjector projector;
  Answer answer = Answer::no;
  /// Yes-probability of the question on the pre-event state.
  double probability = 0.0;
};

struct UnitarySegment {
  double time = 0.0;  // segment start
  Hamiltonian h;
  double dt = 0.0;
};

using TrajectoryEvent = std::variant<UnitarySegment, ReductionEvent>;

struct EvolveStep {
  Hamiltonian h;
  double dt = 0.0;
};

struct ReduceStep {
  EmbeddedProjector p;
};

using ScheduleStep = std::variant<EvolveStep, ReduceStep>;
using Schedule = std::vector<ScheduleStep>;

/// One full reduction: the question is posed and nature draws an answer.
/// Branches with probability below 1e-12 are treated as exactly zero and
/// never drawn, so the impossible-outcome error cannot fire here.
inline std::pair<ReductionEvent, DensityOperator> sample_reduction(
    const DensityOperator& s, const EmbeddedProjector& p, TrajectoryRng& rng,
    double time = 0.0) {
  const double p_yes = answer_probability(s, p);
  Answer answer;
  if (p_yes < kTraceFloor) {
    answer = Answer::no;
  } else if (p_yes > 1.0 - kTraceFloor) {
    answer = Answer::yes;
  } else {
    answer = (rng.uniform() < p_yes) ? Answer::yes : Answer::no;
  }
  ReductionEvent event{time, p, answer, p_yes};
  DensityOperator next = apply_answer(s, p, answer);
  return {std::move(event), std::move(next)};
}

/// Execution record of a schedule: replaying the recorded events from the
/// initial state reproduces the final state.
struct Trajectory {
  DensityOperator initial;
  std::vector<TrajectoryEvent> events;
  DensityOperator final;
  std::uint64_t seed = 0;
};

inline Trajectory run_trajectory(const DensityOperator& initial,
                                 const Schedule& schedule, std::uint64_t seed) {
  TrajectoryRng rng(seed);
  DensityOperator state = initial;
  double t = 0.0;
  std::vector<TrajectoryEvent> events;
  events.reserve(schedule.size());
  for (const ScheduleStep& step : schedule) {
    if (const auto* ev = std::get_if<EvolveStep>(&step)) {
      events.push_back(UnitarySegment{t, ev->h, ev->dt});
      state = evolve(state, ev->h, ev->dt);
      t += ev->dt;
    } else {
      const auto& red = std::get<ReduceStep>(step);
      auto [event, next] = sample_reduction(state, red.p, rng, t);
      events.push_back(std::move(event));
      state = std::move(next);
    }
  }
  return Trajectory{initial, std::move(events), std::move(state), seed};
}

/// Re-applies the recorded events (with the recorded answers) to the
/// initial state.
inline DensityOperator replay(const Trajectory& trajectory) {
  DensityOperator state = trajectory.initial;
  for (const TrajectoryEvent& event : trajectory.events) {
    if (const auto* u = std::get_if<UnitarySegment>(&event)) {
      state = evolve(state, u->h, u->dt);
    } else {
      const auto& red = std::get<ReductionEvent>(event);
      state = apply_answer(state, red.projector, red.answer);
    }
  }
  return state;
}

}  // namespace vnq
