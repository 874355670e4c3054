#pragma once

#include "vnq/dynamics.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace vnq {

/// Thrown when no Hardy configuration exists for a state (product or
/// maximally entangled input).
struct no_configuration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LSetting { L1, L2 };
enum class RSetting { R1, R2 };
enum class Outcome { plus, minus };

inline constexpr Outcome kOutcomes[2] = {Outcome::plus, Outcome::minus};

inline int outcome_index(Outcome o) { return o == Outcome::plus ? 0 : 1; }

/// Certainty predictions must reach probability 1 within this tolerance.
inline constexpr double kCertaintyTol = 1e-9;
/// "Sometimes" means a joint probability above this floor.
inline constexpr double kSometimesFloor = 1e-6;

using State2Q = Eigen::Vector4cd;       // two-qubit pure state, L factor slow
using Direction = Eigen::Vector2cd;     // unit vector on one qubit
using Projector2 = Eigen::Matrix2cd;    // rank-1 projector on one qubit

inline SubsystemLayout lr_layout() {
  return SubsystemLayout({{"L", 2}, {"R", 2}});
}

//------------------------------------------------------------------------
// Qubit direction helpers
//------------------------------------------------------------------------

/// Gauge fix: rotate a unit vector so its first nonzero component is real
/// and positive.
inline Direction canonical_phase(Direction d) {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double mag = std::abs(d(i));
    if (mag > 1e-14) {
      return d * (std::conj(d(i)) / mag);
    }
  }
  return d;
}

/// The unique direction (up to phase) orthogonal to a nonzero 2-vector.
inline Direction orthogonal_direction(const Direction& v) {
  const double n = v.norm();
  if (n <= 0.0) {
    throw std::invalid_argument("orthogonal_direction: zero vector");
  }
  Direction w;
  w << -std::conj(v(1)), std::conj(v(0));
  return canonical_phase(w / n);
}

inline Projector2 rank1_projector(const Direction& d) {
  return d * d.adjoint();
}

inline Projector2 complement2(const Projector2& p) {
  return Projector2::Identity() - p;
}

/// Unit eigenvector of a rank-1 projector, canonical phase.
inline Direction plus_direction(const Projector2& p) {
  Direction col = p.col(0).norm() >= p.col(1).norm() ? p.col(0) : p.col(1);
  const double n = col.norm();
  if (n <= 1e-12) {
    throw std::invalid_argument("plus_direction: projector has no range");
  }
  return canonical_phase(col / n);
}

//------------------------------------------------------------------------
// Configuration and Born statistics
//------------------------------------------------------------------------

/// A two-qubit state plus the four local questions. The stored projectors
/// are the "+" outcomes; "-" outcomes are their 2x2 complements.
struct HardyConfiguration {
  State2Q psi;
  Projector2 proj_l1p;
  Projector2 proj_l2p;
  Projector2 proj_r1p;
  Projector2 proj_r2p;

  const Projector2& plus_projector(LSetting s) const {
    return s == LSetting::L1 ? proj_l1p : proj_l2p;
  }
  const Projector2& plus_projector(RSetting s) const {
    return s == RSetting::R1 ? proj_r1p : proj_r2p;
  }
  Projector2 outcome_projector(LSetting s, Outcome o) const {
    return o == Outcome::plus ? plus_projector(s)
                              : complement2(plus_projector(s));
  }
  Projector2 outcome_projector(RSetting s, Outcome o) const {
    return o == Outcome::plus ? plus_projector(s)
                              : complement2(plus_projector(s));
  }
};

/// Joint outcome distribution for one setting pair; rows are the L outcome
/// (+ then -), columns the R outcome.
struct JointDistribution {
  std::array<std::array<double, 2>, 2> p{};

  double operator()(Outcome a, Outcome b) const {
    return p[outcome_index(a)][outcome_index(b)];
  }
  double l_marginal(Outcome a) const {
    return p[outcome_index(a)][0] + p[outcome_index(a)][1];
  }
  double r_marginal(Outcome b) const {
    return p[0][outcome_index(b)] + p[1][outcome_index(b)];
  }
  double total() const { return p[0][0] + p[0][1] + p[1][0] + p[1][1]; }
};

/// Born rule for one setting pair: entry(a,b) = <psi| P_L(a) (x) P_R(b) |psi>.
/// Entries within 1e-12 below zero are clamped to 0.
inline JointDistribution born_joint(const HardyConfiguration& cfg, LSetting ls,
                                    RSetting rs) {
  JointDistribution joint;
  for (Outcome a : kOutcomes) {
    const Projector2 pl = cfg.outcome_projector(ls, a);
    for (Outcome b : kOutcomes) {
      const Projector2 pr = cfg.outcome_projector(rs, b);
      const Operator full = tensor(pl, pr);
      double value = (cfg.psi.adjoint() * full * cfg.psi).value().real();
      if (value < 0.0 && value >= -kAlgebraTol) value = 0.0;
      joint.p[outcome_index(a)][outcome_index(b)] = value;
    }
  }
  return joint;
}

inline std::array<JointDistribution, 4> all_born_tables(
    const HardyConfiguration& cfg) {
  return {born_joint(cfg, LSetting::L1, RSetting::R1),
          born_joint(cfg, LSetting::L1, RSetting::R2),
          born_joint(cfg, LSetting::L2, RSetting::R1),
          born_joint(cfg, LSetting::L2, RSetting::R2)};
}

//------------------------------------------------------------------------
// The four predictions
//------------------------------------------------------------------------

/// p1 = P(R2+ | L1-), p2 = P(L2+ | R2+), p3 = P(R1- | L2+) are the three
/// certainty predictions; q = P(L1- and R1+) is the "sometimes" event.
/// c1, c2, c3 are the joint probabilities the certainties force to zero.
/// A conditional is left undefined when its conditioning event has
/// probability below 1e-12.
struct PredictionReport {
  std::optional<double> p1;
  std::optional<double> p2;
  std::optional<double> p3;
  double q = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  bool pass = false;
};

inline PredictionReport verify_predictions(const HardyConfiguration& cfg,
                                           double certainty_tol = kCertaintyTol,
                                           double sometimes_floor = kSometimesFloor) {
  const JointDistribution t11 = born_joint(cfg, LSetting::L1, RSetting::R1);
  const JointDistribution t12 = born_joint(cfg, LSetting::L1, RSetting::R2);
  const JointDistribution t21 = born_joint(cfg, LSetting::L2, RSetting::R1);
  const JointDistribution t22 = born_joint(cfg, LSetting::L2, RSetting::R2);

  PredictionReport rep;
  rep.c1 = t12(Outcome::minus, Outcome::minus);
  rep.c2 = t22(Outcome::minus, Outcome::plus);
  rep.c3 = t21(Outcome::plus, Outcome::plus);
  rep.q = t11(Outcome::minus, Outcome::plus);

  const double p_l1m = t12.l_marginal(Outcome::minus);
  if (p_l1m >= kTraceFloor) {
    rep.p1 = t12(Outcome::minus, Outcome::plus) / p_l1m;
  }
  const double p_r2p = t22.r_marginal(Outcome::plus);
  if (p_r2p >= kTraceFloor) {
    rep.p2 = t22(Outcome::plus, Outcome::plus) / p_r2p;
  }
  const double p_l2p = t21.l_marginal(Outcome::plus);
  if (p_l2p >= kTraceFloor) {
    rep.p3 = t21(Outcome::plus, Outcome::minus) / p_l2p;
  }

  rep.pass = rep.p1 && rep.p2 && rep.p3 &&
             *rep.p1 >= 1.0 - certainty_tol && *rep.p2 >= 1.0 - certainty_tol &&
             *rep.p3 >= 1.0 - certainty_tol && rep.q > sometimes_floor;
  return rep;
}

//------------------------------------------------------------------------
// Construction from a state
//------------------------------------------------------------------------

/// Schmidt-form two-qubit state cos(theta)|00> + sin(theta)|11>.
inline State2Q schmidt_state(double theta) {
  State2Q psi;
  psi << std::cos(theta), 0.0, 0.0, std::sin(theta);
  return psi;
}

/// The paradox probability the chain construction attains for Schmidt
/// coefficients (a, b), with the L1 direction chosen optimally:
/// q = [a b (a^2 - b^2) / (a^3 + b^3)]^2.
inline double chain_q(double a, double b) {
  const double g = a * b * (a * a - b * b) / (a * a * a + b * b * b);
  return g * g;
}

/// Builds the Hardy questions for an entangled two-qubit state.
///
/// Writing psi = a|e0 f0> + b|e1 f1> in Schmidt form (a > b > 0), the L1-
/// direction is cos(phi) e0 + sin(phi) e1 with cos^2(phi) = b^3/(a^3+b^3),
/// which maximizes the paradox probability for this state; the remaining
/// directions are forced, one orthogonality constraint each:
///   c1 = 0:  R2- orthogonal to the R-side vector conditioned on L1-,
///   c2 = 0:  L2- orthogonal to the L-side vector conditioned on R2+,
///   c3 = 0:  R1+ orthogonal to the R-side vector conditioned on L2+.
/// Product and maximally entangled states admit no configuration (q = 0).
inline HardyConfiguration construct_from_state(const State2Q& psi_in) {
  const double norm = psi_in.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    throw std::invalid_argument("construct_from_state: psi must be a unit vector");
  }
  const State2Q psi = psi_in / norm;

  // Coefficient matrix m(i,j) = <ij|psi>, L index slow.
  Eigen::Matrix2cd m;
  m << psi(0), psi(1), psi(2), psi(3);

  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double a = svd.singularValues()(0);
  const double b = svd.singularValues()(1);

  if (chain_q(a, b) <= kTraceFloor) {
    if (b <= 1e-8) {
      throw no_configuration_error(
          "construct_from_state: product state admits no Hardy configuration");
    }
    if (a - b <= 1e-8) {
      throw no_configuration_error(
          "construct_from_state: maximally entangled state admits no Hardy "
          "configuration");
    }
    throw no_configuration_error(
        "construct_from_state: paradox probability vanishes for this state");
  }

  const double a3 = a * a * a, b3 = b * b * b;
  const double cos_phi = std::sqrt(b3 / (a3 + b3));
  const double sin_phi = std::sqrt(a3 / (a3 + b3));
  const Direction l1m = canonical_phase(cos_phi * svd.matrixU().col(0) +
                                        sin_phi * svd.matrixU().col(1));

  // Conditional single-qubit vectors: contracting psi with a bra on the
  // other side. v_j = sum_i conj(l_i) m(i,j); w_i = sum_j m(i,j) conj(r_j).
  const Direction v = m.transpose() * l1m.conjugate();
  const Direction r2p = canonical_phase(v.normalized());
  const Direction w = m * r2p.conjugate();
  const Direction l2p = canonical_phase(w.normalized());
  const Direction u = m.transpose() * l2p.conjugate();
  const Direction r1p = orthogonal_direction(u);
  const Direction l1p = orthogonal_direction(l1m);

  return HardyConfiguration{psi, rank1_projector(l1p), rank1_projector(l2p),
                            rank1_projector(r1p), rank1_projector(r2p)};
}

//------------------------------------------------------------------------
// Optimization over the Schmidt angle
//------------------------------------------------------------------------

struct OptimizeResult {
  HardyConfiguration config;
  double theta = 0.0;
  double q_max = 0.0;
};

/// Paradox probability of the constructed configuration at Schmidt angle
/// theta, through the full construction + Born pipeline.
inline double hardy_q_at(double theta) {
  const HardyConfiguration cfg = construct_from_state(schmidt_state(theta));
  return born_joint(cfg, LSetting::L1, RSetting::R1)(Outcome::minus, Outcome::plus);
}

/// Maximizes the paradox probability over theta in (0, pi/4): a dense grid
/// scan (lowest-theta argmax wins ties) followed by golden-section
/// refinement of the bracketing interval down to |dtheta| <= 1e-8.
inline OptimizeResult optimize_hardy(int grid_resolution = 256,
                                     int refinement_iterations = 64) {
  if (grid_resolution < 64) {
    throw std::invalid_argument("optimize_hardy: grid resolution must be >= 64");
  }
  const double theta_hi = std::atan(1.0);  // pi/4
  const double step = theta_hi / (grid_resolution + 1);

  double best_theta = step;
  double best_q = -1.0;
  for (int i = 1; i <= grid_resolution; ++i) {
    const double theta = i * step;
    double q;
    try {
      q = hardy_q_at(theta);
    } catch (const no_configuration_error&) {
      continue;  // degenerate endpoints at extreme grid densities
    }
    if (q > best_q) {
      best_q = q;
      best_theta = theta;
    }
  }

  // Golden-section on the bracketing interval around the grid argmax.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(best_theta - step, 0.25 * step);
  double hi = std::min(best_theta + step, theta_hi - 0.25 * step);
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double qc = hardy_q_at(c);
  double qd = hardy_q_at(d);
  for (int it = 0; it < refinement_iterations && (hi - lo) > 1e-10; ++it) {
    if (qc > qd) {
      hi = d;
      d = c;
      qd = qc;
      c = hi - gr * (hi - lo);
      qc = hardy_q_at(c);
    } else {
      lo = c;
      c = d;
      qc = qd;
      d = lo + gr * (hi - lo);
      qd = hardy_q_at(d);
    }
    if (qc > best_q) {
      best_q = qc;
      best_theta = c;
    }
    if (qd > best_q) {
      best_q = qd;
      best_theta = d;
    }
  }

  return OptimizeResult{construct_from_state(schmidt_state(best_theta)),
                        best_theta, best_q};
}

}  // namespace vnq
