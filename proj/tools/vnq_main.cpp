// Command-line front end: Hardy construction and verification, the LHV and
// counterfactual enumeration suite, seeded Monte Carlo sampling, and a small
// reduction-dynamics demo. Reports are deterministic for a given seed.

#include "vnq/vnq.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace vnq;

constexpr double kPi = 3.14159265358979323846;

struct CommonOpts {
  std::uint64_t seed = 42;
  long long samples = 100000;
  double tol_certainty = kCertaintyTol;
  double tol_algebra = kAlgebraTol;
  std::string output;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "Master seed for sampled runs")
      ->capture_default_str();
  cmd->add_option("--samples", o.samples, "Trajectories per setting pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tolerance-certainty", o.tol_certainty,
                  "Certainty predictions must reach 1 within this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tolerance-algebra", o.tol_algebra,
                  "Tolerance for algebraic identities (marginals, ordering)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--output", o.output, "Write the report to this file");
  cmd->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  // --config lives on the root app; unmatched options fall through to it
  cmd->fallthrough();
}

Json tolerances_json(const CommonOpts& o) {
  return Json{{"certainty", o.tol_certainty}, {"algebra", o.tol_algebra}};
}

/// Writes the report body; stdout when no --output was given.
int emit(const CommonOpts& o, const std::string& body) {
  if (o.output.empty()) {
    std::cout << body;
    return 0;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) {
    std::cerr << "vnq: cannot open output file '" << o.output << "'\n";
    return 1;
  }
  f << body;
  f.flush();
  if (!f.good()) {
    std::cerr << "vnq: failed writing '" << o.output << "'\n";
    return 1;
  }
  return 0;
}

int deliver(const CommonOpts& o, const std::string& body, bool passed) {
  const int io = emit(o, body);
  if (io != 0) return 1;
  return passed ? 0 : 2;
}

int reject_csv(const std::string& command) {
  std::cerr << "vnq: --format csv is not defined for '" << command
            << "' (csv covers 'sample' trajectory logs and 'lhv' survivor "
               "tables)\n";
  return 1;
}

std::string pass_tag(bool ok) { return ok ? "pass" : "FAIL"; }

//------------------------------------------------------------------------
// Configuration sources
//------------------------------------------------------------------------

struct StateChoice {
  std::string preset = "optimal";  // optimal | maximally-entangled | product
  std::optional<double> theta;
  std::string load_path;
};

void add_state_choice(CLI::App* cmd, StateChoice& c) {
  cmd->add_option("--state", c.preset,
                  "State preset: optimal, maximally-entangled, product")
      ->check(CLI::IsMember({"optimal", "maximally-entangled", "product"}))
      ->capture_default_str();
  cmd->add_option("--theta", c.theta,
                  "Schmidt angle of cos(theta)|00> + sin(theta)|11>");
  cmd->add_option("--load", c.load_path,
                  "Load a serialized configuration (JSON) instead");
}

/// Builds the configuration; io/parse problems surface as std::runtime_error
/// (exit 1), impossible states as no_configuration_error (exit 2).
HardyConfiguration resolve_configuration(const StateChoice& c) {
  if (!c.load_path.empty()) {
    std::ifstream f(c.load_path);
    if (!f) {
      throw std::runtime_error("cannot open configuration file '" +
                               c.load_path + "'");
    }
    Json doc;
    try {
      doc = Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw std::runtime_error("malformed configuration file '" + c.load_path +
                               "': " + e.what());
    }
    try {
      return configuration_from_json(doc);
    } catch (const std::exception& e) {
      throw std::runtime_error("invalid configuration in '" + c.load_path +
                               "': " + e.what());
    }
  }
  if (c.theta) {
    return construct_from_state(schmidt_state(*c.theta));
  }
  if (c.preset == "maximally-entangled") {
    return construct_from_state(schmidt_state(kPi / 4.0));
  }
  if (c.preset == "product") {
    return construct_from_state(schmidt_state(0.0));
  }
  return optimize_hardy().config;
}

int no_configuration_report(const CommonOpts& o, const std::string& command,
                            const std::string& message) {
  if (o.format == "csv") return reject_csv(command);
  if (o.format == "text") {
    return deliver(o, command + ": no configuration: " + message + "\n", false);
  }
  Json doc;
  doc["command"] = command;
  doc["error"] = "no-configuration";
  doc["detail"] = message;
  doc["pass"] = false;
  return deliver(o, render_json(doc), false);
}

//------------------------------------------------------------------------
// hardy-verify / hardy-optimize
//------------------------------------------------------------------------

struct VerifyOutcome {
  PredictionReport predictions;
  NoSignalingReport no_signaling;
  OrderInvarianceReport order_invariance;  // worst case over setting pairs
  bool pass = false;
};

VerifyOutcome run_verification(const HardyConfiguration& cfg,
                               const CommonOpts& o) {
  VerifyOutcome out;
  out.predictions = verify_predictions(cfg, o.tol_certainty);
  out.no_signaling = check_no_signaling(cfg, o.tol_algebra);

  const SubsystemLayout layout = lr_layout();
  const DensityOperator rho(cfg.psi * cfg.psi.adjoint(), layout);
  out.order_invariance.pass = true;
  for (LSetting ls : {LSetting::L1, LSetting::L2}) {
    for (RSetting rs : {RSetting::R1, RSetting::R2}) {
      const EmbeddedProjector pl(cfg.plus_projector(ls), layout, "L");
      const EmbeddedProjector pr(cfg.plus_projector(rs), layout, "R");
      const OrderInvarianceReport rep =
          check_order_invariance(rho, pl, pr, o.tol_algebra);
      out.order_invariance.max_deviation =
          std::max(out.order_invariance.max_deviation, rep.max_deviation);
      out.order_invariance.pass = out.order_invariance.pass && rep.pass;
    }
  }
  out.pass = out.predictions.pass && out.no_signaling.pass &&
             out.order_invariance.pass;
  return out;
}

Json born_tables_json(const HardyConfiguration& cfg) {
  Json doc;
  doc["L1R1"] = to_json(born_joint(cfg, LSetting::L1, RSetting::R1));
  doc["L1R2"] = to_json(born_joint(cfg, LSetting::L1, RSetting::R2));
  doc["L2R1"] = to_json(born_joint(cfg, LSetting::L2, RSetting::R1));
  doc["L2R2"] = to_json(born_joint(cfg, LSetting::L2, RSetting::R2));
  return doc;
}

Json verify_json(const HardyConfiguration& cfg, const VerifyOutcome& out,
                 const CommonOpts& o) {
  Json doc;
  doc["command"] = "hardy-verify";
  doc["tolerances"] = tolerances_json(o);
  doc["configuration"] = to_json(cfg);
  doc["born_tables"] = born_tables_json(cfg);
  doc["no_signaling"] = to_json(out.no_signaling);
  doc["order_invariance"] = to_json(out.order_invariance);
  doc["pass"] = out.pass;
  return doc;
}

std::string verify_text(const VerifyOutcome& out) {
  std::ostringstream s;
  const PredictionReport& p = out.predictions;
  auto cond = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("undefined");
  };
  s << "hardy-verify\n";
  s << "  p1 = P(R2+|L1-) = " << cond(p.p1) << "\n";
  s << "  p2 = P(L2+|R2+) = " << cond(p.p2) << "\n";
  s << "  p3 = P(R1-|L2+) = " << cond(p.p3) << "\n";
  s << "  q  = P(L1-,R1+) = " << format_double(p.q) << "\n";
  s << "  constraint residuals: c1 = " << format_double(p.c1)
    << ", c2 = " << format_double(p.c2) << ", c3 = " << format_double(p.c3)
    << "\n";
  s << "  predictions: " << pass_tag(p.pass) << "\n";
  s << "  no-signaling max deviation = "
    << format_double(out.no_signaling.max_deviation) << " ["
    << pass_tag(out.no_signaling.pass) << "]\n";
  s << "  order-invariance max deviation = "
    << format_double(out.order_invariance.max_deviation) << " ["
    << pass_tag(out.order_invariance.pass) << "]\n";
  s << (out.pass ? "PASS" : "FAIL") << "\n";
  return s.str();
}

int cmd_hardy_verify(const CommonOpts& o, const StateChoice& choice) {
  if (o.format == "csv") return reject_csv("hardy-verify");
  HardyConfiguration cfg{};
  try {
    cfg = resolve_configuration(choice);
  } catch (const no_configuration_error& e) {
    return no_configuration_report(o, "hardy-verify", e.what());
  }
  const VerifyOutcome out = run_verification(cfg, o);
  const std::string body = o.format == "text"
                               ? verify_text(out)
                               : render_json(verify_json(cfg, out, o));
  return deliver(o, body, out.pass);
}

int cmd_hardy_optimize(const CommonOpts& o, int resolution, int refine_iters) {
  if (o.format == "csv") return reject_csv("hardy-optimize");
  const OptimizeResult res = optimize_hardy(resolution, refine_iters);
  const VerifyOutcome out = run_verification(res.config, o);

  if (o.format == "text") {
    std::ostringstream s;
    s << "hardy-optimize\n";
    s << "  theta = " << format_double(res.theta) << "\n";
    s << "  q_max = " << format_double(res.q_max) << "\n";
    s << verify_text(out);
    return deliver(o, s.str(), out.pass);
  }
  Json doc;
  doc["command"] = "hardy-optimize";
  doc["grid_resolution"] = resolution;
  doc["refinement_iterations"] = refine_iters;
  doc["theta"] = res.theta;
  doc["q_max"] = res.q_max;
  doc["tolerances"] = tolerances_json(o);
  doc["configuration"] = to_json(res.config);
  doc["pass"] = out.pass;
  return deliver(o, render_json(doc), out.pass);
}

//------------------------------------------------------------------------
// lhv / argument
//------------------------------------------------------------------------

struct LhvOutcome {
  ConstraintSet constraints;
  std::vector<LhvStrategy> survivors;
  double bound = 0.0;
  bool pass = false;  // bound vanishes
};

LhvOutcome run_lhv(const ConstraintSet& cs) {
  LhvOutcome out;
  out.constraints = cs;
  out.survivors = filter_strategies(enumerate_lhv(), cs);
  out.bound = lhv_hardy_bound(out.survivors);
  out.pass = out.bound == 0.0;
  return out;
}

Json lhv_json(const LhvOutcome& out) {
  Json doc;
  doc["constraints"] = Json{{"c1", out.constraints.c1},
                            {"c2", out.constraints.c2},
                            {"c3", out.constraints.c3}};
  doc["strategies_total"] = 16;
  doc["survivor_count"] = static_cast<int>(out.survivors.size());
  Json list = Json::array();
  for (const LhvStrategy& s : out.survivors) list.push_back(to_json(s));
  doc["survivors"] = std::move(list);
  doc["lhv_bound"] = out.bound;
  doc["pass"] = out.pass;
  return doc;
}

std::string lhv_csv(const LhvOutcome& out) {
  std::string csv = "a1,a2,b1,b2\n";
  for (const LhvStrategy& s : out.survivors) {
    csv += std::string(outcome_symbol(s.a1)) + "," + outcome_symbol(s.a2) +
           "," + outcome_symbol(s.b1) + "," + outcome_symbol(s.b2) + "\n";
  }
  return csv;
}

std::string lhv_text(const LhvOutcome& out) {
  std::ostringstream s;
  s << "lhv: 16 strategies -> " << out.survivors.size()
    << " survive the enforced certainty constraints\n";
  for (const LhvStrategy& st : out.survivors) {
    s << "  (a1=" << outcome_symbol(st.a1) << ", a2=" << outcome_symbol(st.a2)
      << ", b1=" << outcome_symbol(st.b1) << ", b2=" << outcome_symbol(st.b2)
      << ")\n";
  }
  s << "  max P(L1-,R1+) over mixtures = " << format_double(out.bound) << "\n";
  s << (out.pass ? "PASS" : "FAIL") << " (bound "
    << (out.pass ? "vanishes" : "is positive") << ")\n";
  return s.str();
}

int cmd_lhv(const CommonOpts& o, const ConstraintSet& cs) {
  const LhvOutcome out = run_lhv(cs);
  if (o.format == "csv") return deliver(o, lhv_csv(out), out.pass);
  if (o.format == "text") return deliver(o, lhv_text(out), out.pass);
  Json doc;
  doc["command"] = "lhv";
  doc.update(lhv_json(out));
  return deliver(o, render_json(doc), out.pass);
}

struct ArgumentOutcome {
  LhvOutcome lhv;
  AssertionReport a_r2;
  AssertionReport a_r1;
  double quantum_q = 0.0;
  bool pass = false;
};

ArgumentOutcome run_argument(const ConstraintSet& cs) {
  ArgumentOutcome out;
  out.lhv = run_lhv(cs);
  const auto models = enumerate_causal_models();
  out.a_r2 =
      check_assertion_A(models, RSetting::R2, PredictionSet{true, true, false});
  out.a_r1 =
      check_assertion_A(models, RSetting::R1, PredictionSet{false, false, true});
  out.quantum_q = optimize_hardy().q_max;
  out.pass = out.lhv.pass && out.a_r2.conclusion && out.a_r1.conclusion &&
             out.quantum_q > out.lhv.bound;
  return out;
}

Json argument_json(const ArgumentOutcome& out) {
  Json doc;
  doc["command"] = "argument";
  doc["lhv"] = lhv_json(out.lhv);
  doc["assertion_r2"] = to_json(out.a_r2);
  doc["assertion_r1"] = to_json(out.a_r1);
  doc["quantum_q"] = out.quantum_q;
  doc["pass"] = out.pass;
  return doc;
}

std::string argument_text(const ArgumentOutcome& out) {
  std::ostringstream s;
  s << "argument\n" << lhv_text(out.lhv);
  s << "  A(R2): " << out.a_r2.violations << " violations among "
    << out.a_r2.admissible_models << " admissible of " << out.a_r2.total_models
    << " models [" << pass_tag(out.a_r2.conclusion) << "]\n";
  s << "  A(R1): paradox event probability "
    << format_double(out.a_r1.max_event_probability) << " among "
    << out.a_r1.admissible_models << " admissible models ["
    << pass_tag(out.a_r1.conclusion) << "]\n";
  s << "  quantum q = " << format_double(out.quantum_q)
    << " > lhv bound = " << format_double(out.lhv.bound) << "\n";
  s << (out.pass ? "PASS" : "FAIL") << "\n";
  return s.str();
}

int cmd_argument(const CommonOpts& o, const ConstraintSet& cs) {
  if (o.format == "csv") return reject_csv("argument");
  const ArgumentOutcome out = run_argument(cs);
  const std::string body = o.format == "text" ? argument_text(out)
                                              : render_json(argument_json(out));
  return deliver(o, body, out.pass);
}

//------------------------------------------------------------------------
// sample
//------------------------------------------------------------------------

struct PairSample {
  LSetting ls = LSetting::L1;
  RSetting rs = RSetting::R1;
  JointDistribution born;
  std::array<std::array<long long, 2>, 2> counts{};
  bool pass = true;
};

struct SampleOutcome {
  std::array<PairSample, 4> pairs;
  long long samples = 0;
  bool bound_checked = true;  // the 3-sigma test needs at least 2 samples
  bool pass = true;
  std::string csv;
};

SampleOutcome run_sample(const HardyConfiguration& cfg, const CommonOpts& o,
                         bool want_csv) {
  const SubsystemLayout layout = lr_layout();
  const DensityOperator rho(cfg.psi * cfg.psi.adjoint(), layout);
  const long long n = o.samples;

  SampleOutcome out;
  out.samples = n;
  out.bound_checked = n >= 2;
  if (want_csv) out.csv = "seed_index,l_setting,r_setting,l_outcome,r_outcome\n";

  const std::array<std::pair<LSetting, RSetting>, 4> settings = {
      {{LSetting::L1, RSetting::R1},
       {LSetting::L1, RSetting::R2},
       {LSetting::L2, RSetting::R1},
       {LSetting::L2, RSetting::R2}}};

  for (std::size_t pair_ix = 0; pair_ix < settings.size(); ++pair_ix) {
    const auto [ls, rs] = settings[pair_ix];
    PairSample& ps = out.pairs[pair_ix];
    ps.ls = ls;
    ps.rs = rs;
    ps.born = born_joint(cfg, ls, rs);

    const Schedule schedule{
        ReduceStep{EmbeddedProjector(cfg.plus_projector(ls), layout, "L")},
        ReduceStep{EmbeddedProjector(cfg.plus_projector(rs), layout, "R")}};

    for (long long k = 0; k < n; ++k) {
      const Trajectory t =
          run_trajectory(rho, schedule, derive_seed(o.seed, pair_ix, k));
      const auto& le = std::get<ReductionEvent>(t.events[0]);
      const auto& re = std::get<ReductionEvent>(t.events[1]);
      const int a = le.answer == Answer::yes ? 0 : 1;
      const int b = re.answer == Answer::yes ? 0 : 1;
      ps.counts[a][b] += 1;
      if (want_csv) {
        out.csv += std::to_string(k) + "," + setting_name(ls) + "," +
                   setting_name(rs) + "," + (a == 0 ? "+" : "-") + "," +
                   (b == 0 ? "+" : "-") + "\n";
      }
    }

    if (out.bound_checked) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double p = ps.born.p[a][b];
          const double freq = ps.counts[a][b] / static_cast<double>(n);
          const double bound = 3.0 * std::sqrt(p * (1.0 - p) / n);
          // zero-probability cells must stay empty (sigma = 0)
          if (std::abs(freq - p) > bound + 1e-15) ps.pass = false;
        }
      }
      out.pass = out.pass && ps.pass;
    }
  }
  return out;
}

Json sample_json(const SampleOutcome& out, const CommonOpts& o) {
  Json doc;
  doc["command"] = "sample";
  doc["seed"] = o.seed;
  doc["samples_per_pair"] = out.samples;
  doc["bound_check"] = out.bound_checked ? "applied" : "skipped";
  Json pairs = Json::array();
  for (const PairSample& ps : out.pairs) {
    Json p;
    p["settings"] = std::string(setting_name(ps.ls)) + setting_name(ps.rs);
    p["born"] = to_json(ps.born);
    Json emp, bound;
    for (Outcome a : kOutcomes) {
      for (Outcome b : kOutcomes) {
        const std::string key =
            std::string(outcome_symbol(a)) + outcome_symbol(b);
        const double prob = ps.born(a, b);
        emp[key] = ps.counts[outcome_index(a)][outcome_index(b)] /
                   static_cast<double>(out.samples);
        bound[key] = 3.0 * std::sqrt(prob * (1.0 - prob) / out.samples);
      }
    }
    p["empirical"] = std::move(emp);
    p["bound_3sigma"] = std::move(bound);
    if (out.bound_checked) p["pass"] = ps.pass;
    pairs.push_back(std::move(p));
  }
  doc["pairs"] = std::move(pairs);
  doc["pass"] = out.pass;
  return doc;
}

std::string sample_text(const SampleOutcome& out, const CommonOpts& o) {
  std::ostringstream s;
  s << "sample: seed " << o.seed << ", " << out.samples
    << " trajectories per setting pair, 3-sigma bound "
    << (out.bound_checked ? "applied" : "skipped (needs >= 2 samples)") << "\n";
  for (const PairSample& ps : out.pairs) {
    s << "  (" << setting_name(ps.ls) << "," << setting_name(ps.rs) << ")";
    for (Outcome a : kOutcomes) {
      for (Outcome b : kOutcomes) {
        const double freq = ps.counts[outcome_index(a)][outcome_index(b)] /
                            static_cast<double>(out.samples);
        s << "  " << outcome_symbol(a) << outcome_symbol(b) << ": "
          << format_double(freq) << " (born " << format_double(ps.born(a, b))
          << ")";
      }
    }
    if (out.bound_checked) s << "  [" << pass_tag(ps.pass) << "]";
    s << "\n";
  }
  s << (out.pass ? "PASS" : "FAIL") << "\n";
  return s.str();
}

int cmd_sample(const CommonOpts& o, const StateChoice& choice) {
  HardyConfiguration cfg{};
  try {
    cfg = resolve_configuration(choice);
  } catch (const no_configuration_error& e) {
    return no_configuration_report(o, "sample", e.what());
  }
  const SampleOutcome out = run_sample(cfg, o, o.format == "csv");
  if (o.format == "csv") return deliver(o, out.csv, out.pass);
  if (o.format == "text") return deliver(o, sample_text(out, o), out.pass);
  return deliver(o, render_json(sample_json(out, o)), out.pass);
}

//------------------------------------------------------------------------
// dynamics-demo
//------------------------------------------------------------------------

Json matrix_json(const Operator& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json event_json(const TrajectoryEvent& event) {
  if (const auto* u = std::get_if<UnitarySegment>(&event)) {
    Json doc;
    doc["type"] = "unitary";
    doc["time"] = u->time;
    doc["dt"] = u->dt;
    return doc;
  }
  const auto& red = std::get<ReductionEvent>(event);
  Json doc;
  doc["type"] = "reduction";
  doc["time"] = red.time;
  doc["subsystem"] = red.projector.subsystem();
  doc["probability_yes"] = red.probability;
  doc["answer"] = red.answer == Answer::yes ? "yes" : "no";
  return doc;
}

/// Two qubits, an entangling X(x)X segment, then one question per side.
/// After the L answer, the R question is already decided: reducing the
/// shared state fixes the distant propensities.
int cmd_dynamics_demo(const CommonOpts& o) {
  if (o.format == "csv") return reject_csv("dynamics-demo");
  const SubsystemLayout layout = lr_layout();
  Operator rho0 = Operator::Zero(4, 4);
  rho0(0, 0) = 1.0;  // |00><00|
  const DensityOperator initial(rho0, layout);

  Operator xx(4, 4);
  xx << 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0;  // X (x) X
  Operator p0(2, 2);
  p0 << 1, 0, 0, 0;

  const Schedule schedule{EvolveStep{Hamiltonian(xx), kPi / 4.0},
                          ReduceStep{EmbeddedProjector(p0, layout, "L")},
                          ReduceStep{EmbeddedProjector(p0, layout, "R")}};
  const Trajectory t = run_trajectory(initial, schedule, o.seed);
  const DensityOperator replayed = replay(t);
  const double replay_residual = max_abs(replayed.op() - t.final.op());

  if (o.format == "text") {
    std::ostringstream s;
    s << "dynamics-demo: seed " << o.seed << "\n";
    for (const TrajectoryEvent& event : t.events) {
      if (const auto* u = std::get_if<UnitarySegment>(&event)) {
        s << "  t=" << format_double(u->time)
          << "  unitary segment, dt = " << format_double(u->dt) << "\n";
      } else {
        const auto& red = std::get<ReductionEvent>(event);
        s << "  t=" << format_double(red.time) << "  question on "
          << red.projector.subsystem() << ": answer "
          << (red.answer == Answer::yes ? "yes" : "no")
          << " (P(yes) = " << format_double(red.probability) << ")\n";
      }
    }
    s << "  final trace = " << format_double(t.final.trace())
      << ", replay residual = " << format_double(replay_residual) << "\n";
    return deliver(o, s.str(), true);
  }

  Json doc;
  doc["command"] = "dynamics-demo";
  doc["seed"] = o.seed;
  doc["layout"] = Json::array({"L", "R"});
  Json events = Json::array();
  for (const TrajectoryEvent& event : t.events) {
    events.push_back(event_json(event));
  }
  doc["events"] = std::move(events);
  doc["final_state"] = matrix_json(t.final.op());
  doc["final_trace"] = t.final.trace();
  doc["subsystem_L"] = matrix_json(subsystem_state(t.final, {"L"}).op());
  doc["subsystem_R"] = matrix_json(subsystem_state(t.final, {"R"}).op());
  doc["replay_residual"] = replay_residual;
  doc["pass"] = true;
  return deliver(o, render_json(doc), true);
}

//------------------------------------------------------------------------
// all
//------------------------------------------------------------------------

int cmd_all(const CommonOpts& o) {
  if (o.format == "csv") return reject_csv("all");
  const OptimizeResult res = optimize_hardy();
  const VerifyOutcome verify = run_verification(res.config, o);
  const ArgumentOutcome argument = run_argument(ConstraintSet{});
  const SampleOutcome sample = run_sample(res.config, o, false);
  const bool pass = verify.pass && argument.pass && sample.pass;

  if (o.format == "text") {
    std::ostringstream s;
    s << "theta = " << format_double(res.theta)
      << ", q_max = " << format_double(res.q_max) << "\n";
    s << verify_text(verify) << "\n";
    s << argument_text(argument) << "\n";
    s << sample_text(sample, o) << "\n";
    s << (pass ? "ALL PASS" : "FAIL") << "\n";
    return deliver(o, s.str(), pass);
  }

  Json doc;
  doc["command"] = "all";
  doc["seed"] = o.seed;
  doc["tolerances"] = tolerances_json(o);
  Json hv = verify_json(res.config, verify, o);
  hv.erase("command");
  hv["theta"] = res.theta;
  hv["q_max"] = res.q_max;
  doc["hardy_verify"] = std::move(hv);
  Json arg = argument_json(argument);
  arg.erase("command");
  doc["argument"] = std::move(arg);
  Json smp = sample_json(sample, o);
  smp.erase("command");
  doc["sample"] = std::move(smp);
  doc["pass"] = pass;
  return deliver(o, render_json(doc), pass);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"von Neumann reduction dynamics and the Hardy nonlocality "
               "argument: verification toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Key-value file; keys mirror the long flags, grouped under "
                 "a [subcommand] section");
  app.allow_config_extras(CLI::config_extras_mode::error);

  CommonOpts verify_opts, optimize_opts, lhv_opts, argument_opts, sample_opts,
      demo_opts, all_opts;
  StateChoice verify_choice, sample_choice;
  int resolution = 256, refine_iters = 64;
  struct {
    bool no_c1 = false, no_c2 = false, no_c3 = false;
  } lhv_flags, argument_flags;

  CLI::App* verify = app.add_subcommand(
      "hardy-verify", "Verify the four predictions, no-signaling, and "
                      "reduction-order invariance for a configuration");
  add_common(verify, verify_opts);
  add_state_choice(verify, verify_choice);

  CLI::App* optimize = app.add_subcommand(
      "hardy-optimize",
      "Maximize the paradox probability over the Schmidt angle");
  add_common(optimize, optimize_opts);
  optimize->add_option("--resolution", resolution, "Grid points over (0, pi/4)")
      ->check(CLI::Range(64, 1 << 20))
      ->capture_default_str();
  optimize->add_option("--refine-iterations", refine_iters,
                       "Golden-section refinement iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* lhv = app.add_subcommand(
      "lhv", "Enumerate local hidden-variable strategies and bound the "
             "paradox probability");
  add_common(lhv, lhv_opts);
  lhv->add_flag("--no-c1", lhv_flags.no_c1, "Drop certainty constraint 1");
  lhv->add_flag("--no-c2", lhv_flags.no_c2, "Drop certainty constraint 2");
  lhv->add_flag("--no-c3", lhv_flags.no_c3, "Drop certainty constraint 3");

  CLI::App* argument = app.add_subcommand(
      "argument", "Run the full nonlocality argument: LHV bound plus the "
                  "counterfactual assertions A(R2) and A(R1)");
  add_common(argument, argument_opts);
  argument->add_flag("--no-c1", argument_flags.no_c1,
                     "Drop certainty constraint 1");
  argument->add_flag("--no-c2", argument_flags.no_c2,
                     "Drop certainty constraint 2");
  argument->add_flag("--no-c3", argument_flags.no_c3,
                     "Drop certainty constraint 3");

  CLI::App* sample = app.add_subcommand(
      "sample", "Monte Carlo trajectories of the Hardy schedule per setting "
                "pair, checked against the Born values");
  add_common(sample, sample_opts);
  add_state_choice(sample, sample_choice);

  CLI::App* demo = app.add_subcommand(
      "dynamics-demo", "One seeded trajectory: entangling evolution followed "
                       "by one question per side");
  add_common(demo, demo_opts);

  CLI::App* all = app.add_subcommand("all", "Run the full default suite");
  add_common(all, all_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (verify->parsed()) return cmd_hardy_verify(verify_opts, verify_choice);
    if (optimize->parsed()) {
      return cmd_hardy_optimize(optimize_opts, resolution, refine_iters);
    }
    if (lhv->parsed()) {
      return cmd_lhv(lhv_opts, ConstraintSet{!lhv_flags.no_c1, !lhv_flags.no_c2,
                                             !lhv_flags.no_c3});
    }
    if (argument->parsed()) {
      return cmd_argument(argument_opts,
                          ConstraintSet{!argument_flags.no_c1,
                                        !argument_flags.no_c2,
                                        !argument_flags.no_c3});
    }
    if (sample->parsed()) return cmd_sample(sample_opts, sample_choice);
    if (demo->parsed()) return cmd_dynamics_demo(demo_opts);
    if (all->parsed()) return cmd_all(all_opts);
  } catch (const std::exception& e) {
    std::cerr << "vnq: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
