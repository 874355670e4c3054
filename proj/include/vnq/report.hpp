#pragma once

#include "vnq/locality.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

namespace vnq {

/// Report documents preserve insertion order.
using Json = nlohmann::ordered_json;

//------------------------------------------------------------------------
// Rendering
//------------------------------------------------------------------------

/// Decimal rendering with 17 significant digits: enough to round-trip any
/// double exactly.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("format_double: non-finite value");
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace detail {

inline void render_json_to(const Json& node, std::string& out, int indent,
                           int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
  switch (node.type()) {
    case Json::value_t::object: {
      if (node.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        render_json_to(it.value(), out, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (node.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : node) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        render_json_to(item, out, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(node.get<double>());
      return;
    default:
      // integers, booleans, strings, null: nlohmann's exact rendering
      out += node.dump();
      return;
  }
}

}  // namespace detail

/// Serializes a report document; floating-point fields are printed with 17
/// significant digits.
inline std::string render_json(const Json& doc, int indent = 2) {
  std::string out;
  detail::render_json_to(doc, out, indent, 0);
  out += "\n";
  return out;
}

//------------------------------------------------------------------------
// Configuration serialization
//------------------------------------------------------------------------

/// A qubit direction (cos(alpha), e^{i phase} sin(alpha)) in canonical
/// gauge: alpha in [0, pi/2], first nonzero component real positive.
struct BasisAngles {
  double alpha = 0.0;
  double phase = 0.0;
};

inline BasisAngles basis_angles(const Projector2& plus_proj) {
  const Direction d = plus_direction(plus_proj);
  BasisAngles out;
  out.alpha = std::atan2(std::abs(d(1)), std::abs(d(0)));
  out.phase = std::abs(d(1)) > 1e-14 && std::abs(d(0)) > 1e-14
                  ? std::arg(d(1))
                  : 0.0;
  return out;
}

inline Direction direction_from_angles(const BasisAngles& ba) {
  Direction d;
  d << std::cos(ba.alpha), std::polar(std::sin(ba.alpha), ba.phase);
  return d;
}

inline Json to_json(const BasisAngles& ba) {
  return Json{{"alpha", ba.alpha}, {"phase", ba.phase}};
}

inline Json to_json(const PredictionReport& rep) {
  Json doc;
  doc["p1"] = rep.p1 ? Json(*rep.p1) : Json(nullptr);
  doc["p2"] = rep.p2 ? Json(*rep.p2) : Json(nullptr);
  doc["p3"] = rep.p3 ? Json(*rep.p3) : Json(nullptr);
  doc["q"] = rep.q;
  doc["c1"] = rep.c1;
  doc["c2"] = rep.c2;
  doc["c3"] = rep.c3;
  doc["pass"] = rep.pass;
  return doc;
}

/// psi is stored as 8 reals, interleaved re/im; the four bases as
/// angle/phase pairs of their "+" directions.
inline Json to_json(const HardyConfiguration& cfg) {
  Json psi = Json::array();
  for (Eigen::Index i = 0; i < 4; ++i) {
    psi.push_back(cfg.psi(i).real());
    psi.push_back(cfg.psi(i).imag());
  }
  Json bases;
  bases["L1"] = to_json(basis_angles(cfg.proj_l1p));
  bases["L2"] = to_json(basis_angles(cfg.proj_l2p));
  bases["R1"] = to_json(basis_angles(cfg.proj_r1p));
  bases["R2"] = to_json(basis_angles(cfg.proj_r2p));
  Json doc;
  doc["psi"] = std::move(psi);
  doc["bases"] = std::move(bases);
  doc["predictions"] = to_json(verify_predictions(cfg));
  return doc;
}

inline HardyConfiguration configuration_from_json(const Json& doc) {
  const auto& psi_arr = doc.at("psi");
  if (!psi_arr.is_array() || psi_arr.size() != 8) {
    throw std::invalid_argument("configuration: psi must hold 8 reals");
  }
  State2Q psi;
  for (Eigen::Index i = 0; i < 4; ++i) {
    psi(i) = cxd(psi_arr.at(2 * i).get<double>(),
                 psi_arr.at(2 * i + 1).get<double>());
  }
  auto proj = [&doc](const char* name) {
    const auto& b = doc.at("bases").at(name);
    BasisAngles ba{b.at("alpha").get<double>(), b.at("phase").get<double>()};
    if (!std::isfinite(ba.alpha) || !std::isfinite(ba.phase)) {
      throw std::invalid_argument("configuration: non-finite basis angles");
    }
    return rank1_projector(direction_from_angles(ba));
  };
  HardyConfiguration cfg{psi, proj("L1"), proj("L2"), proj("R1"), proj("R2")};
  const double norm = cfg.psi.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    throw std::invalid_argument("configuration: psi is not normalized");
  }
  cfg.psi /= norm;
  return cfg;
}

//------------------------------------------------------------------------
// Analysis reports
//------------------------------------------------------------------------

inline const char* outcome_symbol(Outcome o) {
  return o == Outcome::plus ? "+" : "-";
}

inline const char* setting_name(LSetting s) {
  return s == LSetting::L1 ? "L1" : "L2";
}

inline const char* setting_name(RSetting s) {
  return s == RSetting::R1 ? "R1" : "R2";
}

inline Json to_json(const JointDistribution& joint) {
  Json doc;
  for (Outcome a : kOutcomes) {
    for (Outcome b : kOutcomes) {
      doc[std::string(outcome_symbol(a)) + outcome_symbol(b)] = joint(a, b);
    }
  }
  return doc;
}

inline Json to_json(const LhvStrategy& s) {
  Json doc;
  doc["a1"] = outcome_symbol(s.a1);
  doc["a2"] = outcome_symbol(s.a2);
  doc["b1"] = outcome_symbol(s.b1);
  doc["b2"] = outcome_symbol(s.b2);
  return doc;
}

inline Json to_json(const AssertionReport& rep) {
  Json doc;
  doc["assertion"] = rep.which == RSetting::R2 ? "A(R2)" : "A(R1)";
  doc["total_models"] = rep.total_models;
  doc["admissible_models"] = rep.admissible_models;
  doc["violations"] = rep.violations;
  if (rep.which == RSetting::R1) {
    doc["max_event_probability"] = rep.max_event_probability;
  }
  doc["conclusion"] = rep.conclusion;
  return doc;
}

inline Json to_json(const NoSignalingReport& rep) {
  Json doc;
  doc["max_l_deviation"] = rep.max_l_deviation;
  doc["max_r_deviation"] = rep.max_r_deviation;
  doc["max_deviation"] = rep.max_deviation;
  doc["pass"] = rep.pass;
  return doc;
}

inline Json to_json(const OrderInvarianceReport& rep) {
  Json doc;
  doc["max_deviation"] = rep.max_deviation;
  doc["pass"] = rep.pass;
  return doc;
}

}  // namespace vnq
