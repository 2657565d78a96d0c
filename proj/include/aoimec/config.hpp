#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aoimec/des.hpp"
#include "aoimec/errors.hpp"
#include "aoimec/mec.hpp"
#include "aoimec/mfg.hpp"
#include "aoimec/optimize.hpp"

// Experiment configuration: one JSON document per run. All numbers are rates
// per unit time. See README for the schema reference.

namespace aoimec::cli {

enum class RunMode { aoi, simulate, mfe, nash, sweep };

inline RunMode mode_from_string(const std::string& s) {
  if (s == "aoi") return RunMode::aoi;
  if (s == "simulate") return RunMode::simulate;
  if (s == "mfe") return RunMode::mfe;
  if (s == "nash") return RunMode::nash;
  if (s == "sweep") return RunMode::sweep;
  throw InvalidConfig("unknown mode: " + s);
}

inline std::string mode_to_string(RunMode m) {
  switch (m) {
    case RunMode::aoi: return "aoi";
    case RunMode::simulate: return "simulate";
    case RunMode::mfe: return "mfe";
    case RunMode::nash: return "nash";
    case RunMode::sweep: return "sweep";
  }
  return "?";
}

struct SweepSpec {
  std::string axis;            // dotted config path, e.g. "env.rho"
  std::vector<double> values;  // grid in execution order
  std::string op;              // "best_policy" | "mfe" | "aoi"
};

struct NashSpec {
  int max_sweeps = 25;
  std::vector<int> exploitability_N;  // nonempty: MFE exploitability ladder
};

struct ExperimentConfig {
  RunMode mode = RunMode::aoi;
  mfg::TypeSet types;
  mec::Policy policy;
  bool has_policy = false;
  std::optional<double> rho;        // mean-field ES load
  std::optional<double> lambda_e;   // explicit exogenous rate at the ES
  std::optional<double> mu3_total;  // explicit total ES rate
  mec::SystemParams system{1, 1.0};
  bool has_system = false;
  opt::OptConfig opt;
  mfg::AlgoConfig algo;
  des::SimConfig sim;
  SweepSpec sweep;
  NashSpec nash;
  mec::CostPairing pairing = mec::CostPairing::physical;
  std::string output_dir = ".";
};

namespace detail {

inline double require_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw InvalidConfig(what + " must be positive");
  return v;
}

inline mec::DeviceParams parse_device(const nlohmann::json& j, int type_id) {
  mec::DeviceParams d;
  d.lambda = require_positive(j.at("lambda").get<double>(), "device.lambda");
  d.eta = require_positive(j.value("eta", 1.0), "device.eta");
  d.V = j.value("V", 1.0);
  if (d.V < 0.0) throw InvalidConfig("device.V must be nonnegative");
  d.P_max = require_positive(j.value("P_max", 1.0), "device.P_max");
  d.f_max = require_positive(j.value("f_max", 1.0), "device.f_max");
  d.type_id = j.value("type_id", type_id);
  return d;
}

inline mec::Policy parse_policy(const nlohmann::json& j) {
  mec::Policy p;
  p.p_local = j.at("p_local").get<double>();
  if (p.p_local < 0.0 || p.p_local > 1.0) throw InvalidConfig("policy.p_local must lie in [0,1]");
  p.mu_local = require_positive(j.at("mu_local").get<double>(), "policy.mu_local");
  p.mu_tx = require_positive(j.at("mu_tx").get<double>(), "policy.mu_tx");
  return p;
}

}  // namespace detail

/// Converts "a.b.c" to the JSON pointer /a/b/c.
inline nlohmann::json::json_pointer pointer_from_dotted(const std::string& dotted) {
  std::string p = "/";
  for (char c : dotted) p += (c == '.') ? '/' : c;
  return nlohmann::json::json_pointer(p);
}

/// Applies one "key=value" command-line override onto the config document.
/// The value is parsed as JSON when possible, otherwise taken as a string.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidConfig("override must have the form key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  doc[pointer_from_dotted(key)] = value;
}

inline ExperimentConfig parse_experiment(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  try {
    cfg.mode = mode_from_string(doc.at("mode").get<std::string>());
    cfg.output_dir = doc.value("output", ".");
    if (doc.contains("cost_pairing"))
      cfg.pairing = mec::cost_pairing_from_string(doc.at("cost_pairing").get<std::string>());

    if (doc.contains("types")) {
      const auto& jt = doc.at("types");
      for (std::size_t i = 0; i < jt.size(); ++i)
        cfg.types.types.push_back(detail::parse_device(jt[i], static_cast<int>(i)));
      if (doc.contains("weights"))
        cfg.types.weights = doc.at("weights").get<std::vector<double>>();
      else
        cfg.types.weights.assign(cfg.types.types.size(), 1.0 / cfg.types.types.size());
      mfg::validate_type_set(cfg.types);
    } else if (doc.contains("device")) {
      cfg.types.types.push_back(detail::parse_device(doc.at("device"), 0));
      cfg.types.weights.push_back(1.0);
    }

    if (doc.contains("policy")) {
      cfg.policy = detail::parse_policy(doc.at("policy"));
      cfg.has_policy = true;
    }
    if (doc.contains("env")) {
      const auto& je = doc.at("env");
      if (je.contains("rho")) {
        cfg.rho = je.at("rho").get<double>();
        if (*cfg.rho < 0.0) throw InvalidConfig("env.rho must be nonnegative");
      }
      if (je.contains("lambda_e")) {
        cfg.lambda_e = je.at("lambda_e").get<double>();
        if (*cfg.lambda_e < 0.0) throw InvalidConfig("env.lambda_e must be nonnegative");
      }
      if (je.contains("mu3"))
        cfg.mu3_total = detail::require_positive(je.at("mu3").get<double>(), "env.mu3");
      if (cfg.lambda_e.has_value() != cfg.mu3_total.has_value())
        throw InvalidConfig("env.lambda_e and env.mu3 must be given together");
      if (!cfg.rho && !cfg.lambda_e) throw InvalidConfig("env needs rho or lambda_e+mu3");
    }
    if (doc.contains("system")) {
      const auto& js = doc.at("system");
      cfg.system.N = js.value("N", 1);
      if (cfg.system.N < 1) throw InvalidConfig("system.N must be >= 1");
      cfg.system.mu3_per_capita =
          detail::require_positive(js.value("mu3_per_capita", 1.0), "system.mu3_per_capita");
      cfg.has_system = true;
    }
    if (doc.contains("opt")) {
      const auto& jo = doc.at("opt");
      cfg.opt.grid_points_per_axis = jo.value("grid_points_per_axis", cfg.opt.grid_points_per_axis);
      if (cfg.opt.grid_points_per_axis < 3)
        throw InvalidConfig("opt.grid_points_per_axis must be >= 3");
      cfg.opt.refine_tolerance = jo.value("refine_tolerance", cfg.opt.refine_tolerance);
      if (!(cfg.opt.refine_tolerance > 0.0))
        throw InvalidConfig("opt.refine_tolerance must be positive");
      cfg.opt.max_refine_iters = jo.value("max_refine_iters", cfg.opt.max_refine_iters);
    }
    if (doc.contains("algo")) {
      const auto& ja = doc.at("algo");
      cfg.algo.gamma = ja.value("gamma", cfg.algo.gamma);
      if (!(cfg.algo.gamma > 0.0) || cfg.algo.gamma > 1.0)
        throw InvalidConfig("algo.gamma must lie in (0,1]");
      cfg.algo.epsilon = ja.value("epsilon", cfg.algo.epsilon);
      if (!(cfg.algo.epsilon > 0.0)) throw InvalidConfig("algo.epsilon must be positive");
      cfg.algo.max_iters = ja.value("max_iters", cfg.algo.max_iters);
    }
    if (doc.contains("sim")) {
      const auto& js = doc.at("sim");
      cfg.sim.horizon = js.value("horizon", cfg.sim.horizon);
      cfg.sim.warmup_fraction = js.value("warmup_fraction", cfg.sim.warmup_fraction);
      cfg.sim.replications = js.value("replications", cfg.sim.replications);
      cfg.sim.master_seed = js.value("master_seed", cfg.sim.master_seed);
      cfg.sim.trace_path = js.value("trace", std::string{});
      if (!(cfg.sim.horizon > 0.0)) throw InvalidConfig("sim.horizon must be positive");
      if (cfg.sim.replications < 1) throw InvalidConfig("sim.replications must be >= 1");
      if (cfg.sim.warmup_fraction < 0.0 || cfg.sim.warmup_fraction >= 1.0)
        throw InvalidConfig("sim.warmup_fraction must lie in [0,1)");
    }
    if (doc.contains("sweep")) {
      const auto& js = doc.at("sweep");
      cfg.sweep.axis = js.at("axis").get<std::string>();
      cfg.sweep.values = js.at("values").get<std::vector<double>>();
      cfg.sweep.op = js.value("op", "best_policy");
      if (cfg.sweep.op != "best_policy" && cfg.sweep.op != "mfe" && cfg.sweep.op != "aoi")
        throw InvalidConfig("sweep.op must be best_policy, mfe, or aoi");
      if (cfg.sweep.values.empty()) throw InvalidConfig("sweep.values must be nonempty");
    }
    if (doc.contains("nash")) {
      const auto& jn = doc.at("nash");
      cfg.nash.max_sweeps = jn.value("max_sweeps", cfg.nash.max_sweeps);
      if (jn.contains("exploitability_N"))
        cfg.nash.exploitability_N = jn.at("exploitability_N").get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("malformed config: ") + e.what());
  }

  // mode-specific required pieces
  const bool has_type = !cfg.types.types.empty();
  switch (cfg.mode) {
    case RunMode::aoi:
      if (!has_type || !cfg.has_policy || (!cfg.rho && !cfg.lambda_e))
        throw InvalidConfig("aoi mode needs device, policy, and env");
      break;
    case RunMode::simulate:
      if (!has_type || !cfg.has_policy)
        throw InvalidConfig("simulate mode needs device and policy");
      if (!cfg.has_system && !cfg.lambda_e)
        throw InvalidConfig("simulate mode needs env.lambda_e+mu3 or system");
      break;
    case RunMode::mfe:
      if (!has_type || !cfg.has_system)
        throw InvalidConfig("mfe mode needs device/types and system.mu3_per_capita");
      break;
    case RunMode::nash:
      if (!has_type || !cfg.has_system) throw InvalidConfig("nash mode needs device and system");
      if (cfg.nash.exploitability_N.empty() && !cfg.has_policy)
        throw InvalidConfig("nash dynamics needs an initial policy");
      break;
    case RunMode::sweep:
      if (cfg.sweep.axis.empty()) throw InvalidConfig("sweep mode needs a sweep block");
      break;
  }
  return cfg;
}

}  // namespace aoimec::cli
