#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aoimec/config.hpp"
#include "aoimec/csv.hpp"
#include "aoimec/finite_game.hpp"

// Experiment front end shared by the CLI and the tests. Every mode ingests a
// JSON config (after command-line overrides), writes resolved_config.json and
// its CSV artifacts into the output directory, and maps failures to exit
// codes: 0 ok, 1 validation error, 2 solver non-convergence.

namespace aoimec::cli {

namespace detail {

inline std::string leaf_of(const std::string& dotted) {
  const auto pos = dotted.rfind('.');
  return pos == std::string::npos ? dotted : dotted.substr(pos + 1);
}

/// The pair (rho for the closed form, ES environment for the engine).
struct EnvView {
  double rho = 0.0;
  mec::EsEnvironment env;
};

inline EnvView env_view(const ExperimentConfig& cfg) {
  if (cfg.lambda_e) return {*cfg.lambda_e / *cfg.mu3_total,
                            mec::EsEnvironment::finite(*cfg.lambda_e, *cfg.mu3_total)};
  return {*cfg.rho, mec::EsEnvironment::mean_field(*cfg.rho)};
}

inline int run_aoi(const ExperimentConfig& cfg, const std::filesystem::path& outdir) {
  const auto ev = env_view(cfg);
  const auto& par = cfg.types.types.front();
  const double cf = mec::mf_aoi_closed_form(cfg.policy, par.lambda, ev.rho);
  const double eng = shs::solve_aoi(mec::build_mec_shs(cfg.policy, par.lambda, ev.env)).delta;

  CsvWriter csv((outdir / "aoi.csv").string());
  csv.header({"lambda", "p_local", "mu_local", "mu_tx", "rho", "lambda_e", "mu3",
              "delta_closed_form", "delta_shs", "rel_gap"});
  csv.row({par.lambda, cfg.policy.p_local, cfg.policy.mu_local, cfg.policy.mu_tx, ev.rho,
           ev.env.exo_rate, ev.env.es_rate, cf, eng, std::abs(cf - eng) / cf});
  std::cout << "aoi: closed_form=" << cf << " shs=" << eng << '\n';
  return 0;
}

inline int run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& outdir) {
  des::SimConfig sim = cfg.sim;
  if (!sim.trace_path.empty()) sim.trace_path = (outdir / sim.trace_path).string();

  CsvWriter csv((outdir / "simulate.csv").string());
  csv.header({"device", "mean", "ci_half_width", "events", "analytic_delta"});
  if (cfg.has_system && cfg.system.N > 1) {
    // symmetric population from the shared policy and device parameters
    const int n = cfg.system.N;
    std::vector<mec::Policy> pols(n, cfg.policy);
    std::vector<double> lams(n, cfg.types.types.front().lambda);
    const auto est = des::simulate_population(pols, lams, cfg.system, sim);
    const double analytic = mec::finite_n_aoi(pols, lams, 0, cfg.system);
    for (int d = 0; d < n; ++d)
      csv.row({static_cast<double>(d), est[d].mean, est[d].ci_half_width,
               static_cast<double>(est[d].events), analytic});
    std::cout << "simulate: N=" << n << " device0 mean=" << est[0].mean << " +- "
              << est[0].ci_half_width << " (analytic " << analytic << ")\n";
  } else {
    const auto ev = env_view(cfg);
    const auto est = des::simulate_device(cfg.policy, cfg.types.types.front().lambda, ev.env, sim);
    const double analytic =
        shs::solve_aoi(mec::build_mec_shs(cfg.policy, cfg.types.types.front().lambda, ev.env)).delta;
    csv.row({0.0, est.mean, est.ci_half_width, static_cast<double>(est.events), analytic});
    std::cout << "simulate: mean=" << est.mean << " +- " << est.ci_half_width << " (analytic "
              << analytic << ")\n";
  }
  return 0;
}

inline void write_mfe_iteration_log(const std::filesystem::path& path,
                                    const std::vector<mfg::IterationRecord>& log) {
  CsvWriter csv(path.string());
  std::vector<std::string> header{"k", "rho", "residual"};
  const std::size_t ntypes = log.empty() ? 0 : log.front().policies.size();
  for (std::size_t t = 0; t < ntypes; ++t) {
    const std::string suffix = ntypes > 1 ? "_" + std::to_string(t) : "";
    header.push_back("p" + suffix);
    header.push_back("mu_local" + suffix);
    header.push_back("mu_tx" + suffix);
    header.push_back("cost" + suffix);
  }
  csv.header(header);
  for (const auto& rec : log) {
    std::vector<double> row{static_cast<double>(rec.k), rec.rho, rec.residual};
    for (std::size_t t = 0; t < rec.policies.size(); ++t) {
      row.push_back(rec.policies[t].p_local);
      row.push_back(rec.policies[t].mu_local);
      row.push_back(rec.policies[t].mu_tx);
      row.push_back(rec.costs[t]);
    }
    csv.row(row);
  }
}

inline int run_mfe(const ExperimentConfig& cfg, const std::filesystem::path& outdir) {
  std::vector<mfg::IterationRecord> log;
  const auto eq =
      mfg::solve_mfe(cfg.types, cfg.system.mu3_per_capita, cfg.opt, cfg.algo, &log, cfg.pairing);
  write_mfe_iteration_log(outdir / "mfe_iterations.csv", log);

  CsvWriter csv((outdir / "mfe.csv").string());
  csv.header({"type", "p_mfe", "mu_local_mfe", "mu_tx_mfe", "cost", "rho_mfe", "residual",
              "iterations", "converged"});
  for (std::size_t t = 0; t < eq.policies.size(); ++t)
    csv.row({static_cast<double>(t), eq.policies[t].p_local, eq.policies[t].mu_local,
             eq.policies[t].mu_tx, mfg::policy_cost_mf(eq.policies[t], cfg.types.types[t], eq.rho,
                                                       cfg.pairing),
             eq.rho, eq.residual, static_cast<double>(eq.iterations),
             eq.converged ? 1.0 : 0.0});
  std::cout << "mfe: rho=" << eq.rho << " iterations=" << eq.iterations
            << (eq.converged ? " (converged)" : " (NOT converged)") << '\n';
  return eq.converged ? 0 : 2;
}

inline int run_nash(const ExperimentConfig& cfg, const std::filesystem::path& outdir) {
  if (!cfg.nash.exploitability_N.empty()) {
    const auto eq =
        mfg::solve_mfe(cfg.types, cfg.system.mu3_per_capita, cfg.opt, cfg.algo, nullptr, cfg.pairing);
    if (!eq.converged) {
      std::cerr << "error: mean-field equilibrium did not converge\n";
      return 2;
    }
    CsvWriter csv((outdir / "exploitability.csv").string());
    csv.header({"N", "max_gain", "mean_gain"});
    for (int n : cfg.nash.exploitability_N) {
      const auto rep = game::exploitability_of_mfe(eq, cfg.types, n, cfg.system.mu3_per_capita,
                                                   cfg.opt, cfg.pairing);
      csv.row({static_cast<double>(n), rep.max_gain, rep.mean_gain});
      std::cout << "exploitability: N=" << n << " eps=" << rep.max_gain << '\n';
    }
    return 0;
  }

  // symmetric-start best-response dynamics
  const int n = cfg.system.N;
  game::Profile prof;
  prof.sys = cfg.system;
  prof.policies.assign(n, cfg.policy);
  const auto counts = game::proportional_type_counts(cfg.types.weights, n);
  std::vector<mec::DeviceParams> params;
  for (std::size_t t = 0; t < counts.size(); ++t)
    for (int c = 0; c < counts[t]; ++c) params.push_back(cfg.types.types[t]);
  for (const auto& par : params) prof.lambdas.push_back(par.lambda);

  const auto res =
      game::best_response_dynamics(prof, params, cfg.opt, cfg.nash.max_sweeps, cfg.pairing);
  CsvWriter csv((outdir / "nash.csv").string());
  csv.header({"device", "p_local", "mu_local", "mu_tx", "cost"});
  for (int d = 0; d < n; ++d)
    csv.row({static_cast<double>(d), res.profile.policies[d].p_local,
             res.profile.policies[d].mu_local, res.profile.policies[d].mu_tx,
             game::profile_cost(d, res.profile, params[d], cfg.pairing)});
  std::cout << "nash: sweeps=" << res.sweeps
            << (res.converged ? " (converged)" : " (NOT converged)") << '\n';
  return res.converged ? 0 : 2;
}

inline int run_sweep(const nlohmann::json& doc, const ExperimentConfig& cfg,
                     const std::filesystem::path& outdir) {
  const auto pointer = pointer_from_dotted(cfg.sweep.axis);
  const std::string axis = leaf_of(cfg.sweep.axis);

  CsvWriter csv((outdir / "sweep.csv").string());
  if (cfg.sweep.op == "best_policy")
    csv.header({axis, "p_opt", "mu_local_opt", "mu_tx_opt", "cost", "aoi"});
  else if (cfg.sweep.op == "mfe")
    csv.header({axis, "type", "p_mfe", "mu_local_mfe", "mu_tx_mfe", "rho_mfe", "tx_throughput",
                "iterations", "converged"});
  else
    csv.header({axis, "delta_closed_form", "delta_shs", "rel_gap"});

  bool all_converged = true;
  for (double value : cfg.sweep.values) {
    nlohmann::json point = doc;
    point[pointer] = value;
    ExperimentConfig pc = parse_experiment(point);
    if (pc.types.types.empty()) throw InvalidConfig("sweep needs device or types");
    if (cfg.sweep.op != "mfe" && !pc.rho && !pc.lambda_e)
      throw InvalidConfig("sweep op " + cfg.sweep.op + " needs env");
    if (cfg.sweep.op == "aoi" && !pc.has_policy) throw InvalidConfig("sweep op aoi needs policy");
    if (cfg.sweep.op == "mfe" && !pc.has_system)
      throw InvalidConfig("sweep op mfe needs system.mu3_per_capita");

    if (cfg.sweep.op == "best_policy") {
      const auto ev = env_view(pc);
      const auto& par = pc.types.types.front();
      const auto pol = mfg::best_policy(par, ev.rho, pc.opt, pc.pairing);
      csv.row({value, pol.p_local, pol.mu_local, pol.mu_tx,
               mfg::policy_cost_mf(pol, par, ev.rho, pc.pairing),
               mec::mf_aoi_closed_form(pol, par.lambda, ev.rho)});
    } else if (cfg.sweep.op == "mfe") {
      const auto eq = mfg::solve_mfe(pc.types, pc.system.mu3_per_capita, pc.opt, pc.algo, nullptr,
                                     pc.pairing);
      all_converged = all_converged && eq.converged;
      for (std::size_t t = 0; t < eq.policies.size(); ++t) {
        const double at = pc.types.types[t].lambda * (1.0 - eq.policies[t].p_local);
        const double throughput = at * eq.policies[t].mu_tx / (at + eq.policies[t].mu_tx);
        csv.row({value, static_cast<double>(t), eq.policies[t].p_local,
                 eq.policies[t].mu_local, eq.policies[t].mu_tx, eq.rho, throughput,
                 static_cast<double>(eq.iterations), eq.converged ? 1.0 : 0.0});
      }
    } else {
      const auto ev = env_view(pc);
      const auto& par = pc.types.types.front();
      const double cf = mec::mf_aoi_closed_form(pc.policy, par.lambda, ev.rho);
      const double eng = shs::solve_aoi(mec::build_mec_shs(pc.policy, par.lambda, ev.env)).delta;
      csv.row({value, cf, eng, std::abs(cf - eng) / cf});
    }
  }
  std::cout << "sweep: " << cfg.sweep.values.size() << " points over " << cfg.sweep.axis << '\n';
  return all_converged ? 0 : 2;
}

}  // namespace detail

/// Loads, overrides, validates, and runs one experiment. Returns the process
/// exit status; emits "error: ..." on stderr for failures.
inline int run(const std::string& config_path, const std::vector<std::string>& overrides,
               const std::string& output_override = "",
               std::optional<std::uint64_t> seed_override = std::nullopt,
               std::optional<RunMode> mode_override = std::nullopt) {
  try {
    std::ifstream in(config_path);
    if (!in) throw InvalidConfig("cannot open config: " + config_path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw InvalidConfig("config is not valid JSON: " + config_path);

    for (const auto& ov : overrides) apply_override(doc, ov);
    if (mode_override) {
      if (doc.contains("mode") && mode_from_string(doc["mode"].get<std::string>()) != *mode_override)
        throw InvalidConfig("config mode disagrees with the requested mode");
      doc["mode"] = mode_to_string(*mode_override);
    }
    if (!output_override.empty()) doc["output"] = output_override;
    if (seed_override) doc["sim"]["master_seed"] = *seed_override;

    const ExperimentConfig cfg = parse_experiment(doc);
    const std::filesystem::path outdir(cfg.output_dir);
    std::filesystem::create_directories(outdir);
    {
      std::ofstream resolved(outdir / "resolved_config.json");
      resolved << doc.dump(2) << '\n';
    }

    switch (cfg.mode) {
      case RunMode::aoi: return detail::run_aoi(cfg, outdir);
      case RunMode::simulate: return detail::run_simulate(cfg, outdir);
      case RunMode::mfe: return detail::run_mfe(cfg, outdir);
      case RunMode::nash: return detail::run_nash(cfg, outdir);
      case RunMode::sweep: return detail::run_sweep(doc, cfg, outdir);
    }
    return 0;
  } catch (const InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidParams& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SingularSystem& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace aoimec::cli
