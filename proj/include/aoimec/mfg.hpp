#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "aoimec/errors.hpp"
#include "aoimec/mec.hpp"
#include "aoimec/optimize.hpp"

// Mean-field equilibrium of the offloading game over a finite type set:
// each type best-responds to the ES load rho, the population of best
// responses regenerates rho, and a damped fixed-point iteration couples the
// two maps until the load stops moving.

namespace aoimec::mfg {

struct TypeSet {
  std::vector<mec::DeviceParams> types;
  std::vector<double> weights;  // probability of each type
};

inline void validate_type_set(const TypeSet& ts) {
  if (ts.types.empty() || ts.types.size() != ts.weights.size())
    throw InvalidParams("type set needs matching, nonempty types and weights");
  double sum = 0.0;
  for (double w : ts.weights) {
    if (w < 0.0) throw InvalidParams("type weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidParams("type weights must sum to 1");
}

struct AlgoConfig {
  double gamma = 0.5;     // damping step in (0, 1]
  double epsilon = 1e-6;  // stopping tolerance on the load update
  int max_iters = 500;
};

struct MfEquilibrium {
  std::vector<mec::Policy> policies;  // one per type
  double rho = 0.0;                   // equilibrium ES load
  double residual = 0.0;              // final |rho_k - rho_{k-1}|
  int iterations = 0;
  bool converged = false;
};

struct IterationRecord {
  int k = 0;
  double rho = 0.0;          // damped iterate after this step
  double consistency = 0.0;  // undamped map value T(rho_{k-1})
  double residual = 0.0;     // |rho_k - rho_{k-1}| = gamma * |T - rho_{k-1}|
  std::vector<mec::Policy> policies;
  std::vector<double> costs;
};

/// Generic-device cost at load rho (closed-form AoI route).
inline double policy_cost_mf(const mec::Policy& pol, const mec::DeviceParams& par, double rho,
                             mec::CostPairing pairing = mec::CostPairing::physical) {
  return mec::device_cost(pol, par, mec::mf_aoi_closed_form(pol, par.lambda, rho), pairing);
}

/// Best response of one type against ES load rho over the policy box
/// [0,1] x [rate_min, f_max] x [rate_min, P_max].
inline mec::Policy best_policy(const mec::DeviceParams& par, double rho,
                               const opt::OptConfig& cfg,
                               mec::CostPairing pairing = mec::CostPairing::physical) {
  if (rho < 0.0) throw InvalidParams("rho must be nonnegative");
  const opt::Box3 box{{0.0, mec::kRateMin, mec::kRateMin}, {1.0, par.f_max, par.P_max}};
  const auto r = opt::minimize_box(
      [&](const opt::Point3& x) {
        return policy_cost_mf({x[0], x[1], x[2]}, par, rho, pairing);
      },
      box, cfg);
  return {r.x[0], r.x[1], r.x[2]};
}

/// Load regenerated by a policy profile: expected transmitter throughput per
/// capita over the type distribution, divided by the per-capita ES rate.
inline double consistency_map(const std::vector<mec::Policy>& policies, const TypeSet& ts,
                              double mu3) {
  if (policies.size() != ts.types.size())
    throw InvalidParams("one policy per type required");
  if (!(mu3 > 0.0)) throw InvalidParams("mu3 must be positive");
  double load = 0.0;
  for (std::size_t t = 0; t < policies.size(); ++t) {
    const double at = ts.types[t].lambda * (1.0 - policies[t].p_local);
    load += ts.weights[t] * at * policies[t].mu_tx / (at + policies[t].mu_tx);
  }
  return load / mu3;
}

/// Damped fixed-point iteration: rho <- rho + gamma * (T(rho) - rho), where
/// T maps a load to the load regenerated by the per-type responses produced
/// by `respond(params, rho)`. Non-monotone residuals over a 50-iteration
/// window trigger one halving of gamma; hitting max_iters leaves
/// converged = false.
template <typename Responder>
MfEquilibrium solve_mfe_with(Responder&& respond, const TypeSet& ts, double mu3,
                             const AlgoConfig& algo,
                             std::vector<IterationRecord>* log = nullptr,
                             mec::CostPairing pairing = mec::CostPairing::physical) {
  validate_type_set(ts);
  if (!(algo.gamma > 0.0) || algo.gamma > 1.0) throw InvalidParams("gamma must lie in (0, 1]");
  if (!(algo.epsilon > 0.0)) throw InvalidParams("epsilon must be positive");

  double gamma = algo.gamma;
  bool gamma_halved = false;
  std::vector<double> residual_window;

  MfEquilibrium eq;
  double rho = 0.0;
  for (int k = 1; k <= algo.max_iters; ++k) {
    std::vector<mec::Policy> policies;
    policies.reserve(ts.types.size());
    for (const auto& par : ts.types) policies.push_back(respond(par, rho));

    const double t_value = consistency_map(policies, ts, mu3);
    const double step = gamma * (t_value - rho);
    const double rho_next = rho + step;
    const double residual = std::abs(step);

    if (log) {
      IterationRecord rec{k, rho_next, t_value, residual, policies, {}};
      rec.costs.reserve(policies.size());
      for (std::size_t t = 0; t < policies.size(); ++t)
        rec.costs.push_back(policy_cost_mf(policies[t], ts.types[t], rho, pairing));
      log->push_back(std::move(rec));
    }

    eq.policies = std::move(policies);
    eq.rho = rho_next;
    eq.residual = residual;
    eq.iterations = k;
    if (residual < algo.epsilon) {
      eq.converged = true;
      return eq;
    }

    residual_window.push_back(residual);
    if (!gamma_halved && residual_window.size() >= 50) {
      const std::size_t head = residual_window.size() - 50;
      if (residual_window.back() >= residual_window[head]) {
        gamma *= 0.5;  // oscillation: no net progress over the window
        gamma_halved = true;
        residual_window.clear();
      }
    }
    rho = rho_next;
  }
  return eq;  // converged stays false
}

inline MfEquilibrium solve_mfe(const TypeSet& ts, double mu3, const opt::OptConfig& opt_cfg,
                               const AlgoConfig& algo,
                               std::vector<IterationRecord>* log = nullptr,
                               mec::CostPairing pairing = mec::CostPairing::physical) {
  return solve_mfe_with(
      [&](const mec::DeviceParams& par, double rho) { return best_policy(par, rho, opt_cfg, pairing); },
      ts, mu3, algo, log, pairing);
}

}  // namespace aoimec::mfg
