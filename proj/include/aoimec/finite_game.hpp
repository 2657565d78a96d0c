#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "aoimec/errors.hpp"
#include "aoimec/mec.hpp"
#include "aoimec/mfg.hpp"
#include "aoimec/optimize.hpp"

// Finite-N game analysis: unilateral best responses against a fixed profile,
// Gauss-Seidel best-response dynamics, and the exploitability of the
// mean-field equilibrium policy when only N devices share the ES.

namespace aoimec::game {

struct Profile {
  std::vector<mec::Policy> policies;
  std::vector<double> lambdas;
  mec::SystemParams sys;
};

inline void validate_profile(const Profile& prof) {
  if (prof.policies.empty() || prof.policies.size() != prof.lambdas.size())
    throw InvalidParams("profile needs matching, nonempty policy and lambda lists");
  if (prof.sys.N != static_cast<int>(prof.policies.size()))
    throw InvalidParams("profile size does not match N");
  if (!(prof.sys.mu3_per_capita > 0.0)) throw InvalidParams("mu3 must be positive");
}

/// Device i's cost under the profile, with the analytic finite-N AoI.
inline double profile_cost(std::size_t i, const Profile& prof, const mec::DeviceParams& par,
                           mec::CostPairing pairing = mec::CostPairing::physical) {
  const double delta = mec::finite_n_aoi(prof.policies, prof.lambdas, i, prof.sys);
  return mec::device_cost(prof.policies[i], par, delta, pairing);
}

/// Best response of device i holding everyone else fixed. The cross traffic
/// seen at the ES does not depend on i's own policy, so it is computed once.
inline mec::Policy best_response(std::size_t i, const Profile& prof, const mec::DeviceParams& par,
                                 const opt::OptConfig& cfg,
                                 mec::CostPairing pairing = mec::CostPairing::physical) {
  validate_profile(prof);
  const double le = mec::exogenous_rate(prof.policies, prof.lambdas, i);
  const auto env =
      mec::EsEnvironment::finite(le, static_cast<double>(prof.sys.N) * prof.sys.mu3_per_capita);
  const double lambda = prof.lambdas[i];
  const opt::Box3 box{{0.0, mec::kRateMin, mec::kRateMin}, {1.0, par.f_max, par.P_max}};
  const auto r = opt::minimize_box(
      [&](const opt::Point3& x) {
        const mec::Policy pol{x[0], x[1], x[2]};
        const double delta = shs::solve_aoi(mec::build_mec_shs(pol, lambda, env)).delta;
        return mec::device_cost(pol, par, delta, pairing);
      },
      box, cfg);
  return {r.x[0], r.x[1], r.x[2]};
}

struct BrDynamicsResult {
  Profile profile;
  bool converged = false;
  int sweeps = 0;
  std::vector<double> max_change_per_sweep;
};

/// Sequential (Gauss-Seidel) best-response sweeps in fixed device order.
/// Stops when the largest policy-coordinate change over a full sweep falls
/// below cfg.refine_tolerance.
inline BrDynamicsResult best_response_dynamics(Profile prof,
                                               const std::vector<mec::DeviceParams>& params,
                                               const opt::OptConfig& cfg, int max_sweeps,
                                               mec::CostPairing pairing = mec::CostPairing::physical) {
  validate_profile(prof);
  if (params.size() != prof.policies.size())
    throw InvalidParams("one DeviceParams per device required");

  BrDynamicsResult res;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t i = 0; i < prof.policies.size(); ++i) {
      const mec::Policy before = prof.policies[i];
      const mec::Policy after = best_response(i, prof, params[i], cfg, pairing);
      max_change = std::max({max_change, std::abs(after.p_local - before.p_local),
                             std::abs(after.mu_local - before.mu_local),
                             std::abs(after.mu_tx - before.mu_tx)});
      prof.policies[i] = after;
    }
    res.max_change_per_sweep.push_back(max_change);
    res.sweeps = sweep;
    if (max_change < cfg.refine_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.profile = std::move(prof);
  return res;
}

struct ExploitabilityReport {
  std::vector<double> per_device_gain;  // cost reduction from unilateral deviation
  double max_gain = 0.0;                // epsilon(N)
  double mean_gain = 0.0;
};

/// Deterministic largest-remainder allocation of N devices over the weights.
inline std::vector<int> proportional_type_counts(const std::vector<double>& weights, int N) {
  const std::size_t k = weights.size();
  std::vector<int> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders(k);
  int assigned = 0;
  for (std::size_t t = 0; t < k; ++t) {
    const double exact = weights[t] * N;
    counts[t] = static_cast<int>(std::floor(exact));
    assigned += counts[t];
    remainders[t] = {exact - std::floor(exact), t};
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < N - assigned; ++r) counts[remainders[r].second] += 1;
  return counts;
}

/// How far the MFE policy is from a Nash equilibrium of the N-device game:
/// epsilon(N) is the largest unilateral cost reduction any device can find.
/// Devices of the same type face identical subproblems, so the best response
/// is computed once per type.
inline ExploitabilityReport exploitability_of_mfe(const mfg::MfEquilibrium& mfe,
                                                  const mfg::TypeSet& ts, int N, double mu3,
                                                  const opt::OptConfig& cfg,
                                                  mec::CostPairing pairing = mec::CostPairing::physical) {
  mfg::validate_type_set(ts);
  if (mfe.policies.size() != ts.types.size())
    throw InvalidParams("equilibrium must carry one policy per type");
  if (N < 1) throw InvalidParams("N must be >= 1");

  const std::vector<int> counts = proportional_type_counts(ts.weights, N);
  Profile prof;
  prof.sys = {N, mu3};
  std::vector<int> device_type;
  for (std::size_t t = 0; t < counts.size(); ++t)
    for (int c = 0; c < counts[t]; ++c) {
      prof.policies.push_back(mfe.policies[t]);
      prof.lambdas.push_back(ts.types[t].lambda);
      device_type.push_back(static_cast<int>(t));
    }

  ExploitabilityReport rep;
  rep.per_device_gain.resize(prof.policies.size());
  std::map<int, double> gain_by_type;
  for (std::size_t i = 0; i < prof.policies.size(); ++i) {
    const int t = device_type[i];
    auto it = gain_by_type.find(t);
    if (it == gain_by_type.end()) {
      const double incumbent = profile_cost(i, prof, ts.types[t], pairing);
      const mec::Policy br = best_response(i, prof, ts.types[t], cfg, pairing);
      Profile deviated = prof;
      deviated.policies[i] = br;
      const double improved = profile_cost(i, deviated, ts.types[t], pairing);
      it = gain_by_type.emplace(t, incumbent - improved).first;
    }
    rep.per_device_gain[i] = it->second;
  }
  double sum = 0.0;
  rep.max_gain = rep.per_device_gain.front();
  for (double g : rep.per_device_gain) {
    rep.max_gain = std::max(rep.max_gain, g);
    sum += g;
  }
  rep.mean_gain = sum / static_cast<double>(rep.per_device_gain.size());
  return rep;
}

}  // namespace aoimec::game
