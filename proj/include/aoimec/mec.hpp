#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aoimec/errors.hpp"
#include "aoimec/shs.hpp"

// The edge-offloading network, seen from one device: tasks arrive Poisson,
// a Bernoulli coin routes each one either to the local processor L or to the
// transmitter T; T feeds the shared edge server (ES), which also receives
// exogenous ("class 2") traffic from the rest of the population. Every server
// is single-buffer last-come-first-serve with preemption. Age components are
// indexed 0 = device, 1 = T, 2 = L, 3 = ES.

namespace aoimec::mec {

/// Lower bound applied to controllable service rates.
constexpr double kRateMin = 1e-3;

/// ES rate used to emulate the infinite-population limit in the SHS engine.
constexpr double kMeanFieldEsRate = 1e6;

/// A device's decision triple.
struct Policy {
  double p_local = 0.5;  // probability a task is processed locally
  double mu_local = 1.0; // local processor service rate (capped by f_max)
  double mu_tx = 1.0;    // transmitter service rate (capped by P_max)
};

struct DeviceParams {
  double lambda = 1.0; // task arrival rate
  double eta = 1.0;    // effective-capacitance constant of the local processor
  double V = 1.0;      // freshness weight in the cost
  double P_max = 1.0;  // transmitter rate cap
  double f_max = 1.0;  // local processor rate cap
  int type_id = 0;
};

struct SystemParams {
  int N = 1;
  double mu3_per_capita = 1.0;  // the ES serves at N * mu3_per_capita
};

/// ES-side environment as one device sees it.
struct EsEnvironment {
  double exo_rate = 0.0;  // exogenous class-2 arrival rate at the ES
  double es_rate = 1.0;   // total ES service rate
  double rho = 0.0;       // ES load; the only meaningful field in mean-field use

  static EsEnvironment finite(double exo, double es) {
    return {exo, es, es > 0.0 ? exo / es : 0.0};
  }
  /// Emulates load rho with an ES so fast the model sits at the limit.
  static EsEnvironment mean_field(double rho) {
    return {rho * kMeanFieldEsRate, kMeanFieldEsRate, rho};
  }
};

struct BusyFractions {
  double local = 0.0;
  double tx = 0.0;
};

/// Long-run busy fractions of the two single-buffer preemptive servers.
inline BusyFractions busy_fractions(const Policy& pol, double lambda) {
  const double al = lambda * pol.p_local;
  const double at = lambda * (1.0 - pol.p_local);
  return {al / (al + pol.mu_local), at / (at + pol.mu_tx)};
}

enum class CostPairing { physical, literal };

inline CostPairing cost_pairing_from_string(const std::string& s) {
  if (s == "physical") return CostPairing::physical;
  if (s == "literal") return CostPairing::literal;
  throw InvalidConfig("cost_pairing must be \"physical\" or \"literal\"");
}

/// Scalarized device cost: transmit energy + local processing energy + V * AoI.
/// The physical pairing charges each server its own busy time; the literal
/// variant keeps the swapped pairing for comparison.
inline double device_cost(const Policy& pol, const DeviceParams& par, double delta,
                          CostPairing pairing = CostPairing::physical) {
  const BusyFractions bf = busy_fractions(pol, par.lambda);
  const double local_power = par.eta * pol.mu_local * pol.mu_local * pol.mu_local;
  const double energy = pairing == CostPairing::physical
                            ? bf.tx * pol.mu_tx + bf.local * local_power
                            : bf.local * pol.mu_tx + bf.tx * local_power;
  return energy + par.V * delta;
}

namespace detail {

inline void check_build_params(const Policy& pol, double lambda, const EsEnvironment& env) {
  if (!(lambda > 0.0)) throw InvalidParams("arrival rate must be positive");
  if (!(pol.mu_local > 0.0) || !(pol.mu_tx > 0.0))
    throw InvalidParams("service rates must be positive");
  if (pol.p_local < 0.0 || pol.p_local > 1.0)
    throw InvalidParams("p_local must lie in [0, 1]");
  if (env.exo_rate < 0.0) throw InvalidParams("exogenous rate must be nonnegative");
  if (!(env.es_rate > 0.0)) throw InvalidParams("ES rate must be positive");
}

}  // namespace detail

/// Builds the 8-state SHS of the single-device view. States:
///   0..2: T busy; ES holds class 1   (orderings: T,L,ES / T,ES,L / L,T,ES by freshness)
///   3..4: T idle; ES holds class 1   (L,ES / ES,L)
///   5:    T idle; ES holds class 2
///   6..7: T busy; ES holds class 2   (T,L / L,T by freshness)
/// The local processor and the ES are treated as always busy (a completed
/// packet is replaced by a same-age phantom); the transmitter cannot be,
/// because it feeds the merge point with the exogenous stream, so its age
/// component only grows in states where it actually holds a packet.
inline shs::ShsModel build_mec_shs(const Policy& pol, double lambda, const EsEnvironment& env) {
  detail::check_build_params(pol, lambda, env);

  const double lp = lambda * pol.p_local;        // arrivals routed to L
  const double lq = lambda * (1.0 - pol.p_local); // arrivals routed to T
  const double le = env.exo_rate;
  const double mt = pol.mu_tx;
  const double ml = pol.mu_local;
  const double m3 = env.es_rate;

  shs::ShsModel m;
  m.num_states = 8;
  m.num_ages = 4;
  m.growth = {{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 0, 1, 1},
              {1, 0, 1, 1}, {1, 0, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}};

  constexpr int Z = shs::kResetZero;
  auto add = [&m](int s, int t, double rate, std::array<int, 4> reset) {
    if (rate < shs::kRateEpsilon) return;  // boundary policies drop edges
    m.transitions.push_back({s, t, rate, {reset[0], reset[1], reset[2], reset[3]}});
  };

  // s1: T freshest, L second, ES oldest
  add(0, 2, lp, {0, 1, Z, 3});
  add(0, 0, lq, {0, Z, 2, 3});
  add(0, 6, le, {0, 1, 2, 0});
  add(0, 4, mt, {0, Z, 2, 1});
  add(0, 0, ml, {2, 1, 2, 2});
  add(0, 0, m3, {3, 1, 2, 3});
  // s2: T freshest, ES second, L oldest
  add(1, 2, lp, {0, 1, Z, 3});
  add(1, 1, lq, {0, Z, 2, 3});
  add(1, 6, le, {0, 1, 2, 0});
  add(1, 4, mt, {0, Z, 2, 1});
  add(1, 1, ml, {2, 1, 2, 3});
  add(1, 1, m3, {3, 1, 3, 3});
  // s3: L freshest, T second, ES oldest
  add(2, 2, lp, {0, 1, Z, 3});
  add(2, 0, lq, {0, Z, 2, 3});
  add(2, 7, le, {0, 1, 2, 0});
  add(2, 3, mt, {0, Z, 2, 1});
  add(2, 2, ml, {2, 2, 2, 2});
  add(2, 2, m3, {3, 1, 2, 3});
  // s4: T idle, L freshest, ES second
  add(3, 3, lp, {0, Z, Z, 3});
  add(3, 0, lq, {0, Z, 2, 3});
  add(3, 5, le, {0, Z, 2, 0});
  add(3, 3, ml, {2, Z, 2, 2});
  add(3, 3, m3, {3, Z, 2, 3});
  // s5: T idle, ES freshest, L second
  add(4, 3, lp, {0, Z, Z, 3});
  add(4, 1, lq, {0, Z, 2, 3});
  add(4, 5, le, {0, Z, 2, 0});
  add(4, 4, ml, {2, Z, 2, 3});
  add(4, 4, m3, {3, Z, 3, 3});
  // s6: T idle, L freshest, ES class 2
  add(5, 5, lp, {0, Z, Z, 3});
  add(5, 6, lq, {0, Z, 2, 3});
  add(5, 5, le, {0, Z, 2, 0});
  add(5, 5, ml, {2, Z, 2, 2});
  add(5, 5, m3, {3, Z, 2, 3});
  // s7: T freshest, L second, ES class 2
  add(6, 7, lp, {0, 1, Z, 3});
  add(6, 6, lq, {0, Z, 2, 3});
  add(6, 6, le, {0, 1, 2, 0});
  add(6, 4, mt, {0, Z, 2, 1});
  add(6, 6, ml, {2, 1, 2, 2});
  add(6, 6, m3, {3, 1, 2, 3});
  // s8: L freshest, T second, ES class 2
  add(7, 7, lp, {0, 1, Z, 3});
  add(7, 6, lq, {0, Z, 2, 3});
  add(7, 7, le, {0, 1, 2, 0});
  add(7, 3, mt, {0, Z, 2, 1});
  add(7, 7, ml, {2, 2, 2, 2});
  add(7, 7, m3, {3, 1, 2, 3});

  return m;
}

/// Combined rate of the other devices' transmitter outputs as seen at the ES:
/// each contributes its long-run transmitter throughput.
inline double exogenous_rate(std::span<const Policy> policies, std::span<const double> lambdas,
                             std::size_t i) {
  double sum = 0.0;
  for (std::size_t j = 0; j < policies.size(); ++j) {
    if (j == i) continue;
    const double at = lambdas[j] * (1.0 - policies[j].p_local);
    sum += at * policies[j].mu_tx / (at + policies[j].mu_tx);
  }
  return sum;
}

/// Analytic average AoI of device i in an N-device population: the other
/// devices' traffic enters as a Poisson stream at the combined transmitter
/// throughput, and the ES serves at N * mu3_per_capita.
inline double finite_n_aoi(std::span<const Policy> policies, std::span<const double> lambdas,
                           std::size_t i, const SystemParams& sys) {
  const double le = exogenous_rate(policies, lambdas, i);
  const auto env = EsEnvironment::finite(le, static_cast<double>(sys.N) * sys.mu3_per_capita);
  const auto model = build_mec_shs(policies[i], lambdas[i], env);
  return shs::solve_aoi(model).delta;
}

/// Closed-form average AoI of a generic device against ES load rho
/// (the infinite-population limit of the finite-N solve).
inline double mf_aoi_closed_form(const Policy& pol, double lambda, double rho) {
  if (!(lambda > 0.0)) throw InvalidParams("arrival rate must be positive");
  if (!(pol.mu_local > 0.0) || !(pol.mu_tx > 0.0))
    throw InvalidParams("service rates must be positive");
  if (rho < 0.0) throw InvalidParams("rho must be nonnegative");

  const double p = pol.p_local;
  const double q = 1.0 - p;
  const double mt = pol.mu_tx;
  const double ml = pol.mu_local;
  const double r1 = 1.0 + rho;

  const double m1 = r1 * p * q;
  const double m2 = ml * r1 + mt * (1.0 + (2.0 - p) * p * rho);
  const double m3 = r1 * (mt + ml) * (mt + ml) - mt * mt * q * rho;
  const double num =
      lambda * lambda * lambda * m1 + lambda * lambda * m2 + lambda * m3 + mt * ml * (mt + ml) * r1;
  const double den =
      (mt + lambda * p * r1 + mt * p * rho) * (ml * (mt + ml) * r1 + lambda * q * (mt + ml * r1));
  return r1 / lambda * num / den;
}

}  // namespace aoimec::mec
