#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aoimec/errors.hpp"

// Piecewise-linear stochastic-hybrid-system AoI engine.
//
// A model is a finite-state Markov chain whose transitions carry linear age
// reset maps, plus a per-state binary growth vector. Age component 0 is the
// monitor (the device); the solver returns the stationary distribution, the
// stationary state/age correlation vectors, and the average AoI as the sum of
// the monitor column of the correlation vectors.

namespace aoimec::shs {

/// Reset-map entry meaning "new age component is zero".
constexpr int kResetZero = -1;

/// Transitions with rate below this are treated as absent (boundary policies).
constexpr double kRateEpsilon = 1e-12;

/// Condition-number guard: reciprocal condition below this is singular.
constexpr double kRcondFloor = 1e-12;

struct Transition {
  int source = 0;
  int target = 0;
  double rate = 0.0;
  /// reset[k] = j means new age k copies old age j; kResetZero means reset to 0.
  std::vector<int> reset;
};

struct ShsModel {
  int num_states = 0;
  int num_ages = 0;  // n+1 components, index 0 = monitor
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> growth;  // num_states x num_ages, entries 0/1
};

struct ValidationReport {
  std::vector<std::string> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

struct StationaryDistribution {
  std::vector<double> probs;
};

struct CorrelationVectors {
  std::vector<std::vector<double>> v;  // num_states x num_ages
};

struct AoiSolution {
  StationaryDistribution pi;
  CorrelationVectors v;
  double delta = 0.0;
};

namespace detail {

/// Edges with rate >= kRateEpsilon, as indices into model.transitions.
inline std::vector<int> active_edges(const ShsModel& m) {
  std::vector<int> idx;
  idx.reserve(m.transitions.size());
  for (int i = 0; i < static_cast<int>(m.transitions.size()); ++i)
    if (m.transitions[i].rate >= kRateEpsilon) idx.push_back(i);
  return idx;
}

/// Kosaraju strongly-connected components over the active-edge graph.
/// Returns a component id per state; ids are otherwise arbitrary.
inline std::vector<int> scc_ids(const ShsModel& m, const std::vector<int>& edges) {
  const int n = m.num_states;
  std::vector<std::vector<int>> fwd(n), rev(n);
  for (int e : edges) {
    fwd[m.transitions[e].source].push_back(m.transitions[e].target);
    rev[m.transitions[e].target].push_back(m.transitions[e].source);
  }
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  for (int s0 = 0; s0 < n; ++s0) {
    if (seen[s0]) continue;
    // iterative DFS with explicit finish-order emission
    std::vector<std::pair<int, std::size_t>> stack{{s0, 0}};
    seen[s0] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < fwd[u].size()) {
        int w = fwd[u][next++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  int cid = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<int> stack{*it};
    comp[*it] = cid;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : rev[u])
        if (comp[w] < 0) {
          comp[w] = cid;
          stack.push_back(w);
        }
    }
    ++cid;
  }
  return comp;
}

/// States of the unique closed (recurrent) class, ascending. Throws
/// SingularSystem if there is none or more than one.
inline std::vector<int> recurrent_class(const ShsModel& m, const std::vector<int>& edges) {
  const std::vector<int> comp = scc_ids(m, edges);
  const int ncomp = 1 + *std::max_element(comp.begin(), comp.end());
  std::vector<char> open(ncomp, 0);  // has an edge leaving its component
  for (int e : edges) {
    const auto& t = m.transitions[e];
    if (comp[t.source] != comp[t.target]) open[comp[t.source]] = 1;
  }
  int closed = -1;
  for (int c = 0; c < ncomp; ++c) {
    if (open[c]) continue;
    if (closed >= 0) throw SingularSystem("multiple recurrent classes: stationary distribution not unique");
    closed = c;
  }
  if (closed < 0) throw SingularSystem("no recurrent class found");
  std::vector<int> states;
  for (int s = 0; s < m.num_states; ++s)
    if (comp[s] == closed) states.push_back(s);
  return states;
}

/// LU solve with a reciprocal-condition guard and one iterative refinement pass.
inline Eigen::VectorXd guarded_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                     const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!std::isfinite(rc) || rc < kRcondFloor)
    throw SingularSystem(std::string(what) + ": system is numerically singular");
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - A * x);
  if (!x.allFinite()) throw SingularSystem(std::string(what) + ": non-finite solution");
  return x;
}

}  // namespace detail

/// Structural checks: positive rates, in-range indices, well-formed reset maps
/// and growth vectors, and irreducibility of the positive-rate graph. An empty
/// report certifies a unique stationary distribution exists.
inline ValidationReport validate_model(const ShsModel& m) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

  if (m.num_states < 1) fail("num_states must be >= 1");
  if (m.num_ages < 1) fail("num_ages must be >= 1");
  if (static_cast<int>(m.growth.size()) != m.num_states) {
    fail("growth must have one vector per state");
  } else {
    for (int s = 0; s < m.num_states; ++s) {
      if (static_cast<int>(m.growth[s].size()) != m.num_ages) {
        fail("growth vector of state " + std::to_string(s) + " has wrong length");
        continue;
      }
      for (int u : m.growth[s])
        if (u != 0 && u != 1) fail("growth entries must be 0 or 1 (state " + std::to_string(s) + ")");
    }
  }
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    const auto& t = m.transitions[i];
    const std::string tag = "transition " + std::to_string(i);
    if (t.source < 0 || t.source >= m.num_states) fail(tag + ": dangling source index");
    if (t.target < 0 || t.target >= m.num_states) fail(tag + ": dangling target index");
    if (!(t.rate > 0.0) || !std::isfinite(t.rate)) fail(tag + ": nonpositive rate");
    if (static_cast<int>(t.reset.size()) != m.num_ages) {
      fail(tag + ": reset map has wrong length");
    } else {
      for (int r : t.reset)
        if (r != kResetZero && (r < 0 || r >= m.num_ages))
          fail(tag + ": reset map references invalid age index");
    }
  }
  if (!rep.ok()) return rep;

  const auto edges = detail::active_edges(m);
  const auto comp = detail::scc_ids(m, edges);
  for (int s = 0; s < m.num_states; ++s) {
    if (comp[s] != comp[0]) {
      fail("reducible chain: positive-rate graph is not strongly connected");
      break;
    }
  }
  return rep;
}

/// Stationary distribution of the embedded Markov chain via the conservation
/// law (outflow = inflow per state, probabilities summing to one). Transitions
/// below kRateEpsilon are dropped first; if the surviving graph has a unique
/// closed class the solve is restricted to it and all other states get zero.
inline StationaryDistribution solve_stationary(const ShsModel& m) {
  const auto edges = detail::active_edges(m);
  const auto states = detail::recurrent_class(m, edges);
  const int r = static_cast<int>(states.size());
  std::vector<int> pos(m.num_states, -1);
  for (int i = 0; i < r; ++i) pos[states[i]] = i;

  StationaryDistribution out;
  out.probs.assign(m.num_states, 0.0);
  if (r == 1) {
    out.probs[states[0]] = 1.0;
    return out;
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r, r);
  for (int e : edges) {
    const auto& t = m.transitions[e];
    if (pos[t.source] < 0) continue;  // edges out of transient states are irrelevant
    A(pos[t.source], pos[t.source]) += t.rate;  // outflow
    A(pos[t.target], pos[t.source]) -= t.rate;  // inflow
  }
  A.row(r - 1).setOnes();  // replace one redundant balance row by normalization
  Eigen::VectorXd b = Eigen::VectorXd::Zero(r);
  b(r - 1) = 1.0;

  Eigen::VectorXd pi = detail::guarded_solve(A, b, "solve_stationary");
  double total = 0.0;
  for (int i = 0; i < r; ++i) {
    double p = pi(i);
    if (p < 0.0) p = 0.0;  // roundoff guard; genuine negativity is caught by rcond
    out.probs[states[i]] = p;
    total += p;
  }
  for (int s : states) out.probs[s] /= total;
  return out;
}

/// Stationary correlation vectors: for every recurrent state s and age k,
///   v[s][k] * sum(out rates of s) = growth[s][k] * pi[s]
///                                 + sum over incoming edges of rate * (v[src] o reset)
/// where (v o reset)[k] copies v[src][reset[k]] or 0. Transient states get 0.
inline CorrelationVectors solve_correlations(const ShsModel& m, const StationaryDistribution& pi) {
  const auto edges = detail::active_edges(m);
  const auto states = detail::recurrent_class(m, edges);
  const int r = static_cast<int>(states.size());
  const int na = m.num_ages;
  std::vector<int> pos(m.num_states, -1);
  for (int i = 0; i < r; ++i) pos[states[i]] = i;
  const auto idx = [na](int si, int k) { return si * na + k; };

  std::vector<double> out_rate(m.num_states, 0.0);
  for (int e : edges) out_rate[m.transitions[e].source] += m.transitions[e].rate;

  const int dim = r * na;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < r; ++i) {
    const int s = states[i];
    for (int k = 0; k < na; ++k) {
      A(idx(i, k), idx(i, k)) += out_rate[s];
      b(idx(i, k)) = static_cast<double>(m.growth[s][k]) * pi.probs[s];
    }
  }
  for (int e : edges) {
    const auto& t = m.transitions[e];
    const int si = pos[t.source];
    const int ti = pos[t.target];
    if (si < 0 || ti < 0) continue;
    for (int k = 0; k < na; ++k) {
      const int j = t.reset[k];
      if (j != kResetZero) A(idx(ti, k), idx(si, j)) -= t.rate;
    }
  }

  Eigen::VectorXd x = detail::guarded_solve(A, b, "solve_correlations");
  CorrelationVectors cv;
  cv.v.assign(m.num_states, std::vector<double>(na, 0.0));
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < na; ++k) {
      double val = x(idx(i, k));
      if (val < 0.0 && val > -1e-12) val = 0.0;
      cv.v[states[i]][k] = val;
    }
  return cv;
}

/// Average AoI: the monitor column of the correlation vectors, summed.
inline double average_aoi(const CorrelationVectors& cv) {
  double d = 0.0;
  for (const auto& row : cv.v) d += row[0];
  return d;
}

inline AoiSolution solve_aoi(const ShsModel& m) {
  AoiSolution sol;
  sol.pi = solve_stationary(m);
  sol.v = solve_correlations(m, sol.pi);
  sol.delta = average_aoi(sol.v);
  return sol;
}

/// Max absolute stationary-balance residual over all states.
inline double balance_residual(const ShsModel& m, const StationaryDistribution& pi) {
  const auto edges = detail::active_edges(m);
  std::vector<double> res(m.num_states, 0.0);
  for (int e : edges) {
    const auto& t = m.transitions[e];
    res[t.source] += t.rate * pi.probs[t.source];
    res[t.target] -= t.rate * pi.probs[t.source];
  }
  double worst = 0.0;
  for (double x : res) worst = std::max(worst, std::abs(x));
  return worst;
}

/// Max absolute residual of the correlation equations over all states and ages.
inline double correlation_residual(const ShsModel& m, const StationaryDistribution& pi,
                                   const CorrelationVectors& cv) {
  const auto edges = detail::active_edges(m);
  const int na = m.num_ages;
  std::vector<std::vector<double>> res(m.num_states, std::vector<double>(na, 0.0));
  std::vector<double> out_rate(m.num_states, 0.0);
  for (int e : edges) out_rate[m.transitions[e].source] += m.transitions[e].rate;
  for (int s = 0; s < m.num_states; ++s)
    for (int k = 0; k < na; ++k)
      res[s][k] = cv.v[s][k] * out_rate[s] - static_cast<double>(m.growth[s][k]) * pi.probs[s];
  for (int e : edges) {
    const auto& t = m.transitions[e];
    for (int k = 0; k < na; ++k) {
      const int j = t.reset[k];
      if (j != kResetZero) res[t.target][k] -= t.rate * cv.v[t.source][j];
    }
  }
  double worst = 0.0;
  for (const auto& row : res)
    for (double x : row) worst = std::max(worst, std::abs(x));
  return worst;
}

}  // namespace aoimec::shs
