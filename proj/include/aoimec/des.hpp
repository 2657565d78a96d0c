#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "aoimec/errors.hpp"
#include "aoimec/mec.hpp"
#include "aoimec/rng.hpp"
#include "aoimec/stats.hpp"

// Discrete-event oracle for the offloading network. Simulates the real system:
// single-buffer LCFS-preemptive servers, Bernoulli routing, a shared ES, and
// (for the single-device view) exogenous Poisson class-2 traffic. The device
// age is the sawtooth integrated over the post-warmup horizon.

namespace aoimec::des {

struct SimConfig {
  double horizon = 1e5;          // simulated time units per replication
  double warmup_fraction = 0.2;  // leading fraction discarded
  int replications = 1;
  std::uint64_t master_seed = 1;
  std::string trace_path;        // when set, replication 0 writes an event CSV
};

struct AoiEstimate {
  double mean = 0.0;           // time-average AoI
  double ci_half_width = 0.0;  // 99% confidence over replications
  std::uint64_t events = 0;    // events processed across replications
};

namespace detail {

inline void check_config(const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0)) throw InvalidConfig("simulation horizon must be positive");
  if (cfg.replications < 1) throw InvalidConfig("replications must be >= 1");
  if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0)
    throw InvalidConfig("warmup_fraction must lie in [0, 1)");
}

enum class EventKind : std::uint8_t { task_arrival, exo_arrival, completion };

struct Event {
  double time;
  std::uint64_t seq;  // monotone tie-breaker for deterministic replay
  EventKind kind;
  int idx;  // device for arrivals, server for completions

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

// RNG stream ids (combined with the device index).
constexpr std::uint64_t kStreamArrival = 0x01;
constexpr std::uint64_t kStreamRouting = 0x02;
constexpr std::uint64_t kStreamTxSvc = 0x03;
constexpr std::uint64_t kStreamLocalSvc = 0x04;
constexpr std::uint64_t kStreamEsSvc = 0x05;
constexpr std::uint64_t kStreamExo = 0x06;

inline std::uint64_t stream_id(std::uint64_t kind, std::uint64_t device) {
  return (kind << 32) | device;
}

/// One replication of the N-device network. Servers are indexed
/// T_i = 2i, L_i = 2i+1, ES = 2N. Preemption swaps the resident packet but
/// keeps the pending completion event: remaining exponential service is
/// memoryless, so the scheduled time stays exact for the new packet and no
/// stale events ever enter the heap.
class NetworkSimulator {
 public:
  struct Result {
    std::vector<double> mean_aoi;       // per device
    std::uint64_t events = 0;           // events processed
    std::uint64_t class1_arrivals = 0;  // task arrivals (all devices)
    std::uint64_t class1_deliveries = 0;
  };

  NetworkSimulator(std::span<const mec::Policy> policies, std::span<const double> lambdas,
                   double es_rate, double exo_rate, const SimConfig& cfg, std::uint64_t seed,
                   std::ostream* trace = nullptr)
      : policies_(policies.begin(), policies.end()),
        lambdas_(lambdas.begin(), lambdas.end()),
        es_rate_(es_rate),
        exo_rate_(exo_rate),
        horizon_(cfg.horizon),
        warmup_end_(cfg.warmup_fraction * cfg.horizon),
        trace_(trace) {
    const int n = static_cast<int>(policies_.size());
    for (int d = 0; d < n; ++d) {
      arrival_rng_.emplace_back(substream_seed(seed, stream_id(kStreamArrival, d)));
      routing_rng_.emplace_back(substream_seed(seed, stream_id(kStreamRouting, d)));
      tx_rng_.emplace_back(substream_seed(seed, stream_id(kStreamTxSvc, d)));
      local_rng_.emplace_back(substream_seed(seed, stream_id(kStreamLocalSvc, d)));
    }
    es_rng_.emplace_back(substream_seed(seed, stream_id(kStreamEsSvc, 0)));
    exo_rng_.emplace_back(substream_seed(seed, stream_id(kStreamExo, 0)));
    servers_.assign(2 * n + 1, Server{});
    latest_gen_.assign(n, 0.0);
    last_t_.assign(n, 0.0);
    integral_.assign(n, 0.0);
  }

  Result run() {
    const int n = static_cast<int>(policies_.size());
    for (int d = 0; d < n; ++d)
      push({arrival_rng_[d].exponential(lambdas_[d]), seq_++, EventKind::task_arrival, d});
    if (exo_rate_ > 0.0)
      push({exo_rng_[0].exponential(exo_rate_), seq_++, EventKind::exo_arrival, 0});

    Result res;
    while (!heap_.empty() && heap_.top().time <= horizon_) {
      const Event ev = heap_.top();
      heap_.pop();
      ++res.events;
      switch (ev.kind) {
        case EventKind::task_arrival: on_task_arrival(ev, res); break;
        case EventKind::exo_arrival: on_exo_arrival(ev); break;
        case EventKind::completion: on_completion(ev, res); break;
      }
    }
    res.mean_aoi.resize(n);
    for (int d = 0; d < n; ++d) {
      integrate(d, horizon_);
      res.mean_aoi[d] = integral_[d] / (horizon_ - warmup_end_);
    }
    return res;
  }

 private:
  struct Packet {
    double gen = 0.0;
    int owner = 0;
    bool class2 = false;
  };
  struct Server {
    bool busy = false;
    Packet pkt;
  };

  int tx_server(int d) const { return 2 * d; }
  int local_server(int d) const { return 2 * d + 1; }
  int es_server() const { return 2 * static_cast<int>(policies_.size()); }

  void push(Event e) { heap_.push(e); }

  /// Advance the age integral of device d up to time t (post-warmup part only).
  void integrate(int d, double t) {
    const double start = std::max(last_t_[d], warmup_end_);
    if (t > start)
      integral_[d] += (t - start) * (0.5 * (start + t) - latest_gen_[d]);
    last_t_[d] = t;
  }

  void occupy(int server, Packet pkt, double t, RandomStream& svc_rng, double rate) {
    Server& s = servers_[server];
    if (!s.busy) {
      s.busy = true;
      push({t + svc_rng.exponential(rate), seq_++, EventKind::completion, server});
    }
    s.pkt = pkt;  // preempt: resident packet (if any) is discarded
  }

  void deliver(int d, double t, double gen, Result& res) {
    integrate(d, t);
    latest_gen_[d] = std::max(latest_gen_[d], gen);
    ++res.class1_deliveries;
  }

  void trace_row(double t, const char* type, const char* server, int cls, int dev) {
    if (!trace_) return;
    (*trace_) << t << ',' << type << ',' << server << ',' << cls << ','
              << (t - latest_gen_[dev]) << '\n';
  }

  void on_task_arrival(const Event& ev, Result& res) {
    const int d = ev.idx;
    ++res.class1_arrivals;
    const Packet pkt{ev.time, d, false};
    if (routing_rng_[d].bernoulli(policies_[d].p_local)) {
      occupy(local_server(d), pkt, ev.time, local_rng_[d], policies_[d].mu_local);
      trace_row(ev.time, "arrival", "L", 1, d);
    } else {
      occupy(tx_server(d), pkt, ev.time, tx_rng_[d], policies_[d].mu_tx);
      trace_row(ev.time, "arrival", "T", 1, d);
    }
    push({ev.time + arrival_rng_[d].exponential(lambdas_[d]), seq_++, EventKind::task_arrival, d});
  }

  void on_exo_arrival(const Event& ev) {
    occupy(es_server(), Packet{ev.time, 0, true}, ev.time, es_rng_[0], es_rate_);
    trace_row(ev.time, "exo_arrival", "ES", 2, 0);
    push({ev.time + exo_rng_[0].exponential(exo_rate_), seq_++, EventKind::exo_arrival, 0});
  }

  void on_completion(const Event& ev, Result& res) {
    Server& s = servers_[ev.idx];
    const Packet pkt = s.pkt;
    s.busy = false;
    if (ev.idx == es_server()) {
      if (!pkt.class2) {
        deliver(pkt.owner, ev.time, pkt.gen, res);
        trace_row(ev.time, "es_done", "ES", 1, pkt.owner);
      } else {
        trace_row(ev.time, "es_done", "ES", 2, 0);  // class-2 work leaves silently
      }
    } else if (ev.idx % 2 == 1) {  // local processor
      deliver(pkt.owner, ev.time, pkt.gen, res);
      trace_row(ev.time, "local_done", "L", 1, pkt.owner);
    } else {  // transmitter: packet moves on to the ES, preempting anything there
      occupy(es_server(), pkt, ev.time, es_rng_[0], es_rate_);
      trace_row(ev.time, "tx_done", "T", 1, pkt.owner);
    }
  }

  std::vector<mec::Policy> policies_;
  std::vector<double> lambdas_;
  double es_rate_;
  double exo_rate_;
  double horizon_;
  double warmup_end_;
  std::ostream* trace_;

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
  std::uint64_t seq_ = 0;
  std::vector<Server> servers_;
  std::vector<RandomStream> arrival_rng_, routing_rng_, tx_rng_, local_rng_, es_rng_, exo_rng_;
  std::vector<double> latest_gen_;  // generation time of the freshest delivery
  std::vector<double> last_t_;
  std::vector<double> integral_;
};

inline std::vector<NetworkSimulator::Result> run_replications(
    std::span<const mec::Policy> policies, std::span<const double> lambdas, double es_rate,
    double exo_rate, const SimConfig& cfg) {
  check_config(cfg);
  std::vector<NetworkSimulator::Result> results;
  results.reserve(cfg.replications);
  for (int r = 0; r < cfg.replications; ++r) {
    const std::uint64_t seed = substream_seed(cfg.master_seed, 0x5eedULL + r);
    std::ofstream trace;
    std::ostream* trace_ptr = nullptr;
    if (r == 0 && !cfg.trace_path.empty()) {
      trace.open(cfg.trace_path);
      if (!trace) throw InvalidConfig("cannot open trace output: " + cfg.trace_path);
      trace << "t,event_type,server,class,device_age\n";
      trace_ptr = &trace;
    }
    NetworkSimulator sim(policies, lambdas, es_rate, exo_rate, cfg, seed, trace_ptr);
    results.push_back(sim.run());
  }
  return results;
}

}  // namespace detail

/// AoI of one device whose ES sees explicit exogenous class-2 Poisson traffic.
inline AoiEstimate simulate_device(const mec::Policy& policy, double lambda,
                                   const mec::EsEnvironment& env, const SimConfig& cfg) {
  const mec::Policy pols[] = {policy};
  const double lams[] = {lambda};
  const auto reps = detail::run_replications(pols, lams, env.es_rate, env.exo_rate, cfg);
  std::vector<double> means;
  means.reserve(reps.size());
  AoiEstimate est;
  for (const auto& r : reps) {
    means.push_back(r.mean_aoi[0]);
    est.events += r.events;
  }
  est.mean = mean_of(means);
  est.ci_half_width = ci99_half_width(means);
  return est;
}

/// Per-device AoI of the full N-device system sharing one ES at N * mu3.
/// Here the cross traffic is endogenous: it is exactly the other transmitters'
/// output, not a Poisson approximation.
inline std::vector<AoiEstimate> simulate_population(std::span<const mec::Policy> policies,
                                                    std::span<const double> lambdas,
                                                    const mec::SystemParams& sys,
                                                    const SimConfig& cfg) {
  if (sys.N != static_cast<int>(policies.size()) || sys.N != static_cast<int>(lambdas.size()))
    throw InvalidConfig("population size does not match policy/lambda lists");
  const double es_rate = static_cast<double>(sys.N) * sys.mu3_per_capita;
  const auto reps = detail::run_replications(policies, lambdas, es_rate, 0.0, cfg);
  std::vector<AoiEstimate> out(policies.size());
  for (std::size_t d = 0; d < policies.size(); ++d) {
    std::vector<double> means;
    means.reserve(reps.size());
    for (const auto& r : reps) means.push_back(r.mean_aoi[d]);
    out[d].mean = mean_of(means);
    out[d].ci_half_width = ci99_half_width(means);
  }
  for (const auto& r : reps) out[0].events += r.events;
  for (std::size_t d = 1; d < out.size(); ++d) out[d].events = out[0].events;
  return out;
}

}  // namespace aoimec::des
