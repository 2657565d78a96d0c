#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "aoimec/des.hpp"
#include "oracles.hpp"

using namespace aoimec;

namespace {

des::SimConfig quick_cfg(double horizon = 2e4, int reps = 8, std::uint64_t seed = 101) {
  des::SimConfig cfg;
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.master_seed = seed;
  return cfg;
}

}  // namespace

TEST(SimConfig, RejectsEmptyWindow) {
  des::SimConfig cfg = quick_cfg();
  cfg.horizon = 0.0;
  EXPECT_THROW(des::simulate_device({1.0, 1.0, 1.0}, 1.0, mec::EsEnvironment::finite(0.0, 1.0), cfg),
               InvalidConfig);
  cfg = quick_cfg();
  cfg.replications = 0;
  EXPECT_THROW(des::simulate_device({1.0, 1.0, 1.0}, 1.0, mec::EsEnvironment::finite(0.0, 1.0), cfg),
               InvalidConfig);
}

TEST(SingleDevice, LocalOnlySamplerMean) {
  // all-local routing degenerates to the single-server sampler: AoI = 1/l + 1/m
  const auto est = des::simulate_device({1.0, 1.0, 1.0}, 1.0,
                                        mec::EsEnvironment::finite(0.0, 1.0), quick_cfg(1e5, 20));
  EXPECT_NEAR(est.mean, 2.0, est.ci_half_width);
  EXPECT_GT(est.events, 100000u);
}

TEST(SingleDevice, MatchesAnalyticAtHighArrivalRate) {
  const mec::Policy pol{0.5, 0.3, 1.0};
  const auto env = mec::EsEnvironment::finite(1.0, 10.0);
  const double analytic = shs::solve_aoi(mec::build_mec_shs(pol, 10.0, env)).delta;
  const auto est = des::simulate_device(pol, 10.0, env, quick_cfg(2e4, 12, 7));
  EXPECT_LE(std::abs(est.mean - analytic), 0.05 * analytic);
  EXPECT_LE(std::abs(est.mean - analytic), 2.0 * est.ci_half_width + 0.01 * analytic);
}

TEST(SingleDevice, Reproducible) {
  const mec::Policy pol{0.5, 0.3, 1.0};
  const auto env = mec::EsEnvironment::finite(1.0, 10.0);
  const auto a = des::simulate_device(pol, 2.5, env, quick_cfg(5e3, 4, 321));
  const auto b = des::simulate_device(pol, 2.5, env, quick_cfg(5e3, 4, 321));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.ci_half_width, b.ci_half_width);
  EXPECT_EQ(a.events, b.events);
  const auto c = des::simulate_device(pol, 2.5, env, quick_cfg(5e3, 4, 322));
  EXPECT_NE(a.mean, c.mean);
}

TEST(SingleDevice, CiShrinksWithReplications) {
  const mec::Policy pol{0.5, 0.3, 1.0};
  const auto env = mec::EsEnvironment::finite(1.0, 10.0);
  const auto base = des::simulate_device(pol, 2.5, env, quick_cfg(4e3, 16, 5));
  const auto wide = des::simulate_device(pol, 2.5, env, quick_cfg(4e3, 64, 5));
  const double ratio = wide.ci_half_width / base.ci_half_width;
  EXPECT_GE(ratio, 0.4);
  EXPECT_LE(ratio, 0.6);
}

TEST(Population, SingletonMatchesSingleDevice) {
  const mec::Policy pol{0.5, 0.3, 1.0};
  const std::vector<mec::Policy> pols{pol};
  const std::vector<double> lams{2.5};
  const auto cfg = quick_cfg(2e4, 6, 11);
  const auto pop = des::simulate_population(pols, lams, {1, 10.0}, cfg);
  const auto solo = des::simulate_device(pol, 2.5, mec::EsEnvironment::finite(0.0, 10.0), cfg);
  ASSERT_EQ(pop.size(), 1u);
  EXPECT_NEAR(pop[0].mean, solo.mean, solo.ci_half_width + pop[0].ci_half_width + 1e-9);
}

TEST(Population, SymmetricDevicesAgreeWithTheory) {
  const int n = 10;
  const std::vector<mec::Policy> pols(n, {0.5, 0.3, 1.0});
  const std::vector<double> lams(n, 10.0);
  const mec::SystemParams sys{n, 1.0};
  const double analytic = mec::finite_n_aoi(pols, lams, 0, sys);
  const auto est = des::simulate_population(pols, lams, sys, quick_cfg(5e3, 10, 13));
  for (int d = 0; d < n; ++d)
    EXPECT_LE(std::abs(est[d].mean - analytic), 0.05 * analytic) << "device " << d;
}

TEST(Population, ConservationAndCounters) {
  const std::vector<mec::Policy> pols(3, {0.5, 0.3, 1.0});
  const std::vector<double> lams(3, 2.5);
  des::SimConfig cfg = quick_cfg(1e4, 1, 17);
  const auto reps = des::detail::run_replications(pols, lams, 3.0, 0.5, cfg);
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_LE(reps[0].class1_deliveries, reps[0].class1_arrivals);
  EXPECT_GT(reps[0].class1_deliveries, 0u);
  EXPECT_GT(reps[0].events, reps[0].class1_arrivals);
}

TEST(Trace, SawtoothShape) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "aoimec_trace.csv";
  des::SimConfig cfg = quick_cfg(200.0, 1, 23);
  cfg.warmup_fraction = 0.0;
  cfg.trace_path = path.string();
  des::simulate_device({0.5, 0.3, 1.0}, 2.5, mec::EsEnvironment::finite(1.0, 10.0), cfg);

  std::ifstream in(path);
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,event_type,server,class,device_age");

  double prev_t = 0.0, prev_age = 0.0;
  bool first = true;
  int rows = 0, drops = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t_s, type, server, cls, age_s;
    std::getline(ss, t_s, ',');
    std::getline(ss, type, ',');
    std::getline(ss, server, ',');
    std::getline(ss, cls, ',');
    std::getline(ss, age_s, ',');
    const double t = std::stod(t_s), age = std::stod(age_s);
    ++rows;
    if (!first) {
      const double dt = t - prev_t;
      EXPECT_GE(dt, 0.0);
      // unit growth between events; deliveries may only jump the age down
      EXPECT_LE(age, prev_age + dt + 1e-9);
      if (age < prev_age + dt - 1e-9) {
        ++drops;
        EXPECT_TRUE(type == "local_done" || type == "es_done") << type;
      }
    }
    first = false;
    prev_t = t;
    prev_age = age;
  }
  EXPECT_GT(rows, 100);
  EXPECT_GT(drops, 10);
  std::filesystem::remove(path);
}

TEST(Trace, Class2CompletionsLeaveAgeUntouched) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "aoimec_trace2.csv";
  des::SimConfig cfg = quick_cfg(500.0, 1, 29);
  cfg.warmup_fraction = 0.0;
  cfg.trace_path = path.string();
  // all-local device: the ES only ever serves exogenous packets
  des::simulate_device({1.0, 0.5, 1.0}, 1.0, mec::EsEnvironment::finite(2.0, 5.0), cfg);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  double prev_t = 0.0, prev_age = 0.0;
  bool first = true;
  int class2_done = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t_s, type, server, cls, age_s;
    std::getline(ss, t_s, ',');
    std::getline(ss, type, ',');
    std::getline(ss, server, ',');
    std::getline(ss, cls, ',');
    std::getline(ss, age_s, ',');
    const double t = std::stod(t_s), age = std::stod(age_s);
    if (!first && type == "es_done") {
      EXPECT_EQ(cls, "2");
      EXPECT_NEAR(age, prev_age + (t - prev_t), 1e-9);  // no jump
      ++class2_done;
    }
    first = false;
    prev_t = t;
    prev_age = age;
  }
  EXPECT_GT(class2_done, 100);
  std::filesystem::remove(path);
}
