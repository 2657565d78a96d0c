#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "aoimec/mec.hpp"
#include "aoimec/shs.hpp"
#include "aoimec/shs_json.hpp"
#include "oracles.hpp"

using namespace aoimec;

namespace {

shs::ShsModel two_state_chain(double r01 = 1.0, double r10 = 1.0) {
  shs::ShsModel m;
  m.num_states = 2;
  m.num_ages = 1;
  m.growth = {{1}, {1}};
  m.transitions = {{0, 1, r01, {0}}, {1, 0, r10, {0}}};
  return m;
}

// single-server LCFS-preemptive sampler: arrivals reset the server age,
// completions copy it to the monitor, server always busy
shs::ShsModel lcfs_sampler(double lambda, double mu) {
  shs::ShsModel m;
  m.num_states = 1;
  m.num_ages = 2;
  m.growth = {{1, 1}};
  m.transitions = {{0, 0, lambda, {0, shs::kResetZero}}, {0, 0, mu, {1, 1}}};
  return m;
}

}  // namespace

TEST(Validation, MinimalChainIsClean) {
  EXPECT_TRUE(shs::validate_model(two_state_chain()).ok());
}

TEST(Validation, AbsorbingStateIsReducible) {
  shs::ShsModel m = two_state_chain();
  m.transitions.pop_back();  // state 1 loses its only exit
  const auto rep = shs::validate_model(m);
  ASSERT_FALSE(rep.ok());
  EXPECT_NE(rep.violations.front().find("reducible chain"), std::string::npos);
}

TEST(Validation, CatchesBadRatesAndIndices) {
  shs::ShsModel m = two_state_chain();
  m.transitions[0].rate = -2.0;
  m.transitions[1].target = 7;
  m.transitions[1].reset = {5};
  const auto rep = shs::validate_model(m);
  EXPECT_EQ(rep.violations.size(), 3u);
}

TEST(Validation, OffloadingNetworkIsIrreducible) {
  const oracles::ReferencePoint ref;
  const auto m = mec::build_mec_shs(ref.policy, ref.lambda, ref.env);
  EXPECT_TRUE(shs::validate_model(m).ok());
}

TEST(Stationary, TwoStateBirthDeath) {
  const auto pi = shs::solve_stationary(two_state_chain(1.0, 3.0));
  EXPECT_NEAR(pi.probs[0], 0.75, 1e-14);
  EXPECT_NEAR(pi.probs[1], 0.25, 1e-14);
}

TEST(Stationary, NormalizationAndBalance) {
  const oracles::ReferencePoint ref;
  for (const auto& m : {two_state_chain(0.3, 2.0), lcfs_sampler(1.0, 1.0),
                        mec::build_mec_shs(ref.policy, ref.lambda, ref.env)}) {
    const auto pi = shs::solve_stationary(m);
    double sum = 0.0;
    for (double p : pi.probs) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(shs::balance_residual(m, pi), 1e-10);
  }
}

TEST(Stationary, MatchesOccupancySimulation) {
  const oracles::ReferencePoint ref;
  const auto m = mec::build_mec_shs(ref.policy, ref.lambda, ref.env);
  const auto pi = shs::solve_stationary(m);
  const auto occ = oracles::ctmc_occupancy(m, 99, 4'000'000);
  for (int s = 0; s < m.num_states; ++s)
    EXPECT_NEAR(occ[s], pi.probs[s], 0.005) << "state " << s;
}

TEST(Stationary, TwoClosedClassesAreSingular) {
  shs::ShsModel m;
  m.num_states = 4;
  m.num_ages = 1;
  m.growth = {{1}, {1}, {1}, {1}};
  m.transitions = {{0, 1, 1.0, {0}}, {1, 0, 1.0, {0}}, {2, 3, 1.0, {0}}, {3, 2, 1.0, {0}}};
  EXPECT_THROW(shs::solve_stationary(m), SingularSystem);
}

TEST(Correlations, HandSolvedSamplerValues) {
  // closed form for the single-server sampler: v = pi * [1/lambda + 1/mu, 1/lambda]
  const auto m = lcfs_sampler(1.0, 1.0);
  const auto sol = shs::solve_aoi(m);
  EXPECT_NEAR(sol.v.v[0][0], 2.0, 1e-12);
  EXPECT_NEAR(sol.v.v[0][1], 1.0, 1e-12);
  EXPECT_NEAR(sol.delta, 2.0, 1e-12);

  EXPECT_NEAR(shs::solve_aoi(lcfs_sampler(2.0, 4.0)).delta, 0.75, 1e-12);
}

TEST(Correlations, NonnegativeEverywhere) {
  const oracles::ReferencePoint ref;
  for (const auto& m : {lcfs_sampler(0.5, 3.0), mec::build_mec_shs(ref.policy, ref.lambda, ref.env),
                        mec::build_mec_shs({0.9, 1.0, 2.0}, 5.0, mec::EsEnvironment::finite(0.2, 4.0))}) {
    const auto sol = shs::solve_aoi(m);
    for (const auto& row : sol.v.v)
      for (double x : row) EXPECT_GE(x, 0.0);
    EXPECT_LE(shs::correlation_residual(m, sol.pi, sol.v), 1e-10);
  }
}

// The offloading network's stationary and correlation equations, assembled by
// hand state by state, independently of the model builder and of the generic
// residual helpers. Both solver outputs must satisfy them.
TEST(Correlations, HandAssembledNetworkEquations) {
  const double lambda = 2.5, p = 0.5, mt = 1.0, ml = 0.3, le = 1.0, m3 = 10.0;
  const double lp = lambda * p, lq = lambda * (1.0 - p);
  const double a = lambda + le + mt + ml + m3;
  const double ah = a - mt;

  const auto model = mec::build_mec_shs({p, ml, mt}, lambda, mec::EsEnvironment::finite(le, m3));
  const auto sol = shs::solve_aoi(model);
  const auto& pi = sol.pi.probs;
  const auto& v = sol.v.v;

  // stationary balance, one equation per state
  EXPECT_NEAR(a * pi[0], (lq + ml + m3) * pi[0] + lq * (pi[2] + pi[3]), 1e-10);
  EXPECT_NEAR(a * pi[1], (lq + ml + m3) * pi[1] + lq * pi[4], 1e-10);
  EXPECT_NEAR(a * pi[2], (lp + ml + m3) * pi[2] + lp * (pi[0] + pi[1]), 1e-10);
  EXPECT_NEAR(ah * pi[3], (lp + ml + m3) * pi[3] + lp * pi[4] + mt * (pi[2] + pi[7]), 1e-10);
  EXPECT_NEAR(ah * pi[4], (ml + m3) * pi[4] + mt * (pi[0] + pi[1] + pi[6]), 1e-10);
  EXPECT_NEAR(ah * pi[5], (lp + le + ml + m3) * pi[5] + le * (pi[3] + pi[4]), 1e-10);
  EXPECT_NEAR(a * pi[6], (lq + le + ml + m3) * pi[6] + le * (pi[0] + pi[1]) + lq * (pi[5] + pi[7]),
              1e-10);
  EXPECT_NEAR(a * pi[7], (lp + le + ml + m3) * pi[7] + le * pi[2] + lp * pi[6], 1e-10);

  // correlation equations, one 4-vector equation per state
  using Vec4 = std::array<double, 4>;
  auto expect_rows = [](double scale, const std::array<const double*, 4>& lhs, const Vec4& rhs) {
    for (int k = 0; k < 4; ++k)
      EXPECT_NEAR(scale * *lhs[k], rhs[k], 1e-10) << "component " << k;
  };
  auto row = [&](int s) {
    return std::array<const double*, 4>{&v[s][0], &v[s][1], &v[s][2], &v[s][3]};
  };

  expect_rows(a, row(0),
              {pi[0] + lq * v[0][0] + ml * v[0][2] + m3 * v[0][3] + lq * v[2][0] + lq * v[3][0],
               pi[0] + ml * v[0][1] + m3 * v[0][1],
               pi[0] + lq * v[0][2] + ml * v[0][2] + m3 * v[0][2] + lq * v[2][2] + lq * v[3][2],
               pi[0] + lq * v[0][3] + ml * v[0][2] + m3 * v[0][3] + lq * v[2][3] + lq * v[3][3]});
  expect_rows(a, row(1),
              {pi[1] + lq * v[1][0] + ml * v[1][2] + m3 * v[1][3] + lq * v[4][0],
               pi[1] + ml * v[1][1] + m3 * v[1][1],
               pi[1] + lq * v[1][2] + ml * v[1][2] + m3 * v[1][3] + lq * v[4][2],
               pi[1] + lq * v[1][3] + ml * v[1][3] + m3 * v[1][3] + lq * v[4][3]});
  expect_rows(a, row(2),
              {pi[2] + lp * v[2][0] + ml * v[2][2] + m3 * v[2][3] + lp * v[0][0] + lp * v[1][0],
               pi[2] + lp * v[2][1] + ml * v[2][2] + m3 * v[2][1] + lp * v[0][1] + lp * v[1][1],
               pi[2] + ml * v[2][2] + m3 * v[2][2],
               pi[2] + lp * v[2][3] + ml * v[2][2] + m3 * v[2][3] + lp * v[0][3] + lp * v[1][3]});
  expect_rows(ah, row(3),
              {pi[3] + lp * (v[3][0] + v[4][0]) + ml * v[3][2] + m3 * v[3][3] +
                   mt * (v[2][0] + v[7][0]),
               0.0,
               pi[3] + ml * v[3][2] + m3 * v[3][2] + mt * (v[2][2] + v[7][2]),
               pi[3] + lp * (v[3][3] + v[4][3]) + ml * v[3][2] + m3 * v[3][3] +
                   mt * (v[2][1] + v[7][1])});
  expect_rows(ah, row(4),
              {pi[4] + mt * v[6][0] + ml * v[4][2] + m3 * v[4][3] + mt * v[0][0] + mt * v[1][0],
               0.0,
               pi[4] + mt * v[6][2] + ml * v[4][2] + m3 * v[4][3] + mt * v[0][2] + mt * v[1][2],
               pi[4] + mt * v[6][1] + ml * v[4][3] + m3 * v[4][3] + mt * v[0][1] + mt * v[1][1]});
  expect_rows(ah, row(5),
              {pi[5] + lp * v[5][0] + le * (v[3][0] + v[4][0] + v[5][0]) + ml * v[5][2] +
                   m3 * v[5][3],
               0.0,
               pi[5] + le * (v[3][2] + v[4][2] + v[5][2]) + ml * v[5][2] + m3 * v[5][2],
               pi[5] + lp * v[5][3] + le * (v[3][0] + v[4][0] + v[5][0]) + ml * v[5][2] +
                   m3 * v[5][3]});
  expect_rows(a, row(6),
              {pi[6] + lq * (v[5][0] + v[6][0] + v[7][0]) + le * (v[0][0] + v[1][0] + v[6][0]) +
                   m3 * v[6][3] + ml * v[6][2],
               pi[6] + le * (v[0][1] + v[1][1] + v[6][1]) + m3 * v[6][1] + ml * v[6][1],
               pi[6] + lq * (v[5][2] + v[6][2] + v[7][2]) + le * (v[0][2] + v[1][2] + v[6][2]) +
                   m3 * v[6][2] + ml * v[6][2],
               pi[6] + lq * (v[5][3] + v[6][3] + v[7][3]) + le * (v[0][0] + v[1][0] + v[6][0]) +
                   m3 * v[6][3] + ml * v[6][2]});
  expect_rows(a, row(7),
              {pi[7] + lp * (v[6][0] + v[7][0]) + le * (v[2][0] + v[7][0]) + ml * v[7][2] +
                   m3 * v[7][3],
               pi[7] + lp * (v[6][1] + v[7][1]) + le * (v[2][1] + v[7][1]) + ml * v[7][2] +
                   m3 * v[7][1],
               pi[7] + le * (v[2][2] + v[7][2]) + ml * v[7][2] + m3 * v[7][2],
               pi[7] + lp * (v[6][3] + v[7][3]) + le * (v[2][0] + v[7][0]) + ml * v[7][2] +
                   m3 * v[7][3]});
}

TEST(AverageAoi, PermutationInvariance) {
  const oracles::ReferencePoint ref;
  const auto m = mec::build_mec_shs(ref.policy, ref.lambda, ref.env);
  const double delta = shs::solve_aoi(m).delta;

  const std::vector<int> perm{3, 7, 0, 5, 1, 6, 2, 4};
  shs::ShsModel pm = m;
  pm.growth.assign(m.num_states, {});
  for (int s = 0; s < m.num_states; ++s) pm.growth[perm[s]] = m.growth[s];
  for (auto& t : pm.transitions) {
    t.source = perm[t.source];
    t.target = perm[t.target];
  }
  EXPECT_NEAR(shs::solve_aoi(pm).delta, delta, 1e-12);
}

TEST(AverageAoi, TimeRescaling) {
  const oracles::ReferencePoint ref;
  const auto m = mec::build_mec_shs(ref.policy, ref.lambda, ref.env);
  const double delta = shs::solve_aoi(m).delta;
  shs::ShsModel fast = m;
  for (auto& t : fast.transitions) t.rate *= 10.0;
  EXPECT_NEAR(shs::solve_aoi(fast).delta, delta / 10.0, 1e-10 * delta);
}

TEST(Json, RoundTripPreservesSolution) {
  const oracles::ReferencePoint ref;
  const auto m = mec::build_mec_shs(ref.policy, ref.lambda, ref.env);
  const auto path = std::filesystem::temp_directory_path() / "aoimec_roundtrip.json";
  shs::save_model(path.string(), m);
  const auto loaded = shs::load_model(path.string());
  EXPECT_EQ(loaded.transitions.size(), m.transitions.size());
  EXPECT_DOUBLE_EQ(shs::solve_aoi(loaded).delta, shs::solve_aoi(m).delta);
  std::filesystem::remove(path);
}

TEST(Json, RejectsMalformedInput) {
  const auto path = std::filesystem::temp_directory_path() / "aoimec_bad.json";
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("{\"num_states\": 2", f);
  std::fclose(f);
  EXPECT_THROW(shs::load_model(path.string()), InvalidConfig);
  std::filesystem::remove(path);
}

TEST(Gallery, AllModelsSolveCleanly) {
  const std::filesystem::path dir(AOIMEC_GALLERY_DIR);
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const auto m = shs::load_model(entry.path().string());
    const auto sol = shs::solve_aoi(m);
    double sum = 0.0;
    for (double prob : sol.pi.probs) {
      EXPECT_GE(prob, 0.0) << entry.path();
      sum += prob;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12) << entry.path();
    EXPECT_LE(shs::balance_residual(m, sol.pi), 1e-10) << entry.path();
    EXPECT_LE(shs::correlation_residual(m, sol.pi, sol.v), 1e-10) << entry.path();
    EXPECT_GT(sol.delta, 0.0) << entry.path();
  }
  EXPECT_GE(count, 8);
}
