// Solves the mean-field equilibrium for a single-type population and shows
// how far the equilibrium policy is from a Nash equilibrium at a few finite
// population sizes.

#include <cstdio>

#include "aoimec/finite_game.hpp"
#include "aoimec/mfg.hpp"

using namespace aoimec;

int main() {
  const mec::DeviceParams par{2.5, 5.0, 10.0, 1.0, 0.3, 0};
  const mfg::TypeSet types{{par}, {1.0}};
  const double mu3 = 1.0;

  std::vector<mfg::IterationRecord> log;
  const auto eq = mfg::solve_mfe(types, mu3, {}, {}, &log);
  std::printf("equilibrium after %d iterations (%s):\n", eq.iterations,
              eq.converged ? "converged" : "not converged");
  std::printf("  rho = %.6f   policy: p=%.4f mu_local=%.4f mu_tx=%.4f\n", eq.rho,
              eq.policies[0].p_local, eq.policies[0].mu_local, eq.policies[0].mu_tx);

  std::printf("\nexploitability of the equilibrium policy:\n");
  for (int n : {10, 50, 200}) {
    const auto rep = game::exploitability_of_mfe(eq, types, n, mu3, {});
    std::printf("  N=%4d  max gain %.3e  mean gain %.3e\n", n, rep.max_gain, rep.mean_gain);
  }
  return 0;
}
