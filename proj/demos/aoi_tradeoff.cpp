// Prints the average AoI of one device as the routing split moves from
// all-offload (p = 0) to all-local (p = 1), against three ES loads, using
// both analytic routes and one simulation cross-check.

#include <cstdio>

#include "aoimec/des.hpp"
#include "aoimec/mec.hpp"

using namespace aoimec;

int main() {
  const double lambda = 2.5;
  const double mu_local = 0.3;
  const double mu_tx = 1.0;

  std::printf("%6s %10s %10s %10s\n", "p", "rho=0", "rho=0.5", "rho=2");
  for (int i = 0; i <= 10; ++i) {
    const double p = i / 10.0;
    const mec::Policy pol{p, mu_local, mu_tx};
    std::printf("%6.2f %10.4f %10.4f %10.4f\n", p,
                mec::mf_aoi_closed_form(pol, lambda, 0.0),
                mec::mf_aoi_closed_form(pol, lambda, 0.5),
                mec::mf_aoi_closed_form(pol, lambda, 2.0));
  }

  const mec::Policy pol{0.5, mu_local, mu_tx};
  const auto env = mec::EsEnvironment::finite(1.0, 10.0);
  const double analytic = shs::solve_aoi(mec::build_mec_shs(pol, lambda, env)).delta;

  des::SimConfig sim;
  sim.horizon = 2e4;
  sim.replications = 10;
  sim.master_seed = 7;
  const auto est = des::simulate_device(pol, lambda, env, sim);
  std::printf("\ncross-check at p=0.5, lambda_e=1, mu3=10:\n");
  std::printf("  engine %.4f   simulation %.4f +- %.4f\n", analytic, est.mean, est.ci_half_width);
  return 0;
}
