// Sweeps user intensities and prints the deployment intensity maximizing the
// green cell throughput, both from the fixed-point map and by direct search.
#include <cstdio>

#include "greencells/optimize.hpp"
#include "greencells/scenario.hpp"

using namespace greencells;

int main() {
  const Scenario s = figure_base_scenario();
  const ChannelModel ch = s.channel();
  const AssociationScheme scheme = s.association();
  const QuadratureRule quad = s.quadrature();
  const PowerModel power = s.power();

  std::printf("%12s %12s %12s %10s\n", "lambda_u", "v*", "lambda_b*", "beta");
  for (double lam_u = 100.0; lam_u <= 600.0; lam_u += 100.0) {
    const auto objective = [&](double v) {
      return green_cell_throughput(NetworkScenario(lam_u, lam_u / v), ch, scheme, power,
                                   quad, s.intensity_scale());
    };
    const MaximizeResult direct = maximize_direct(objective, 0.5, 300.0, 1e-6);
    FixedPointProblem p(LoadObjective::GreenCell, 2.0, s.alpha, zeta(ch, scheme), lam_u,
                        power, s.intensity_scale());
    const CalibrationResult cal = calibrate_beta(p, direct.v_opt);
    std::printf("%12.1f %12.4f %12.4f %10.4f%s\n", lam_u, cal.v_fixed,
                lam_u / cal.v_fixed, cal.beta, cal.warning ? "  (calibration warning)" : "");
  }
  return 0;
}
