// Compares the closed-form void probability and its bounds against a quick
// Monte Carlo run for nearest-BS and max-received-power association.
#include <cstdio>

#include "greencells/analytics.hpp"
#include "greencells/sim.hpp"

using namespace greencells;

int main() {
  const ChannelModel nearest_ch(3.76);
  const ChannelModel mrpa_ch(3.76, 0.0, shadow_db_to_natural(8.0));
  const AssociationScheme nba = AssociationScheme::nearest_bs();
  const AssociationScheme mrpa = AssociationScheme::max_received_power();

  std::printf("%6s  %10s %10s %10s %10s  %10s %10s\n", "load", "lower", "nba", "nba_sim",
              "mrpa8db", "mrpa_sim", "upper8db");
  for (double v : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    SimConfig cfg_n(window_for_expected_bs(1.0, 500.0), v, 1.0, nearest_ch, nba);
    cfg_n.trials = 20;
    SimConfig cfg_m(window_for_expected_bs(1.0, 500.0), v, 1.0, mrpa_ch, mrpa);
    cfg_m.trials = 10;
    const double z = zeta(mrpa_ch, mrpa);
    std::printf("%6.2f  %10.4f %10.4f %10.4f %10.4f  %10.4f %10.4f\n", v, std::exp(-v),
                void_prob(v, 3.5), void_fraction(cfg_n).mean, void_prob(v, 3.5 * z),
                void_fraction(cfg_m).mean, void_prob_bounds(v, z).upper);
  }
  return 0;
}
