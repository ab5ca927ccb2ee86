#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "greencells/analytics.hpp"

using namespace greencells;

TEST_CASE("void probability basics") {
  REQUIRE(void_prob(0.0, 3.5) == 1.0);
  REQUIRE_THAT(void_prob(2.0, 3.5), Catch::Matchers::WithinRel(0.205574263019978, 1e-12));
  REQUIRE_THAT(void_prob(2.0, 1e8), Catch::Matchers::WithinRel(std::exp(-2.0), 1e-7));
  REQUIRE_THROWS_AS(void_prob(-0.1, 3.5), std::invalid_argument);

  SECTION("strictly decreasing in load and in rho") {
    double prev = 1.1;
    for (double v : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double p = void_prob(v, 3.5);
      REQUIRE(p < prev);
      prev = p;
    }
    prev = 1.1;
    for (double r : {3.5, 4.0, 6.0, 10.0, 30.0}) {
      const double p = void_prob(2.0, r);
      REQUIRE(p < prev);
      prev = p;
    }
  }
  SECTION("nonvoid_prob is the stable complement") {
    for (double v : {1e-9, 1e-6, 0.1, 2.0, 50.0})
      REQUIRE_THAT(nonvoid_prob(v, 3.5),
                   Catch::Matchers::WithinRel(1.0 - void_prob(v, 3.5), 1e-6));
    REQUIRE_THAT(nonvoid_prob(1e-9, 3.5), Catch::Matchers::WithinRel(1e-9, 1e-5));
  }
}

TEST_CASE("void probability bounds") {
  const VoidBounds degenerate = void_prob_bounds(0.0, 1.0);
  REQUIRE(degenerate.lower == 1.0);
  REQUIRE(degenerate.upper == 1.0);

  const VoidBounds b1 = void_prob_bounds(2.0, 1.0);
  REQUIRE_THAT(b1.lower, Catch::Matchers::WithinRel(0.1353352832366127, 1e-12));
  REQUIRE_THAT(b1.upper, Catch::Matchers::WithinRel(1.0 / 3.0, 1e-12));

  const VoidBounds b2 = void_prob_bounds(2.0, 100.0);
  REQUIRE_THAT(b2.upper, Catch::Matchers::WithinRel(0.1380329671977454, 1e-10));
  REQUIRE(b2.upper / b2.lower < 1.02);  // tight once zeta is large

  SECTION("ordering exp(-v) <= (1+v/rho)^-rho <= (1+v/zeta)^-zeta") {
    for (double z : {1.0, 1.5, 2.5, 4.0, 8.0}) {
      for (int i = 0; i <= 80; ++i) {
        const double v = 20.0 * i / 80.0;
        const VoidBounds b = void_prob_bounds(v, z);
        const double mid = void_prob(v, 3.5 * z);
        REQUIRE(b.lower <= mid * (1.0 + 1e-12));
        REQUIRE(mid <= b.upper * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("user count pmf") {
  REQUIRE_THAT(user_count_pmf(0, 2.0), Catch::Matchers::WithinRel(void_prob(2.0, 3.5), 1e-13));

  double sum = 0.0, mean = 0.0;
  for (int n = 0; n <= 500; ++n) {
    const double p = user_count_pmf(n, 2.0);
    sum += p;
    mean += n * p;
  }
  REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(2.0, 1e-6));

  SECTION("matches the gamma-mixed poisson integral") {
    // independent route: p_n = int (v x)^n/n! e^{-v x} Gamma(rho,rho) pdf dx
    const double rho = 3.5;
    for (double v : {0.5, 2.0, 10.0}) {
      for (int n = 0; n <= 20; ++n) {
        const double direct = integrate_half_line(
            [&](double x) {
              if (x <= 0.0) return 0.0;
              const double logp = n * std::log(v * x) - std::lgamma(n + 1.0) - v * x +
                                  rho * std::log(rho) + (rho - 1.0) * std::log(x) - rho * x -
                                  std::lgamma(rho);
              return std::exp(logp);
            },
            1e-12, 1e-11);
        REQUIRE_THAT(user_count_pmf(n, v), Catch::Matchers::WithinAbs(direct, 1e-8));
      }
    }
  }
}

TEST_CASE("non-void user count pmf") {
  REQUIRE_THROWS_AS(nonvoid_user_count_pmf(0, 2.0, 3.5), std::invalid_argument);

  double sum = 0.0, mean = 0.0;
  for (int n = 1; n <= 2000; ++n) {
    const double p = nonvoid_user_count_pmf(n, 2.0, 3.5);
    sum += p;
    mean += n * p;
  }
  REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-8));
  REQUIRE_THAT(mean, Catch::Matchers::WithinRel(nonvoid_user_count_mean(2.0, 3.5), 1e-6));
  REQUIRE_THAT(nonvoid_user_count_pmf(1, 2.0, 3.5),
               Catch::Matchers::WithinRel(0.25852926652738256, 1e-10));

  SECTION("mean sits between v/(1-p0) and v/(1-p0)^2") {
    for (double v : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      for (double rho : {3.5, 5.9, 15.4}) {
        const double m = nonvoid_user_count_mean(v, rho);
        const double np = nonvoid_prob(v, rho);
        REQUIRE(m > v / np);
        REQUIRE(m < v / (np * np));
      }
    }
  }
}

TEST_CASE("mean users in the serving cell") {
  REQUIRE_THAT(mean_users_nonvoid(2.0, 3.5),
               Catch::Matchers::WithinRel(3.169008357871119, 1e-12));
  REQUIRE_THAT(mean_users_nonvoid(1e6, 3.5) / 1e6, Catch::Matchers::WithinRel(1.0, 1e-5));
  REQUIRE_THROWS_AS(mean_users_nonvoid(0.0, 3.5), std::invalid_argument);
}

TEST_CASE("ell closed forms at alpha = 4") {
  const ChannelModel ch(4.0);
  REQUIRE_THAT(ell(1.0, 0.0, ch), Catch::Matchers::WithinRel(M_PI / 2.0, 1e-12));
  for (double s : {0.25, 1.0, 4.0}) {
    const double expect = std::sqrt(s) * std::atan(std::sqrt(s));
    REQUIRE_THAT(ell(s, 1.0, ch), Catch::Matchers::WithinRel(expect, 1e-8));
  }
  REQUIRE_THAT(ell(1.0, 1.0, ch), Catch::Matchers::WithinRel(M_PI / 4.0, 1e-8));
  REQUIRE_THROWS_AS(ell(0.0, 1.0, ch), std::invalid_argument);
  REQUIRE_THROWS_AS(ell(1.0, -1.0, ch), std::invalid_argument);
}

TEST_CASE("ell vanishes with s, grows with s, stays continuous") {
  for (const ChannelModel& ch :
       {ChannelModel(3.76), ChannelModel(3.76, 0.0, 0.9210340371976183), ChannelModel(2.7)}) {
    REQUIRE(ell(1e-8, 1.0, ch) < 1e-6);
    double prev = 0.0;
    for (double s : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
      const double l = ell(s, 1.0, ch);
      REQUIRE(l >= prev);
      prev = l;
    }
  }
  // values straddling the internal branch switch, frozen from adaptive
  // quadrature of the defining integral
  REQUIRE_THAT(ell(0.271711, 1.0, ChannelModel(3.76)),
               Catch::Matchers::WithinRel(0.285645309243, 1e-5));
  REQUIRE_THAT(ell(0.271657, 1.0, ChannelModel(3.76)),
               Catch::Matchers::WithinRel(0.285592525685, 1e-5));
  REQUIRE_THAT(ell(1.0, 1.0, ChannelModel(3.76)),
               Catch::Matchers::WithinRel(0.9022198108179377, 1e-7));
}

TEST_CASE("coverage probability") {
  const ChannelModel ch(4.0);
  const AssociationScheme nba = AssociationScheme::nearest_bs();

  SECTION("small threshold saturates at one") {
    REQUIRE(coverage_prob(1e-12, NetworkScenario(370.0, 185.0), ch, nba) > 0.999999);
  }
  SECTION("classical no-void limit at alpha 4") {
    const NetworkScenario heavy(370.0 * 1e8, 370.0);
    REQUIRE_THAT(coverage_prob(1.0, heavy, ch, nba),
                 Catch::Matchers::WithinRel(0.5600991535115575, 1e-8));
  }
  SECTION("void uplift at moderate load") {
    REQUIRE_THAT(coverage_prob(1.0, NetworkScenario(370.0, 185.0), ch, nba),
                 Catch::Matchers::WithinRel(0.6157861023226041, 1e-8));
  }
  SECTION("bound is non-increasing in threshold") {
    const NetworkScenario net(370.0, 185.0);
    double prev = 1.1;
    for (double sdb = -10.0; sdb <= 20.0; sdb += 2.0) {
      const double c = coverage_prob(std::pow(10.0, sdb / 10.0), net, ch, nba);
      REQUIRE(c < prev);
      prev = c;
    }
  }
  SECTION("bound is non-increasing in the occupied fraction") {
    double prev = 1.1;
    for (double v : {0.2, 0.5, 1.0, 2.0, 5.0, 20.0}) {  // occupancy rises with load
      const double c = coverage_prob(1.0, NetworkScenario(370.0, 370.0 / v), ch, nba);
      REQUIRE(c < prev);
      prev = c;
    }
  }
  SECTION("exact form never exceeds the bound") {
    const ChannelModel shadowed(3.76, 0.0, 0.9210340371976183);
    const AssociationScheme mrpa = AssociationScheme::max_received_power();
    for (double v : {0.5, 2.0, 8.0}) {
      const NetworkScenario net(370.0, 370.0 / v);
      for (double s : {0.25, 1.0, 4.0}) {
        const double exact = coverage_prob_exact(s, net, shadowed, mrpa);
        const double bound = coverage_prob(s, net, shadowed, mrpa);
        REQUIRE(exact <= bound + 1e-9);
      }
    }
    // nearest association has no Jensen gap
    const NetworkScenario net(370.0, 185.0);
    REQUIRE(coverage_prob_exact(1.0, net, ch, nba) == coverage_prob(1.0, net, ch, nba));
    const auto general = AssociationScheme::general_weighted(
        [](double) { return 1.0; }, [](CounterRng&) { return 1.0; });
    REQUIRE_THROWS_AS(coverage_prob_exact(1.0, net, ch, general), std::domain_error);
  }
}

TEST_CASE("average cell throughput") {
  const ChannelModel ch(3.76);
  const AssociationScheme nba = AssociationScheme::nearest_bs();
  const QuadratureRule q = gauss_hermite(6);
  const NetworkScenario net(370.0, 185.0);

  REQUIRE_THAT(avg_cell_throughput(net, ch, nba, q),
               Catch::Matchers::WithinRel(454.3320146076608, 1e-6));
  REQUIRE_THAT(mean_rate_bits(net, ch, nba, q),
               Catch::Matchers::WithinRel(2.2081077952563293, 1e-6));
  REQUIRE_THROWS_AS(avg_cell_throughput(net, ch, nba, gauss_hermite(2)),
                    std::invalid_argument);

  SECTION("monotone decreasing in cell load at fixed user intensity") {
    double prev = HUGE_VAL;
    for (double v : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double tc = avg_cell_throughput(NetworkScenario(370.0, 370.0 / v), ch, nba, q);
      REQUIRE(tc < prev);
      prev = tc;
    }
  }
}

TEST_CASE("average user throughput identity and shape") {
  const ChannelModel ch(3.76);
  const AssociationScheme nba = AssociationScheme::nearest_bs();
  const QuadratureRule q = gauss_hermite(6);

  REQUIRE_THAT(avg_user_throughput(NetworkScenario(370.0, 185.0), ch, nba, q),
               Catch::Matchers::WithinRel(0.6967819411936468, 1e-6));

  SECTION("identity route equals the direct integral route") {
    const ChannelModel shadowed(3.76, 0.0, 1.2);
    const AssociationScheme mrpa = AssociationScheme::max_received_power();
    for (double v : {0.3, 2.0, 9.0}) {
      const NetworkScenario net(370.0, 370.0 / v);
      REQUIRE_THAT(avg_user_throughput(net, ch, nba, q),
                   Catch::Matchers::WithinRel(avg_user_throughput_direct(net, ch, nba, q),
                                              1e-10));
      REQUIRE_THAT(avg_user_throughput(net, shadowed, mrpa, q),
                   Catch::Matchers::WithinRel(
                       avg_user_throughput_direct(net, shadowed, mrpa, q), 1e-10));
    }
  }
  SECTION("unique interior maximum in cell load") {
    double prev = 0.0;
    int sign_changes = 0;
    bool increasing = true;
    for (int i = 0; i <= 40; ++i) {
      const double v = 0.05 * std::pow(10.0 / 0.05, i / 40.0);
      const double tu = avg_user_throughput(NetworkScenario(370.0, 370.0 / v), ch, nba, q);
      if (i > 0) {
        const bool up = tu > prev;
        if (increasing && !up) {
          ++sign_changes;
          increasing = false;
        }
        REQUIRE((increasing || !up));  // never rises again after the peak
      }
      prev = tu;
    }
    REQUIRE(sign_changes == 1);
  }
  SECTION("vanishes at both load extremes") {
    const double tiny = avg_user_throughput(NetworkScenario(370.0 * 1e-6, 370.0), ch, nba, q);
    const double huge = avg_user_throughput(NetworkScenario(370.0 * 200.0, 370.0), ch, nba, q);
    const double peak = avg_user_throughput(NetworkScenario(370.0 * 0.7, 370.0), ch, nba, q);
    REQUIRE(tiny < 0.01 * peak);
    REQUIRE(huge < 0.1 * peak);
  }
}

TEST_CASE("gauss-hermite order convergence of the throughput integral") {
  const AssociationScheme mrpa = AssociationScheme::max_received_power();
  for (double sigma : {0.9210340371976183, 1.8420680743952367, 1.9}) {
    const ChannelModel ch(3.76, 0.0, sigma);
    const NetworkScenario net(370.0, 185.0);
    const double t6 = avg_cell_throughput(net, ch, mrpa, gauss_hermite(6));
    const double t20 = avg_cell_throughput(net, ch, mrpa, gauss_hermite(20));
    REQUIRE_THAT(t6, Catch::Matchers::WithinRel(t20, 1e-3));
  }
}
