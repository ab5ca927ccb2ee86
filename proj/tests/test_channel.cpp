#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "greencells/channel.hpp"
#include "greencells/stats.hpp"

using namespace greencells;

TEST_CASE("shadowing dB conversion") {
  REQUIRE(shadow_db_to_natural(0.0) == 0.0);
  REQUIRE_THAT(shadow_db_to_natural(8.0),
               Catch::Matchers::WithinRel(1.8420680743952367, 1e-14));
  REQUIRE_THAT(shadow_db_to_natural(4.0),
               Catch::Matchers::WithinRel(0.9210340371976183, 1e-14));
  REQUIRE_THROWS_AS(shadow_db_to_natural(-1.0), std::invalid_argument);
}

TEST_CASE("channel model validates its domain") {
  REQUIRE_THROWS_AS(ChannelModel(2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ChannelModel(4.0, 0.0, -0.1), std::invalid_argument);
  REQUIRE_NOTHROW(ChannelModel(2.1));
}

TEST_CASE("fractional moments of the composite gain") {
  const ChannelModel ch(4.0);
  REQUIRE_THAT(frac_moment_H(ch, 0.0), Catch::Matchers::WithinRel(1.0, 1e-14));
  REQUIRE_THAT(frac_moment_H(ch, 0.5),
               Catch::Matchers::WithinRel(0.8862269254527579, 1e-13));
  REQUIRE_THAT(frac_moment_H(ch, 0.5) * frac_moment_H(ch, -0.5),
               Catch::Matchers::WithinRel(M_PI / 2.0, 1e-13));
  REQUIRE_THROWS_AS(frac_moment_H(ch, -1.0), std::domain_error);

  SECTION("monotone in shadowing spread for t != 0") {
    for (double t : {0.5, -0.5, 0.25}) {
      double prev = 0.0;
      for (double sigma : {0.0, 0.3, 0.6, 1.0, 1.5, 2.0}) {
        const double m = frac_moment_H(ChannelModel(4.0, 0.0, sigma), t);
        REQUIRE(m > prev);
        prev = m;
      }
    }
  }
}

TEST_CASE("reflection identity across the path-loss range") {
  // Gamma(1+2/a) Gamma(1-2/a) = (2 pi / a) / sin(2 pi / a)
  for (int i = 0; i < 50; ++i) {
    const double a = 2.1 + (6.0 - 2.1) * i / 49.0;
    const double u = 2.0 / a;
    const double lhs = std::tgamma(1.0 + u) * std::tgamma(1.0 - u);
    const double rhs = (2.0 * M_PI / a) / std::sin(2.0 * M_PI / a);
    REQUIRE_THAT(lhs, Catch::Matchers::WithinRel(rhs, 1e-12));
  }
}

TEST_CASE("association constants") {
  SECTION("nearest association pins zeta to one") {
    const ChannelModel ch(3.76, 0.0, 1.2);
    REQUIRE(zeta(ch, AssociationScheme::nearest_bs()) == 1.0);
    REQUIRE(rho(ch, AssociationScheme::nearest_bs()) == 3.5);
  }
  SECTION("max received power closed forms") {
    const AssociationScheme mrpa = AssociationScheme::max_received_power();
    REQUIRE_THAT(zeta(ChannelModel(4.0), mrpa),
                 Catch::Matchers::WithinRel(M_PI / 2.0, 1e-12));
    REQUIRE_THAT(rho(ChannelModel(4.0), mrpa),
                 Catch::Matchers::WithinRel(7.0 * M_PI / 4.0, 1e-12));
    REQUIRE_THAT(zeta(ChannelModel(3.76), mrpa),
                 Catch::Matchers::WithinRel(1.6794946548366894, 1e-10));
    REQUIRE_THAT(rho(ChannelModel(3.76), mrpa),
                 Catch::Matchers::WithinRel(5.8782312919284125, 1e-10));
    REQUIRE_THAT(rho(ChannelModel(3.76, 0.0, shadow_db_to_natural(8.0)), mrpa),
                 Catch::Matchers::WithinRel(15.352984683320914, 1e-10));
    // mu shifts cancel between the +2/a and -2/a moments
    REQUIRE_THAT(zeta(ChannelModel(3.76, -0.7, 0.5), mrpa),
                 Catch::Matchers::WithinRel(zeta(ChannelModel(3.76, 0.0, 0.5), mrpa), 1e-12));
  }
  SECTION("zeta never drops below one") {
    const AssociationScheme mrpa = AssociationScheme::max_received_power();
    for (double a : {2.2, 3.0, 3.76, 4.5, 5.8})
      for (double sigma : {0.0, 0.4, 1.0, 1.9})
        REQUIRE(zeta(ChannelModel(a, 0.0, sigma), mrpa) >= 1.0);
  }
  SECTION("constant general weights reduce to max received power") {
    const auto scheme = AssociationScheme::general_weighted(
        [](double t) { return std::pow(2.0, t); },
        [](CounterRng&) { return 2.0; });
    const ChannelModel ch(3.76, 0.0, 0.9);
    REQUIRE_THAT(zeta(ch, scheme),
                 Catch::Matchers::WithinRel(
                     zeta(ch, AssociationScheme::max_received_power()), 1e-12));
  }
}

TEST_CASE("gain sampler matches its closed-form moments") {
  SECTION("unshadowed mean is one") {
    const ChannelModel ch(3.76);
    CounterRng rng(101);
    RunningStat h;
    for (int i = 0; i < 1000000; ++i)
      h.add(sample_gain(ch, AssociationScheme::max_received_power(), rng).h);
    REQUIRE(h.mean() >= 0.997);
    REQUIRE(h.mean() <= 1.003);
  }
  SECTION("nearest weights invert the gain") {
    const ChannelModel ch(3.76, 0.0, 1.0);
    CounterRng rng(102);
    for (int i = 0; i < 1000; ++i) {
      const GainSample g = sample_gain(ch, AssociationScheme::nearest_bs(), rng);
      REQUIRE_THAT(g.w * g.h, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
  }
  SECTION("fractional sample moments track the formula") {
    const ChannelModel ch(3.76, 0.0, 0.9210340371976183);
    CounterRng rng(103);
    RunningStat m;
    for (int i = 0; i < 1000000; ++i)
      m.add(std::pow(sample_gain(ch, AssociationScheme::max_received_power(), rng).h, 0.5));
    const double expect = frac_moment_H(ch, 0.5);
    REQUIRE_THAT(m.mean(), Catch::Matchers::WithinAbs(expect, 4.0 * m.stderror()));
  }
}
