#pragma once

#include <cmath>
#include <stdexcept>

#include "greencells/channel.hpp"
#include "greencells/quadrature.hpp"

namespace greencells {

struct NetworkScenario {
  double lambda_u;  // users per km^2
  double lambda_b;  // BSs per km^2

  NetworkScenario(double lam_u, double lam_b) : lambda_u(lam_u), lambda_b(lam_b) {
    if (!(lambda_u > 0.0 && lambda_b > 0.0))
      throw std::invalid_argument("NetworkScenario: intensities must be positive");
  }
  double cell_load() const { return lambda_u / lambda_b; }
};

// Association constants entering the void-probability family.
struct VoidModel {
  static constexpr double rho_hat = 3.5;  // Gamma fit for Voronoi cell areas
  double zeta_;
  double rho_;
  VoidModel(const ChannelModel& ch, const AssociationScheme& scheme)
      : zeta_(zeta(ch, scheme)), rho_(rho_hat * zeta_) {}
};

// p_void = (1 + v/rho)^(-rho), evaluated in log space.
inline double void_prob(double v, double rho_) {
  if (!(v >= 0.0)) throw std::invalid_argument("void_prob: v must be >= 0");
  if (!(rho_ > 0.0)) throw std::invalid_argument("void_prob: rho must be positive");
  return std::exp(-rho_ * std::log1p(v / rho_));
}

// 1 - p_void without cancellation for tiny v.
inline double nonvoid_prob(double v, double rho_) {
  if (!(v >= 0.0 && rho_ > 0.0)) throw std::invalid_argument("nonvoid_prob: bad args");
  return -std::expm1(-rho_ * std::log1p(v / rho_));
}

struct VoidBounds {
  double lower;
  double upper;
};

// exp(-v) <= p_void <= (1 + v/zeta)^(-zeta)
inline VoidBounds void_prob_bounds(double v, double zeta_) {
  if (!(v >= 0.0)) throw std::invalid_argument("void_prob_bounds: v must be >= 0");
  if (!(zeta_ >= 1.0)) throw std::invalid_argument("void_prob_bounds: zeta must be >= 1");
  return VoidBounds{std::exp(-v), std::exp(-zeta_ * std::log1p(v / zeta_))};
}

// Negative-binomial pmf of users per cell (Gamma-mixed Poisson, shape rho_hat).
inline double user_count_pmf(int n, double v, double rho_hat = VoidModel::rho_hat) {
  if (n < 0) throw std::invalid_argument("user_count_pmf: n must be >= 0");
  if (!(v >= 0.0 && rho_hat > 0.0)) throw std::invalid_argument("user_count_pmf: bad args");
  if (v == 0.0) return n == 0 ? 1.0 : 0.0;
  const double logp = std::lgamma(n + rho_hat) - std::lgamma(rho_hat) -
                      std::lgamma(n + 1.0) + n * std::log(v / (rho_hat + v)) -
                      rho_hat * std::log1p(v / rho_hat);
  return std::exp(logp);
}

// Users in the typical non-void (associated) cell: negative binomial with the
// thinned-cell load v' = v/(1-p_void), conditioned on n >= 1 and normalized
// exactly. Sums to 1 over n >= 1 by construction.
inline double nonvoid_user_count_pmf(int n, double v, double rho_) {
  if (n < 1)
    throw std::invalid_argument("nonvoid_user_count_pmf: conditioned on n >= 1");
  if (!(v > 0.0)) throw std::invalid_argument("nonvoid_user_count_pmf: v must be > 0");
  const double p0 = void_prob(v, rho_);
  const double vp = v / (1.0 - p0);
  const double log_nb0 = -rho_ * std::log1p(vp / rho_);
  const double logp = std::lgamma(n + rho_) - std::lgamma(rho_) -
                      std::lgamma(n + 1.0) + n * std::log(vp / (rho_ + vp)) + log_nb0;
  return std::exp(logp) / (-std::expm1(log_nb0));
}

// Closed-form mean of nonvoid_user_count_pmf (second algebraic route).
inline double nonvoid_user_count_mean(double v, double rho_) {
  if (!(v > 0.0)) throw std::invalid_argument("nonvoid_user_count_mean: v must be > 0");
  const double p0 = void_prob(v, rho_);
  const double vp = v / (1.0 - p0);
  return vp / (-std::expm1(-rho_ * std::log1p(vp / rho_)));
}

// Mean number of users in the serving cell, v/(1-p_void)^2.
inline double mean_users_nonvoid(double v, double rho_) {
  if (!(v > 0.0)) throw std::invalid_argument("mean_users_nonvoid: v must be > 0");
  const double np = nonvoid_prob(v, rho_);
  return v / (np * np);
}

namespace detail {

inline const QuadratureRule& shadow_inner_rule() {
  static const QuadratureRule rule = gauss_hermite(24);
  return rule;
}

// Laplace transform of H: L_H(u) = E_S[1/(1 + u S)], S log-normal.
inline double laplace_H(double u, const ChannelModel& ch) {
  if (ch.sigma_s == 0.0) return 1.0 / (1.0 + u * std::exp(ch.mu_s));
  const QuadratureRule& r = shadow_inner_rule();
  constexpr double kSqrt2 = 1.4142135623730950488;
  double acc = 0.0;
  for (int i = 0; i < r.n; ++i) {
    const double s = std::exp(kSqrt2 * ch.sigma_s * r.nodes[i] + ch.mu_s);
    acc += r.weights[i] / (1.0 + u * s);
  }
  return acc;
}

// E_S[(uS)^2/(1+uS)] == u E[S] - (1 - L_H(u)), evaluated without cancellation.
inline double laplace_H_remainder(double u, const ChannelModel& ch) {
  if (ch.sigma_s == 0.0) {
    const double us = u * std::exp(ch.mu_s);
    return us * us / (1.0 + us);
  }
  const QuadratureRule& r = shadow_inner_rule();
  constexpr double kSqrt2 = 1.4142135623730950488;
  double acc = 0.0;
  for (int i = 0; i < r.n; ++i) {
    const double s = std::exp(kSqrt2 * ch.sigma_s * r.nodes[i] + ch.mu_s);
    const double us = u * s;
    acc += r.weights[i] * us * us / (1.0 + us);
  }
  return acc;
}

}  // namespace detail

// ell(s, phi) = s^{2/a} { E[H^{2/a}] Gamma(1-2/a) - int_0^{phi s^{-2/a}} [1 - L_H(t^{-a/2})] dt }.
// For large upper limits the bracket is the tail integral; it is evaluated
// directly through the cancellation-free remainder identity.
inline double ell(double s, double phi, const ChannelModel& ch) {
  if (!(s > 0.0)) throw std::invalid_argument("ell: s must be positive");
  if (!(phi >= 0.0)) throw std::invalid_argument("ell: phi must be >= 0");
  const double a = ch.alpha;
  const double u = 2.0 / a;
  const double su = std::pow(s, u);
  const double full = frac_moment_H(ch, u) * std::tgamma(1.0 - u);
  if (phi == 0.0) return su * full;
  const double U = phi * std::pow(s, -u);
  double bracket;
  if (U <= 2.0) {
    const auto f = [&](double t) {
      if (t <= 0.0) return 1.0;
      return 1.0 - detail::laplace_H(std::pow(t, -a / 2.0), ch);
    };
    bracket = full - adaptive_integrate(f, 0.0, U, 1e-12, 1e-11);
  } else {
    const double mean_h = std::exp(ch.mu_s + 0.5 * ch.sigma_s * ch.sigma_s);
    const double main = mean_h * std::pow(U, 1.0 - a / 2.0) / (a / 2.0 - 1.0);
    const auto g = [&](double x) {
      if (x <= 0.0) return 0.0;
      const double t = U / x;
      return detail::laplace_H_remainder(std::pow(t, -a / 2.0), ch) * U / (x * x);
    };
    bracket = main - adaptive_integrate(g, 0.0, 1.0, 0.0, 1e-10);
  }
  const double value = su * bracket;
  return value > 0.0 ? value : 0.0;
}

// Jensen-bound coverage probability, 1/(1 + (1-p_void) ell(s, zeta)/zeta).
inline double coverage_prob(double s, const NetworkScenario& net, const ChannelModel& ch,
                            const AssociationScheme& scheme) {
  const double z = zeta(ch, scheme);
  const double p0 = void_prob(net.cell_load(), 3.5 * z);
  return 1.0 / (1.0 + (1.0 - p0) * ell(s, z, ch) / z);
}

// Exact coverage E[G^2/(G^2 + (1-p_void) ell(s, G^2))] with
// G^2 = (WH)^{-2/a} E[(WH)^{2/a}]. Available where the WH law is known.
inline double coverage_prob_exact(double s, const NetworkScenario& net,
                                  const ChannelModel& ch, const AssociationScheme& scheme) {
  if (scheme.kind() == AssociationScheme::Kind::NearestBs)
    return coverage_prob(s, net, ch, scheme);
  if (scheme.kind() != AssociationScheme::Kind::MaxReceivedPower)
    throw std::domain_error(
        "coverage_prob_exact: general schemes carry only moments, use the bound form");
  const double z = zeta(ch, scheme);
  const double p0 = void_prob(net.cell_load(), 3.5 * z);
  const double mplus = frac_moment_H(ch, 2.0 / ch.alpha);
  const QuadratureRule& r = detail::shadow_inner_rule();
  constexpr double kSqrt2 = 1.4142135623730950488;
  const auto over_x = [&](double x) {  // x ~ Exp(1) Rayleigh power
    if (x <= 0.0) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < r.n; ++i) {
      const double shadow = std::exp(kSqrt2 * ch.sigma_s * r.nodes[i] + ch.mu_s);
      const double g2 = std::pow(x * shadow, -2.0 / ch.alpha) * mplus;
      acc += r.weights[i] * g2 / (g2 + (1.0 - p0) * ell(s, g2, ch));
    }
    return acc * std::exp(-x);
  };
  return integrate_half_line(over_x, 1e-9, 1e-8);
}

namespace detail {

// sum_i w_i / (s + exp(-(sqrt2 sigma x_i + mu))), the Gauss-Hermite stand-in
// for E[(s + e^{-Z})^{-1}].
inline double shadow_kernel(double s, const ChannelModel& ch, const QuadratureRule& q) {
  constexpr double kSqrt2 = 1.4142135623730950488;
  double acc = 0.0;
  for (int i = 0; i < q.n; ++i) {
    acc += q.weights[i] / (s + std::exp(-(kSqrt2 * ch.sigma_s * q.nodes[i] + ch.mu_s)));
  }
  return acc;
}

// int_0^inf shadow_kernel(s) / (1 + (1-p0) ell(s,zeta)/zeta) ds, evaluated in
// log-s. The integrand decays like exp(-2y/alpha) only beyond the point where
// (1-p0) ell/zeta reaches one, so the upper limit tracks the occupancy: at
// extreme light loads the interference tail spans many decades and a
// bounded-interval map under-resolves it.
inline double rate_integral(double p0, double zeta_, const ChannelModel& ch,
                            const QuadratureRule& q) {
  const double np = 1.0 - p0;
  const auto f = [&](double y) {
    const double s = std::exp(y);
    const double cov = 1.0 / (1.0 + np * ell(s, zeta_, ch) / zeta_);
    return shadow_kernel(s, ch, q) * cov * s;
  };
  const double y_hi = 40.0 + 0.5 * ch.alpha * std::max(0.0, std::log(zeta_ / np));
  return adaptive_integrate(f, -46.0, y_hi, 1e-9, 1e-9, 20000);
}

}  // namespace detail

// Average cell throughput (bits/s/Hz per km^2), Gauss-Hermite order from quad.
inline double avg_cell_throughput(const NetworkScenario& net, const ChannelModel& ch,
                                  const AssociationScheme& scheme, const QuadratureRule& quad) {
  if (quad.n < 4) throw std::invalid_argument("avg_cell_throughput: quadrature order < 4");
  const double z = zeta(ch, scheme);
  const double rho_ = 3.5 * z;
  const double v = net.cell_load();
  const double p0 = void_prob(v, rho_);
  const double integral = detail::rate_integral(p0, z, ch, quad);
  constexpr double kLn2 = 0.6931471805599453094;
  return net.lambda_b * nonvoid_prob(v, rho_) / (kLn2 * (1.0 - 1.0 / rho_)) * integral;
}

// Average user throughput via the identity T_U = (rho-1)(1-p0) T_C / (rho lambda_u).
inline double avg_user_throughput(const NetworkScenario& net, const ChannelModel& ch,
                                  const AssociationScheme& scheme, const QuadratureRule& quad) {
  const double z = zeta(ch, scheme);
  const double rho_ = 3.5 * z;
  const double np = nonvoid_prob(net.cell_load(), rho_);
  const double tc = avg_cell_throughput(net, ch, scheme, quad);
  return (rho_ - 1.0) * np * tc / (rho_ * net.lambda_u);
}

// Same quantity from its own displayed integral form (cross-check route).
inline double avg_user_throughput_direct(const NetworkScenario& net, const ChannelModel& ch,
                                         const AssociationScheme& scheme,
                                         const QuadratureRule& quad) {
  if (quad.n < 4)
    throw std::invalid_argument("avg_user_throughput_direct: quadrature order < 4");
  const double z = zeta(ch, scheme);
  const double rho_ = 3.5 * z;
  const double v = net.cell_load();
  const double p0 = void_prob(v, rho_);
  const double np = nonvoid_prob(v, rho_);
  const double integral = detail::rate_integral(p0, z, ch, quad);
  constexpr double kLn2 = 0.6931471805599453094;
  return net.lambda_b * np * np / (net.lambda_u * kLn2) * integral;
}

// Model value of E[log2(1 + SIR)] for the typical user (bits/s/Hz).
inline double mean_rate_bits(const NetworkScenario& net, const ChannelModel& ch,
                             const AssociationScheme& scheme, const QuadratureRule& quad) {
  const double z = zeta(ch, scheme);
  const double p0 = void_prob(net.cell_load(), 3.5 * z);
  constexpr double kLn2 = 0.6931471805599453094;
  return detail::rate_integral(p0, z, ch, quad) / kLn2;
}

}  // namespace greencells
