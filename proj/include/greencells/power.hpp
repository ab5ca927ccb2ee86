#pragma once

#include <cmath>
#include <stdexcept>

#include "greencells/analytics.hpp"

namespace greencells {

// Two-mode BS power model: active hardware power, dormant power, transmit
// scaling and the minimum received power the transmit power must sustain.
struct PowerModel {
  double p_on;    // W, active-mode hardware power
  double p_off;   // W, dormant-mode power
  double delta;   // transmit-power scaling
  double p_min;   // W, minimum received power (already folded with any link budget)

  PowerModel(double on, double off, double d, double pmin)
      : p_on(on), p_off(off), delta(d), p_min(pmin) {
    if (!(p_on >= p_off && p_off > 0.0))
      throw std::invalid_argument("PowerModel: need p_on >= p_off > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("PowerModel: delta must be > 0");
    if (!(p_min > 0.0)) throw std::invalid_argument("PowerModel: p_min must be > 0");
  }
};

struct PowerBudget {
  double p_t;       // W per BS
  double mean_psi;  // W average consumption
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// P_t = p_min Gamma(1 + a/2) / (pi lambda_b zeta)^{a/2}. The intensity must be
// expressed in the unit system in which p_min compensates path loss
// (per m^2 for a bare d^{-a} law in meters; per km^2 once a km-referenced
// link budget has been folded into p_min).
inline double transmit_power(double lambda_b, double zeta_, double alpha, double p_min) {
  if (!(lambda_b > 0.0 && zeta_ > 0.0 && p_min > 0.0))
    throw std::invalid_argument("transmit_power: inputs must be positive");
  if (!(alpha > 2.0)) throw std::invalid_argument("transmit_power: alpha must exceed 2");
  return p_min * std::tgamma(1.0 + alpha / 2.0) /
         std::pow(M_PI * lambda_b * zeta_, alpha / 2.0);
}

// E[Psi] = (1 - p_void)(P_on + delta P_t) + p_void P_off
inline double avg_power(double p_void, const PowerModel& model, double p_t) {
  if (!(p_void >= 0.0 && p_void <= 1.0))
    throw std::invalid_argument("avg_power: p_void must be a probability");
  return (1.0 - p_void) * (model.p_on + model.delta * p_t) + p_void * model.p_off;
}

// intensity_scale converts the scenario's per-km^2 intensities into the units
// p_min is expressed in (1e-6 for a raw per-m^2 budget, 1.0 for km-referenced).
inline PowerBudget power_budget(const NetworkScenario& net, const ChannelModel& ch,
                                const AssociationScheme& scheme, const PowerModel& model,
                                double intensity_scale = 1e-6) {
  const double z = zeta(ch, scheme);
  const double p_t = transmit_power(net.lambda_b * intensity_scale, z, ch.alpha, model.p_min);
  const double p0 = void_prob(net.cell_load(), 3.5 * z);
  return PowerBudget{p_t, avg_power(p0, model, p_t)};
}

// G_C = T_C / (lambda_b E[Psi]), bits/Hz/joule.
inline double green_cell_throughput(const NetworkScenario& net, const ChannelModel& ch,
                                    const AssociationScheme& scheme, const PowerModel& model,
                                    const QuadratureRule& quad, double intensity_scale = 1e-6) {
  const PowerBudget b = power_budget(net, ch, scheme, model, intensity_scale);
  return avg_cell_throughput(net, ch, scheme, quad) / (net.lambda_b * b.mean_psi);
}

// Same value assembled the displayed way (integral over the power factor).
inline double green_cell_throughput_closed(const NetworkScenario& net, const ChannelModel& ch,
                                           const AssociationScheme& scheme,
                                           const PowerModel& model, const QuadratureRule& quad,
                                           double intensity_scale = 1e-6) {
  if (quad.n < 4)
    throw std::invalid_argument("green_cell_throughput_closed: quadrature order < 4");
  const double z = zeta(ch, scheme);
  const double rho_ = 3.5 * z;
  const double v = net.cell_load();
  const double p0 = void_prob(v, rho_);
  const double integral = detail::rate_integral(p0, z, ch, quad);
  const PowerBudget b = power_budget(net, ch, scheme, model, intensity_scale);
  constexpr double kLn2 = 0.6931471805599453094;
  const double denom = (model.p_on + model.delta * b.p_t) + p0 * model.p_off / (1.0 - p0);
  return integral / (kLn2 * (1.0 - 1.0 / rho_) * denom);
}

// G_U = T_U / E[Psi], bits/Hz/joule/user.
inline double green_user_throughput(const NetworkScenario& net, const ChannelModel& ch,
                                    const AssociationScheme& scheme, const PowerModel& model,
                                    const QuadratureRule& quad, double intensity_scale = 1e-6) {
  const PowerBudget b = power_budget(net, ch, scheme, model, intensity_scale);
  return avg_user_throughput(net, ch, scheme, quad) / b.mean_psi;
}

}  // namespace greencells
