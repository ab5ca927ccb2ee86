#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "greencells/rng.hpp"

namespace greencells {

// Composite fading/shadowing channel: H = X * S with X unit-mean exponential
// (Rayleigh power) and S log-normal with natural-log parameters mu_s, sigma_s.
struct ChannelModel {
  double alpha;    // path-loss exponent
  double mu_s;     // natural-log mean of shadowing
  double sigma_s;  // natural-log std of shadowing, 0 = no shadowing

  ChannelModel(double alpha_, double mu = 0.0, double sigma = 0.0)
      : alpha(alpha_), mu_s(mu), sigma_s(sigma) {
    if (!(alpha > 2.0))
      throw std::invalid_argument("ChannelModel: alpha must exceed 2");
    if (!(sigma_s >= 0.0))
      throw std::invalid_argument("ChannelModel: sigma_s must be >= 0");
  }
};

struct GainSample {
  double h;  // channel power gain, > 0
  double w;  // association weight, > 0
};

inline double shadow_db_to_natural(double sigma_db) {
  if (!(sigma_db >= 0.0))
    throw std::invalid_argument("shadow_db_to_natural: negative dB value");
  return sigma_db * 0.23025850929940456840;  // ln(10)/10
}

// E[H^t] = Gamma(1+t) exp(t mu + t^2 sigma^2 / 2); diverges for t <= -1.
inline double frac_moment_H(const ChannelModel& ch, double t) {
  if (!(t > -1.0))
    throw std::domain_error("frac_moment_H: moment diverges for t <= -1");
  return std::tgamma(1.0 + t) *
         std::exp(t * ch.mu_s + 0.5 * t * t * ch.sigma_s * ch.sigma_s);
}

class AssociationScheme {
public:
  enum class Kind { NearestBs, MaxReceivedPower, GeneralWeighted };

  static AssociationScheme nearest_bs() { return AssociationScheme(Kind::NearestBs); }
  static AssociationScheme max_received_power() {
    return AssociationScheme(Kind::MaxReceivedPower);
  }
  // w_moment(t) must return E[W^t] for the exponents t = +-2/alpha in use;
  // sample_w draws W. W is independent of H.
  static AssociationScheme general_weighted(std::function<double(double)> w_moment,
                                            std::function<double(CounterRng&)> sample_w) {
    AssociationScheme s(Kind::GeneralWeighted);
    s.w_moment_ = std::move(w_moment);
    s.sample_w_ = std::move(sample_w);
    if (!s.w_moment_ || !s.sample_w_)
      throw std::invalid_argument("general_weighted: moment and sampler required");
    return s;
  }

  Kind kind() const { return kind_; }

  // E[(WH)^t]
  double wh_moment(const ChannelModel& ch, double t) const {
    switch (kind_) {
      case Kind::NearestBs:
        return 1.0;  // W = 1/H, so WH == 1
      case Kind::MaxReceivedPower:
        return frac_moment_H(ch, t);
      case Kind::GeneralWeighted:
        return w_moment_(t) * frac_moment_H(ch, t);
    }
    throw std::logic_error("unreachable");
  }

  double sample_weight(CounterRng& rng) const {
    if (kind_ != Kind::GeneralWeighted)
      throw std::logic_error("sample_weight: only general schemes carry a sampler");
    return sample_w_(rng);
  }

  std::string name() const {
    switch (kind_) {
      case Kind::NearestBs: return "nearest";
      case Kind::MaxReceivedPower: return "max-power";
      case Kind::GeneralWeighted: return "general";
    }
    return "?";
  }

private:
  explicit AssociationScheme(Kind k) : kind_(k) {}
  Kind kind_;
  std::function<double(double)> w_moment_;
  std::function<double(CounterRng&)> sample_w_;
};

// zeta = E[(WH)^{2/a}] E[(WH)^{-2/a}] >= 1, equality iff WH is a.s. constant.
inline double zeta(const ChannelModel& ch, const AssociationScheme& scheme) {
  if (scheme.kind() == AssociationScheme::Kind::NearestBs) return 1.0;
  const double t = 2.0 / ch.alpha;
  return scheme.wh_moment(ch, t) * scheme.wh_moment(ch, -t);
}

// rho = (7/2) zeta, the void-probability accuracy parameter.
inline double rho(const ChannelModel& ch, const AssociationScheme& scheme) {
  return 3.5 * zeta(ch, scheme);
}

// One composite gain draw; w follows the scheme (nearest: w = 1/h).
inline GainSample sample_gain(const ChannelModel& ch, const AssociationScheme& scheme,
                              CounterRng& rng) {
  double h = rng.exponential(1.0);
  if (ch.sigma_s > 0.0 || ch.mu_s != 0.0) h *= rng.lognormal(ch.mu_s, ch.sigma_s);
  double w;
  switch (scheme.kind()) {
    case AssociationScheme::Kind::NearestBs: w = 1.0 / h; break;
    case AssociationScheme::Kind::MaxReceivedPower: w = 1.0; break;
    case AssociationScheme::Kind::GeneralWeighted: w = scheme.sample_weight(rng); break;
    default: throw std::logic_error("unreachable");
  }
  return GainSample{h, w};
}

}  // namespace greencells
