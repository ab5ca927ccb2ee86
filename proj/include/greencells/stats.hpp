#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace greencells {

// Welford accumulator; merge() is associative so per-trial partials can be
// folded in trial order independent of which thread produced them.
class RunningStat {
public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const RunningStat& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * nb / (na + nb);
    m2_ += o.m2_ + d * d * na * nb / (na + nb);
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double stddev() const { return std::sqrt(variance()); }
  double stderror() const {
    return n_ > 1 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SimEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t trials = 0;
};

inline SimEstimate to_estimate(const RunningStat& s) {
  if (s.count() < 2) throw std::invalid_argument("estimate needs >= 2 trials");
  return SimEstimate{s.mean(), s.stderror(), s.count()};
}

// Asymptotic Kolmogorov distribution Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2)
inline double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    q += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * q));
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::uint64_t n = 0;
};

// One-sample KS test against a caller-supplied CDF.
template <class Cdf>
KsResult ks_test(std::vector<double> samples, Cdf cdf) {
  if (samples.size() < 2) throw std::invalid_argument("ks_test: need >= 2 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::fabs(f - lo), std::fabs(hi - f)));
  }
  const double sq = std::sqrt(n);
  const double p = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
  return KsResult{d, p, samples.size()};
}

}  // namespace greencells
