#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

namespace greencells {

// Gauss-Hermite rule for E[f(Z)], Z standard normal via x -> sqrt(2) sigma x + mu.
// Weights carry the 1/sqrt(pi) normalization so they sum to exactly 1.
struct QuadratureRule {
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Physicists' Hermite polynomial H_n(x) by upward recurrence.
inline double eval_hermite(int n, double x) {
  if (n < 0) throw std::invalid_argument("eval_hermite: n < 0");
  double hm1 = 0.0, h = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = 2.0 * x * h - 2.0 * k * hm1;
    hm1 = h;
    h = next;
  }
  return h;
}

// Nodes are the roots of H_n found by Newton iteration on the orthonormal
// recurrence; weights come from the derivative identity (equivalent to the
// Golub-Welsch values) and are divided by sqrt(pi).
inline QuadratureRule gauss_hermite(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_hermite: order must be in [1,64]");
  constexpr double kPiQuarter = 0.7511255444649425;  // pi^{-1/4}
  constexpr double kSqrtPi = 1.7724538509055160273;
  QuadratureRule rule;
  rule.n = n;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = kPiQuarter, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-15 * (1.0 + std::fabs(z))) break;
    }
    rule.nodes[i] = z;                      // descending positive half
    rule.weights[i] = 2.0 / (pp * pp) / kSqrtPi;
  }
  // mirror and order ascending
  std::vector<double> x(n), w(n);
  for (int i = 0; i < half; ++i) {
    x[n - 1 - i] = rule.nodes[i];
    w[n - 1 - i] = rule.weights[i];
    x[i] = -rule.nodes[i];
    w[i] = rule.weights[i];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  rule.nodes = std::move(x);
  rule.weights = std::move(w);
  return rule;
}

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1,1].
inline constexpr double kKronrodX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussW[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  const double fc = f(c);
  double kron = kKronrodW[7] * fc;
  double gauss = kGaussW[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kKronrodX[j];
    const double fsum = f(c - dx) + f(c + dx);
    kron += kKronrodW[j] * fsum;
    if (j % 2 == 1) gauss += kGaussW[j / 2] * fsum;
  }
  value = kron * h;
  const double diff = std::fabs(kron - gauss) * std::fabs(h);
  error = diff > 0.0 ? std::min(diff, 200.0 * diff * std::sqrt(200.0 * diff)) : 0.0;
  if (!(error > 0.0)) error = diff;
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration on a finite interval.
// Refines the worst segment until sum of errors meets max(abs_tol, rel_tol*|I|).
template <class F>
double adaptive_integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                          double rel_tol = 1e-9, int max_segments = 4000) {
  if (!(b >= a)) throw std::invalid_argument("adaptive_integrate: bad interval");
  if (a == b) return 0.0;
  std::priority_queue<detail::Segment> segs;
  double value, error;
  detail::gk15(f, a, b, value, error);
  segs.push({a, b, value, error});
  double total = value, total_err = error;
  int n = 1;
  const double min_width = 1e-14 * (b - a);
  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) && n < max_segments) {
    detail::Segment s = segs.top();
    if (s.b - s.a < min_width) break;
    segs.pop();
    const double m = 0.5 * (s.a + s.b);
    detail::Segment l{s.a, m, 0, 0}, r{m, s.b, 0, 0};
    detail::gk15(f, l.a, l.b, l.value, l.error);
    detail::gk15(f, r.a, r.b, r.value, r.error);
    total += l.value + r.value - s.value;
    total_err += l.error + r.error - s.error;
    segs.push(l);
    segs.push(r);
    ++n;
  }
  return total;
}

// Integral over [0, inf) by splitting at 1 and folding the tail with t -> 1/t.
template <class F>
double integrate_half_line(const F& f, double abs_tol = 1e-10, double rel_tol = 1e-9) {
  const double head = adaptive_integrate(f, 0.0, 1.0, abs_tol * 0.5, rel_tol);
  const auto tail = [&f](double t) {
    if (t <= 0.0) return 0.0;
    const double s = 1.0 / t;
    return f(s) * s * s;
  };
  return head + adaptive_integrate(tail, 0.0, 1.0, abs_tol * 0.5, rel_tol);
}

}  // namespace greencells
