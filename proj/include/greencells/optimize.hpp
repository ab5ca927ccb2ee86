#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "greencells/analytics.hpp"
#include "greencells/power.hpp"

namespace greencells {

struct NoGreenGapError : std::domain_error {
  NoGreenGapError()
      : std::domain_error("no optimal cell load exists without a power gap (p_on <= p_off)") {}
};

struct MultiModalError : std::runtime_error {
  std::vector<std::pair<double, double>> grid;  // (v, f(v)) evidence
  explicit MultiModalError(std::vector<std::pair<double, double>> g)
      : std::runtime_error("objective is not unimodal on the bracket"), grid(std::move(g)) {}
};

enum class LoadObjective { UserThroughput, GreenCell, GreenUser };

// Everything the three fixed-point maps need. lambda_u must be in the unit
// system matching power.p_min (see transmit_power); intensity_scale applies
// the same conversion used by the green-throughput evaluators.
struct FixedPointProblem {
  LoadObjective kind;
  double beta;
  double alpha;
  double zeta;
  double rho;
  double lambda_u;  // per km^2
  PowerModel power;
  double intensity_scale = 1e-6;

  FixedPointProblem(LoadObjective k, double beta_, double alpha_, double zeta_,
                    double lambda_u_, PowerModel pm, double scale = 1e-6)
      : kind(k), beta(beta_), alpha(alpha_), zeta(zeta_), rho(3.5 * zeta_),
        lambda_u(lambda_u_), power(std::move(pm)), intensity_scale(scale) {
    if (!(beta > 1.0)) throw std::invalid_argument("FixedPointProblem: beta must exceed 1");
  }
};

// L(v) = [1 - (1 + v/rho)^{-rho}]^{1/beta}
inline double map_L(double v, double rho_, double beta) {
  if (!(v >= 0.0)) throw std::invalid_argument("map_L: v must be >= 0");
  if (!(beta > 1.0)) throw std::invalid_argument("map_L: beta must exceed 1");
  return std::pow(nonvoid_prob(v, rho_), 1.0 / beta);
}

namespace detail {

inline double map_lc_lu(double v, const FixedPointProblem& p, int k) {
  if (!(v >= 0.0)) throw std::invalid_argument("fixed-point map: v must be >= 0");
  if (!(p.power.p_on > p.power.p_off)) throw NoGreenGapError();
  const double gap = (p.power.p_on - p.power.p_off) /
                     (p.power.delta * p.power.p_min * std::tgamma(1.0 + 2.0 / p.alpha));
  const double inner = std::pow(nonvoid_prob(v, p.rho), -static_cast<double>(k) / p.beta) - 1.0;
  const double e = (k == 1) ? 2.0 / p.alpha : 2.0 / (p.alpha + p.beta);
  return M_PI * p.zeta * p.lambda_u * p.intensity_scale * std::pow(gap * inner, e);
}

}  // namespace detail

// Green cell-throughput map (inner exponent -1/beta, outer 2/alpha).
inline double map_LC(double v, const FixedPointProblem& p) { return detail::map_lc_lu(v, p, 1); }

// Green user-throughput map (inner exponent -2/beta, outer 2/(alpha+beta)).
inline double map_LU(double v, const FixedPointProblem& p) { return detail::map_lc_lu(v, p, 2); }

inline double fixed_point_map(double v, const FixedPointProblem& p) {
  switch (p.kind) {
    case LoadObjective::UserThroughput: return map_L(v, p.rho, p.beta);
    case LoadObjective::GreenCell: return map_LC(v, p);
    case LoadObjective::GreenUser: return map_LU(v, p);
  }
  throw std::logic_error("unreachable");
}

enum class FixedPointOutcome { Converged, NoInteriorOptimum, MaxIterations };

struct OptResult {
  double v_star = 0.0;
  double lambda_b_star = 0.0;   // lambda_u / v_star, caller's lambda_u units
  double objective_at_star = 0.0;
  int iterations = 0;
  double residual = 0.0;
  FixedPointOutcome outcome = FixedPointOutcome::NoInteriorOptimum;
  double beta_used = 0.0;
};

struct FixedPointBracket {
  double lo = 1e-4;
  double hi = 100.0;  // p_void is numerically 0 beyond v = 100 for rho >= 3.5
};

// Positive fixed point of map(v) - v by sign-change bracketing plus bisection;
// the trivial root v = 0 of map_L is excluded by starting at bracket.lo.
inline OptResult solve_fixed_point(const std::function<double(double)>& map, double tol = 1e-12,
                                   int max_iter = 200,
                                   FixedPointBracket bracket = FixedPointBracket{}) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");
  const auto f = [&](double v) { return map(v) - v; };
  constexpr int kScan = 512;
  const double ratio = std::pow(bracket.hi / bracket.lo, 1.0 / (kScan - 1));
  double a = bracket.lo, fa = f(a);
  double b = 0.0;
  bool found = false;
  double x = bracket.lo;
  for (int i = 1; i < kScan; ++i) {
    x *= ratio;
    const double fx = f(x);
    if (fa > 0.0 && fx <= 0.0) {
      b = x;
      found = true;
      break;
    }
    a = x;
    fa = fx;
  }
  OptResult r;
  if (!found) {
    r.outcome = FixedPointOutcome::NoInteriorOptimum;
    return r;
  }
  int it = 0;
  double m = 0.5 * (a + b);
  double fm = f(m);
  while (it < max_iter) {
    m = 0.5 * (a + b);
    fm = f(m);
    ++it;
    if (fm > 0.0) a = m; else b = m;
    if (std::fabs(fm) < tol) break;
    // bracket pinned to machine width; the residual floor is the map's own
    // floating-point noise
    if ((b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, m)) break;
  }
  r.v_star = m;
  r.residual = std::fabs(fm);
  r.iterations = it;
  r.outcome =
      r.residual < tol ? FixedPointOutcome::Converged : FixedPointOutcome::MaxIterations;
  return r;
}

// Plain Picard iteration v <- map(v); second, independent solver used as an
// oracle where the map is contractive (map_L is).
inline OptResult fixed_point_iteration(const std::function<double(double)>& map, double v0,
                                       double tol = 1e-12, int max_iter = 10000) {
  double v = v0;
  OptResult r;
  for (int i = 0; i < max_iter; ++i) {
    const double next = map(v);
    if (std::fabs(next - v) < tol) {
      r.v_star = next;
      r.iterations = i + 1;
      r.residual = std::fabs(map(next) - next);
      r.outcome = FixedPointOutcome::Converged;
      return r;
    }
    v = next;
  }
  r.v_star = v;
  r.iterations = max_iter;
  r.residual = std::fabs(map(v) - v);
  r.outcome = FixedPointOutcome::MaxIterations;
  return r;
}

// Solve the problem's own map and fill the deployment fields.
inline OptResult solve_problem(const FixedPointProblem& p, double tol = 1e-10,
                               FixedPointBracket bracket = FixedPointBracket{1e-6, 5000.0}) {
  OptResult r = solve_fixed_point([&](double v) { return fixed_point_map(v, p); }, tol, 200,
                                  bracket);
  r.beta_used = p.beta;
  if (r.outcome == FixedPointOutcome::Converged && r.v_star > 0.0)
    r.lambda_b_star = p.lambda_u / r.v_star;
  return r;
}

struct MaximizeResult {
  double v_opt = 0.0;
  double value = 0.0;
};

// Golden-section maximization with a unimodality pre-scan on a log grid.
inline MaximizeResult maximize_direct(const std::function<double(double)>& f, double lo,
                                      double hi, double tol = 1e-8, int grid_points = 64) {
  if (!(hi > lo && lo > 0.0)) throw std::invalid_argument("maximize_direct: bad bracket");
  std::vector<std::pair<double, double>> grid(grid_points);
  const double ratio = std::pow(hi / lo, 1.0 / (grid_points - 1));
  double x = lo;
  for (int i = 0; i < grid_points; ++i) {
    grid[i] = {x, f(x)};
    x *= ratio;
  }
  int peak = 0;
  for (int i = 1; i < grid_points; ++i)
    if (grid[i].second > grid[peak].second) peak = i;
  // tolerate flat stretches; flag genuine rises after the descent
  const double fuzz = 1e-11 * std::fabs(grid[peak].second) + 1e-300;
  for (int i = 1; i < peak; ++i)
    if (grid[i].second < grid[i - 1].second - fuzz &&
        grid[peak].second > grid[i].second + fuzz)
      throw MultiModalError(grid);
  for (int i = peak + 1; i < grid_points; ++i)
    if (grid[i].second > grid[i - 1].second + fuzz) throw MultiModalError(grid);

  double a = grid[std::max(0, peak - 1)].first;
  double b = grid[std::min(grid_points - 1, peak + 1)].first;
  constexpr double kGolden = 0.6180339887498949;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while ((b - a) > tol * std::max(1.0, std::fabs(a) + std::fabs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  const double v = 0.5 * (a + b);
  return MaximizeResult{v, f(v)};
}

struct CalibrationResult {
  double beta = 0.0;
  double v_fixed = 0.0;
  double v_direct = 0.0;
  double rel_mismatch = 0.0;
  bool warning = false;  // no beta reached 5% agreement; beta holds best candidate
};

// Find beta such that the fixed point of the chosen map lands on the directly
// maximized optimum. Since map(v_opt; beta) is continuous in beta, an exact
// root of map(v_opt; beta) = v_opt calibrates the fixed point onto v_opt.
inline CalibrationResult calibrate_beta(const FixedPointProblem& prototype, double v_direct,
                                        double beta_lo = 1.0 + 1e-9, double beta_hi = 20.0) {
  if (!(beta_lo > 1.0 && beta_hi > beta_lo))
    throw std::invalid_argument("calibrate_beta: search range must sit inside (1, inf)");
  FixedPointProblem p = prototype;
  const auto g = [&](double beta) {
    p.beta = beta;
    return fixed_point_map(v_direct, p) - v_direct;
  };
  constexpr int kScan = 400;
  const double step = (beta_hi - beta_lo) / (kScan - 1);
  double a = beta_lo, ga = g(a);
  CalibrationResult res;
  res.v_direct = v_direct;
  for (int i = 1; i < kScan; ++i) {
    const double b = beta_lo + i * step;
    const double gb = g(b);
    if ((ga <= 0.0 && gb >= 0.0) || (ga >= 0.0 && gb <= 0.0)) {
      double x0 = a, x1 = b;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (x0 + x1);
        const double gm = g(m);
        if ((gm <= 0.0) == (ga <= 0.0)) x0 = m; else x1 = m;
        if (x1 - x0 < 1e-13 * std::max(1.0, m)) break;
      }
      res.beta = 0.5 * (x0 + x1);
      p.beta = res.beta;
      const OptResult fp = solve_fixed_point([&](double v) { return fixed_point_map(v, p); },
                                             1e-10, 200, FixedPointBracket{1e-6, 5000.0});
      res.v_fixed = fp.v_star;
      res.rel_mismatch = std::fabs(fp.v_star - v_direct) / v_direct;
      res.warning = res.rel_mismatch > 0.05;
      return res;
    }
    a = b;
    ga = gb;
  }
  // No calibrating beta exists in range: report the closest fixed point.
  double best_beta = beta_lo, best_miss = HUGE_VAL, best_fp = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double beta = beta_lo + (beta_hi - beta_lo) * i / 39.0;
    p.beta = beta;
    const OptResult fp = solve_fixed_point([&](double v) { return fixed_point_map(v, p); },
                                           1e-10, 200, FixedPointBracket{1e-6, 5000.0});
    if (fp.outcome != FixedPointOutcome::Converged) continue;
    const double miss = std::fabs(fp.v_star - v_direct);
    if (miss < best_miss) {
      best_miss = miss;
      best_beta = beta;
      best_fp = fp.v_star;
    }
  }
  res.beta = best_beta;
  res.v_fixed = best_fp;
  res.rel_mismatch = best_miss / v_direct;
  res.warning = true;
  return res;
}

struct SweepRow {
  double lambda_u = 0.0;
  double v_star = 0.0;
  double lambda_b_star = 0.0;
  double objective = 0.0;
  double beta = 0.0;
  bool ok = false;
  std::string message;
};

// Per-lambda_u optimal deployment via the fixed point at a fixed beta.
inline std::vector<SweepRow> sweep_optimal_intensity(const std::vector<double>& lambda_u_grid,
                                                     const FixedPointProblem& prototype) {
  if (lambda_u_grid.empty())
    throw std::invalid_argument("sweep_optimal_intensity: empty grid");
  std::vector<SweepRow> rows;
  rows.reserve(lambda_u_grid.size());
  for (double lam_u : lambda_u_grid) {
    SweepRow row;
    row.lambda_u = lam_u;
    row.beta = prototype.beta;
    try {
      FixedPointProblem p = prototype;
      p.lambda_u = lam_u;
      const OptResult r = solve_fixed_point([&](double v) { return fixed_point_map(v, p); },
                                            1e-10, 200, FixedPointBracket{1e-6, 5000.0});
      if (r.outcome == FixedPointOutcome::Converged) {
        row.v_star = r.v_star;
        row.lambda_b_star = lam_u / r.v_star;
        row.ok = true;
      } else {
        row.message = "no interior fixed point";
      }
    } catch (const std::exception& e) {
      row.message = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace greencells
