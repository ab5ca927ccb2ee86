#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "greencells/analytics.hpp"
#include "greencells/channel.hpp"
#include "greencells/rng.hpp"
#include "greencells/stats.hpp"

namespace greencells {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Square torus window; toroidal metric removes edge effects.
struct SimWindow {
  double side;  // km

  explicit SimWindow(double side_km) : side(side_km) {
    if (!(side > 0.0)) throw std::invalid_argument("SimWindow: side must be positive");
  }

  double area() const { return side * side; }

  double dist2(const Vec2& a, const Vec2& b) const {
    double dx = std::fabs(a.x - b.x);
    double dy = std::fabs(a.y - b.y);
    if (dx > 0.5 * side) dx = side - dx;
    if (dy > 0.5 * side) dy = side - dy;
    return dx * dx + dy * dy;
  }
};

inline SimWindow window_for_expected_bs(double lambda_b, double expected_bs) {
  if (!(lambda_b > 0.0 && expected_bs > 0.0))
    throw std::invalid_argument("window_for_expected_bs: positive inputs required");
  return SimWindow(std::sqrt(expected_bs / lambda_b));
}

struct SimConfig {
  SimWindow window;
  double lambda_u;  // users per km^2
  double lambda_b;  // BSs per km^2
  ChannelModel channel;
  AssociationScheme scheme;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  int threads = 0;                       // 0 -> hardware concurrency
  bool fresh_interference_gains = true;  // fresh vs association-reused draws
  std::ostream* sample_sink = nullptr;   // optional line-delimited per-trial samples

  SimConfig(SimWindow w, double lam_u, double lam_b, ChannelModel ch, AssociationScheme sc)
      : window(w), lambda_u(lam_u), lambda_b(lam_b), channel(ch), scheme(sc) {
    if (!(lambda_u >= 0.0 && lambda_b > 0.0))
      throw std::invalid_argument("SimConfig: bad intensities");
  }

  bool window_below_production_floor() const { return lambda_b * window.area() < 500.0; }
};

// Lazily realized i.i.d. gain marks: every (trial, user, BS) pair gets its own
// deterministic stream, so association order never matters.
class GainField {
public:
  GainField(std::uint64_t seed, std::uint64_t trial, const ChannelModel& ch,
            const AssociationScheme& scheme)
      : seed_(seed), trial_(trial), channel_(ch), scheme_(scheme) {}

  GainSample pair_gain(std::uint32_t user, std::uint32_t bs) const {
    CounterRng rng(seed_, stream::pair_gain, trial_,
                   (static_cast<std::uint64_t>(user) << 32) | bs);
    return sample_gain(channel_, scheme_, rng);
  }

  GainSample probe_gain(std::uint32_t bs) const {
    CounterRng rng(seed_, stream::probe_association, trial_, bs);
    return sample_gain(channel_, scheme_, rng);
  }

  double interference_gain(std::uint32_t bs) const {
    CounterRng rng(seed_, stream::interference_gain, trial_, bs);
    return sample_gain(channel_, scheme_, rng).h;
  }

private:
  std::uint64_t seed_, trial_;
  ChannelModel channel_;
  AssociationScheme scheme_;
};

struct PointPattern {
  std::vector<Vec2> bs;
  std::vector<Vec2> users;
  std::uint64_t trial = 0;
};

// count ~ Poisson(intensity * area), positions i.i.d. uniform on the square
inline std::vector<Vec2> sample_ppp(double intensity, const SimWindow& window,
                                    CounterRng& rng) {
  if (!(intensity >= 0.0)) throw std::invalid_argument("sample_ppp: negative intensity");
  const std::uint64_t n = rng.poisson(intensity * window.area());
  std::vector<Vec2> pts(n);
  for (auto& p : pts) {
    p.x = rng.uniform(0.0, window.side);
    p.y = rng.uniform(0.0, window.side);
  }
  return pts;
}

inline PointPattern sample_pattern(const SimConfig& cfg, std::uint64_t trial) {
  PointPattern pat;
  pat.trial = trial;
  CounterRng rb(cfg.seed, stream::bs_points, trial, 0);
  CounterRng ru(cfg.seed, stream::user_points, trial, 0);
  pat.bs = sample_ppp(cfg.lambda_b, cfg.window, rb);
  pat.users = sample_ppp(cfg.lambda_u, cfg.window, ru);
  return pat;
}

// Uniform bucket grid for nearest-point queries under the toroidal metric.
class NeighborGrid {
public:
  NeighborGrid(const std::vector<Vec2>& pts, const SimWindow& window)
      : pts_(pts), side_(window.side) {
    const std::size_t n = std::max<std::size_t>(pts.size(), 1);
    m_ = std::max<int>(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
    cell_ = side_ / m_;
    buckets_.assign(static_cast<std::size_t>(m_) * m_, {});
    for (std::uint32_t i = 0; i < pts.size(); ++i)
      buckets_[bucket_of(pts[i])].push_back(i);
  }

  // index of the nearest point and its squared toroidal distance
  std::pair<std::uint32_t, double> nearest(const Vec2& q) const {
    if (pts_.empty()) throw std::invalid_argument("NeighborGrid: empty point set");
    const int qx = cell_index(q.x);
    const int qy = cell_index(q.y);
    std::uint32_t best = 0;
    double best_d2 = HUGE_VAL;
    const int max_ring = m_ / 2 + 1;
    for (int ring = 0; ring <= max_ring; ++ring) {
      // once the best hit is closer than the nearest possible point of this
      // ring, no farther ring can win
      if (ring > 0) {
        const double ring_min = (ring - 1) * cell_;
        if (best_d2 <= ring_min * ring_min) break;
      }
      scan_ring(qx, qy, ring, q, best, best_d2);
      if (ring >= max_ring) break;  // whole torus scanned
    }
    return {best, best_d2};
  }

private:
  int cell_index(double coord) const {
    int i = static_cast<int>(coord / cell_);
    if (i >= m_) i = m_ - 1;
    if (i < 0) i = 0;
    return i;
  }

  std::size_t bucket_of(const Vec2& p) const {
    return static_cast<std::size_t>(cell_index(p.y)) * m_ + cell_index(p.x);
  }

  void scan_bucket(int bx, int by, const Vec2& q, std::uint32_t& best,
                   double& best_d2) const {
    bx = ((bx % m_) + m_) % m_;
    by = ((by % m_) + m_) % m_;
    for (std::uint32_t i : buckets_[static_cast<std::size_t>(by) * m_ + bx]) {
      double dx = std::fabs(pts_[i].x - q.x);
      double dy = std::fabs(pts_[i].y - q.y);
      if (dx > 0.5 * side_) dx = side_ - dx;
      if (dy > 0.5 * side_) dy = side_ - dy;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
  }

  void scan_ring(int qx, int qy, int ring, const Vec2& q, std::uint32_t& best,
                 double& best_d2) const {
    if (ring == 0) {
      scan_bucket(qx, qy, q, best, best_d2);
      return;
    }
    if (2 * ring >= m_) {
      // ring wraps the torus; scan everything once
      for (int y = 0; y < m_; ++y)
        for (int x = 0; x < m_; ++x) scan_bucket(x, y, q, best, best_d2);
      return;
    }
    for (int dx = -ring; dx <= ring; ++dx) {
      scan_bucket(qx + dx, qy - ring, q, best, best_d2);
      scan_bucket(qx + dx, qy + ring, q, best, best_d2);
    }
    for (int dy = -ring + 1; dy <= ring - 1; ++dy) {
      scan_bucket(qx - ring, qy + dy, q, best, best_d2);
      scan_bucket(qx + ring, qy + dy, q, best, best_d2);
    }
  }

  const std::vector<Vec2>& pts_;
  double side_;
  int m_ = 1;
  double cell_ = 0.0;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

struct AssignmentTable {
  std::vector<std::uint32_t> serving;       // per user
  std::vector<std::uint32_t> users_per_bs;  // per BS
  std::vector<std::uint8_t> occupied;       // V_i: 1 iff the BS serves anyone

  double void_fraction() const {
    if (occupied.empty()) throw std::invalid_argument("void_fraction: no BSs");
    std::size_t voids = 0;
    for (std::uint8_t o : occupied) voids += (o == 0);
    return static_cast<double>(voids) / static_cast<double>(occupied.size());
  }
};

struct OccupancySummary {
  double void_fraction = 1.0;
  double mean_users_nonvoid = 0.0;  // per non-void cell
  double occupancy = 0.0;           // mean_users_nonvoid / (1 - void_fraction)
  bool usable = false;
};

inline OccupancySummary occupancy_from_counts(const std::vector<std::uint32_t>& users_per_bs) {
  OccupancySummary s;
  if (users_per_bs.empty()) return s;
  std::uint64_t users = 0, nonvoid = 0;
  for (std::uint32_t c : users_per_bs) {
    users += c;
    nonvoid += (c > 0);
  }
  s.void_fraction = 1.0 - static_cast<double>(nonvoid) / static_cast<double>(users_per_bs.size());
  if (nonvoid == 0 || s.void_fraction >= 1.0) return s;
  s.mean_users_nonvoid = static_cast<double>(users) / static_cast<double>(nonvoid);
  s.occupancy = s.mean_users_nonvoid / (1.0 - s.void_fraction);
  s.usable = true;
  return s;
}

// GCA assignment: every user picks argmax_w w h d^{-alpha}; nearest-BS
// association reduces to exact minimum-distance assignment. Gains is any
// provider with pair_gain/probe_gain/interference_gain (GainField in
// production, stubs in tests).
template <class Gains>
AssignmentTable associate(const PointPattern& pat, const SimConfig& cfg,
                          const Gains& gains) {
  if (pat.bs.empty()) throw std::invalid_argument("associate: empty BS set");
  AssignmentTable table;
  table.serving.assign(pat.users.size(), 0);
  table.users_per_bs.assign(pat.bs.size(), 0);
  table.occupied.assign(pat.bs.size(), 0);

  if (cfg.scheme.kind() == AssociationScheme::Kind::NearestBs) {
    NeighborGrid grid(pat.bs, cfg.window);
    for (std::uint32_t u = 0; u < pat.users.size(); ++u)
      table.serving[u] = grid.nearest(pat.users[u]).first;
  } else {
    const double half_alpha = 0.5 * cfg.channel.alpha;
    for (std::uint32_t u = 0; u < pat.users.size(); ++u) {
      double best = -HUGE_VAL;
      std::uint32_t best_b = 0;
      for (std::uint32_t b = 0; b < pat.bs.size(); ++b) {
        const GainSample g = gains.pair_gain(u, b);
        const double metric =
            g.w * g.h / std::pow(cfg.window.dist2(pat.users[u], pat.bs[b]), half_alpha);
        if (metric > best) {
          best = metric;
          best_b = b;
        }
      }
      table.serving[u] = best_b;
    }
  }
  for (std::uint32_t b : table.serving) ++table.users_per_bs[b];
  for (std::size_t b = 0; b < table.occupied.size(); ++b)
    table.occupied[b] = table.users_per_bs[b] > 0 ? 1 : 0;
  return table;
}

struct SirSample {
  bool censored = false;  // no occupied interferer existed
  double sir = 0.0;
  std::uint32_t serving = 0;
};

// SIR of a probe user at the window center. The probe's serving BS is active
// by construction; interference sums gains over occupied BSs only.
template <class Gains>
SirSample sir_sample(const PointPattern& pat, const AssignmentTable& table,
                     const SimConfig& cfg, const Gains& gains) {
  if (pat.bs.empty()) throw std::invalid_argument("sir_sample: empty BS set");
  const Vec2 center{0.5 * cfg.window.side, 0.5 * cfg.window.side};
  const double half_alpha = 0.5 * cfg.channel.alpha;

  std::uint32_t serving = 0;
  double serving_metric_gain = 1.0;  // winning h when gains drive association
  if (cfg.scheme.kind() == AssociationScheme::Kind::NearestBs) {
    double best_d2 = HUGE_VAL;
    for (std::uint32_t b = 0; b < pat.bs.size(); ++b) {
      const double d2 = cfg.window.dist2(center, pat.bs[b]);
      if (d2 < best_d2) {
        best_d2 = d2;
        serving = b;
      }
    }
  } else {
    double best = -HUGE_VAL;
    for (std::uint32_t b = 0; b < pat.bs.size(); ++b) {
      const GainSample g = gains.probe_gain(b);
      const double metric =
          g.w * g.h / std::pow(cfg.window.dist2(center, pat.bs[b]), half_alpha);
      if (metric > best) {
        best = metric;
        serving = b;
        serving_metric_gain = g.h;
      }
    }
  }

  CounterRng numerator_rng(cfg.seed, stream::probe_gain, pat.trial, serving);
  double h0;
  if (!cfg.fresh_interference_gains &&
      cfg.scheme.kind() != AssociationScheme::Kind::NearestBs) {
    h0 = serving_metric_gain;  // reuse the association-winning draw
  } else {
    h0 = sample_gain(cfg.channel, cfg.scheme, numerator_rng).h;
  }
  const double d0 = std::pow(cfg.window.dist2(center, pat.bs[serving]), half_alpha);

  double interference = 0.0;
  for (std::uint32_t b = 0; b < pat.bs.size(); ++b) {
    if (b == serving || !table.occupied[b]) continue;
    double h;
    if (!cfg.fresh_interference_gains &&
        cfg.scheme.kind() != AssociationScheme::Kind::NearestBs) {
      h = gains.probe_gain(b).h;
    } else {
      h = gains.interference_gain(b);
    }
    interference += h / std::pow(cfg.window.dist2(center, pat.bs[b]), half_alpha);
  }

  SirSample out;
  out.serving = serving;
  if (interference <= 0.0) {
    out.censored = true;
    return out;
  }
  out.sir = (h0 / d0) / interference;
  return out;
}

// Runs fn(trial) for trial in [0, trials) across threads; results land in a
// trial-indexed vector so the fold order is fixed and replay is bit-identical.
template <class T, class Fn>
std::vector<T> parallel_trials(std::uint64_t trials, int threads, Fn fn) {
  std::vector<T> out(trials);
  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, trials == 0 ? 1 : static_cast<unsigned>(
      std::min<std::uint64_t>(trials, 64)));
  if (n_threads <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) out[t] = fn(t);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned i = 0; i < n_threads; ++i) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::uint64_t t = next.fetch_add(1);
        if (t >= trials) return;
        out[t] = fn(t);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

// ---- aggregated experiment runners ----

struct VoidStats {
  SimEstimate void_fraction;
  SimEstimate mean_users_nonvoid;   // per non-void cell of the tessellation
  SimEstimate occupancy;            // paper's E[Phi_U(C0*)] estimator:
                                    // (mean users per non-void cell)/(1 - void fraction)
  SimEstimate couser_mean;          // raw per-user mean size of its cell (size-biased)
  std::uint64_t cells = 0;
};

inline VoidStats run_void_stats(const SimConfig& cfg) {
  struct Row {
    double vf = 0.0, mun = 0.0, occ = 0.0, couser = 0.0;
    std::uint64_t cells = 0;
    bool ok = false;
  };
  auto rows = parallel_trials<Row>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    Row r;
    const PointPattern pat = sample_pattern(cfg, t);
    if (pat.bs.empty() || pat.users.empty()) return r;
    const GainField gains(cfg.seed, t, cfg.channel, cfg.scheme);
    const AssignmentTable table = associate(pat, cfg, gains);
    const OccupancySummary s = occupancy_from_counts(table.users_per_bs);
    if (!s.usable) return r;
    r.vf = s.void_fraction;
    r.mun = s.mean_users_nonvoid;
    r.occ = s.occupancy;
    double cu = 0.0;
    for (std::uint32_t u = 0; u < table.serving.size(); ++u)
      cu += table.users_per_bs[table.serving[u]];
    r.couser = cu / static_cast<double>(table.serving.size());
    r.cells = table.users_per_bs.size();
    r.ok = true;
    return r;
  });
  RunningStat vf, mun, occ, cu;
  std::uint64_t cells = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const Row& r = rows[t];
    if (!r.ok) continue;
    vf.add(r.vf);
    mun.add(r.mun);
    occ.add(r.occ);
    cu.add(r.couser);
    cells += r.cells;
    if (cfg.sample_sink)
      *cfg.sample_sink << "trial " << t << " void_fraction " << r.vf
                       << " mean_users_nonvoid " << r.mun << "\n";
  }
  return VoidStats{to_estimate(vf), to_estimate(mun), to_estimate(occ), to_estimate(cu), cells};
}

// Void fraction alone (users can be absent; every cell is void then).
inline SimEstimate void_fraction(const SimConfig& cfg) {
  auto rows = parallel_trials<double>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    const PointPattern pat = sample_pattern(cfg, t);
    if (pat.bs.empty()) return 1.0;
    if (pat.users.empty()) return 1.0;
    const GainField gains(cfg.seed, t, cfg.channel, cfg.scheme);
    return associate(pat, cfg, gains).void_fraction();
  });
  RunningStat s;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    s.add(rows[t]);
    if (cfg.sample_sink) *cfg.sample_sink << "trial " << t << " void_fraction " << rows[t] << "\n";
  }
  return to_estimate(s);
}

struct SirStats {
  SimEstimate rate_bits;             // E[log2(1 + SIR)]
  SimEstimate coverage;              // P[SIR >= threshold]
  SimEstimate occupancy;             // composite E[Phi_U(C0*)] estimator
  SimEstimate user_throughput;       // rate / occupancy, delta-method stderr
  std::uint64_t censored = 0;
  std::uint64_t samples = 0;
};

inline SirStats run_sir_stats(const SimConfig& cfg, double coverage_threshold = 1.0) {
  struct Row {
    double rate = 0.0, cov = 0.0, vf = 0.0, mun = 0.0;
    bool censored = false, ok = false;
  };
  auto rows = parallel_trials<Row>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    Row r;
    const PointPattern pat = sample_pattern(cfg, t);
    if (pat.bs.size() < 2) return r;
    const GainField gains(cfg.seed, t, cfg.channel, cfg.scheme);
    const AssignmentTable table = associate(pat, cfg, gains);
    const SirSample s = sir_sample(pat, table, cfg, gains);
    if (s.censored) {
      r.censored = true;
      return r;
    }
    r.rate = std::log2(1.0 + s.sir);
    r.cov = s.sir >= coverage_threshold ? 1.0 : 0.0;
    const OccupancySummary occ_s = occupancy_from_counts(table.users_per_bs);
    r.vf = occ_s.void_fraction;
    if (occ_s.usable) r.mun = occ_s.occupancy;
    r.ok = true;
    return r;
  });
  RunningStat rate, cov, occ;
  std::uint64_t censored = 0, samples = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const Row& r = rows[t];
    if (r.censored) {
      ++censored;
      if (cfg.sample_sink) *cfg.sample_sink << "trial " << t << " censored 1\n";
      continue;
    }
    if (!r.ok) continue;
    rate.add(r.rate);
    cov.add(r.cov);
    if (r.mun > 0.0) occ.add(r.mun);
    ++samples;
    if (cfg.sample_sink)
      *cfg.sample_sink << "trial " << t << " rate_bits " << r.rate << " void_fraction "
                       << r.vf << "\n";
  }
  SirStats out;
  out.rate_bits = to_estimate(rate);
  out.coverage = to_estimate(cov);
  out.occupancy = to_estimate(occ);
  const double tu = out.rate_bits.mean / out.occupancy.mean;
  const double rel = std::sqrt(
      std::pow(out.rate_bits.stderr_ / out.rate_bits.mean, 2.0) +
      std::pow(out.occupancy.stderr_ / out.occupancy.mean, 2.0));
  out.user_throughput = SimEstimate{tu, tu * rel, samples};
  out.censored = censored;
  out.samples = samples;
  return out;
}

struct CellThroughputStats {
  SimEstimate tc;                 // E[rate] * E[1/area of serving cell]
  SimEstimate inv_area;           // per km^2
  std::uint64_t skipped_cells = 0;  // non-void cells the probe pass missed
};

// E[1/A] over non-void cells: Voronoi probe areas for nearest association,
// user-count/lambda_u proxy (documented bias) for weighted schemes.
inline CellThroughputStats run_cell_throughput(const SimConfig& cfg,
                                               int probes_per_cell = 400) {
  struct Row {
    double rate = 0.0, inv_area = 0.0;
    std::uint64_t skipped = 0;
    bool ok = false;
  };
  const bool voronoi = cfg.scheme.kind() == AssociationScheme::Kind::NearestBs;
  auto rows = parallel_trials<Row>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    Row r;
    const PointPattern pat = sample_pattern(cfg, t);
    if (pat.bs.size() < 2 || pat.users.empty()) return r;
    const GainField gains(cfg.seed, t, cfg.channel, cfg.scheme);
    const AssignmentTable table = associate(pat, cfg, gains);
    const SirSample s = sir_sample(pat, table, cfg, gains);
    if (s.censored) return r;
    r.rate = std::log2(1.0 + s.sir);

    RunningStat inv;
    if (voronoi) {
      NeighborGrid grid(pat.bs, cfg.window);
      const std::uint64_t n_probes =
          static_cast<std::uint64_t>(probes_per_cell) * pat.bs.size();
      std::vector<std::uint32_t> hits(pat.bs.size(), 0);
      CounterRng prng(cfg.seed, stream::probes, t, 0);
      for (std::uint64_t i = 0; i < n_probes; ++i) {
        const Vec2 q{prng.uniform(0.0, cfg.window.side), prng.uniform(0.0, cfg.window.side)};
        ++hits[grid.nearest(q).first];
      }
      const double probe_area = cfg.window.area() / static_cast<double>(n_probes);
      for (std::size_t b = 0; b < pat.bs.size(); ++b) {
        if (!table.occupied[b]) continue;
        if (hits[b] == 0) {
          ++r.skipped;
          continue;
        }
        inv.add(1.0 / (hits[b] * probe_area));
      }
    } else {
      for (std::size_t b = 0; b < pat.bs.size(); ++b) {
        if (!table.occupied[b]) continue;
        inv.add(cfg.lambda_u / static_cast<double>(table.users_per_bs[b]));
      }
    }
    if (inv.count() == 0) return r;
    r.inv_area = inv.mean();
    r.ok = true;
    return r;
  });
  RunningStat rate, inv;
  std::uint64_t skipped = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const Row& r = rows[t];
    if (!r.ok) continue;
    rate.add(r.rate);
    inv.add(r.inv_area);
    skipped += r.skipped;
    if (cfg.sample_sink)
      *cfg.sample_sink << "trial " << t << " rate_bits " << r.rate << " inv_area_per_km2 "
                       << r.inv_area << "\n";
  }
  // factorized estimator E[rate] * E[1/A], stderr by the delta method
  const SimEstimate rate_est = to_estimate(rate);
  const SimEstimate inv_est = to_estimate(inv);
  const double tc_mean = rate_est.mean * inv_est.mean;
  const double rel = std::sqrt(std::pow(rate_est.stderr_ / rate_est.mean, 2.0) +
                               std::pow(inv_est.stderr_ / inv_est.mean, 2.0));
  return CellThroughputStats{SimEstimate{tc_mean, tc_mean * rel, rate_est.trials}, inv_est,
                             skipped};
}

struct VoronoiMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  std::uint64_t cells = 0;
  bool low_probe_warning = false;  // some cell saw < 20 probes
};

// Probe Monte Carlo moments of normalized Voronoi areas (lambda_b * area).
inline VoronoiMoments voronoi_area_stats(const std::vector<Vec2>& bs_points,
                                         const SimWindow& window, std::uint64_t probes,
                                         CounterRng& rng) {
  if (bs_points.size() < 10)
    throw std::invalid_argument("voronoi_area_stats: need at least 10 BSs");
  NeighborGrid grid(bs_points, window);
  std::vector<std::uint64_t> hits(bs_points.size(), 0);
  for (std::uint64_t i = 0; i < probes; ++i) {
    const Vec2 q{rng.uniform(0.0, window.side), rng.uniform(0.0, window.side)};
    ++hits[grid.nearest(q).first];
  }
  const double scale = static_cast<double>(bs_points.size()) / static_cast<double>(probes);
  double m1 = 0.0;
  for (std::uint64_t h : hits) m1 += h * scale;
  m1 /= static_cast<double>(bs_points.size());
  double m2 = 0.0, m3 = 0.0;
  bool low = false;
  for (std::uint64_t h : hits) {
    const double a = h * scale - m1;
    m2 += a * a;
    m3 += a * a * a;
    low = low || (h < 20);
  }
  m2 /= static_cast<double>(bs_points.size() - 1);
  m3 /= static_cast<double>(bs_points.size());
  VoronoiMoments out;
  out.mean = m1;
  out.variance = m2;
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.cells = bs_points.size();
  out.low_probe_warning = low;
  return out;
}

// Trial-aggregated normalized-area moments at the configured intensity.
inline VoronoiMoments run_voronoi_stats(const SimConfig& cfg, int probes_per_cell = 400) {
  auto rows = parallel_trials<VoronoiMoments>(cfg.trials, cfg.threads, [&](std::uint64_t t) {
    CounterRng rb(cfg.seed, stream::bs_points, t, 0);
    const std::vector<Vec2> bs = sample_ppp(cfg.lambda_b, cfg.window, rb);
    if (bs.size() < 10) return VoronoiMoments{};
    CounterRng pr(cfg.seed, stream::probes, t, 0);
    return voronoi_area_stats(bs, cfg.window,
                              static_cast<std::uint64_t>(probes_per_cell) * bs.size(), pr);
  });
  // pooled moments weighted by cell count
  double w = 0.0, mean = 0.0;
  for (const auto& r : rows) {
    if (r.cells == 0) continue;
    w += static_cast<double>(r.cells);
    mean += r.mean * static_cast<double>(r.cells);
  }
  if (w == 0.0) throw std::runtime_error("run_voronoi_stats: no usable trials");
  mean /= w;
  double var = 0.0, skew = 0.0;
  std::uint64_t cells = 0;
  bool low = false;
  for (const auto& r : rows) {
    if (r.cells == 0) continue;
    var += r.variance * static_cast<double>(r.cells);
    skew += r.skewness * static_cast<double>(r.cells);
    cells += r.cells;
    low = low || r.low_probe_warning;
  }
  var /= w;
  skew /= w;
  return VoronoiMoments{mean, var, skew, cells, low};
}

struct ConservationReport {
  double ks_statistic = 0.0;
  double p_value = 0.0;
  double mapped_intensity = 0.0;  // lambda * E[(WH)^{2/alpha}]
  std::uint64_t trials = 0;
};

// Distribution-level check of the random conservation property in the 2-D diagonal
// case: map each point by (WH)^{-1/alpha}, collect the nearest mapped distance
// across trials and KS-test distance^2 against Exp(pi lambda E[(WH)^{2/a}]).
template <class WhSampler>
ConservationReport conservation_check_wh(double lambda, double alpha, WhSampler&& sample_wh,
                                         double wh_moment_2a, std::uint64_t trials,
                                         std::uint64_t seed, int threads = 0) {
  if (trials < 500) throw std::invalid_argument("conservation_check: need >= 500 trials");
  if (!(lambda > 0.0 && alpha > 2.0 && wh_moment_2a > 0.0))
    throw std::invalid_argument("conservation_check: bad parameters");
  const double lambda_hat = lambda * wh_moment_2a;
  // sampling disc comfortably larger than the typical nearest mapped distance
  const double r_typ = 1.0 / std::sqrt(M_PI * lambda_hat);
  const double radius = 32.0 * r_typ;
  auto d2s = parallel_trials<double>(trials, threads, [&](std::uint64_t t) {
    CounterRng rng(seed, stream::conservation, t, 0);
    const std::uint64_t n = rng.poisson(lambda * M_PI * radius * radius);
    double best = HUGE_VAL;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double r = radius * std::sqrt(rng.uniform01());
      const double wh = sample_wh(rng);
      const double mapped = r * std::pow(wh, -1.0 / alpha);
      best = std::min(best, mapped);
    }
    return best * best;
  });
  const double rate = M_PI * lambda_hat;
  const KsResult ks = ks_test(std::move(d2s), [rate](double x) {
    return x <= 0.0 ? 0.0 : -std::expm1(-rate * x);
  });
  return ConservationReport{ks.statistic, ks.p_value, lambda_hat, trials};
}

inline ConservationReport conservation_check(double lambda, const AssociationScheme& scheme,
                                             const ChannelModel& channel, std::uint64_t trials,
                                             std::uint64_t seed, int threads = 0) {
  const double m2a = scheme.wh_moment(channel, 2.0 / channel.alpha);
  switch (scheme.kind()) {
    case AssociationScheme::Kind::NearestBs:
      return conservation_check_wh(
          lambda, channel.alpha, [](CounterRng&) { return 1.0; }, 1.0, trials, seed, threads);
    default:
      return conservation_check_wh(
          lambda, channel.alpha,
          [&](CounterRng& rng) {
            const GainSample g = sample_gain(channel, scheme, rng);
            return g.w * g.h;
          },
          m2a, trials, seed, threads);
  }
}

}  // namespace greencells
