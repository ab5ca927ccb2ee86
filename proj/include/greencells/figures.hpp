#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "greencells/csv.hpp"
#include "greencells/optimize.hpp"
#include "greencells/power.hpp"
#include "greencells/scenario.hpp"
#include "greencells/sim.hpp"

namespace greencells {

struct FigureOutput {
  std::vector<std::string> files;
  std::vector<std::string> failures;  // per-row failure manifest
  std::vector<std::string> warnings;
};

namespace detail {

struct Curve {
  std::string label;
  SchemeKind scheme;
  double sigma_db;
};

inline std::vector<Curve> figure_curves(const Scenario& s) {
  (void)s;
  return {{"nearest", SchemeKind::Nearest, 0.0},
          {"maxpower_4db", SchemeKind::MaxPower, 4.0},
          {"maxpower_8db", SchemeKind::MaxPower, 8.0}};
}

inline Scenario with_curve(Scenario s, const Curve& c) {
  s.scheme = c.scheme;
  s.shadow_sigma_db = c.sigma_db;
  return s;
}

inline SimConfig sim_config(const Scenario& s, double cell_load) {
  const double lambda_b = s.lambda_u_per_km2 / cell_load;
  SimConfig cfg(window_for_expected_bs(lambda_b, s.window_expected_bs), s.lambda_u_per_km2,
                lambda_b, s.channel(), s.association());
  cfg.trials = s.trials;
  cfg.seed = s.seed;
  cfg.threads = s.threads;
  cfg.fresh_interference_gains = !s.sir_gain_reuse;
  return cfg;
}

inline std::string out_path(const Scenario& s, const std::string& name) {
  std::filesystem::create_directories(s.out_dir);
  return (std::filesystem::path(s.out_dir) / name).string();
}

}  // namespace detail

// Void probability against cell load: analytic curve, its two-sided bounds and
// the simulated fraction for each association scheme.
inline FigureOutput run_figure2(const Scenario& base, std::ostream* samples = nullptr) {
  FigureOutput out;
  const auto grid = base.load_grid_or_default();
  for (const auto& curve : detail::figure_curves(base)) {
    const Scenario s = detail::with_curve(base, curve);
    const ChannelModel ch = s.channel();
    const AssociationScheme scheme = s.association();
    const double z = zeta(ch, scheme);
    const double r = 3.5 * z;
    const std::string path = detail::out_path(base, "fig2_" + curve.label + ".csv");
    CsvWriter csv(path);
    csv.header({"cell_load", "void_prob_analytic", "void_prob_lower_bound",
                "void_prob_upper_bound", "void_prob_sim_mean", "void_prob_sim_stderr",
                "trials"});
    bool warned = false;
    for (double v : grid) {
      try {
        SimConfig cfg = detail::sim_config(s, v);
        cfg.sample_sink = samples;
        if (samples) *samples << "# fig2 " << curve.label << " cell_load " << v << "\n";
        if (cfg.window_below_production_floor() && !warned) {
          out.warnings.push_back("fig2 " + curve.label +
                                 ": expected BS count below the 500-cell production floor");
          warned = true;
        }
        const SimEstimate est = void_fraction(cfg);
        const VoidBounds b = void_prob_bounds(v, z);
        csv.row({v, void_prob(v, r), b.lower, b.upper, est.mean, est.stderr_,
                 static_cast<double>(est.trials)});
      } catch (const std::exception& e) {
        out.failures.push_back("fig2 " + curve.label + " v=" + CsvWriter::format(v) + ": " +
                               e.what());
      }
    }
    out.files.push_back(path);
  }
  return out;
}

namespace detail {

enum class ThroughputKind { Cell, User, GreenCell, GreenUser };

inline double analytic_metric(ThroughputKind kind, const Scenario& s, double v) {
  const ChannelModel ch = s.channel();
  const AssociationScheme scheme = s.association();
  const QuadratureRule q = s.quadrature();
  const NetworkScenario net(s.lambda_u_per_km2, s.lambda_u_per_km2 / v);
  switch (kind) {
    case ThroughputKind::Cell: return avg_cell_throughput(net, ch, scheme, q);
    case ThroughputKind::User: return avg_user_throughput(net, ch, scheme, q);
    case ThroughputKind::GreenCell:
      return green_cell_throughput(net, ch, scheme, s.power(), q, s.intensity_scale());
    case ThroughputKind::GreenUser:
      return green_user_throughput(net, ch, scheme, s.power(), q, s.intensity_scale());
  }
  throw std::logic_error("unreachable");
}

inline FigureOutput run_throughput_figure(const Scenario& base, ThroughputKind kind,
                                          const std::string& stem, bool argmax_column) {
  FigureOutput out;
  const auto grid = base.load_grid_or_default();
  for (const auto& curve : figure_curves(base)) {
    const Scenario s = with_curve(base, curve);
    const std::string path = out_path(base, stem + "_" + curve.label + ".csv");
    CsvWriter csv(path);
    std::vector<std::string> head = {"cell_load", "analytic", "sim_mean", "sim_stderr",
                                     "trials"};
    const char* unit = (kind == ThroughputKind::Cell)       ? "bits_per_s_hz_km2"
                       : (kind == ThroughputKind::User)     ? "bits_per_s_hz_user"
                       : (kind == ThroughputKind::GreenCell) ? "bits_per_hz_joule"
                                                             : "bits_per_hz_joule_user";
    head[1] = std::string("analytic_") + unit;
    if (argmax_column) head.push_back("is_argmax");
    csv.header(head);

    std::vector<std::vector<double>> rows;
    std::size_t argmax_i = 0;
    bool warned = false;
    for (double v : grid) {
      try {
        const double analytic = analytic_metric(kind, s, v);
        const SimConfig cfg = sim_config(s, v);
        if (cfg.window_below_production_floor() && !warned) {
          out.warnings.push_back(stem + " " + curve.label +
                                 ": expected BS count below the 500-cell production floor");
          warned = true;
        }
        double sim_mean = 0.0, sim_err = 0.0, trials = 0.0;
        if (kind == ThroughputKind::Cell || kind == ThroughputKind::GreenCell) {
          const CellThroughputStats st = run_cell_throughput(cfg);
          sim_mean = st.tc.mean;
          sim_err = st.tc.stderr_;
          trials = static_cast<double>(st.tc.trials);
        } else {
          const SirStats st = run_sir_stats(cfg);
          sim_mean = st.user_throughput.mean;
          sim_err = st.user_throughput.stderr_;
          trials = static_cast<double>(st.user_throughput.trials);
        }
        if (kind == ThroughputKind::GreenCell || kind == ThroughputKind::GreenUser) {
          // convert the simulated average throughput into its green variant
          const SimConfig vf_cfg = sim_config(s, v);
          const double p0_sim = void_fraction(vf_cfg).mean;
          const NetworkScenario net(s.lambda_u_per_km2, s.lambda_u_per_km2 / v);
          const PowerBudget b =
              power_budget(net, s.channel(), s.association(), s.power(), s.intensity_scale());
          const double psi = avg_power(p0_sim, s.power(), b.p_t);
          const double denom =
              (kind == ThroughputKind::GreenCell) ? (s.lambda_u_per_km2 / v) * psi : psi;
          sim_mean /= denom;
          sim_err /= denom;
        }
        rows.push_back({v, analytic, sim_mean, sim_err, trials});
        if (analytic > rows[argmax_i][1]) argmax_i = rows.size() - 1;
      } catch (const std::exception& e) {
        out.failures.push_back(stem + " " + curve.label + " v=" + CsvWriter::format(v) +
                               ": " + e.what());
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto r = rows[i];
      if (argmax_column) r.push_back(i == argmax_i ? 1.0 : 0.0);
      csv.row(r);
    }
    out.files.push_back(path);
  }
  return out;
}

inline FigureOutput run_optimal_intensity_figure(const Scenario& base, LoadObjective kind,
                                                 const std::string& stem) {
  FigureOutput out;
  std::vector<double> lam_grid;
  for (double l = 100.0; l <= 600.0 + 1e-9; l += 50.0) lam_grid.push_back(l);
  for (const auto& curve : figure_curves(base)) {
    const Scenario s = with_curve(base, curve);
    const ChannelModel ch = s.channel();
    const AssociationScheme scheme = s.association();
    const QuadratureRule q = s.quadrature();
    const std::string path = out_path(base, stem + "_" + curve.label + ".csv");
    CsvWriter csv(path);
    csv.header({"lambda_u_per_km2", "v_star_fixed_point", "lambda_b_star_per_km2",
                "beta_calibrated", "v_star_direct", "lambda_b_star_direct_per_km2",
                "calibration_warning"});
    for (double lam_u : lam_grid) {
      try {
        const auto objective = [&](double v) {
          const NetworkScenario net(lam_u, lam_u / v);
          return kind == LoadObjective::GreenCell
                     ? green_cell_throughput(net, ch, scheme, s.power(), q, s.intensity_scale())
                     : green_user_throughput(net, ch, scheme, s.power(), q,
                                             s.intensity_scale());
        };
        const MaximizeResult direct = maximize_direct(objective, 0.02, 400.0, 1e-7, 48);
        FixedPointProblem p(kind, 2.0, s.alpha, zeta(ch, scheme), lam_u, s.power(),
                            s.intensity_scale());
        const CalibrationResult cal = calibrate_beta(p, direct.v_opt);
        csv.row({lam_u, cal.v_fixed, cal.v_fixed > 0.0 ? lam_u / cal.v_fixed : 0.0, cal.beta,
                 direct.v_opt, lam_u / direct.v_opt, cal.warning ? 1.0 : 0.0});
      } catch (const std::exception& e) {
        out.failures.push_back(stem + " " + curve.label +
                               " lambda_u=" + CsvWriter::format(lam_u) + ": " + e.what());
      }
    }
    out.files.push_back(path);
  }
  return out;
}

}  // namespace detail

inline FigureOutput run_figure(int id, const Scenario& base, std::ostream* samples = nullptr) {
  switch (id) {
    case 2: return run_figure2(base, samples);
    case 3:
      return detail::run_throughput_figure(base, detail::ThroughputKind::Cell, "fig3", false);
    case 4:
      return detail::run_throughput_figure(base, detail::ThroughputKind::User, "fig4", true);
    case 5:
      return detail::run_throughput_figure(base, detail::ThroughputKind::GreenCell, "fig5",
                                           true);
    case 6:
      return detail::run_throughput_figure(base, detail::ThroughputKind::GreenUser, "fig6",
                                           true);
    case 7:
      return detail::run_optimal_intensity_figure(base, LoadObjective::GreenCell, "fig7");
    case 8:
      return detail::run_optimal_intensity_figure(base, LoadObjective::GreenUser, "fig8");
    default:
      throw std::invalid_argument("unknown figure id " + std::to_string(id) +
                                  " (valid: 2..8)");
  }
}

// Ad-hoc evaluation of one named metric over the scenario grid.
inline FigureOutput run_compute(const std::string& metric, const Scenario& s,
                                const std::string& vstar_kind = "green-cell") {
  FigureOutput out;
  const ChannelModel ch = s.channel();
  const AssociationScheme scheme = s.association();
  const double z = zeta(ch, scheme);
  const std::string path = detail::out_path(s, "compute_" + metric + ".csv");

  if (metric == "void_prob") {
    CsvWriter csv(path);
    csv.header({"cell_load", "void_prob", "lower_bound", "upper_bound"});
    for (double v : s.load_grid_or_default()) {
      const VoidBounds b = void_prob_bounds(v, z);
      csv.row({v, void_prob(v, 3.5 * z), b.lower, b.upper});
    }
  } else if (metric == "coverage") {
    CsvWriter csv(path);
    csv.header({"sir_threshold_db", "coverage_bound"});
    const auto grid = s.load_grid_or_default();
    const double v = grid.empty() ? 2.0 : grid.front();
    const NetworkScenario net(s.lambda_u_per_km2, s.lambda_u_per_km2 / v);
    for (double sdb = -10.0; sdb <= 20.0 + 1e-9; sdb += 1.0)
      csv.row({sdb, coverage_prob(std::pow(10.0, sdb / 10.0), net, ch, scheme)});
  } else if (metric == "tc" || metric == "tu" || metric == "gc" || metric == "gu") {
    const detail::ThroughputKind kind = metric == "tc"   ? detail::ThroughputKind::Cell
                                        : metric == "tu" ? detail::ThroughputKind::User
                                        : metric == "gc" ? detail::ThroughputKind::GreenCell
                                                         : detail::ThroughputKind::GreenUser;
    CsvWriter csv(path);
    const char* unit = metric == "tc"   ? "bits_per_s_hz_km2"
                       : metric == "tu" ? "bits_per_s_hz_user"
                       : metric == "gc" ? "bits_per_hz_joule"
                                        : "bits_per_hz_joule_user";
    csv.header({"cell_load", std::string(metric) + "_" + unit});
    for (double v : s.load_grid_or_default())
      csv.row({v, detail::analytic_metric(kind, s, v)});
  } else if (metric == "v_star") {
    const LoadObjective kind = vstar_kind == "user"         ? LoadObjective::UserThroughput
                               : vstar_kind == "green-user" ? LoadObjective::GreenUser
                                                            : LoadObjective::GreenCell;
    CsvWriter csv(path);
    csv.header({"lambda_u_per_km2", "v_star", "lambda_b_star_per_km2", "beta_calibrated",
                "v_star_direct", "calibration_warning"});
    const QuadratureRule q = s.quadrature();
    const auto objective = [&](double v) {
      const NetworkScenario net(s.lambda_u_per_km2, s.lambda_u_per_km2 / v);
      switch (kind) {
        case LoadObjective::UserThroughput: return avg_user_throughput(net, ch, scheme, q);
        case LoadObjective::GreenCell:
          return green_cell_throughput(net, ch, scheme, s.power(), q, s.intensity_scale());
        case LoadObjective::GreenUser:
          return green_user_throughput(net, ch, scheme, s.power(), q, s.intensity_scale());
      }
      throw std::logic_error("unreachable");
    };
    const MaximizeResult direct = maximize_direct(objective, 0.02, 400.0, 1e-7, 48);
    FixedPointProblem p(kind, 2.0, s.alpha, z, s.lambda_u_per_km2, s.power(),
                        s.intensity_scale());
    const CalibrationResult cal = calibrate_beta(p, direct.v_opt);
    csv.row({s.lambda_u_per_km2, cal.v_fixed,
             cal.v_fixed > 0.0 ? s.lambda_u_per_km2 / cal.v_fixed : 0.0, cal.beta,
             direct.v_opt, cal.warning ? 1.0 : 0.0});
  } else {
    throw std::invalid_argument(
        "unknown metric '" + metric +
        "' (valid: void_prob, coverage, tc, tu, gc, gu, v_star)");
  }
  out.files.push_back(path);
  return out;
}

}  // namespace greencells
