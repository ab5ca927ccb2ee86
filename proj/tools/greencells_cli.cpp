#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "greencells/csv.hpp"
#include "greencells/figures.hpp"
#include "greencells/scenario.hpp"
#include "greencells/validate.hpp"

namespace {

greencells::Scenario load_scenario(const std::string& config_path, bool figure_defaults) {
  greencells::Scenario s =
      figure_defaults ? greencells::figure_base_scenario() : greencells::Scenario{};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config: " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    s = greencells::parse_scenario(buf.str());
  }
  greencells::apply_env_overrides(s);
  return s;
}

void report_output(const greencells::FigureOutput& out) {
  for (const auto& f : out.files) std::cout << "wrote " << f << "\n";
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : out.failures) std::cerr << "row failed: " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic-geometry analysis and simulation of green small-cell networks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string shadow_convention;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  int threads = -1;
  bool have_seed = false, have_trials = false;

  app.add_option("--config", config_path, "scenario config file (key = value lines)")
      ->envname("GREENCELLS_CONFIG");
  app.add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
    have_seed = true;
  });
  app.add_option("--trials", trials, "trial count override")->each([&](const std::string&) {
    have_trials = true;
  });
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--shadow-convention", shadow_convention,
                 "dB shadowing convention: std-db (sigma in dB) or var-db (variance in dB^2)");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* fig = app.add_subcommand("figure", "reproduce a figure data set as CSV");
  int figure_id = 2;
  std::string samples_path;
  fig->add_option("id", figure_id, "figure id, 2..8")->required();
  fig->add_option("--samples", samples_path,
                  "stream raw per-trial samples to this line-delimited file");

  auto* comp = app.add_subcommand("compute", "evaluate one metric over the scenario grid");
  std::string metric;
  std::string vstar_kind = "green-cell";
  comp->add_option("metric", metric, "void_prob|coverage|tc|tu|gc|gu|v_star")->required();
  comp->add_option("--kind", vstar_kind, "v_star objective: user|green-cell|green-user");

  auto* val = app.add_subcommand("validate", "run the simulation-vs-formula check suite");
  std::string budget = "ci";
  double rho_hat = 3.5;
  std::string report_path;
  val->add_option("--budget", budget, "ci|full");
  val->add_option("--rho-hat", rho_hat,
                  "diagnostic override of the Voronoi Gamma constant (default 3.5)");
  val->add_option("--report", report_path, "also write the results table as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    greencells::Scenario s = load_scenario(config_path, true);
    if (have_seed) s.seed = seed;
    if (have_trials) s.trials = trials;
    if (!out_dir.empty()) s.out_dir = out_dir;
    if (threads >= 0) s.threads = threads;
    if (!shadow_convention.empty()) {
      if (shadow_convention == "std-db")
        s.shadow_convention = greencells::ShadowConvention::StdDb;
      else if (shadow_convention == "var-db")
        s.shadow_convention = greencells::ShadowConvention::VarDb;
      else
        throw std::runtime_error("--shadow-convention must be std-db or var-db");
      s.shadow_convention_set = true;
    }

    if (fig->parsed()) {
      std::ofstream samples;
      if (!samples_path.empty()) {
        samples.open(samples_path);
        if (!samples) throw std::runtime_error("cannot open samples sink: " + samples_path);
      }
      report_output(greencells::run_figure(figure_id, s,
                                           samples_path.empty() ? nullptr : &samples));
      return 0;
    }
    if (comp->parsed()) {
      report_output(greencells::run_compute(metric, s, vstar_kind));
      return 0;
    }
    if (val->parsed()) {
      greencells::ValidationOptions opts;
      opts.budget = budget == "full" ? greencells::ValidationBudget::Full
                                     : greencells::ValidationBudget::Ci;
      opts.seed = have_seed ? seed : s.seed;
      opts.threads = threads >= 0 ? threads : s.threads;
      opts.rho_hat = rho_hat;
      const auto results = greencells::run_validation(opts);
      for (const auto& r : results) {
        std::printf("%s criterion %2d %-28s %7.1fs  %s\n", r.pass ? "PASS" : "FAIL",
                    r.criterion, r.name.c_str(), r.seconds, r.detail.c_str());
      }
      if (!report_path.empty()) {
        greencells::CsvWriter csv(report_path);
        csv.header({"criterion", "name", "pass", "seconds", "detail"});
        for (const auto& r : results)
          csv.row_strings({std::to_string(r.criterion), r.name, r.pass ? "1" : "0",
                           greencells::CsvWriter::format(r.seconds), r.detail});
      }
      if (!greencells::all_passed(results)) {
        for (const auto& r : results)
          if (!r.pass) std::cerr << "failing check: " << r.name << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
