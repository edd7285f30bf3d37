// cfsim: downlink system-level simulator for co-existing multicell and
// cell-free massive MIMO deployments.
//
//   cfsim run       one Monte Carlo campaign, CSV + manifest output
//   cfsim sweep     grid over scenario / precoder / alpha / AP placement
//   cfsim fh-report per-node fronthaul loads only, no SINR evaluation

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "cfmimo/config.hpp"
#include "cfmimo/simulator.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scenario;
  std::optional<std::string> precoder;
  std::optional<double> alpha;
  std::optional<std::string> ap_mode;
  std::optional<std::string> fading;
  std::optional<std::string> fh_limit;  // bit/s or "off"
  std::optional<int> threads;
};

void add_common_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "Configuration file (key = value)")
      ->check(CLI::ExistingFile);
  app->add_option("--out", f.out_dir, "Output directory");
  app->add_option("--trials", f.trials, "Monte Carlo trials");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--scenario", f.scenario, "mc | het | horizontal | full");
  app->add_option("--precoder", f.precoder, "mrt | pzf | mmse | jpzf");
  app->add_option("--alpha", f.alpha, "Fractional power allocation exponent");
  app->add_option("--ap-mode", f.ap_mode, "uniform | cell-edge");
  app->add_option("--fading", f.fading, "rayleigh | rician");
  app->add_option("--fh-limit", f.fh_limit,
                  "Fronthaul limit in bit/s, or 'off' to disable enforcement");
  app->add_option("--threads", f.threads, "Worker threads (0 = hardware)");
}

cfmimo::SimConfig build_config(const CommonFlags& f) {
  cfmimo::SimConfig cfg;
  if (!f.config_path.empty()) cfg = cfmimo::parse_config_file(f.config_path);
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.scenario) cfg.scenario = cfmimo::scenario_from_string(*f.scenario);
  if (f.precoder) cfg.precoder = cfmimo::precoder_from_string(*f.precoder);
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.ap_mode) cfg.ap_mode = cfmimo::ap_mode_from_string(*f.ap_mode);
  if (f.fading) cfg.fading = cfmimo::fading_from_string(*f.fading);
  if (f.fh_limit) {
    if (*f.fh_limit == "off") {
      cfg.fronthaul_enforce = false;
    } else {
      cfg.fronthaul_enforce = true;
      cfg.fh_limit_bps = std::stod(*f.fh_limit);
    }
  }
  if (f.threads) cfg.threads = *f.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co-existing multicell / cell-free massive MIMO downlink simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  cfmimo::RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run one simulation campaign");
  add_common_flags(run, run_flags);
  run->add_flag("--dump-layout", run_opts.dump_layout,
                "Also write the trial-0 layout table");
  run->add_flag("--dump-links", run_opts.dump_links,
                "Also write the trial-0 per-link large-scale table");
  run->add_flag("--dump-pilots", run_opts.dump_pilots,
                "Also write the trial-0 pilot assignment");

  CommonFlags sweep_flags;
  std::vector<std::string> sweep_scenarios, sweep_precoders, sweep_ap_modes;
  std::vector<double> sweep_alphas;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Grid over scenario/precoder/alpha/ap-mode");
  add_common_flags(sweep, sweep_flags);
  sweep->add_option("--scenarios", sweep_scenarios, "Scenario grid values");
  sweep->add_option("--precoders", sweep_precoders, "Precoder grid values");
  sweep->add_option("--alphas", sweep_alphas, "Alpha grid values");
  sweep->add_option("--ap-modes", sweep_ap_modes, "AP placement grid values");

  CommonFlags fh_flags;
  bool fh_dump_links = false;
  CLI::App* fh = app.add_subcommand("fh-report",
                                    "Per-node fronthaul loads, no SINR");
  add_common_flags(fh, fh_flags);
  fh->add_flag("--dump-links", fh_dump_links,
               "Also write the per-link large-scale table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cfmimo::run_command(build_config(run_flags), run_flags.out_dir,
                                 run_opts);
    if (sweep->parsed()) {
      cfmimo::SweepAxes axes;
      for (const auto& s : sweep_scenarios)
        axes.scenarios.push_back(cfmimo::scenario_from_string(s));
      for (const auto& p : sweep_precoders)
        axes.precoders.push_back(cfmimo::precoder_from_string(p));
      axes.alphas = sweep_alphas;
      for (const auto& m : sweep_ap_modes)
        axes.ap_modes.push_back(cfmimo::ap_mode_from_string(m));
      // The base config must stay valid even when the grid overrides it.
      CommonFlags base_flags = sweep_flags;
      int ran = cfmimo::sweep_command(build_config(base_flags),
                                      sweep_flags.out_dir, axes);
      std::cout << "sweep: " << ran << " run(s) completed\n";
      return ran > 0 ? 0 : 1;
    }
    if (fh->parsed())
      return cfmimo::fh_report_command(build_config(fh_flags), fh_flags.out_dir,
                                       fh_dump_links);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
