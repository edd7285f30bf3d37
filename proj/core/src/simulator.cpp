#include "cfmimo/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cfmimo/pilots.hpp"

namespace cfmimo {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_results_csv(const SimConfig& cfg, const MonteCarloResult& mc,
                       std::ostream& out) {
  out << "trial,user_id,class,scenario,precoder,alpha,rate_bps,sinr_db\n";
  const std::string scenario = to_string(cfg.scenario);
  const std::string precoder = to_string(cfg.precoder);
  const std::string alpha = fmt(cfg.alpha);
  for (const TrialRecord& r : mc.records) {
    out << r.trial << "," << r.user << ","
        << (r.user_class == UserClass::CellInside ? "cell_inside" : "cell_edge")
        << "," << scenario << "," << precoder << "," << alpha << ","
        << fmt(r.rate_bps) << "," << fmt(10.0 * std::log10(r.sinr)) << "\n";
  }
}

void write_cdf_csv(const std::vector<std::pair<double, double>>& curve,
                   std::ostream& out) {
  out << "value,fraction\n";
  for (const auto& [value, fraction] : curve)
    out << fmt(value) << "," << fmt(fraction) << "\n";
}

void write_manifest(const SimConfig& cfg, std::ostream& out) {
  out << "# cfsim run manifest; feed back via --config for a bit-exact replay\n";
  out << "# version=" << kVersion << "\n";
  emit_config(cfg, out);
}

// Trial-0 geometry and large-scale state, for the audit dumps.
struct Snapshot {
  NetworkLayout layout;
  LargeScale ls;
  PilotBook book;
};

Snapshot make_snapshot(const SimConfig& cfg) {
  Rng rng = cfg.freeze_geometry
                ? Rng::substream(cfg.master_seed, 0x67656f6dULL)
                : Rng::substream(cfg.master_seed, 0);
  Snapshot snap;
  snap.layout = build_hex_layout(cfg.isd_m, cfg.center_cells, cfg.ring_cells);
  snap.layout.h_bs = cfg.h_bs_m;
  snap.layout.h_ap = cfg.h_ap_m;
  snap.layout.h_ue = cfg.h_ue_m;
  snap.layout = place_aps(std::move(snap.layout), cfg.ap_mode,
                          cfg.aps_per_cell, rng);
  snap.layout = drop_users(std::move(snap.layout), cfg.users_per_sector, rng);
  snap.ls = make_large_scale(snap.layout, cfg.propagation_params(), rng);
  snap.book = assign_pilots(snap.layout.ue_positions, cfg.tau_p);
  return snap;
}

}  // namespace

int run_command(const SimConfig& cfg, const std::string& out_dir,
                const RunOptions& options) {
  cfg.validate();
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  // Open every output before simulating so IO problems surface immediately.
  std::ofstream results = open_output(dir / "results.csv");
  std::ofstream cdf_inside = open_output(dir / "cdf_cell_inside.csv");
  std::ofstream cdf_edge = open_output(dir / "cdf_cell_edge.csv");
  std::ofstream manifest = open_output(dir / "manifest.cfg");
  std::ofstream trace;
  if (cfg.fronthaul_enforce) trace = open_output(dir / "fh_trace.csv");

  write_manifest(cfg, manifest);

  if (options.dump_layout || options.dump_links || options.dump_pilots) {
    Snapshot snap = make_snapshot(cfg);
    if (options.dump_layout)
      export_layout_csv_file(snap.layout, (dir / "layout.csv").string());
    if (options.dump_links) {
      std::ofstream links = open_output(dir / "large_scale.csv");
      dump_large_scale_csv(snap.ls, links);
    }
    if (options.dump_pilots) {
      std::ofstream pilots = open_output(dir / "pilots.csv");
      dump_pilot_csv(snap.book, pilots);
    }
  }

  MonteCarloResult mc = run_monte_carlo(cfg);

  write_results_csv(cfg, mc, results);

  std::vector<double> inside, edge;
  for (const TrialRecord& r : mc.records)
    (r.user_class == UserClass::CellInside ? inside : edge).push_back(r.rate_bps);
  write_cdf_csv(cdf(std::move(inside)), cdf_inside);
  write_cdf_csv(cdf(std::move(edge)), cdf_edge);

  if (cfg.fronthaul_enforce) write_fronthaul_trace(mc.fh_trace, trace, true);

  if (mc.stats.pzf_fallbacks > 0)
    std::cerr << "note: " << mc.stats.pzf_fallbacks
              << " zero-forcing projections fell back to MRT\n";
  if (mc.stats.fh_disconnected_users > 0)
    std::cerr << "note: fronthaul pruning disconnected "
              << mc.stats.fh_disconnected_users << " user instance(s)\n";
  return 0;
}

int sweep_command(const SimConfig& base, const std::string& out_dir,
                  const SweepAxes& axes, const RunOptions& options) {
  SweepAxes grid = axes;
  if (grid.scenarios.empty()) grid.scenarios = {base.scenario};
  if (grid.precoders.empty()) grid.precoders = {base.precoder};
  if (grid.alphas.empty()) grid.alphas = {base.alpha};
  if (grid.ap_modes.empty()) grid.ap_modes = {base.ap_mode};

  int ran = 0;
  for (Scenario s : grid.scenarios) {
    for (Precoder p : grid.precoders) {
      for (double a : grid.alphas) {
        for (ApMode m : grid.ap_modes) {
          SimConfig cfg = base;
          cfg.scenario = s;
          cfg.precoder = p;
          cfg.alpha = a;
          cfg.ap_mode = m;
          char alpha_tag[24];
          std::snprintf(alpha_tag, sizeof(alpha_tag), "%g", a);
          std::string tag = to_string(s) + "_" + to_string(p) + "_alpha" +
                            alpha_tag + "_" + to_string(m);
          try {
            cfg.validate();
          } catch (const std::exception& e) {
            std::cerr << "sweep: skipping " << tag << " (" << e.what() << ")\n";
            continue;
          }
          run_command(cfg, (fs::path(out_dir) / tag).string(), options);
          ++ran;
        }
      }
    }
  }
  return ran;
}

int fh_report_command(const SimConfig& cfg, const std::string& out_dir,
                      bool dump_links) {
  cfg.validate();
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::ofstream report = open_output(dir / "fh_report.csv");

  Snapshot snap = make_snapshot(cfg);
  AssociationState assoc =
      associate(cfg.scenario, snap.ls.rho, snap.ls.beta, cfg.n_serve_ap,
                cfg.n_serve_bs, cfg.n_ant_ap, cfg.n_ant_bs);
  const FronthaulParams params = cfg.fronthaul_params();

  report << "node_id,kind,n_antennas,n_served,f_data_bps,f_weight_bps,"
            "f_total_bps,limit_bps,violating\n";
  const int m_aps = snap.layout.num_aps();
  const int l_bss = snap.layout.num_sectors();
  for (int n = 0; n < m_aps + l_bss; ++n) {
    const bool is_ap = n < m_aps;
    const int ant = is_ap ? cfg.n_ant_ap : cfg.n_ant_bs;
    const int served = is_ap ? assoc.a.col(n).sum() : assoc.b.col(n - m_aps).sum();
    const double f_d = fh_data_load(served, params);
    const double f_w = fh_weight_load(served, ant, params);
    report << (is_ap ? n : n - m_aps) << "," << (is_ap ? "ap" : "bs") << ","
           << ant << "," << served << "," << fmt(f_d) << "," << fmt(f_w) << ","
           << fmt(f_d + f_w) << "," << fmt(cfg.fh_limit_bps) << ","
           << (f_d + f_w > cfg.fh_limit_bps ? 1 : 0) << "\n";
  }
  if (dump_links) {
    std::ofstream links = open_output(dir / "large_scale.csv");
    dump_large_scale_csv(snap.ls, links);
  }
  return 0;
}

}  // namespace cfmimo
