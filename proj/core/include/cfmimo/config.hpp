// Simulation configuration: key = value file format, defaults, validation.
#pragma once

#include <iosfwd>
#include <string>

#include "cfmimo/association.hpp"
#include "cfmimo/fronthaul.hpp"
#include "cfmimo/geometry.hpp"
#include "cfmimo/precoding.hpp"
#include "cfmimo/propagation.hpp"

namespace cfmimo {

inline constexpr const char* kVersion = "0.1.0";

struct SimConfig {
  // run control
  Scenario scenario = Scenario::Full;
  Precoder precoder = Precoder::Mmse;
  double alpha = -0.5;
  ApMode ap_mode = ApMode::Uniform;
  FadingMode fading = FadingMode::Rayleigh;
  bool fronthaul_enforce = false;
  bool pcsi = false;
  bool freeze_geometry = false;
  int trials = 200;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  // deployment
  double isd_m = 500.0;
  int center_cells = 3;
  int ring_cells = 9;
  int aps_per_cell = 9;
  int users_per_sector = 5;
  int n_ant_bs = 32;
  int n_ant_ap = 8;
  double h_bs_m = 25.0;
  double h_ap_m = 10.0;
  double h_ue_m = 1.5;

  // radio
  double fc_hz = 3.5e9;
  double bandwidth_hz = 20.0e6;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 9.0;
  double p_max_bs_dbm = 46.0;
  double p_max_ap_dbm = 39.0;
  double train_power_dbm = 24.771212547196624;  // 300 mW
  int tau_c = 640;
  int tau_p = 32;

  // serving sets and precoding
  int n_serve_bs = 3;
  int n_serve_ap = 6;
  int n_pzf_bs = 16;
  int n_pzf_ap = 4;
  int r_jpzf = 72;

  // fronthaul
  int m_qam = 256;
  int n_rb = 55;
  int n_sc = 1024;
  int n_sc_rb = 19;
  int n_sc_ofdm = 14;
  double tau_data_s = 0.5e-3;
  double tau_weight_s = 0.2e-3;
  int n_q_bits = 8;
  int n_cb_rb = 64;
  double eta_cpri = 0.85;
  double fh_limit_bps = 5.0e9;

  // BS sector pattern and shadowing
  double bs_gain_max_dbi = 8.0;
  double bs_edge_atten_db = 30.0;
  double bs_hpbw_deg = 65.0;
  double sigma_sf_bs_db = 6.0;
  double dcorr_bs_m = 50.0;
  double sigma_sf_ap_db = 7.82;
  double dcorr_ap_m = 13.0;

  bool operator==(const SimConfig&) const = default;

  int num_cells() const { return center_cells + ring_cells; }
  int num_bss() const { return 3 * num_cells(); }
  int num_aps() const { return num_cells() * aps_per_cell; }
  int num_users() const { return users_per_sector * num_bss(); }
  double tau_d() const { return (tau_c - tau_p) / 2.0; }

  double noise_var_w() const;
  double p_max_bs_w() const;
  double p_max_ap_w() const;
  // Training power eta = tau_p * eta_bar.
  double train_power_w() const;

  PropagationParams propagation_params() const;
  FronthaulParams fronthaul_params() const;

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

// Parses a key = value file ('#' comments). Unknown keys are hard errors;
// absent keys keep their defaults. The parsed config is validated.
SimConfig parse_config(std::istream& in);
SimConfig parse_config_file(const std::string& path);

// Emits every key; parse(emit(c)) == c exactly.
void emit_config(const SimConfig& config, std::ostream& out);

std::string to_string(Scenario s);
std::string to_string(Precoder p);
std::string to_string(ApMode m);
std::string to_string(FadingMode f);
Scenario scenario_from_string(const std::string& s);
Precoder precoder_from_string(const std::string& s);
ApMode ap_mode_from_string(const std::string& s);
FadingMode fading_from_string(const std::string& s);

}  // namespace cfmimo
