#include "cfmimo/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

namespace cfmimo {

namespace {

double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  const char* name;
  std::variant<int SimConfig::*, double SimConfig::*, bool SimConfig::*,
               std::uint64_t SimConfig::*, Scenario SimConfig::*,
               Precoder SimConfig::*, ApMode SimConfig::*,
               FadingMode SimConfig::*>
      member;
};

// Single source of truth for the file schema; order defines the emit order.
const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"scenario", &SimConfig::scenario},
      {"precoder", &SimConfig::precoder},
      {"alpha", &SimConfig::alpha},
      {"ap_mode", &SimConfig::ap_mode},
      {"fading", &SimConfig::fading},
      {"fronthaul_enforce", &SimConfig::fronthaul_enforce},
      {"pcsi", &SimConfig::pcsi},
      {"freeze_geometry", &SimConfig::freeze_geometry},
      {"trials", &SimConfig::trials},
      {"master_seed", &SimConfig::master_seed},
      {"threads", &SimConfig::threads},
      {"isd_m", &SimConfig::isd_m},
      {"center_cells", &SimConfig::center_cells},
      {"ring_cells", &SimConfig::ring_cells},
      {"aps_per_cell", &SimConfig::aps_per_cell},
      {"users_per_sector", &SimConfig::users_per_sector},
      {"n_ant_bs", &SimConfig::n_ant_bs},
      {"n_ant_ap", &SimConfig::n_ant_ap},
      {"h_bs_m", &SimConfig::h_bs_m},
      {"h_ap_m", &SimConfig::h_ap_m},
      {"h_ue_m", &SimConfig::h_ue_m},
      {"fc_hz", &SimConfig::fc_hz},
      {"bandwidth_hz", &SimConfig::bandwidth_hz},
      {"noise_psd_dbm_hz", &SimConfig::noise_psd_dbm_hz},
      {"noise_figure_db", &SimConfig::noise_figure_db},
      {"p_max_bs_dbm", &SimConfig::p_max_bs_dbm},
      {"p_max_ap_dbm", &SimConfig::p_max_ap_dbm},
      {"train_power_dbm", &SimConfig::train_power_dbm},
      {"tau_c", &SimConfig::tau_c},
      {"tau_p", &SimConfig::tau_p},
      {"n_serve_bs", &SimConfig::n_serve_bs},
      {"n_serve_ap", &SimConfig::n_serve_ap},
      {"n_pzf_bs", &SimConfig::n_pzf_bs},
      {"n_pzf_ap", &SimConfig::n_pzf_ap},
      {"r_jpzf", &SimConfig::r_jpzf},
      {"m_qam", &SimConfig::m_qam},
      {"n_rb", &SimConfig::n_rb},
      {"n_sc", &SimConfig::n_sc},
      {"n_sc_rb", &SimConfig::n_sc_rb},
      {"n_sc_ofdm", &SimConfig::n_sc_ofdm},
      {"tau_data_s", &SimConfig::tau_data_s},
      {"tau_weight_s", &SimConfig::tau_weight_s},
      {"n_q_bits", &SimConfig::n_q_bits},
      {"n_cb_rb", &SimConfig::n_cb_rb},
      {"eta_cpri", &SimConfig::eta_cpri},
      {"fh_limit_bps", &SimConfig::fh_limit_bps},
      {"bs_gain_max_dbi", &SimConfig::bs_gain_max_dbi},
      {"bs_edge_atten_db", &SimConfig::bs_edge_atten_db},
      {"bs_hpbw_deg", &SimConfig::bs_hpbw_deg},
      {"sigma_sf_bs_db", &SimConfig::sigma_sf_bs_db},
      {"dcorr_bs_m", &SimConfig::dcorr_bs_m},
      {"sigma_sf_ap_db", &SimConfig::sigma_sf_ap_db},
      {"dcorr_ap_m", &SimConfig::dcorr_ap_m},
  };
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

void set_field(SimConfig& c, const Field& f, const std::string& value,
               const std::string& key) {
  try {
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(c.*member)>;
          if constexpr (std::is_same_v<T, int>)
            c.*member = std::stoi(value);
          else if constexpr (std::is_same_v<T, double>)
            c.*member = std::stod(value);
          else if constexpr (std::is_same_v<T, bool>)
            c.*member = parse_bool(value, key);
          else if constexpr (std::is_same_v<T, std::uint64_t>)
            c.*member = std::stoull(value);
          else if constexpr (std::is_same_v<T, Scenario>)
            c.*member = scenario_from_string(value);
          else if constexpr (std::is_same_v<T, Precoder>)
            c.*member = precoder_from_string(value);
          else if constexpr (std::is_same_v<T, ApMode>)
            c.*member = ap_mode_from_string(value);
          else if constexpr (std::is_same_v<T, FadingMode>)
            c.*member = fading_from_string(value);
        },
        f.member);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config key '" + key + "': bad value '" + value + "'");
  }
}

std::string get_field(const SimConfig& c, const Field& f) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(c.*member)>;
        if constexpr (std::is_same_v<T, int>)
          return std::to_string(c.*member);
        else if constexpr (std::is_same_v<T, double>)
          return format_double(c.*member);
        else if constexpr (std::is_same_v<T, bool>)
          return c.*member ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::uint64_t>)
          return std::to_string(c.*member);
        else
          return to_string(c.*member);
      },
      f.member);
}

}  // namespace

double SimConfig::noise_var_w() const {
  return dbm_to_w(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) +
                  noise_figure_db);
}
double SimConfig::p_max_bs_w() const { return dbm_to_w(p_max_bs_dbm); }
double SimConfig::p_max_ap_w() const { return dbm_to_w(p_max_ap_dbm); }
double SimConfig::train_power_w() const {
  return tau_p * dbm_to_w(train_power_dbm);
}

PropagationParams SimConfig::propagation_params() const {
  PropagationParams p;
  p.fc_hz = fc_hz;
  p.fading = fading;
  p.bs_pattern = {bs_gain_max_dbi, bs_edge_atten_db, bs_hpbw_deg};
  p.shadowing = {sigma_sf_bs_db, dcorr_bs_m, sigma_sf_ap_db, dcorr_ap_m};
  return p;
}

FronthaulParams SimConfig::fronthaul_params() const {
  FronthaulParams p;
  p.m_qam = m_qam;
  p.n_rb = n_rb;
  p.n_sc_rb = n_sc_rb;
  p.n_sc_ofdm = n_sc_ofdm;
  p.tau_data_s = tau_data_s;
  p.tau_weight_s = tau_weight_s;
  p.n_q_bits = n_q_bits;
  p.n_cb_rb = n_cb_rb;
  p.eta_cpri = eta_cpri;
  p.mode = precoder == Precoder::Jpzf ? ProcessingMode::Joint
                                      : ProcessingMode::Local;
  return p;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (isd_m <= 0.0) fail("isd_m must be > 0");
  if (center_cells < 1) fail("center_cells must be >= 1");
  if (ring_cells < 0) fail("ring_cells must be >= 0");
  if (aps_per_cell < 0) fail("aps_per_cell must be >= 0");
  if (users_per_sector < 1) fail("users_per_sector must be >= 1");
  if (n_ant_bs < 1 || n_ant_ap < 1) fail("antenna counts must be >= 1");
  if (h_ue_m < 1.5 || h_ue_m > 23.0) fail("h_ue_m must be within [1.5, 23]");
  if (fc_hz <= 0.0 || bandwidth_hz <= 0.0) fail("fc_hz and bandwidth_hz must be > 0");
  if (tau_p < 1) fail("tau_p must be >= 1");
  if (tau_p > tau_c) fail("tau_p must be <= tau_c");
  if (alpha < -1.0 || alpha > 1.0) fail("alpha must be within [-1, 1]");
  if (n_pzf_ap >= n_ant_ap) fail("n_pzf_ap must be < n_ant_ap");
  if (n_pzf_bs >= n_ant_bs) fail("n_pzf_bs must be < n_ant_bs");
  if (n_serve_ap < 0 || n_serve_bs < 1) fail("serving set sizes out of range");
  if (r_jpzf < 0) fail("r_jpzf must be >= 0");
  if (r_jpzf > n_ant_ap * n_serve_ap + n_ant_bs * n_serve_bs)
    fail("r_jpzf must be <= n_ant_ap*n_serve_ap + n_ant_bs*n_serve_bs");
  if (scenario != Scenario::Mc && aps_per_cell > 0 && n_serve_ap > num_aps())
    fail("n_serve_ap exceeds the number of APs");
  if (n_serve_bs > num_bss()) fail("n_serve_bs exceeds the number of BSs");
  if (trials < 0) fail("trials must be >= 0");
  if (threads < 0) fail("threads must be >= 0");
  if (eta_cpri <= 0.0 || eta_cpri > 1.0) fail("eta_cpri must be within (0, 1]");
  if (m_qam < 2) fail("m_qam must be >= 2");
  if (n_rb < 1 || n_sc_rb < 1 || n_sc_ofdm < 1 || n_q_bits < 1 || n_cb_rb < 1)
    fail("fronthaul counts must be >= 1");
  if (tau_data_s <= 0.0 || tau_weight_s <= 0.0) fail("fronthaul delays must be > 0");
  if (fh_limit_bps <= 0.0) fail("fh_limit_bps must be > 0");
  if (fronthaul_enforce && scenario != Scenario::Full)
    fail("fronthaul_enforce requires scenario=full");
  if (precoder == Precoder::Jpzf && scenario != Scenario::Full)
    fail("precoder=jpzf requires scenario=full");
}

SimConfig parse_config(std::istream& in) {
  SimConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    bool found = false;
    for (const auto& f : schema()) {
      if (key == f.name) {
        set_field(config, f, value, key);
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_config(in);
}

void emit_config(const SimConfig& config, std::ostream& out) {
  for (const auto& f : schema())
    out << f.name << " = " << get_field(config, f) << "\n";
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Mc: return "mc";
    case Scenario::HetNoCoop: return "het";
    case Scenario::Horizontal: return "horizontal";
    case Scenario::Full: return "full";
  }
  return "?";
}
std::string to_string(Precoder p) {
  switch (p) {
    case Precoder::Mrt: return "mrt";
    case Precoder::Pzf: return "pzf";
    case Precoder::Mmse: return "mmse";
    case Precoder::Jpzf: return "jpzf";
  }
  return "?";
}
std::string to_string(ApMode m) {
  return m == ApMode::Uniform ? "uniform" : "cell-edge";
}
std::string to_string(FadingMode f) {
  return f == FadingMode::Rayleigh ? "rayleigh" : "rician";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "mc") return Scenario::Mc;
  if (s == "het") return Scenario::HetNoCoop;
  if (s == "horizontal") return Scenario::Horizontal;
  if (s == "full") return Scenario::Full;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}
Precoder precoder_from_string(const std::string& s) {
  if (s == "mrt") return Precoder::Mrt;
  if (s == "pzf") return Precoder::Pzf;
  if (s == "mmse") return Precoder::Mmse;
  if (s == "jpzf") return Precoder::Jpzf;
  throw std::invalid_argument("unknown precoder '" + s + "'");
}
ApMode ap_mode_from_string(const std::string& s) {
  if (s == "uniform") return ApMode::Uniform;
  if (s == "cell-edge") return ApMode::CellEdge;
  throw std::invalid_argument("unknown ap mode '" + s + "'");
}
FadingMode fading_from_string(const std::string& s) {
  if (s == "rayleigh") return FadingMode::Rayleigh;
  if (s == "rician") return FadingMode::Rician;
  throw std::invalid_argument("unknown fading mode '" + s + "'");
}

}  // namespace cfmimo
