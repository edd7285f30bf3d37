// Fronthaul load accounting and the deterministic link-pruning loop that
// keeps every node within its fronthaul capacity.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

namespace cfmimo {

enum class ProcessingMode { Local, Joint };

struct FronthaulParams {
  int m_qam = 256;
  int n_rb = 55;
  int n_sc_rb = 19;
  int n_sc_ofdm = 14;
  double tau_data_s = 0.5e-3;
  double tau_weight_s = 0.2e-3;
  int n_q_bits = 8;
  int n_cb_rb = 64;  // beamforming granularity in subcarriers
  double eta_cpri = 0.85;
  ProcessingMode mode = ProcessingMode::Local;
};

// Payload share of the fronthaul load, bit/s.
double fh_data_load(int n_served, const FronthaulParams& p);

// Beamforming-weight share, bit/s; zero under local processing.
double fh_weight_load(int n_served, int n_antennas, const FronthaulParams& p);

double fh_total_load(int n_served, int n_antennas, const FronthaulParams& p);

// Large-scale-only approximation of the SINR user k would see if node
// `excluded_node` stopped serving it. `merged` is the K x (M+L) association,
// `delta` the matching large-scale coefficients.
double proxy_sinr(int k, int excluded_node, const Eigen::ArrayXXi& merged,
                  const Eigen::ArrayXXd& delta, double noise_var);

struct FronthaulTraceRow {
  int iteration = 0;
  int node = 0;
  double load = 0.0;
  int removed_user = 0;
};

struct EnforceResult {
  Eigen::ArrayXXi merged;
  int iterations = 0;
  int removed_links = 0;
  int disconnected_users = 0;  // users left with no serving node
  std::vector<FronthaulTraceRow> trace;
};

// Iteratively drops, from every violating node, the served user whose proxy
// SINR after removal is largest, until every load fits the per-node limit.
// `precoder_callback` (optional) runs once per iteration before loads are
// evaluated, mirroring the per-iteration beamformer redesign.
EnforceResult enforce_fronthaul(
    Eigen::ArrayXXi merged, const Eigen::ArrayXXd& delta,
    const Eigen::VectorXd& fh_limit, const FronthaulParams& params,
    const Eigen::VectorXi& node_antennas, double noise_var,
    const std::function<void(const Eigen::ArrayXXi&)>& precoder_callback = {});

void write_fronthaul_trace(const std::vector<FronthaulTraceRow>& trace,
                           std::ostream& out, bool header);

}  // namespace cfmimo
