// Downlink SINR, spectral-efficiency upper bound, CDF statistics and the
// Monte Carlo trial loop.
#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/fronthaul.hpp"
#include "cfmimo/precoding.hpp"
#include "cfmimo/propagation.hpp"

namespace cfmimo {

// Per-user downlink SINR. The true channels always enter the evaluation;
// estimates shape only the beamformers.
Eigen::VectorXd dl_sinr(const ChannelSet& channels,
                        const PrecoderPowerSet& precoders, double noise_var);

// (tau_d/tau_c) * mean over trials of log2(1 + sinr), per user column.
Eigen::VectorXd se_upper_bound(const Eigen::MatrixXd& sinr_samples, int tau_p,
                               int tau_c);

// Empirical CDF: sorted (value, fraction] pairs.
std::vector<std::pair<double, double>> cdf(std::vector<double> samples);

struct TrialRecord {
  int trial = 0;
  int user = 0;  // global user index within its trial
  UserClass user_class = UserClass::CellInside;
  double sinr = 0.0;      // linear
  double se = 0.0;        // bit/s/Hz, (tau_d/tau_c)*log2(1+sinr)
  double rate_bps = 0.0;  // se * bandwidth
};

struct MonteCarloStats {
  int pzf_fallbacks = 0;
  int ridge_events = 0;
  int fh_removed_links = 0;
  int fh_disconnected_users = 0;
  long long fh_iterations = 0;
};

struct MonteCarloResult {
  std::vector<TrialRecord> records;  // evaluation-cell users only, trial order
  MonteCarloStats stats;
  std::vector<FronthaulTraceRow> fh_trace;  // concatenated across trials
};

// Runs `config.trials` independent trials (parallel workers, one derived
// random stream per trial index); output is identical for any thread count.
MonteCarloResult run_monte_carlo(const SimConfig& config);

// Single trial against a caller-supplied layout; exposed for tests and the
// fronthaul report.
struct TrialOutput {
  Eigen::VectorXd sinr;  // all K users
  NetworkLayout layout;
  MonteCarloStats stats;
  std::vector<FronthaulTraceRow> fh_trace;
};
TrialOutput run_trial(const SimConfig& config, const NetworkLayout* frozen,
                      std::uint64_t trial_index);

}  // namespace cfmimo
