#include "cfmimo/fronthaul.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cfmimo {

double fh_data_load(int n_served, const FronthaulParams& p) {
  return n_served * std::log2(double(p.m_qam)) * p.n_rb *
         (p.n_sc_rb / p.tau_data_s) * (p.n_sc_ofdm / p.eta_cpri);
}

double fh_weight_load(int n_served, int n_antennas, const FronthaulParams& p) {
  if (p.mode == ProcessingMode::Local) return 0.0;
  return n_served * 2.0 * (double(p.n_rb) / p.n_cb_rb) *
         (n_antennas / p.tau_weight_s) * (p.n_q_bits / p.eta_cpri);
}

double fh_total_load(int n_served, int n_antennas, const FronthaulParams& p) {
  return fh_data_load(n_served, p) + fh_weight_load(n_served, n_antennas, p);
}

double proxy_sinr(int k, int excluded_node, const Eigen::ArrayXXi& merged,
                  const Eigen::ArrayXXd& delta, double noise_var) {
  const int n_nodes = static_cast<int>(merged.cols());
  const int k_users = static_cast<int>(merged.rows());
  double num = 0.0;
  for (int n = 0; n < n_nodes; ++n)
    if (n != excluded_node && merged(k, n) != 0) num += delta(k, n);
  double den = noise_var;
  for (int j = 0; j < k_users; ++j) {
    if (j == k) continue;
    for (int n = 0; n < n_nodes; ++n)
      if (n != excluded_node && merged(j, n) != 0) den += delta(k, n);
  }
  return num / den;
}

EnforceResult enforce_fronthaul(
    Eigen::ArrayXXi merged, const Eigen::ArrayXXd& delta,
    const Eigen::VectorXd& fh_limit, const FronthaulParams& params,
    const Eigen::VectorXi& node_antennas, double noise_var,
    const std::function<void(const Eigen::ArrayXXi&)>& precoder_callback) {
  const int n_nodes = static_cast<int>(merged.cols());
  const int k_users = static_cast<int>(merged.rows());
  if (fh_limit.size() != n_nodes || node_antennas.size() != n_nodes)
    throw std::invalid_argument("enforce_fronthaul: per-node parameter size mismatch");

  EnforceResult res;
  for (int iter = 0;; ++iter) {
    if (precoder_callback) precoder_callback(merged);

    std::vector<int> violating;
    for (int n = 0; n < n_nodes; ++n) {
      int served = merged.col(n).sum();
      if (fh_total_load(served, node_antennas(n), params) > fh_limit(n))
        violating.push_back(n);
    }
    if (violating.empty()) {
      res.iterations = iter;
      break;
    }

    // One removal per violating node, applied in ascending node order; the
    // proxy metric sees removals made earlier in the same sweep.
    for (int n_bar : violating) {
      double load_before =
          fh_total_load(merged.col(n_bar).sum(), node_antennas(n_bar), params);
      int best_k = -1;
      double best_s = -1.0;
      for (int k = 0; k < k_users; ++k) {
        if (merged(k, n_bar) == 0) continue;
        double s = proxy_sinr(k, n_bar, merged, delta, noise_var);
        if (s > best_s) {
          best_s = s;
          best_k = k;
        }
      }
      if (best_k < 0) continue;  // emptied earlier in this sweep
      merged(best_k, n_bar) = 0;
      ++res.removed_links;
      res.trace.push_back({iter, n_bar, load_before, best_k});
      if (merged.row(best_k).sum() == 0) ++res.disconnected_users;
    }
  }
  res.merged = std::move(merged);
  return res;
}

void write_fronthaul_trace(const std::vector<FronthaulTraceRow>& trace,
                           std::ostream& out, bool header) {
  if (header) out << "iteration,node_id,F_n,removed_user\n";
  out.precision(17);
  for (const auto& row : trace)
    out << row.iteration << "," << row.node << "," << row.load << ","
        << row.removed_user << "\n";
}

}  // namespace cfmimo
