// Downlink beamformers (MRT, partial zero-forcing, MMSE), fractional power
// allocation, and the centralized joint partial zero-forcing path with its
// equal-stream power rule.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cfmimo/association.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/propagation.hpp"

namespace cfmimo {

enum class Precoder { Mrt, Pzf, Mmse, Jpzf };

// One transmit leg towards a user. `w` is unit norm for local precoding; for
// joint precoding it is the (non-normalized) per-node segment of the stacked
// beamformer.
struct ServingLink {
  NodeKind kind = NodeKind::Ap;
  int node = 0;
  Eigen::VectorXcd w;
  double power = 0.0;  // eta, watts
};

struct PrecoderPowerSet {
  std::vector<std::vector<ServingLink>> user_links;
  int pzf_fallbacks = 0;  // projections that degenerated to MRT
};

// Orthonormal basis of the column span (column-pivoted QR, rank threshold
// 1e-10 relative to the largest column norm).
Eigen::MatrixXcd orth(const Eigen::MatrixXcd& m);

// estimate / ||estimate||; throws on a zero vector.
Eigen::VectorXcd mrt(const Eigen::VectorXcd& estimate);

// Projects the target estimate onto the orthogonal complement of the
// protected users' span. Falls back to MRT (flag set) if the target lies in
// that span.
Eigen::VectorXcd pzf_local(const Eigen::VectorXcd& target_estimate,
                           const Eigen::MatrixXcd& protected_estimates,
                           bool* used_fallback = nullptr);

// Regularized-inverse beamformer for one served user of a node:
//   [sum_j eta_j (ghat_j ghat_j^H + G_j - Ghat_j) + noise_var I]^{-1} ghat_t.
// `etas` are the uplink training powers of the served users.
Eigen::VectorXcd mmse_local(const Eigen::MatrixXcd& serving_estimates,
                            const std::vector<Eigen::MatrixXcd>& stats_cov,
                            const std::vector<Eigen::MatrixXcd>& stats_est_cov,
                            const Eigen::VectorXd& etas, double noise_var,
                            int target_index);

// Fractional power allocation over one node family: per served link
// eta = p_max * coeff^-alpha / sum(served coeff^-alpha); rows of zero
// association give zero power.
Eigen::ArrayXXd fpa_powers(const Eigen::ArrayXXi& assoc,
                           const Eigen::ArrayXXd& coeffs, double alpha,
                           const Eigen::VectorXd& p_max);

// Joint PZF over the stacked serving-node channel. Column j of `stacked_all`
// is the stacked estimate of user j on user k's serving nodes (APs ascending,
// then BSs ascending). Protects the r largest-norm columns j != k; the output
// is unit norm with a real positive inner product against column k.
Eigen::VectorXcd jpzf_precoder(const Eigen::MatrixXcd& stacked_all, int k,
                               int r_jpzf, bool* used_fallback = nullptr);

// Scatters the stacked beamformers into the (N_AP*M + N_BS*L) x K matrix Q;
// AP block rows first, segments consumed in ascending node order.
Eigen::MatrixXcd build_q(const AssociationState& assoc,
                         const std::vector<Eigen::VectorXcd>& stacked_w,
                         int n_ant_ap, int n_ant_bs);

struct EqualStreamPower {
  double eta = 0.0;              // common per-stream power
  Eigen::VectorXd node_load;     // q~ per node, APs then BSs
  bool all_idle = false;         // no node carries any stream
};

// eta = min over active nodes of p_max / q~; keeps every per-node sum within
// budget and makes the binding node tight.
EqualStreamPower equal_stream_power(const Eigen::MatrixXcd& q,
                                    const Eigen::VectorXd& p_max_ap,
                                    const Eigen::VectorXd& p_max_bs,
                                    int n_ant_ap, int n_ant_bs);

struct ComplexityCount {
  std::uint64_t central_mults = 0;
  std::uint64_t local_mults = 0;
};

// Dominant complex-multiplication counts for the centralized (JPZF) and the
// local (PZF at each serving node) precoder computation of one user.
ComplexityCount precoder_complexity(int n_serve_ap, int n_serve_bs,
                                    int n_ant_ap, int n_ant_bs, int n_pzf_ap,
                                    int n_pzf_bs, int r_jpzf);

// --- pipeline glue -----------------------------------------------------------

struct LocalPrecodingInputs {
  Precoder precoder = Precoder::Mmse;
  double alpha = 0.0;
  Eigen::VectorXd p_max_ap;  // per AP
  Eigen::VectorXd p_max_bs;  // per BS
  int n_pzf_ap = 0;
  int n_pzf_bs = 0;
  double noise_var_dl = 0.0;  // sigma_z^2 for the MMSE precoder
  bool pcsi = false;          // estimates are exact: no error-covariance term
};

// Local beamformers plus FPA powers for every serving link.
PrecoderPowerSet compute_local_precoders(const LocalPrecodingInputs& in,
                                         const AssociationState& assoc,
                                         const EstimateSet& est,
                                         const LargeScale& ls,
                                         const PilotBook& book,
                                         double noise_var_ul);

// Centralized JPZF with the equal-stream power rule; serving sets whose
// stacked dimension was shrunk below r_jpzf+1 (fronthaul pruning) protect
// dimension-1 users instead.
PrecoderPowerSet compute_jpzf_precoders(const AssociationState& assoc,
                                        const EstimateSet& est, int r_jpzf,
                                        const Eigen::VectorXd& p_max_ap,
                                        const Eigen::VectorXd& p_max_bs,
                                        int n_ant_ap, int n_ant_bs);

}  // namespace cfmimo
