// Pilot assignment (k-means clustering + per-cluster latitude ranking),
// uplink training and LMMSE channel estimation.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfmimo/geometry.hpp"
#include "cfmimo/propagation.hpp"
#include "cfmimo/random.hpp"

namespace cfmimo {

struct PilotBook {
  int tau_p = 0;
  Eigen::MatrixXcd sequences;   // tau_p x tau_p, orthonormal columns
  std::vector<int> assignment;  // pilot index per user
  std::vector<int> cluster;     // k-means cluster per user
};

// Clusters users with k-means (ceil(K/tau_p) centroids seeded on a regular
// grid over the user bounding box) and assigns pilots inside each cluster by
// descending latitude; clusters never hold more than tau_p users.
PilotBook assign_pilots(const std::vector<Vec2>& ue_positions, int tau_p);

struct TrainingObservations {
  std::vector<Eigen::MatrixXcd> y_bs;  // per BS: N_BS x tau_p
  std::vector<Eigen::MatrixXcd> y_ap;  // per AP: N_AP x tau_p
};

// Received training blocks Y_n = sum_i sqrt(eta_i) chan_i phi_i^H + noise.
TrainingObservations uplink_training_rx(const ChannelSet& channels,
                                        const PilotBook& book,
                                        const Eigen::VectorXd& train_powers,
                                        double noise_var, Rng& rng);

struct EstimateSet {
  Eigen::MatrixXcd g_hat;  // N_AP x (K*M)
  Eigen::MatrixXcd h_hat;  // N_BS x (K*L)
  Eigen::VectorXd train_powers;
  int ridge_events = 0;  // singular-gram regularizations (noiseless corner)
};

// Gram matrix of the projected training observation for (node, pilot):
// sum over co-pilot users of eta_i * Cov_i + noise_var * I.
Eigen::MatrixXcd training_gram(const LargeScale& ls, const PilotBook& book,
                               const Eigen::VectorXd& train_powers,
                               double noise_var, NodeKind kind, int node,
                               int pilot, int n_ant);

// Covariance of the LMMSE estimate: eta_k * Cov_k * B^{-1} * Cov_k.
Eigen::MatrixXcd estimate_covariance(const LargeScale& ls,
                                     const PilotBook& book,
                                     const Eigen::VectorXd& train_powers,
                                     double noise_var, NodeKind kind, int node,
                                     int user, int n_ant);

EstimateSet lmmse_estimate(const TrainingObservations& obs,
                           const PilotBook& book, const LargeScale& ls,
                           const Eigen::VectorXd& train_powers,
                           double noise_var);

void dump_pilot_csv(const PilotBook& book, std::ostream& out);

}  // namespace cfmimo
