// Large-scale propagation (UMa for macro sectors, UMi for access points):
// LOS probability, two-slope path loss, correlated log-normal shadowing,
// sector antenna pattern, and Rician small-scale channel synthesis.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <vector>

#include "cfmimo/geometry.hpp"
#include "cfmimo/random.hpp"

namespace cfmimo {

enum class FadingMode { Rayleigh, Rician };
enum class NodeKind { Bs, Ap };

// Sector pattern: Gaussian mainlobe (parabolic in dB) on (-pi/2, pi/2),
// constant backlobe attenuation outside.
struct AntennaPattern {
  double gain_max_dbi = 8.0;
  double edge_atten_db = 30.0;
  double hpbw_deg = 65.0;  // -3 dB at +-hpbw/2
};

struct ShadowingParams {
  double sigma_bs_db = 6.0;
  double dcorr_bs_m = 50.0;
  double sigma_ap_db = 7.82;
  double dcorr_ap_m = 13.0;
};

struct PropagationParams {
  double fc_hz = 3.5e9;
  FadingMode fading = FadingMode::Rician;
  AntennaPattern bs_pattern;
  ShadowingParams shadowing;
};

struct LinkLargeScale {
  double d2d = 0.0;
  double d3d = 0.0;
  double p_los = 0.0;
  bool is_los = false;
  double k_factor = 0.0;  // linear; infinity encoded by pure_los
  bool pure_los = false;
  double pathloss_db = 0.0;
  double shadow_db = 0.0;
  double coeff_linear = 0.0;  // beta (AP links) or rho (BS links)
  double aod = 0.0;           // azimuth of the direct path, node -> user
};

// All per-link large-scale state of one Monte Carlo trial.
struct LargeScale {
  std::vector<LinkLargeScale> ue_ap;  // K*M, row-major (k*M + m)
  std::vector<LinkLargeScale> ue_bs;  // K*L, row-major (k*L + l)
  Eigen::ArrayXXd beta;               // K x M
  Eigen::ArrayXXd rho;                // K x L

  const LinkLargeScale& ap_link(int k, int m) const {
    return ue_ap[static_cast<size_t>(k) * beta.cols() + m];
  }
  const LinkLargeScale& bs_link(int k, int l) const {
    return ue_bs[static_cast<size_t>(k) * rho.cols() + l];
  }
};

// Channel vectors of one trial, one column per link.
struct ChannelSet {
  Eigen::MatrixXcd g;         // N_AP x (K*M), column k*M + m
  Eigen::MatrixXcd h;         // N_BS x (K*L), column k*L + l
  Eigen::ArrayXXd phase_ap;   // direct-path phase offsets, K x M
  Eigen::ArrayXXd phase_bs;   // K x L
};

// --- 38.901 building blocks -------------------------------------------------

// UMa LOS probability; valid for 1.5 <= h_ue <= 23 m.
double los_probability_uma(double d2d, double h_ue);

// UMi LOS probability.
double los_probability_umi(double d2d);

struct RicianFactor {
  double k = 0.0;
  bool pure_los = false;
};
// K = p/(1-p); p within 1e-9 of 1 collapses to the deterministic-LOS case.
RicianFactor rician_factor(double p_los);

double breakpoint_distance(double h_tx_eff, double h_ue_eff, double fc_hz);

// UMa path loss in dB. The rng feeds the probabilistic effective environment
// height (deterministically 1 m for h_ue <= 13 m).
double pathloss_uma(double d2d, double d3d, double h_ue, double h_bs,
                    double fc_hz, bool los, Rng& rng);

// UMi path loss in dB; effective environment height fixed at 1 m.
double pathloss_umi(double d2d, double d3d, double h_ue, double h_ap,
                    double fc_hz, bool los);

// Per-(user,node) shadowing in dB. For a fixed node the column across users
// has covariance sigma^2 * exp(-d_user/d_corr); distinct nodes independent.
Eigen::MatrixXd correlated_shadowing(const std::vector<Vec2>& ue_positions,
                                     int n_nodes, double sigma_db,
                                     double dcorr_m, Rng& rng);

// Linear sector gain at `angle_off_boresight` (wrapped to [-pi, pi]).
double array_gain_bs(double angle_off_boresight, const AntennaPattern& p);

// Half-wavelength ULA steering vector, entries exp(j*pi*i*sin(angle)).
Eigen::VectorXcd steering_vector(double angle, int n_antennas);

// --- trial-level generation -------------------------------------------------

LargeScale make_large_scale(const NetworkLayout& layout,
                            const PropagationParams& params, Rng& rng);

ChannelSet draw_channels(const NetworkLayout& layout, const LargeScale& ls,
                         int n_ant_ap, int n_ant_bs, Rng& rng);

// Rician covariance of one link: coeff/(K+1) * (K a a^H + I); collapses to
// coeff * a a^H for pure LOS and coeff * I for Rayleigh.
Eigen::MatrixXcd link_covariance(const LinkLargeScale& link, int n_antennas);

// Optional audit dump (k,node_id,kind,d2d,p_los,is_los,PL_dB,shadow_dB,coeff_dB).
void dump_large_scale_csv(const LargeScale& ls, std::ostream& out);

}  // namespace cfmimo
