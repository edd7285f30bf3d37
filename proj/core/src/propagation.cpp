#include "cfmimo/propagation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cfmimo {

namespace {

constexpr double kLightSpeed = 3.0e8;
constexpr double kModelFloorM = 10.0;  // 3GPP validity floor for d2d

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  return a;
}

// Elevated-user correction of the UMa LOS probability.
double uma_c_of_h(double h_ue) {
  if (h_ue <= 13.0) return 0.0;
  return std::pow((h_ue - 13.0) / 10.0, 1.5);
}

double log10_fc_ghz(double fc_hz) { return std::log10(fc_hz / 1.0e9); }

}  // namespace

double los_probability_uma(double d2d, double h_ue) {
  if (h_ue < 1.5 || h_ue > 23.0)
    throw std::invalid_argument("los_probability_uma: h_ue outside [1.5, 23] m");
  if (d2d < 0.0) throw std::invalid_argument("los_probability_uma: negative distance");
  if (d2d <= 18.0) return 1.0;
  double base = 18.0 / d2d + (1.0 - 18.0 / d2d) * std::exp(-d2d / 63.0);
  double lift = 1.0 + 1.25 * uma_c_of_h(h_ue) * std::pow(d2d / 100.0, 3.0) *
                          std::exp(-d2d / 150.0);
  return std::min(1.0, base * lift);
}

double los_probability_umi(double d2d) {
  if (d2d < 0.0) throw std::invalid_argument("los_probability_umi: negative distance");
  if (d2d <= 18.0) return 1.0;
  return 18.0 / d2d + (1.0 - 18.0 / d2d) * std::exp(-d2d / 36.0);
}

RicianFactor rician_factor(double p_los) {
  if (p_los < 0.0 || p_los > 1.0)
    throw std::invalid_argument("rician_factor: p_los outside [0, 1]");
  if (p_los >= 1.0 - 1.0e-9) return {std::numeric_limits<double>::infinity(), true};
  return {p_los / (1.0 - p_los), false};
}

double breakpoint_distance(double h_tx_eff, double h_ue_eff, double fc_hz) {
  return 4.0 * h_tx_eff * h_ue_eff * fc_hz / kLightSpeed;
}

double pathloss_uma(double d2d, double d3d, double h_ue, double h_bs,
                    double fc_hz, bool los, Rng& rng) {
  if (d2d < kModelFloorM) {
    d2d = kModelFloorM;
    d3d = std::hypot(kModelFloorM, h_bs - h_ue);
  }

  // Effective environment height: 1 m w.p. 1/(1+C); otherwise one of
  // {12, 15, h_ue - 1.5} with equal probability. For h_ue <= 13 m this is
  // deterministically 1 m and no randomness is consumed.
  double h_e = 1.0;
  if (h_ue > 13.0) {
    double g = d2d <= 18.0
                   ? 0.0
                   : 1.25 * std::pow(d2d / 100.0, 3.0) * std::exp(-d2d / 50.0);
    double c = std::pow((h_ue - 13.0) / 10.0, 1.5) * g;
    double p = 1.0 / (1.0 + c);
    if (rng.uniform() >= p) {
      switch (rng.uniform_int(3)) {
        case 0: h_e = 12.0; break;
        case 1: h_e = 15.0; break;
        default: h_e = h_ue - 1.5; break;
      }
    }
  }

  double d_bp = breakpoint_distance(h_bs - h_e, h_ue - h_e, fc_hz);
  double fterm = 20.0 * log10_fc_ghz(fc_hz);
  double pl_los;
  if (d2d <= d_bp) {
    pl_los = 28.0 + 22.0 * std::log10(d3d) + fterm;
  } else {
    pl_los = 28.0 + 40.0 * std::log10(d3d) + fterm -
             9.0 * std::log10(d_bp * d_bp + (h_bs - h_ue) * (h_bs - h_ue));
  }
  if (los) return pl_los;
  double pl_nlos = 13.54 + 39.08 * std::log10(d3d) + fterm - 0.6 * (h_ue - 1.5);
  return std::max(pl_los, pl_nlos);
}

double pathloss_umi(double d2d, double d3d, double h_ue, double h_ap,
                    double fc_hz, bool los) {
  if (d2d < kModelFloorM) {
    d2d = kModelFloorM;
    d3d = std::hypot(kModelFloorM, h_ap - h_ue);
  }
  const double h_e = 1.0;
  double d_bp = breakpoint_distance(h_ap - h_e, h_ue - h_e, fc_hz);
  double pl_los;
  if (d2d <= d_bp) {
    pl_los = 32.4 + 21.0 * std::log10(d3d) + 20.0 * log10_fc_ghz(fc_hz);
  } else {
    pl_los = 32.4 + 40.0 * std::log10(d3d) + 20.0 * log10_fc_ghz(fc_hz) -
             9.5 * std::log10(d_bp * d_bp + (h_ap - h_ue) * (h_ap - h_ue));
  }
  if (los) return pl_los;
  double pl_nlos = 22.4 + 35.3 * std::log10(d3d) +
                   21.3 * log10_fc_ghz(fc_hz) - 0.3 * (h_ue - 1.5);
  return std::max(pl_los, pl_nlos);
}

Eigen::MatrixXd correlated_shadowing(const std::vector<Vec2>& ue_positions,
                                     int n_nodes, double sigma_db,
                                     double dcorr_m, Rng& rng) {
  const int k = static_cast<int>(ue_positions.size());
  Eigen::MatrixXd corr(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double c = std::exp(-distance(ue_positions[i], ue_positions[j]) / dcorr_m);
      corr(i, j) = c;
      corr(j, i) = c;
    }
  }
  corr.diagonal().array() += 1.0e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("correlated_shadowing: correlation matrix not PSD");
  Eigen::MatrixXd lower = llt.matrixL();

  Eigen::MatrixXd shadow(k, n_nodes);
  Eigen::VectorXd n(k);
  for (int node = 0; node < n_nodes; ++node) {
    for (int i = 0; i < k; ++i) n(i) = rng.normal();
    shadow.col(node) = sigma_db * (lower * n);
  }
  return shadow;
}

double array_gain_bs(double angle_off_boresight, const AntennaPattern& p) {
  double theta = wrap_pi(angle_off_boresight);
  double atten;
  if (std::abs(theta) < M_PI / 2.0) {
    double theta3 = (p.hpbw_deg / 2.0) * M_PI / 180.0;
    atten = std::min(3.0 * (theta / theta3) * (theta / theta3), p.edge_atten_db);
  } else {
    atten = p.edge_atten_db;
  }
  return std::pow(10.0, (p.gain_max_dbi - atten) / 10.0);
}

Eigen::VectorXcd steering_vector(double angle, int n_antennas) {
  Eigen::VectorXcd a(n_antennas);
  double s = std::sin(angle);
  for (int i = 0; i < n_antennas; ++i)
    a(i) = std::polar(1.0, M_PI * i * s);
  return a;
}

LargeScale make_large_scale(const NetworkLayout& layout,
                            const PropagationParams& params, Rng& rng) {
  const int k_users = layout.num_users();
  const int m_aps = layout.num_aps();
  const int l_bss = layout.num_sectors();

  LargeScale ls;
  ls.ue_bs.resize(static_cast<size_t>(k_users) * l_bss);
  ls.ue_ap.resize(static_cast<size_t>(k_users) * m_aps);
  ls.rho.resize(k_users, l_bss);
  ls.beta.resize(k_users, m_aps);

  Eigen::MatrixXd shadow_bs = correlated_shadowing(
      layout.ue_positions, l_bss, params.shadowing.sigma_bs_db,
      params.shadowing.dcorr_bs_m, rng);
  Eigen::MatrixXd shadow_ap = correlated_shadowing(
      layout.ue_positions, m_aps, params.shadowing.sigma_ap_db,
      params.shadowing.dcorr_ap_m, rng);

  const bool rician = params.fading == FadingMode::Rician;

  for (int k = 0; k < k_users; ++k) {
    const Vec2& ue = layout.ue_positions[k];
    for (int l = 0; l < l_bss; ++l) {
      const Vec2& site = layout.sector_position(l);
      LinkLargeScale& link = ls.ue_bs[static_cast<size_t>(k) * l_bss + l];
      link.d2d = distance(ue, site);
      link.d3d = std::hypot(link.d2d, layout.h_bs - layout.h_ue);
      link.aod = std::atan2(ue.y - site.y, ue.x - site.x);
      link.p_los = los_probability_uma(link.d2d, layout.h_ue);
      link.is_los = rng.uniform() < link.p_los;
      if (rician) {
        RicianFactor kf = rician_factor(link.p_los);
        link.k_factor = kf.k;
        link.pure_los = kf.pure_los;
      }
      link.pathloss_db = pathloss_uma(link.d2d, link.d3d, layout.h_ue,
                                      layout.h_bs, params.fc_hz, link.is_los, rng);
      link.shadow_db = shadow_bs(k, l);
      double gain = array_gain_bs(link.aod - layout.sector_boresight(l),
                                  params.bs_pattern);
      link.coeff_linear =
          gain * std::pow(10.0, (-link.pathloss_db + link.shadow_db) / 10.0);
      ls.rho(k, l) = link.coeff_linear;
    }
  }

  for (int k = 0; k < k_users; ++k) {
    const Vec2& ue = layout.ue_positions[k];
    for (int m = 0; m < m_aps; ++m) {
      const Vec2& ap = layout.ap_positions[m];
      LinkLargeScale& link = ls.ue_ap[static_cast<size_t>(k) * m_aps + m];
      link.d2d = distance(ue, ap);
      link.d3d = std::hypot(link.d2d, layout.h_ap - layout.h_ue);
      link.aod = std::atan2(ue.y - ap.y, ue.x - ap.x);
      link.p_los = los_probability_umi(link.d2d);
      link.is_los = rng.uniform() < link.p_los;
      if (rician) {
        RicianFactor kf = rician_factor(link.p_los);
        link.k_factor = kf.k;
        link.pure_los = kf.pure_los;
      }
      link.pathloss_db = pathloss_umi(link.d2d, link.d3d, layout.h_ue,
                                      layout.h_ap, params.fc_hz, link.is_los);
      link.shadow_db = shadow_ap(k, m);
      link.coeff_linear =
          std::pow(10.0, (-link.pathloss_db + link.shadow_db) / 10.0);
      ls.beta(k, m) = link.coeff_linear;
    }
  }
  return ls;
}

namespace {

Eigen::VectorXcd draw_link_channel(const LinkLargeScale& link, int n_ant,
                                   double phase, Rng& rng) {
  Eigen::VectorXcd a = steering_vector(link.aod, n_ant);
  if (link.pure_los)
    return std::sqrt(link.coeff_linear) * (std::polar(1.0, phase) * a);
  Eigen::VectorXcd scatter(n_ant);
  for (int i = 0; i < n_ant; ++i) scatter(i) = rng.cnormal();
  double k = link.k_factor;
  return std::sqrt(link.coeff_linear / (k + 1.0)) *
         (std::sqrt(k) * std::polar(1.0, phase) * a + scatter);
}

}  // namespace

ChannelSet draw_channels(const NetworkLayout& layout, const LargeScale& ls,
                         int n_ant_ap, int n_ant_bs, Rng& rng) {
  const int k_users = layout.num_users();
  const int m_aps = layout.num_aps();
  const int l_bss = layout.num_sectors();

  ChannelSet ch;
  ch.h.resize(n_ant_bs, static_cast<Eigen::Index>(k_users) * l_bss);
  ch.g.resize(n_ant_ap, static_cast<Eigen::Index>(k_users) * m_aps);
  ch.phase_bs.resize(k_users, l_bss);
  ch.phase_ap.resize(k_users, m_aps);

  for (int k = 0; k < k_users; ++k) {
    for (int l = 0; l < l_bss; ++l) {
      double phase = rng.uniform(0.0, 2.0 * M_PI);
      ch.phase_bs(k, l) = phase;
      ch.h.col(static_cast<Eigen::Index>(k) * l_bss + l) =
          draw_link_channel(ls.bs_link(k, l), n_ant_bs, phase, rng);
    }
  }
  for (int k = 0; k < k_users; ++k) {
    for (int m = 0; m < m_aps; ++m) {
      double phase = rng.uniform(0.0, 2.0 * M_PI);
      ch.phase_ap(k, m) = phase;
      ch.g.col(static_cast<Eigen::Index>(k) * m_aps + m) =
          draw_link_channel(ls.ap_link(k, m), n_ant_ap, phase, rng);
    }
  }
  return ch;
}

Eigen::MatrixXcd link_covariance(const LinkLargeScale& link, int n_antennas) {
  Eigen::VectorXcd a = steering_vector(link.aod, n_antennas);
  if (link.pure_los) return link.coeff_linear * (a * a.adjoint());
  double k = link.k_factor;
  Eigen::MatrixXcd cov = (link.coeff_linear * k / (k + 1.0)) * (a * a.adjoint());
  cov.diagonal().array() += link.coeff_linear / (k + 1.0);
  return cov;
}

void dump_large_scale_csv(const LargeScale& ls, std::ostream& out) {
  out.precision(10);
  out << "k,node_id,kind,d2d,p_los,is_los,PL_dB,shadow_dB,coeff_dB\n";
  const int k_users = static_cast<int>(ls.rho.rows());
  const int l_bss = static_cast<int>(ls.rho.cols());
  const int m_aps = static_cast<int>(ls.beta.cols());
  auto row = [&](int k, int node, const char* kind, const LinkLargeScale& link) {
    out << k << "," << node << "," << kind << "," << link.d2d << ","
        << link.p_los << "," << (link.is_los ? 1 : 0) << ","
        << link.pathloss_db << "," << link.shadow_db << ","
        << 10.0 * std::log10(link.coeff_linear) << "\n";
  };
  for (int k = 0; k < k_users; ++k)
    for (int l = 0; l < l_bss; ++l) row(k, l, "bs", ls.bs_link(k, l));
  for (int k = 0; k < k_users; ++k)
    for (int m = 0; m < m_aps; ++m) row(k, m, "ap", ls.ap_link(k, m));
}

}  // namespace cfmimo
