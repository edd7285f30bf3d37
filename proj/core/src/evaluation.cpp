#include "cfmimo/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cfmimo/pilots.hpp"

namespace cfmimo {

Eigen::VectorXd dl_sinr(const ChannelSet& channels,
                        const PrecoderPowerSet& precoders, double noise_var) {
  const int k_users = static_cast<int>(precoders.user_links.size());
  const int m_aps =
      k_users > 0 ? static_cast<int>(channels.g.cols()) / k_users : 0;
  const int l_bss =
      k_users > 0 ? static_cast<int>(channels.h.cols()) / k_users : 0;

  // Received amplitude at user k from the legs serving user j.
  auto cross_term = [&](int k, int j) {
    std::complex<double> sum = 0.0;
    for (const ServingLink& link : precoders.user_links[j]) {
      if (link.power <= 0.0) continue;
      const auto chan =
          link.kind == NodeKind::Ap
              ? channels.g.col(static_cast<Eigen::Index>(k) * m_aps + link.node)
              : channels.h.col(static_cast<Eigen::Index>(k) * l_bss + link.node);
      sum += std::sqrt(link.power) * chan.dot(link.w);  // chan^H * w
    }
    return sum;
  };

  Eigen::VectorXd gamma(k_users);
  for (int k = 0; k < k_users; ++k) {
    double useful = std::norm(cross_term(k, k));
    double interference = 0.0;
    for (int j = 0; j < k_users; ++j)
      if (j != k) interference += std::norm(cross_term(k, j));
    gamma(k) = useful / (interference + noise_var);
  }
  return gamma;
}

Eigen::VectorXd se_upper_bound(const Eigen::MatrixXd& sinr_samples, int tau_p,
                               int tau_c) {
  const double prefactor = ((tau_c - tau_p) / 2.0) / tau_c;
  Eigen::VectorXd se(sinr_samples.cols());
  for (Eigen::Index k = 0; k < sinr_samples.cols(); ++k) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < sinr_samples.rows(); ++t)
      acc += std::log2(1.0 + sinr_samples(t, k));
    se(k) = sinr_samples.rows() > 0 ? prefactor * acc / sinr_samples.rows() : 0.0;
  }
  return se;
}

std::vector<std::pair<double, double>> cdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(samples.size());
  const double n = static_cast<double>(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    out.emplace_back(samples[i], (i + 1) / n);
  return out;
}

TrialOutput run_trial(const SimConfig& cfg, const NetworkLayout* frozen,
                      std::uint64_t trial_index) {
  Rng rng = Rng::substream(cfg.master_seed, trial_index);

  TrialOutput out;
  if (frozen) {
    out.layout = *frozen;
  } else {
    NetworkLayout layout =
        build_hex_layout(cfg.isd_m, cfg.center_cells, cfg.ring_cells);
    layout.h_bs = cfg.h_bs_m;
    layout.h_ap = cfg.h_ap_m;
    layout.h_ue = cfg.h_ue_m;
    layout = place_aps(std::move(layout), cfg.ap_mode, cfg.aps_per_cell, rng);
    out.layout = drop_users(std::move(layout), cfg.users_per_sector, rng);
  }
  const NetworkLayout& layout = out.layout;
  const int k_users = layout.num_users();
  const int m_aps = layout.num_aps();
  const int l_bss = layout.num_sectors();
  const double noise_var = cfg.noise_var_w();

  LargeScale ls = make_large_scale(layout, cfg.propagation_params(), rng);
  PilotBook book = assign_pilots(layout.ue_positions, cfg.tau_p);
  ChannelSet ch = draw_channels(layout, ls, cfg.n_ant_ap, cfg.n_ant_bs, rng);

  Eigen::VectorXd train = Eigen::VectorXd::Constant(k_users, cfg.train_power_w());
  EstimateSet est;
  if (cfg.pcsi) {
    est.g_hat = ch.g;
    est.h_hat = ch.h;
    est.train_powers = train;
  } else {
    TrainingObservations obs =
        uplink_training_rx(ch, book, train, noise_var, rng);
    est = lmmse_estimate(obs, book, ls, train, noise_var);
    out.stats.ridge_events += est.ridge_events;
  }

  AssociationState assoc =
      associate(cfg.scenario, ls.rho, ls.beta, cfg.n_serve_ap, cfg.n_serve_bs,
                cfg.n_ant_ap, cfg.n_ant_bs);

  if (cfg.fronthaul_enforce) {
    Eigen::ArrayXXd delta(k_users, m_aps + l_bss);
    delta.leftCols(m_aps) = ls.beta;
    delta.rightCols(l_bss) = ls.rho;
    Eigen::VectorXi node_ant(m_aps + l_bss);
    node_ant.head(m_aps).setConstant(cfg.n_ant_ap);
    node_ant.tail(l_bss).setConstant(cfg.n_ant_bs);
    Eigen::VectorXd limit =
        Eigen::VectorXd::Constant(m_aps + l_bss, cfg.fh_limit_bps);
    EnforceResult fh =
        enforce_fronthaul(assoc.merged(), delta, limit, cfg.fronthaul_params(),
                          node_ant, noise_var);
    assoc = split_merged(fh.merged, m_aps, cfg.scenario);
    out.stats.fh_removed_links += fh.removed_links;
    out.stats.fh_disconnected_users += fh.disconnected_users;
    out.stats.fh_iterations += fh.iterations;
    out.fh_trace = std::move(fh.trace);
  }

  PrecoderPowerSet prec;
  if (cfg.precoder == Precoder::Jpzf) {
    prec = compute_jpzf_precoders(
        assoc, est, cfg.r_jpzf,
        Eigen::VectorXd::Constant(m_aps, cfg.p_max_ap_w()),
        Eigen::VectorXd::Constant(l_bss, cfg.p_max_bs_w()), cfg.n_ant_ap,
        cfg.n_ant_bs);
  } else {
    LocalPrecodingInputs in;
    in.precoder = cfg.precoder;
    in.alpha = cfg.alpha;
    in.p_max_ap = Eigen::VectorXd::Constant(m_aps, cfg.p_max_ap_w());
    in.p_max_bs = Eigen::VectorXd::Constant(l_bss, cfg.p_max_bs_w());
    in.n_pzf_ap = cfg.n_pzf_ap;
    in.n_pzf_bs = cfg.n_pzf_bs;
    in.noise_var_dl = noise_var;
    in.pcsi = cfg.pcsi;
    prec = compute_local_precoders(in, assoc, est, ls, book, noise_var);
  }
  out.stats.pzf_fallbacks += prec.pzf_fallbacks;

  out.sinr = dl_sinr(ch, prec, noise_var);
  return out;
}

MonteCarloResult run_monte_carlo(const SimConfig& cfg) {
  cfg.validate();

  MonteCarloResult result;
  if (cfg.trials == 0) return result;

  NetworkLayout frozen;
  if (cfg.freeze_geometry) {
    // One geometry for the whole run, drawn from a dedicated stream.
    Rng rng = Rng::substream(cfg.master_seed, 0x67656f6dULL);
    frozen = build_hex_layout(cfg.isd_m, cfg.center_cells, cfg.ring_cells);
    frozen.h_bs = cfg.h_bs_m;
    frozen.h_ap = cfg.h_ap_m;
    frozen.h_ue = cfg.h_ue_m;
    frozen = place_aps(std::move(frozen), cfg.ap_mode, cfg.aps_per_cell, rng);
    frozen = drop_users(std::move(frozen), cfg.users_per_sector, rng);
  }

  std::vector<TrialOutput> outputs(cfg.trials);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, cfg.trials);

  auto worker = [&] {
    for (;;) {
      int t = next.fetch_add(1);
      if (t >= cfg.trials || failed.load()) break;
      try {
        outputs[t] =
            run_trial(cfg, cfg.freeze_geometry ? &frozen : nullptr, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  const double prefactor = cfg.tau_d() / cfg.tau_c;
  for (int t = 0; t < cfg.trials; ++t) {
    TrialOutput& to = outputs[t];
    for (int k = 0; k < to.layout.num_users(); ++k) {
      if (!to.layout.is_evaluation_cell(to.layout.ue_cell[k])) continue;
      TrialRecord rec;
      rec.trial = t;
      rec.user = k;
      rec.user_class = classify_user(to.layout.ue_positions[k], to.layout);
      rec.sinr = to.sinr(k);
      rec.se = prefactor * std::log2(1.0 + rec.sinr);
      rec.rate_bps = rec.se * cfg.bandwidth_hz;
      result.records.push_back(rec);
    }
    result.stats.pzf_fallbacks += to.stats.pzf_fallbacks;
    result.stats.ridge_events += to.stats.ridge_events;
    result.stats.fh_removed_links += to.stats.fh_removed_links;
    result.stats.fh_disconnected_users += to.stats.fh_disconnected_users;
    result.stats.fh_iterations += to.stats.fh_iterations;
    result.fh_trace.insert(result.fh_trace.end(), to.fh_trace.begin(),
                           to.fh_trace.end());
  }
  return result;
}

}  // namespace cfmimo
