#include "cfmimo/precoding.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cfmimo {

namespace {

constexpr double kProjectionFloor = 1.0e-9;  // relative; below this, MRT

std::vector<int> sorted_serving(const Eigen::ArrayXXi& assoc, int k) {
  std::vector<int> nodes;
  for (int n = 0; n < assoc.cols(); ++n)
    if (assoc(k, n) != 0) nodes.push_back(n);
  return nodes;
}

}  // namespace

Eigen::MatrixXcd orth(const Eigen::MatrixXcd& m) {
  if (m.cols() == 0 || m.rows() == 0)
    return Eigen::MatrixXcd(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(m);
  qr.setThreshold(1.0e-10);
  Eigen::Index rank = qr.rank();
  return qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), rank);
}

Eigen::VectorXcd mrt(const Eigen::VectorXcd& estimate) {
  double n = estimate.norm();
  if (n == 0.0) throw std::invalid_argument("mrt: zero estimate");
  return estimate / n;
}

Eigen::VectorXcd pzf_local(const Eigen::VectorXcd& target_estimate,
                           const Eigen::MatrixXcd& protected_estimates,
                           bool* used_fallback) {
  if (used_fallback) *used_fallback = false;
  if (protected_estimates.cols() == 0) return mrt(target_estimate);
  if (protected_estimates.cols() > target_estimate.size() - 1)
    throw std::invalid_argument("pzf_local: too many protected users");

  Eigen::MatrixXcd basis = orth(protected_estimates);
  Eigen::VectorXcd w =
      target_estimate - basis * (basis.adjoint() * target_estimate);
  double n = w.norm();
  if (n <= kProjectionFloor * target_estimate.norm()) {
    if (used_fallback) *used_fallback = true;
    return mrt(target_estimate);
  }
  return w / n;
}

namespace {

// Shared MMSE system matrix; factorized once per node in the pipeline.
Eigen::LDLT<Eigen::MatrixXcd> mmse_system(
    const Eigen::MatrixXcd& serving_estimates,
    const std::vector<Eigen::MatrixXcd>& stats_cov,
    const std::vector<Eigen::MatrixXcd>& stats_est_cov,
    const Eigen::VectorXd& etas, double noise_var) {
  const Eigen::Index n_ant = serving_estimates.rows();
  Eigen::MatrixXcd sys = Eigen::MatrixXcd::Zero(n_ant, n_ant);
  for (Eigen::Index j = 0; j < serving_estimates.cols(); ++j) {
    sys.noalias() += etas(j) * (serving_estimates.col(j) *
                                serving_estimates.col(j).adjoint());
    sys.noalias() += etas(j) * (stats_cov[j] - stats_est_cov[j]);
  }
  sys.diagonal().array() += noise_var;
  return sys.ldlt();
}

}  // namespace

Eigen::VectorXcd mmse_local(const Eigen::MatrixXcd& serving_estimates,
                            const std::vector<Eigen::MatrixXcd>& stats_cov,
                            const std::vector<Eigen::MatrixXcd>& stats_est_cov,
                            const Eigen::VectorXd& etas, double noise_var,
                            int target_index) {
  auto ldlt = mmse_system(serving_estimates, stats_cov, stats_est_cov, etas,
                          noise_var);
  Eigen::VectorXcd w = ldlt.solve(serving_estimates.col(target_index));
  return mrt(w);
}

Eigen::ArrayXXd fpa_powers(const Eigen::ArrayXXi& assoc,
                           const Eigen::ArrayXXd& coeffs, double alpha,
                           const Eigen::VectorXd& p_max) {
  if (alpha < -1.0 || alpha > 1.0)
    throw std::invalid_argument("fpa_powers: alpha outside [-1, 1]");
  const int k_users = static_cast<int>(assoc.rows());
  const int n_nodes = static_cast<int>(assoc.cols());
  Eigen::ArrayXXd eta = Eigen::ArrayXXd::Zero(k_users, n_nodes);
  for (int n = 0; n < n_nodes; ++n) {
    double denom = 0.0;
    for (int k = 0; k < k_users; ++k) {
      if (assoc(k, n) == 0) continue;
      if (coeffs(k, n) <= 0.0)
        throw std::invalid_argument("fpa_powers: nonpositive coefficient on a served link");
      denom += std::pow(coeffs(k, n), -alpha);
    }
    if (denom == 0.0) continue;  // idle node
    for (int k = 0; k < k_users; ++k)
      if (assoc(k, n) != 0)
        eta(k, n) = p_max(n) * std::pow(coeffs(k, n), -alpha) / denom;
  }
  return eta;
}

Eigen::VectorXcd jpzf_precoder(const Eigen::MatrixXcd& stacked_all, int k,
                               int r_jpzf, bool* used_fallback) {
  if (used_fallback) *used_fallback = false;
  const Eigen::Index dim = stacked_all.rows();
  const int k_users = static_cast<int>(stacked_all.cols());
  if (dim < r_jpzf)
    throw std::invalid_argument("jpzf_precoder: stacked dimension below r_jpzf");

  // Protected set: the r largest-norm stacked estimates among the others.
  std::vector<int> others;
  others.reserve(k_users - 1);
  for (int j = 0; j < k_users; ++j)
    if (j != k) others.push_back(j);
  const int r = std::min<int>(r_jpzf, static_cast<int>(others.size()));
  std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
    return stacked_all.col(a).norm() > stacked_all.col(b).norm();
  });

  Eigen::MatrixXcd protected_mat(dim, r);
  for (int i = 0; i < r; ++i) protected_mat.col(i) = stacked_all.col(others[i]);

  const Eigen::VectorXcd target = stacked_all.col(k);
  Eigen::MatrixXcd basis = orth(protected_mat);
  Eigen::VectorXcd w = target - basis * (basis.adjoint() * target);
  double n = w.norm();
  if (n <= kProjectionFloor * target.norm()) {
    if (used_fallback) *used_fallback = true;
    w = target;
    n = target.norm();
    if (n == 0.0) throw std::invalid_argument("jpzf_precoder: zero target");
  }
  w /= n;

  // Unit-modulus rotation making the direct term real positive.
  std::complex<double> c = target.adjoint() * w;
  if (std::abs(c) > 0.0) w *= std::conj(c) / std::abs(c);
  return w;
}

Eigen::MatrixXcd build_q(const AssociationState& assoc,
                         const std::vector<Eigen::VectorXcd>& stacked_w,
                         int n_ant_ap, int n_ant_bs) {
  const int k_users = static_cast<int>(assoc.a.rows());
  const int m_aps = static_cast<int>(assoc.a.cols());
  const int l_bss = static_cast<int>(assoc.b.cols());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(n_ant_ap) * m_aps +
          static_cast<Eigen::Index>(n_ant_bs) * l_bss,
      k_users);

  for (int k = 0; k < k_users; ++k) {
    Eigen::Index ind = 0;
    const Eigen::VectorXcd& w = stacked_w[k];
    auto take = [&](Eigen::Index n) {
      if (ind + n > w.size())
        throw std::invalid_argument(
            "build_q: beamformer length does not match serving set");
      auto seg = w.segment(ind, n);
      ind += n;
      return seg;
    };
    for (int m = 0; m < m_aps; ++m) {
      if (assoc.a(k, m) == 0) continue;
      q.block(static_cast<Eigen::Index>(m) * n_ant_ap, k, n_ant_ap, 1) =
          take(n_ant_ap);
    }
    for (int l = 0; l < l_bss; ++l) {
      if (assoc.b(k, l) == 0) continue;
      q.block(static_cast<Eigen::Index>(n_ant_ap) * m_aps +
                  static_cast<Eigen::Index>(l) * n_ant_bs,
              k, n_ant_bs, 1) = take(n_ant_bs);
    }
    if (ind != w.size())
      throw std::invalid_argument(
          "build_q: beamformer length does not match serving set");
  }
  return q;
}

EqualStreamPower equal_stream_power(const Eigen::MatrixXcd& q,
                                    const Eigen::VectorXd& p_max_ap,
                                    const Eigen::VectorXd& p_max_bs,
                                    int n_ant_ap, int n_ant_bs) {
  const int m_aps = static_cast<int>(p_max_ap.size());
  const int l_bss = static_cast<int>(p_max_bs.size());
  EqualStreamPower out;
  out.node_load.resize(m_aps + l_bss);

  double eta = std::numeric_limits<double>::infinity();
  for (int m = 0; m < m_aps; ++m) {
    double load = q.middleRows(static_cast<Eigen::Index>(m) * n_ant_ap, n_ant_ap)
                      .squaredNorm();
    out.node_load(m) = load;
    if (load > 0.0) eta = std::min(eta, p_max_ap(m) / load);
  }
  const Eigen::Index bs_base = static_cast<Eigen::Index>(m_aps) * n_ant_ap;
  for (int l = 0; l < l_bss; ++l) {
    double load =
        q.middleRows(bs_base + static_cast<Eigen::Index>(l) * n_ant_bs, n_ant_bs)
            .squaredNorm();
    out.node_load(m_aps + l) = load;
    if (load > 0.0) eta = std::min(eta, p_max_bs(l) / load);
  }
  if (!std::isfinite(eta)) {
    out.eta = 0.0;
    out.all_idle = true;
  } else {
    out.eta = eta;
  }
  return out;
}

ComplexityCount precoder_complexity(int n_serve_ap, int n_serve_bs,
                                    int n_ant_ap, int n_ant_bs, int n_pzf_ap,
                                    int n_pzf_bs, int r_jpzf) {
  ComplexityCount c;
  const std::uint64_t stacked = static_cast<std::uint64_t>(n_ant_ap) * n_serve_ap +
                                static_cast<std::uint64_t>(n_ant_bs) * n_serve_bs;
  c.central_mults = static_cast<std::uint64_t>(r_jpzf) * r_jpzf * stacked;
  c.local_mults =
      static_cast<std::uint64_t>(n_serve_bs) * n_pzf_bs * n_pzf_bs * n_ant_bs +
      static_cast<std::uint64_t>(n_serve_ap) * n_pzf_ap * n_pzf_ap * n_ant_ap;
  return c;
}

PrecoderPowerSet compute_local_precoders(const LocalPrecodingInputs& in,
                                         const AssociationState& assoc,
                                         const EstimateSet& est,
                                         const LargeScale& ls,
                                         const PilotBook& book,
                                         double noise_var_ul) {
  const int k_users = static_cast<int>(assoc.a.rows());
  const int m_aps = static_cast<int>(assoc.a.cols());
  const int l_bss = static_cast<int>(assoc.b.cols());

  PrecoderPowerSet out;
  out.user_links.resize(k_users);

  Eigen::ArrayXXd eta_ap = fpa_powers(assoc.a, ls.beta, in.alpha, in.p_max_ap);
  Eigen::ArrayXXd eta_bs = fpa_powers(assoc.b, ls.rho, in.alpha, in.p_max_bs);

  auto process_node = [&](NodeKind kind, int node, int n_nodes, int n_ant,
                          const Eigen::MatrixXcd& estimates,
                          const Eigen::ArrayXXi& a, const Eigen::ArrayXXd& coeffs,
                          const Eigen::ArrayXXd& eta, int n_pzf) {
    std::vector<int> served;
    for (int k = 0; k < k_users; ++k)
      if (a(k, node) != 0) served.push_back(k);
    if (served.empty()) return;

    auto est_col = [&](int k) {
      return estimates.col(static_cast<Eigen::Index>(k) * n_nodes + node);
    };

    // MMSE shares one factorization across the node's served users. Under
    // perfect CSI the error-covariance term G - Ghat vanishes exactly.
    Eigen::LDLT<Eigen::MatrixXcd> ldlt;
    Eigen::MatrixXcd serving(n_ant, served.size());
    if (in.precoder == Precoder::Mmse) {
      std::vector<Eigen::MatrixXcd> cov, est_cov;
      Eigen::VectorXd etas_ul(served.size());
      for (size_t j = 0; j < served.size(); ++j) {
        serving.col(j) = est_col(served[j]);
        const LinkLargeScale& link = kind == NodeKind::Bs
                                         ? ls.bs_link(served[j], node)
                                         : ls.ap_link(served[j], node);
        cov.push_back(link_covariance(link, n_ant));
        est_cov.push_back(in.pcsi
                              ? cov.back()
                              : estimate_covariance(ls, book, est.train_powers,
                                                    noise_var_ul, kind, node,
                                                    served[j], n_ant));
        etas_ul(j) = est.train_powers(served[j]);
      }
      ldlt = mmse_system(serving, cov, est_cov, etas_ul, in.noise_var_dl);
    }

    for (int k : served) {
      Eigen::VectorXcd target = est_col(k);
      double power = eta(k, node);
      if (target.norm() == 0.0) {
        // Untrained link: no usable estimate, leg stays silent.
        out.user_links[k].push_back(
            {kind, node, Eigen::VectorXcd::Zero(n_ant), 0.0});
        continue;
      }
      Eigen::VectorXcd w;
      switch (in.precoder) {
        case Precoder::Mrt:
          w = mrt(target);
          break;
        case Precoder::Pzf: {
          // Protect the co-served users with the strongest large-scale
          // coefficient towards this node.
          std::vector<int> prot;
          for (int j : served)
            if (j != k) prot.push_back(j);
          std::stable_sort(prot.begin(), prot.end(), [&](int x, int y) {
            return coeffs(x, node) > coeffs(y, node);
          });
          int np = std::min<int>(n_pzf, static_cast<int>(prot.size()));
          np = std::min(np, n_ant - 1);
          Eigen::MatrixXcd pm(n_ant, np);
          for (int i = 0; i < np; ++i) pm.col(i) = est_col(prot[i]);
          bool fb = false;
          w = pzf_local(target, pm, &fb);
          if (fb) ++out.pzf_fallbacks;
          break;
        }
        case Precoder::Mmse: {
          Eigen::VectorXcd solved = ldlt.solve(target);
          w = mrt(solved);
          break;
        }
        case Precoder::Jpzf:
          throw std::invalid_argument("compute_local_precoders: JPZF is a joint precoder");
      }
      out.user_links[k].push_back({kind, node, std::move(w), power});
    }
  };

  for (int m = 0; m < m_aps; ++m)
    process_node(NodeKind::Ap, m, m_aps, static_cast<int>(est.g_hat.rows()),
                 est.g_hat, assoc.a, ls.beta, eta_ap, in.n_pzf_ap);
  for (int l = 0; l < l_bss; ++l)
    process_node(NodeKind::Bs, l, l_bss, static_cast<int>(est.h_hat.rows()),
                 est.h_hat, assoc.b, ls.rho, eta_bs, in.n_pzf_bs);
  return out;
}

PrecoderPowerSet compute_jpzf_precoders(const AssociationState& assoc,
                                        const EstimateSet& est, int r_jpzf,
                                        const Eigen::VectorXd& p_max_ap,
                                        const Eigen::VectorXd& p_max_bs,
                                        int n_ant_ap, int n_ant_bs) {
  const int k_users = static_cast<int>(assoc.a.rows());
  const int m_aps = static_cast<int>(assoc.a.cols());
  const int l_bss = static_cast<int>(assoc.b.cols());

  PrecoderPowerSet out;
  out.user_links.resize(k_users);

  std::vector<Eigen::VectorXcd> stacked_w(k_users);
  std::vector<std::vector<int>> serving_aps(k_users), serving_bss(k_users);

  for (int k = 0; k < k_users; ++k) {
    serving_aps[k] = sorted_serving(assoc.a, k);
    serving_bss[k] = sorted_serving(assoc.b, k);
    const Eigen::Index dim =
        static_cast<Eigen::Index>(n_ant_ap) * serving_aps[k].size() +
        static_cast<Eigen::Index>(n_ant_bs) * serving_bss[k].size();
    if (dim == 0) {
      stacked_w[k] = Eigen::VectorXcd();
      continue;
    }

    Eigen::MatrixXcd stacked(dim, k_users);
    for (int j = 0; j < k_users; ++j) {
      Eigen::Index ind = 0;
      for (int m : serving_aps[k]) {
        stacked.block(ind, j, n_ant_ap, 1) =
            est.g_hat.col(static_cast<Eigen::Index>(j) * m_aps + m);
        ind += n_ant_ap;
      }
      for (int l : serving_bss[k]) {
        stacked.block(ind, j, n_ant_bs, 1) =
            est.h_hat.col(static_cast<Eigen::Index>(j) * l_bss + l);
        ind += n_ant_bs;
      }
    }

    // Fronthaul pruning can shrink the stacked dimension below the nominal
    // protection order; keep one dimension for the useful signal.
    int r_eff = std::min<int>(r_jpzf, static_cast<int>(dim) - 1);
    bool fb = false;
    stacked_w[k] = jpzf_precoder(stacked, k, std::max(r_eff, 0), &fb);
    if (fb) ++out.pzf_fallbacks;
  }

  Eigen::MatrixXcd q = build_q(assoc, stacked_w, n_ant_ap, n_ant_bs);
  EqualStreamPower esp =
      equal_stream_power(q, p_max_ap, p_max_bs, n_ant_ap, n_ant_bs);

  for (int k = 0; k < k_users; ++k) {
    Eigen::Index ind = 0;
    for (int m : serving_aps[k]) {
      out.user_links[k].push_back(
          {NodeKind::Ap, m, stacked_w[k].segment(ind, n_ant_ap), esp.eta});
      ind += n_ant_ap;
    }
    for (int l : serving_bss[k]) {
      out.user_links[k].push_back(
          {NodeKind::Bs, l, stacked_w[k].segment(ind, n_ant_bs), esp.eta});
      ind += n_ant_bs;
    }
  }
  return out;
}

}  // namespace cfmimo
