#include "cfmimo/pilots.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace cfmimo {

namespace {

constexpr int kMaxKmeansIters = 100;

double dist2(const Vec2& a, const Vec2& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

PilotBook assign_pilots(const std::vector<Vec2>& ue_positions, int tau_p) {
  const int k_users = static_cast<int>(ue_positions.size());
  if (k_users < 1) throw std::invalid_argument("assign_pilots: no users");
  if (tau_p < 1) throw std::invalid_argument("assign_pilots: tau_p must be >= 1");

  const int n_clusters = (k_users + tau_p - 1) / tau_p;

  // Initial centroids on a regular grid over the bounding box.
  double min_x = ue_positions[0].x, max_x = min_x;
  double min_y = ue_positions[0].y, max_y = min_y;
  for (const auto& p : ue_positions) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int gx = static_cast<int>(std::ceil(std::sqrt(double(n_clusters))));
  const int gy = (n_clusters + gx - 1) / gx;
  std::vector<Vec2> centroids;
  centroids.reserve(n_clusters);
  for (int j = 0; j < gy && static_cast<int>(centroids.size()) < n_clusters; ++j)
    for (int i = 0; i < gx && static_cast<int>(centroids.size()) < n_clusters; ++i)
      centroids.push_back({min_x + (i + 0.5) * (max_x - min_x) / gx,
                           min_y + (j + 0.5) * (max_y - min_y) / gy});

  std::vector<int> member(k_users, -1);
  for (int iter = 0; iter < kMaxKmeansIters; ++iter) {
    bool changed = false;
    for (int k = 0; k < k_users; ++k) {
      int best = 0;
      double best_d = dist2(ue_positions[k], centroids[0]);
      for (int c = 1; c < n_clusters; ++c) {
        double d = dist2(ue_positions[k], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (member[k] != best) {
        member[k] = best;
        changed = true;
      }
    }

    std::vector<int> count(n_clusters, 0);
    std::vector<Vec2> sum(n_clusters);
    for (int k = 0; k < k_users; ++k) {
      ++count[member[k]];
      sum[member[k]].x += ue_positions[k].x;
      sum[member[k]].y += ue_positions[k].y;
    }
    for (int c = 0; c < n_clusters; ++c) {
      if (count[c] > 0) {
        centroids[c] = {sum[c].x / count[c], sum[c].y / count[c]};
      } else {
        // Reseed an empty cluster at the user farthest from its centroid.
        int far_k = 0;
        double far_d = -1.0;
        for (int k = 0; k < k_users; ++k) {
          double d = dist2(ue_positions[k], centroids[member[k]]);
          if (d > far_d) {
            far_d = d;
            far_k = k;
          }
        }
        centroids[c] = ue_positions[far_k];
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Rebalance: a cluster may not exceed tau_p users. Overflow users (farthest
  // from their centroid first) migrate to the nearest cluster with a spare
  // pilot. Total capacity n_clusters*tau_p >= K guarantees termination.
  std::vector<int> count(n_clusters, 0);
  for (int k = 0; k < k_users; ++k) ++count[member[k]];
  for (int c = 0; c < n_clusters; ++c) {
    while (count[c] > tau_p) {
      int move_k = -1;
      double far_d = -1.0;
      for (int k = 0; k < k_users; ++k) {
        if (member[k] != c) continue;
        double d = dist2(ue_positions[k], centroids[c]);
        if (d > far_d) {
          far_d = d;
          move_k = k;
        }
      }
      int target = -1;
      double best_d = 0.0;
      for (int t = 0; t < n_clusters; ++t) {
        if (count[t] >= tau_p) continue;
        double d = dist2(ue_positions[move_k], centroids[t]);
        if (target < 0 || d < best_d) {
          best_d = d;
          target = t;
        }
      }
      member[move_k] = target;
      --count[c];
      ++count[target];
    }
  }

  PilotBook book;
  book.tau_p = tau_p;
  book.sequences = Eigen::MatrixXcd::Identity(tau_p, tau_p);
  book.assignment.resize(k_users);
  book.cluster = member;

  // Within each cluster: pilot 0 to the most northern user, then southwards.
  // Latitude ties break on the lower x coordinate, then user index.
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<int> users;
    for (int k = 0; k < k_users; ++k)
      if (member[k] == c) users.push_back(k);
    std::sort(users.begin(), users.end(), [&](int a, int b) {
      if (ue_positions[a].y != ue_positions[b].y)
        return ue_positions[a].y > ue_positions[b].y;
      if (ue_positions[a].x != ue_positions[b].x)
        return ue_positions[a].x < ue_positions[b].x;
      return a < b;
    });
    for (size_t r = 0; r < users.size(); ++r)
      book.assignment[users[r]] = static_cast<int>(r);
  }
  return book;
}

TrainingObservations uplink_training_rx(const ChannelSet& channels,
                                        const PilotBook& book,
                                        const Eigen::VectorXd& train_powers,
                                        double noise_var, Rng& rng) {
  const int k_users = static_cast<int>(book.assignment.size());
  const int l_bss = k_users > 0 ? static_cast<int>(channels.h.cols()) / k_users : 0;
  const int m_aps = k_users > 0 ? static_cast<int>(channels.g.cols()) / k_users : 0;
  const double noise_sd = std::sqrt(noise_var);

  TrainingObservations obs;
  obs.y_bs.resize(l_bss);
  obs.y_ap.resize(m_aps);

  auto receive = [&](const Eigen::MatrixXcd& chan, int n_nodes, int node,
                     int n_ant) {
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n_ant, book.tau_p);
    for (int i = 0; i < k_users; ++i) {
      if (train_powers(i) <= 0.0) continue;
      y.noalias() += std::sqrt(train_powers(i)) *
                     chan.col(static_cast<Eigen::Index>(i) * n_nodes + node) *
                     book.sequences.col(book.assignment[i]).adjoint();
    }
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (Eigen::Index r = 0; r < y.rows(); ++r)
        y(r, c) += noise_sd * rng.cnormal();
    return y;
  };

  for (int l = 0; l < l_bss; ++l)
    obs.y_bs[l] = receive(channels.h, l_bss, l, static_cast<int>(channels.h.rows()));
  for (int m = 0; m < m_aps; ++m)
    obs.y_ap[m] = receive(channels.g, m_aps, m, static_cast<int>(channels.g.rows()));
  return obs;
}

Eigen::MatrixXcd training_gram(const LargeScale& ls, const PilotBook& book,
                               const Eigen::VectorXd& train_powers,
                               double noise_var, NodeKind kind, int node,
                               int pilot, int n_ant) {
  const int k_users = static_cast<int>(book.assignment.size());
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n_ant, n_ant);
  for (int i = 0; i < k_users; ++i) {
    if (book.assignment[i] != pilot || train_powers(i) <= 0.0) continue;
    const LinkLargeScale& link =
        kind == NodeKind::Bs ? ls.bs_link(i, node) : ls.ap_link(i, node);
    gram.noalias() += train_powers(i) * link_covariance(link, n_ant);
  }
  gram.diagonal().array() += noise_var;
  return gram;
}

Eigen::MatrixXcd estimate_covariance(const LargeScale& ls,
                                     const PilotBook& book,
                                     const Eigen::VectorXd& train_powers,
                                     double noise_var, NodeKind kind, int node,
                                     int user, int n_ant) {
  const LinkLargeScale& link =
      kind == NodeKind::Bs ? ls.bs_link(user, node) : ls.ap_link(user, node);
  Eigen::MatrixXcd cov = link_covariance(link, n_ant);
  if (noise_var == 0.0 && train_powers(user) > 0.0) {
    // Noiseless and contamination-free: B = eta*Cov, so the estimate
    // covariance collapses to Cov itself.
    bool sole = true;
    for (size_t i = 0; i < book.assignment.size(); ++i)
      if (static_cast<int>(i) != user && train_powers(i) > 0.0 &&
          book.assignment[i] == book.assignment[user])
        sole = false;
    if (sole) return cov;
  }
  Eigen::MatrixXcd gram = training_gram(ls, book, train_powers, noise_var,
                                        kind, node, book.assignment[user], n_ant);
  Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  if (llt.info() != Eigen::Success) {
    gram.diagonal().array() += 1.0e-12;
    llt.compute(gram);
  }
  return train_powers(user) * cov * llt.solve(cov);
}

EstimateSet lmmse_estimate(const TrainingObservations& obs,
                           const PilotBook& book, const LargeScale& ls,
                           const Eigen::VectorXd& train_powers,
                           double noise_var) {
  const int k_users = static_cast<int>(book.assignment.size());
  const int l_bss = static_cast<int>(obs.y_bs.size());
  const int m_aps = static_cast<int>(obs.y_ap.size());

  EstimateSet est;
  est.train_powers = train_powers;

  auto estimate_node = [&](NodeKind kind, int node, int n_ant,
                           const Eigen::MatrixXcd& y, Eigen::MatrixXcd& out,
                           int n_nodes) {
    for (int pilot = 0; pilot < book.tau_p; ++pilot) {
      std::vector<int> users;
      for (int i = 0; i < k_users; ++i)
        if (book.assignment[i] == pilot) users.push_back(i);
      if (users.empty()) continue;

      Eigen::VectorXcd y_hat = y * book.sequences.col(pilot);

      int active = 0, sole = -1;
      for (int i : users)
        if (train_powers(i) > 0.0) {
          ++active;
          sole = i;
        }

      // Noiseless, contamination-free shortcut: B = eta*Cov makes the LMMSE
      // filter collapse to 1/sqrt(eta).
      if (noise_var == 0.0 && active == 1) {
        for (int i : users) {
          Eigen::Index col = static_cast<Eigen::Index>(i) * n_nodes + node;
          out.col(col) = i == sole
                             ? (y_hat / std::sqrt(train_powers(i))).eval()
                             : Eigen::VectorXcd::Zero(n_ant).eval();
        }
        continue;
      }

      Eigen::MatrixXcd gram = training_gram(ls, book, train_powers, noise_var,
                                            kind, node, pilot, n_ant);
      Eigen::LLT<Eigen::MatrixXcd> llt(gram);
      if (llt.info() != Eigen::Success) {
        gram.diagonal().array() += 1.0e-12;
        llt.compute(gram);
        ++est.ridge_events;
      }
      Eigen::VectorXcd solved = llt.solve(y_hat);
      for (int i : users) {
        Eigen::Index col = static_cast<Eigen::Index>(i) * n_nodes + node;
        if (train_powers(i) <= 0.0) {
          out.col(col).setZero();
          continue;
        }
        const LinkLargeScale& link =
            kind == NodeKind::Bs ? ls.bs_link(i, node) : ls.ap_link(i, node);
        out.col(col) = std::sqrt(train_powers(i)) *
                       (link_covariance(link, n_ant) * solved);
      }
    }
  };

  if (l_bss > 0) {
    const int n_bs = static_cast<int>(obs.y_bs[0].rows());
    est.h_hat.resize(n_bs, static_cast<Eigen::Index>(k_users) * l_bss);
    for (int l = 0; l < l_bss; ++l)
      estimate_node(NodeKind::Bs, l, n_bs, obs.y_bs[l], est.h_hat, l_bss);
  }
  if (m_aps > 0) {
    const int n_ap = static_cast<int>(obs.y_ap[0].rows());
    est.g_hat.resize(n_ap, static_cast<Eigen::Index>(k_users) * m_aps);
    for (int m = 0; m < m_aps; ++m)
      estimate_node(NodeKind::Ap, m, n_ap, obs.y_ap[m], est.g_hat, m_aps);
  }
  return est;
}

void dump_pilot_csv(const PilotBook& book, std::ostream& out) {
  out << "user_id,pilot_id,cluster_id\n";
  for (size_t k = 0; k < book.assignment.size(); ++k)
    out << k << "," << book.assignment[k] << "," << book.cluster[k] << "\n";
}

}  // namespace cfmimo
