#include "cfmimo/association.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace cfmimo {

namespace {

// Indices of the n largest entries, ties to the lower index.
std::vector<int> top_n(const Eigen::ArrayXd& values, int n) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return values(a) > values(b);
  });
  idx.resize(n);
  return idx;
}

double top_n_sum(const Eigen::ArrayXd& values, int n) {
  Eigen::ArrayXd sorted = values;
  std::sort(sorted.data(), sorted.data() + sorted.size(),
            std::greater<double>());
  return sorted.head(n).sum();
}

}  // namespace

Eigen::ArrayXXi AssociationState::merged() const {
  Eigen::ArrayXXi m(a.rows(), a.cols() + b.cols());
  m.leftCols(a.cols()) = a;
  m.rightCols(b.cols()) = b;
  return m;
}

AssociationState associate(Scenario scenario, const Eigen::ArrayXXd& rho,
                           const Eigen::ArrayXXd& beta, int n_serve_ap,
                           int n_serve_bs, int n_ant_ap, int n_ant_bs) {
  const int k_users = static_cast<int>(rho.rows());
  const int l_bss = static_cast<int>(rho.cols());
  const int m_aps = static_cast<int>(beta.cols());
  if (beta.rows() != k_users)
    throw std::invalid_argument("associate: rho/beta row mismatch");
  if (scenario == Scenario::HetNoCoop) n_serve_ap = n_serve_bs = 1;
  // A deployment without APs (or without BSs) degenerates to the other side.
  if (m_aps == 0) n_serve_ap = 0;
  if (l_bss == 0) n_serve_bs = 0;
  if (n_serve_ap > m_aps || n_serve_bs > l_bss)
    throw std::invalid_argument("associate: serving count exceeds node count");

  AssociationState st;
  st.scenario = scenario;
  st.a = Eigen::ArrayXXi::Zero(k_users, m_aps);
  st.b = Eigen::ArrayXXi::Zero(k_users, l_bss);

  for (int k = 0; k < k_users; ++k) {
    const Eigen::ArrayXd rho_k = rho.row(k);
    const Eigen::ArrayXd beta_k = beta.row(k);
    switch (scenario) {
      case Scenario::Mc: {
        if (l_bss == 0)
          throw std::invalid_argument("associate: MC scenario needs at least one BS");
        st.b(k, top_n(rho_k, 1)[0]) = 1;
        break;
      }
      case Scenario::HetNoCoop:
      case Scenario::Horizontal: {
        double ap_side =
            n_serve_ap > 0 ? n_ant_ap * top_n_sum(beta_k, n_serve_ap) : -1.0;
        double bs_side =
            n_serve_bs > 0 ? n_ant_bs * top_n_sum(rho_k, n_serve_bs) : -1.0;
        if (ap_side >= bs_side) {
          for (int m : top_n(beta_k, n_serve_ap)) st.a(k, m) = 1;
        } else {
          for (int l : top_n(rho_k, n_serve_bs)) st.b(k, l) = 1;
        }
        break;
      }
      case Scenario::Full: {
        for (int m : top_n(beta_k, n_serve_ap)) st.a(k, m) = 1;
        for (int l : top_n(rho_k, n_serve_bs)) st.b(k, l) = 1;
        break;
      }
    }
  }
  return st;
}

AssociationState split_merged(const Eigen::ArrayXXi& merged, int n_aps,
                              Scenario scenario) {
  AssociationState st;
  st.scenario = scenario;
  st.a = merged.leftCols(n_aps);
  st.b = merged.rightCols(merged.cols() - n_aps);
  return st;
}

}  // namespace cfmimo
