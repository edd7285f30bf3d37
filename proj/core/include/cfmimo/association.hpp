// User association rules for the four cooperation scenarios.
#pragma once

#include <Eigen/Dense>

namespace cfmimo {

enum class Scenario { Mc, HetNoCoop, Horizontal, Full };

struct AssociationState {
  Scenario scenario = Scenario::Mc;
  Eigen::ArrayXXi a;  // K x M, 1 if AP m serves user k
  Eigen::ArrayXXi b;  // K x L

  // K x (M+L) view with AP columns first.
  Eigen::ArrayXXi merged() const;
};

// Builds A/B from the large-scale coefficient matrices.
//   Mc:         single best BS per user.
//   HetNoCoop:  best single AP or best single BS, antenna-weighted compare.
//   Horizontal: top n_serve_ap APs or top n_serve_bs BSs (antenna-weighted
//               sum comparison, ties resolved towards the AP side).
//   Full:       top APs and top BSs jointly.
// Top-N ties break towards the lower node index.
AssociationState associate(Scenario scenario, const Eigen::ArrayXXd& rho,
                           const Eigen::ArrayXXd& beta, int n_serve_ap,
                           int n_serve_bs, int n_ant_ap, int n_ant_bs);

// Splits a merged K x (M+L) matrix back into A and B.
AssociationState split_merged(const Eigen::ArrayXXi& merged, int n_aps,
                              Scenario scenario);

}  // namespace cfmimo
