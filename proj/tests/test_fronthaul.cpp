#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cfmimo/fronthaul.hpp"
#include "cfmimo/random.hpp"

using namespace cfmimo;

namespace {

FronthaulParams table_params(ProcessingMode mode) {
  FronthaulParams p;  // defaults carry the reference parameter set
  p.mode = mode;
  return p;
}

}  // namespace

TEST_CASE("fronthaul data load") {
  FronthaulParams p = table_params(ProcessingMode::Local);
  CHECK(fh_data_load(0, p) == 0.0);
  // Direct evaluation: 8 * 55 * (19 / 5e-4) * (14 / 0.85).
  double per_ue = 8.0 * 55.0 * (19.0 / 5.0e-4) * (14.0 / 0.85);
  CHECK(fh_data_load(1, p) == doctest::Approx(per_ue).epsilon(1e-12));
  CHECK(fh_data_load(1, p) == doctest::Approx(2.754e8).epsilon(1e-3));
  for (int n : {2, 7, 19})
    CHECK(fh_data_load(n, p) == doctest::Approx(n * per_ue).epsilon(1e-12));
}

TEST_CASE("fronthaul weight load") {
  SUBCASE("local processing sends no weights") {
    FronthaulParams p = table_params(ProcessingMode::Local);
    CHECK(fh_weight_load(5, 8, p) == 0.0);
    CHECK(fh_weight_load(100, 32, p) == 0.0);
  }
  SUBCASE("joint processing, 8-antenna AP") {
    FronthaulParams p = table_params(ProcessingMode::Joint);
    double per_ue = 2.0 * (55.0 / 64.0) * (8.0 / 2.0e-4) * (8.0 / 0.85);
    CHECK(fh_weight_load(1, 8, p) == doctest::Approx(per_ue).epsilon(1e-12));
    CHECK(fh_weight_load(1, 8, p) == doctest::Approx(6.47e5).epsilon(1e-3));
    // Linear in the antenna count: a 32-antenna BS needs 4x the AP load.
    CHECK(fh_weight_load(1, 32, p) ==
          doctest::Approx(4.0 * fh_weight_load(1, 8, p)).epsilon(1e-12));
  }
}

TEST_CASE("proxy SINR") {
  SUBCASE("losing the only serving node zeroes the metric") {
    Eigen::ArrayXXi merged = Eigen::ArrayXXi::Zero(1, 2);
    merged(0, 1) = 1;
    Eigen::ArrayXXd delta(1, 2);
    delta << 0.5, 0.9;
    CHECK(proxy_sinr(0, 1, merged, delta, 1e-3) == 0.0);
  }
  SUBCASE("single user: remaining gain over noise") {
    Eigen::ArrayXXi merged = Eigen::ArrayXXi::Ones(1, 3);
    Eigen::ArrayXXd delta(1, 3);
    delta << 0.2, 0.3, 0.4;
    CHECK(proxy_sinr(0, 0, merged, delta, 0.1) ==
          doctest::Approx((0.3 + 0.4) / 0.1).epsilon(1e-12));
  }
  SUBCASE("two users, two nodes: hand-computed ratio") {
    // User 0 served by both nodes, user 1 by node 1 only; drop node 0.
    Eigen::ArrayXXi merged(2, 2);
    merged << 1, 1, 0, 1;
    Eigen::ArrayXXd delta(2, 2);
    delta << 0.6, 0.2,  // user 0 gains
        0.1, 0.5;       // user 1 gains
    const double noise = 0.05;
    // S_{0,0} = delta(0,1) / (delta(0,1) [user 1 at node 1] + noise)
    CHECK(proxy_sinr(0, 0, merged, delta, noise) ==
          doctest::Approx(0.2 / (0.2 + noise)).epsilon(1e-12));
    // Excluding node 1 instead: user 0 keeps node 0; interference comes from
    // nobody (user 1 has no other serving node).
    CHECK(proxy_sinr(0, 1, merged, delta, noise) ==
          doctest::Approx(0.6 / noise).epsilon(1e-12));
  }
}

TEST_CASE("enforce_fronthaul: compliant input is untouched") {
  Eigen::ArrayXXi merged = Eigen::ArrayXXi::Ones(3, 2);
  Eigen::ArrayXXd delta = Eigen::ArrayXXd::Constant(3, 2, 1e-9);
  Eigen::VectorXd limit = Eigen::VectorXd::Constant(2, 1.0e12);
  Eigen::VectorXi ants = Eigen::VectorXi::Constant(2, 8);
  FronthaulParams p = table_params(ProcessingMode::Local);
  int callbacks = 0;
  EnforceResult res = enforce_fronthaul(
      merged, delta, limit, p, ants, 1e-12,
      [&](const Eigen::ArrayXXi&) { ++callbacks; });
  CHECK(res.iterations == 0);
  CHECK(res.removed_links == 0);
  CHECK((res.merged == merged).all());
  CHECK(callbacks == 1);  // one evaluation sweep
}

TEST_CASE("enforce_fronthaul: drops the user with the best fallback first") {
  // Node 0 over limit by one user-equivalent; two served users whose proxy
  // SINRs after removal are {1.0, 3.4} by construction.
  FronthaulParams p = table_params(ProcessingMode::Local);
  double per_ue = fh_data_load(1, p);
  Eigen::ArrayXXi merged(2, 3);
  merged << 1, 1, 0,  // user 0: nodes 0,1
      1, 0, 1;        // user 1: nodes 0,2
  const double noise = 1.0;
  // After losing node 0: user 0 keeps delta(0,1), user 1 keeps delta(1,2).
  // Interference for user 0 at node 2 (serving user 1): delta(0,2); etc.
  Eigen::ArrayXXd delta(2, 3);
  delta << 1.0, 1.5, 0.5,  // S_0 = 1.5 / (0.5 + 1) = 1.0
      1.0, 0.25, 4.25;     // S_1 = 4.25 / (0.25 + 1) = 3.4
  Eigen::VectorXd limit = Eigen::VectorXd::Constant(3, 1.5 * per_ue);
  Eigen::VectorXi ants = Eigen::VectorXi::Constant(3, 8);
  EnforceResult res = enforce_fronthaul(merged, delta, limit, p, ants, noise);
  CHECK(res.removed_links == 1);
  CHECK(res.merged(1, 0) == 0);  // user 1 had the larger proxy SINR
  CHECK(res.merged(0, 0) == 1);
}

TEST_CASE("enforce_fronthaul: joint-mode 5 Gbps limit caps an AP at 18 users") {
  FronthaulParams p = table_params(ProcessingMode::Joint);
  const int k_users = 25;
  // One overloaded AP plus a big fallback node that serves everyone.
  Eigen::ArrayXXi merged = Eigen::ArrayXXi::Ones(k_users, 2);
  Eigen::ArrayXXd delta = Eigen::ArrayXXd::Constant(k_users, 2, 1e-9);
  Eigen::VectorXd limit(2);
  limit << 5.0e9, 1.0e15;
  Eigen::VectorXi ants(2);
  ants << 8, 32;
  EnforceResult res = enforce_fronthaul(merged, delta, limit, p, ants, 1e-12);
  CHECK(res.merged.col(0).sum() == 18);
  CHECK(res.merged.col(1).sum() == k_users);
  CHECK(res.removed_links == k_users - 18);
}

TEST_CASE("enforce_fronthaul: termination, exactness, idempotence, monotonicity") {
  Rng rng(21);
  const int k_users = 30, n_nodes = 8;
  Eigen::ArrayXXi merged(k_users, n_nodes);
  Eigen::ArrayXXd delta(k_users, n_nodes);
  for (int k = 0; k < k_users; ++k)
    for (int n = 0; n < n_nodes; ++n) {
      merged(k, n) = rng.uniform() < 0.7 ? 1 : 0;
      delta(k, n) = std::pow(10.0, rng.uniform(-12, -7));
    }
  FronthaulParams p = table_params(ProcessingMode::Local);
  double per_ue = fh_data_load(1, p);
  Eigen::VectorXd limit = Eigen::VectorXd::Constant(n_nodes, 10.5 * per_ue);
  Eigen::VectorXi ants = Eigen::VectorXi::Constant(n_nodes, 8);

  // Track the total overflow across callback sweeps; it must not increase.
  std::vector<double> overflow;
  auto watch = [&](const Eigen::ArrayXXi& m) {
    double acc = 0.0;
    for (int n = 0; n < n_nodes; ++n)
      acc += std::max(0.0, fh_total_load(m.col(n).sum(), 8, p) - limit(n));
    overflow.push_back(acc);
  };

  EnforceResult res = enforce_fronthaul(merged, delta, limit, p, ants, 1e-12, watch);
  for (int n = 0; n < n_nodes; ++n)
    CHECK(fh_total_load(res.merged.col(n).sum(), 8, p) <= limit(n));
  for (size_t i = 1; i < overflow.size(); ++i) CHECK(overflow[i] <= overflow[i - 1]);
  CHECK(overflow.back() == 0.0);

  EnforceResult again =
      enforce_fronthaul(res.merged, delta, limit, p, ants, 1e-12);
  CHECK(again.removed_links == 0);
  CHECK((again.merged == res.merged).all());
}

TEST_CASE("enforce_fronthaul: full disconnection is possible and counted") {
  FronthaulParams p = table_params(ProcessingMode::Local);
  double per_ue = fh_data_load(1, p);
  // One node, one user, limit below a single user's load.
  Eigen::ArrayXXi merged = Eigen::ArrayXXi::Ones(1, 1);
  Eigen::ArrayXXd delta = Eigen::ArrayXXd::Constant(1, 1, 1e-9);
  Eigen::VectorXd limit = Eigen::VectorXd::Constant(1, 0.5 * per_ue);
  Eigen::VectorXi ants = Eigen::VectorXi::Constant(1, 8);
  EnforceResult res = enforce_fronthaul(merged, delta, limit, p, ants, 1e-12);
  CHECK(res.merged(0, 0) == 0);
  CHECK(res.disconnected_users == 1);
}

TEST_CASE("fronthaul trace format") {
  std::vector<FronthaulTraceRow> trace = {{0, 3, 1.5e9, 7}, {1, 3, 1.2e9, 2}};
  std::stringstream out;
  write_fronthaul_trace(trace, out, true);
  std::string line;
  std::getline(out, line);
  CHECK(line == "iteration,node_id,F_n,removed_user");
  std::getline(out, line);
  CHECK(line.substr(0, 4) == "0,3,");
}
