#include <doctest.h>

#include <cmath>

#include "cfmimo/propagation.hpp"

using namespace cfmimo;

TEST_CASE("UMa LOS probability") {
  CHECK(los_probability_uma(10.0, 1.5) == 1.0);
  CHECK(los_probability_uma(18.0, 1.5) == 1.0);
  // Direct evaluation at d = 63 m, C(1.5) = 0.
  double expected = 18.0 / 63.0 + (45.0 / 63.0) * std::exp(-1.0);
  CHECK(los_probability_uma(63.0, 1.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(los_probability_uma(63.0, 1.5) == doctest::Approx(0.5485).epsilon(1e-3));
  CHECK(los_probability_uma(1.0e6, 1.5) < 1e-4);
  for (double d = 18.5; d < 3000.0; d *= 1.2) {
    double p = los_probability_uma(d, 1.5);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  CHECK_THROWS_AS(los_probability_uma(50.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(los_probability_uma(50.0, 25.0), std::invalid_argument);
}

TEST_CASE("UMi LOS probability") {
  CHECK(los_probability_umi(0.0) == 1.0);
  CHECK(los_probability_umi(18.0) == 1.0);
  double expected = 0.5 + 0.5 * std::exp(-1.0);
  CHECK(los_probability_umi(36.0) == doctest::Approx(expected).epsilon(1e-12));
  // Monotone nonincreasing, strictly inside (0,1) beyond 18 m.
  double prev = 1.0;
  for (double d = 19.0; d < 2000.0; d += 7.0) {
    double p = los_probability_umi(d);
    CHECK(p <= prev + 1e-15);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    prev = p;
  }
}

TEST_CASE("Rician factor from LOS probability") {
  CHECK(rician_factor(0.5).k == doctest::Approx(1.0));
  CHECK(rician_factor(0.0).k == 0.0);
  CHECK_FALSE(rician_factor(0.0).pure_los);
  CHECK(rician_factor(1.0).pure_los);
  CHECK_THROWS_AS(rician_factor(1.5), std::invalid_argument);
}

TEST_CASE("breakpoint distance") {
  CHECK(breakpoint_distance(24.0, 0.5, 3.5e9) == doctest::Approx(560.0).epsilon(1e-12));
  CHECK(breakpoint_distance(9.0, 0.5, 3.5e9) == doctest::Approx(210.0).epsilon(1e-12));
  CHECK(breakpoint_distance(9.0, 0.5, 7.0e9) ==
        doctest::Approx(2.0 * breakpoint_distance(9.0, 0.5, 3.5e9)));
}

TEST_CASE("UMa path loss") {
  Rng rng(1);
  SUBCASE("LOS below breakpoint at 100 m / 3.5 GHz") {
    double pl = pathloss_uma(100.0, 100.0, 1.5, 25.0, 3.5e9, true, rng);
    double expected = 28.0 + 22.0 * 2.0 + 20.0 * std::log10(3.5);
    CHECK(pl == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pl == doctest::Approx(82.88).epsilon(1e-4));
  }
  SUBCASE("NLOS >= LOS pointwise") {
    for (double d = 12.0; d < 4000.0; d *= 1.17) {
      double d3d = std::hypot(d, 25.0 - 1.5);
      double los = pathloss_uma(d, d3d, 1.5, 25.0, 3.5e9, true, rng);
      double nlos = pathloss_uma(d, d3d, 1.5, 25.0, 3.5e9, false, rng);
      CHECK(nlos >= los);
    }
  }
  SUBCASE("deterministic for h_ue = 1.5 (no randomness consumed)") {
    Rng a(1), b(999);
    CHECK(pathloss_uma(300.0, 301.0, 1.5, 25.0, 3.5e9, true, a) ==
          pathloss_uma(300.0, 301.0, 1.5, 25.0, 3.5e9, true, b));
  }
  SUBCASE("sub-10 m distances clamp to the model floor") {
    double at5 = pathloss_uma(5.0, std::hypot(5.0, 23.5), 1.5, 25.0, 3.5e9, true, rng);
    double at10 = pathloss_uma(10.0, std::hypot(10.0, 23.5), 1.5, 25.0, 3.5e9, true, rng);
    CHECK(at5 == at10);
  }
}

TEST_CASE("UMi path loss") {
  SUBCASE("LOS below breakpoint at 100 m / 3.5 GHz") {
    double pl = pathloss_umi(100.0, 100.0, 1.5, 10.0, 3.5e9, true);
    double expected = 32.4 + 21.0 * 2.0 + 20.0 * std::log10(3.5);
    CHECK(pl == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pl == doctest::Approx(85.28).epsilon(1e-4));
  }
  SUBCASE("NLOS >= LOS and monotone in distance") {
    double prev_los = 0.0, prev_nlos = 0.0;
    for (double d = 12.0; d < 4000.0; d *= 1.13) {
      double d3d = std::hypot(d, 10.0 - 1.5);
      double los = pathloss_umi(d, d3d, 1.5, 10.0, 3.5e9, true);
      double nlos = pathloss_umi(d, d3d, 1.5, 10.0, 3.5e9, false);
      CHECK(nlos >= los);
      CHECK(los >= prev_los);
      CHECK(nlos >= prev_nlos);
      prev_los = los;
      prev_nlos = nlos;
    }
  }
}

TEST_CASE("correlated shadowing statistics") {
  SUBCASE("co-located users share the field exactly") {
    std::vector<Vec2> ue = {{0.0, 0.0}, {0.0, 0.0}};
    Rng rng(3);
    Eigen::MatrixXd z = correlated_shadowing(ue, 1, 6.0, 50.0, rng);
    CHECK(z(0, 0) == doctest::Approx(z(1, 0)).epsilon(1e-4));
  }
  SUBCASE("empirical covariance at 50 m matches sigma^2/e") {
    std::vector<Vec2> ue = {{0.0, 0.0}, {50.0, 0.0}};
    Rng rng(4);
    const int n = 100000;
    double acc = 0.0, var0 = 0.0, var1 = 0.0;
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd z = correlated_shadowing(ue, 1, 6.0, 50.0, rng);
      acc += z(0, 0) * z(1, 0);
      var0 += z(0, 0) * z(0, 0);
      var1 += z(1, 0) * z(1, 0);
    }
    double expected = 36.0 * std::exp(-1.0);
    CHECK(acc / n == doctest::Approx(expected).epsilon(0.05));
    CHECK(var0 / n == doctest::Approx(36.0).epsilon(0.05));
    CHECK(var1 / n == doctest::Approx(36.0).epsilon(0.05));
  }
  SUBCASE("marginals are zero-mean Gaussian (KS at 1%)") {
    std::vector<Vec2> ue = {{0.0, 0.0}, {120.0, 40.0}, {-30.0, 180.0}};
    Rng rng(5);
    const int n_draws = 100000 / 3 + 1;
    std::vector<double> samples;
    for (int i = 0; i < n_draws; ++i) {
      Eigen::MatrixXd z = correlated_shadowing(ue, 1, 7.82, 13.0, rng);
      for (int k = 0; k < 3; ++k) samples.push_back(z(k, 0));
    }
    std::sort(samples.begin(), samples.end());
    double d_stat = 0.0;
    const double n = static_cast<double>(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      double cdf = 0.5 * (1.0 + std::erf(samples[i] / (7.82 * std::sqrt(2.0))));
      d_stat = std::max(d_stat, std::abs(cdf - (i + 1) / n));
      d_stat = std::max(d_stat, std::abs(cdf - i / n));
    }
    CHECK(d_stat * std::sqrt(n) < 1.63);  // 1% critical value
  }
}

TEST_CASE("sector array gain") {
  AntennaPattern p;  // defaults: 8 dBi, -30 dB edge, 65 deg HPBW
  SUBCASE("peak at boresight") {
    CHECK(array_gain_bs(0.0, p) == doctest::Approx(std::pow(10.0, 0.8)).epsilon(1e-12));
  }
  SUBCASE("even symmetry") {
    for (double t : {0.1, 0.5, 1.0, 2.0})
      CHECK(array_gain_bs(t, p) == doctest::Approx(array_gain_bs(-t, p)).epsilon(1e-12));
  }
  SUBCASE("half-power at +-HPBW/2") {
    double t3 = 32.5 * M_PI / 180.0;
    CHECK(10.0 * std::log10(array_gain_bs(t3, p)) ==
          doctest::Approx(8.0 - 3.0).epsilon(1e-9));
  }
  SUBCASE("edge attenuation outside the mainlobe") {
    double expected = std::pow(10.0, (8.0 - 30.0) / 10.0);
    CHECK(array_gain_bs(M_PI / 2, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(array_gain_bs(-M_PI / 2, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(array_gain_bs(M_PI, p) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("steering vector") {
  SUBCASE("boresight is the all-ones vector") {
    Eigen::VectorXcd a = steering_vector(0.0, 4);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(a(i) - std::complex<double>(1.0, 0.0)) < 1e-15);
  }
  SUBCASE("squared norm is the antenna count") {
    for (double t : {-1.2, -0.3, 0.7, 1.4})
      CHECK(steering_vector(t, 8).squaredNorm() == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("endfire 2-element") {
    Eigen::VectorXcd a = steering_vector(M_PI / 2, 2);
    CHECK(std::abs(a(0) - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(a(1) - std::complex<double>(-1.0, 0.0)) < 1e-12);
  }
}

namespace {

// Tiny layout: one site, one AP, one user, fixed geometry.
NetworkLayout toy_layout() {
  NetworkLayout layout = build_hex_layout(500.0, 1, 0);
  layout.ap_positions = {{50.0, 30.0}};
  layout.ap_cell = {0};
  layout.ue_positions = {{120.0, -40.0}};
  layout.ue_cell = {0};
  layout.ue_sector = {0};
  return layout;
}

}  // namespace

TEST_CASE("channel normalization, Rayleigh and pure LOS") {
  NetworkLayout layout = toy_layout();
  PropagationParams params;

  SUBCASE("Rayleigh: E||g||^2 = N*beta within 3 standard errors") {
    params.fading = FadingMode::Rayleigh;
    Rng rng(6);
    LargeScale ls = make_large_scale(layout, params, rng);
    double beta = ls.beta(0, 0);
    const int n = 10000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      ChannelSet ch = draw_channels(layout, ls, 8, 32, rng);
      double e = ch.g.col(0).squaredNorm();
      acc += e;
      acc2 += e * e;
    }
    double mean = acc / n;
    double se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 8.0 * beta) <= 3.0 * se);
  }

  SUBCASE("pure LOS: ||g||^2 = N*beta exactly, deterministic direction") {
    params.fading = FadingMode::Rician;
    layout.ue_positions[0] = {55.0, 32.0};  // within 18 m of the AP
    Rng rng(7);
    LargeScale ls = make_large_scale(layout, params, rng);
    REQUIRE(ls.ap_link(0, 0).pure_los);
    ChannelSet ch = draw_channels(layout, ls, 8, 32, rng);
    CHECK(ch.g.col(0).squaredNorm() ==
          doctest::Approx(8.0 * ls.beta(0, 0)).epsilon(1e-12));
    Eigen::VectorXcd a = steering_vector(ls.ap_link(0, 0).aod, 8);
    // Alignment: |a^H g| = ||a|| ||g||.
    CHECK(std::abs(a.dot(ch.g.col(0))) ==
          doctest::Approx(a.norm() * ch.g.col(0).norm()).epsilon(1e-12));
  }
}

TEST_CASE("Rice power split at K = 1") {
  NetworkLayout layout = toy_layout();
  PropagationParams params;
  Rng rng(8);
  LargeScale ls = make_large_scale(layout, params, rng);
  // Force K = 1 on the AP link.
  LinkLargeScale& link = const_cast<LinkLargeScale&>(ls.ap_link(0, 0));
  link.k_factor = 1.0;
  link.pure_los = false;

  Eigen::VectorXcd a = steering_vector(link.aod, 8);
  const int n = 10000;
  double scatter_power = 0.0, total_power = 0.0;
  for (int i = 0; i < n; ++i) {
    ChannelSet ch = draw_channels(layout, ls, 8, 32, rng);
    Eigen::VectorXcd los = std::sqrt(link.coeff_linear / 2.0) *
                           (std::polar(1.0, ch.phase_ap(0, 0)) * a);
    scatter_power += (ch.g.col(0) - los).squaredNorm();
    total_power += ch.g.col(0).squaredNorm();
  }
  // LOS and scatter each carry half the mean power.
  CHECK(scatter_power / total_power == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("large-scale composition of coefficients") {
  NetworkLayout layout = build_hex_layout(500.0, 1, 0);
  Rng geo_rng(10);
  layout = place_aps(std::move(layout), ApMode::Uniform, 3, geo_rng);
  layout = drop_users(std::move(layout), 2, geo_rng);
  PropagationParams params;
  Rng rng(11);
  LargeScale ls = make_large_scale(layout, params, rng);

  const double gain_min = std::pow(10.0, (8.0 - 30.0) / 10.0);
  const double gain_max = std::pow(10.0, 0.8);
  for (int k = 0; k < layout.num_users(); ++k) {
    for (int m = 0; m < layout.num_aps(); ++m) {
      const LinkLargeScale& l = ls.ap_link(k, m);
      CHECK(ls.beta(k, m) ==
            doctest::Approx(std::pow(10.0, (-l.pathloss_db + l.shadow_db) / 10.0))
                .epsilon(1e-12));
      CHECK(ls.beta(k, m) > 0.0);
    }
    for (int l_idx = 0; l_idx < layout.num_sectors(); ++l_idx) {
      const LinkLargeScale& l = ls.bs_link(k, l_idx);
      double implied_gain =
          ls.rho(k, l_idx) / std::pow(10.0, (-l.pathloss_db + l.shadow_db) / 10.0);
      CHECK(implied_gain >= gain_min * (1 - 1e-9));
      CHECK(implied_gain <= gain_max * (1 + 1e-9));
    }
  }
}
