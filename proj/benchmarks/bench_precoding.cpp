#include <benchmark/benchmark.h>

#include "cfmimo/precoding.hpp"
#include "cfmimo/random.hpp"

using namespace cfmimo;

namespace {

Eigen::MatrixXcd random_cmat(int rows, int cols, Rng& rng) {
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.cnormal();
  return m;
}

}  // namespace

static void BM_PzfLocal(benchmark::State& state) {
  Rng rng(1);
  Eigen::MatrixXcd prot = random_cmat(8, 4, rng);
  Eigen::VectorXcd target = random_cmat(8, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(pzf_local(target, prot));
}
BENCHMARK(BM_PzfLocal);

static void BM_MmseLocal32(benchmark::State& state) {
  Rng rng(2);
  const int n_ant = 32, served = 15;
  Eigen::MatrixXcd est = random_cmat(n_ant, served, rng);
  std::vector<Eigen::MatrixXcd> cov, est_cov;
  for (int j = 0; j < served; ++j) {
    Eigen::MatrixXcd r = random_cmat(n_ant, n_ant, rng);
    cov.push_back(r * r.adjoint() / n_ant);
    est_cov.push_back(0.5 * cov.back());
  }
  Eigen::VectorXd etas = Eigen::VectorXd::Constant(served, 9.6);
  for (auto _ : state)
    benchmark::DoNotOptimize(mmse_local(est, cov, est_cov, etas, 1e-3, 0));
}
BENCHMARK(BM_MmseLocal32);

// Reference sizing of the centralized precoder: 144-dimensional stacked
// channel, 72 protected users.
static void BM_JpzfPrecoder144(benchmark::State& state) {
  Rng rng(3);
  Eigen::MatrixXcd stacked = random_cmat(144, 90, rng);
  for (auto _ : state) benchmark::DoNotOptimize(jpzf_precoder(stacked, 0, 72));
}
BENCHMARK(BM_JpzfPrecoder144);

static void BM_EqualStreamPower(benchmark::State& state) {
  Rng rng(4);
  const int m_aps = 108, l_bss = 36, k_users = 180;
  Eigen::MatrixXcd q = random_cmat(8 * m_aps + 32 * l_bss, k_users, rng);
  Eigen::VectorXd p_ap = Eigen::VectorXd::Constant(m_aps, 7.9);
  Eigen::VectorXd p_bs = Eigen::VectorXd::Constant(l_bss, 39.8);
  for (auto _ : state)
    benchmark::DoNotOptimize(equal_stream_power(q, p_ap, p_bs, 8, 32));
}
BENCHMARK(BM_EqualStreamPower);

BENCHMARK_MAIN();
