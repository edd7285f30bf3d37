#include <benchmark/benchmark.h>

#include "cfmimo/evaluation.hpp"

using namespace cfmimo;

namespace {

SimConfig desk_config() {
  SimConfig cfg;
  cfg.center_cells = 1;
  cfg.ring_cells = 2;
  cfg.aps_per_cell = 3;
  cfg.users_per_sector = 3;
  cfg.master_seed = 1;
  return cfg;
}

}  // namespace

static void BM_TrialDeskMmse(benchmark::State& state) {
  SimConfig cfg = desk_config();
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(cfg, nullptr, t++));
}
BENCHMARK(BM_TrialDeskMmse);

static void BM_TrialDeskJpzf(benchmark::State& state) {
  SimConfig cfg = desk_config();
  cfg.precoder = Precoder::Jpzf;
  cfg.fronthaul_enforce = true;
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(cfg, nullptr, t++));
}
BENCHMARK(BM_TrialDeskJpzf);

static void BM_TrialReferenceScale(benchmark::State& state) {
  SimConfig cfg;  // 36 sectors, 108 APs, 180 users
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(cfg, nullptr, t++));
}
BENCHMARK(BM_TrialReferenceScale)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
