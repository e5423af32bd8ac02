#include <benchmark/benchmark.h>

#include <random>

#include "mixlab/mixlab.hpp"

using namespace mixlab;
using spectral::Lattice;
using spectral::SpectralField2D;

namespace {

SpectralField2D random_field(Lattice lat, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  SpectralField2D f(lat);
  for (int k = 0; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l) {
      if (k == 0 && l <= 0) continue;
      f.add_cos(u(rng), k, l);
      f.add_sin(u(rng), k, l);
    }
  return f;
}

void BM_GridRoundTrip(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const auto f = random_field(Lattice(c, c), 1);
  for (auto _ : state) {
    const auto g = spectral::grid_sample(f);
    benchmark::DoNotOptimize(spectral::synthesize(g, f.lattice()));
  }
}
BENCHMARK(BM_GridRoundTrip)->Arg(16)->Arg(32)->Arg(64);

void BM_StepMode(benchmark::State& state) {
  const int lmax = static_cast<int>(state.range(0));
  SpectralField2D f(Lattice(1, lmax));
  f.add_cos(1.0, 1, 0);
  auto p = f.mode(1);
  const auto shear = flows::shear_preset("couette");
  double t = 0.0;
  for (auto _ : state) {
    p = shear::step_mode(p, shear, 0.01, t, 1e-3);
    t += 1e-3;
  }
  benchmark::DoNotOptimize(p);
}
BENCHMARK(BM_StepMode)->Arg(32)->Arg(128)->Arg(512);

void BM_C2Certificate(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const auto f = random_field(Lattice(c, c), 2);
  for (auto _ : state) benchmark::DoNotOptimize(cert::c2_certificate(f, 1.0, 0.05));
}
BENCHMARK(BM_C2Certificate)->Arg(4)->Arg(16);

void BM_AveragedEigenvalues(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const auto op = averaging::averaged_operator(flows::flow_preset("couette"), 0.1, c);
  for (auto _ : state) benchmark::DoNotOptimize(averaging::operator_eigenvalues(op));
}
BENCHMARK(BM_AveragedEigenvalues)->Arg(8)->Arg(16)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
