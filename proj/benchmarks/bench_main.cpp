#include <benchmark/benchmark.h>

#include <complex>

#include "dephaskit/criteria.hpp"
#include "dephaskit/dynamics.hpp"
#include "dephaskit/quantumness.hpp"
#include "dephaskit/spectra.hpp"

using namespace dephaskit;

namespace {

void BM_KappaClosedForm(benchmark::State& state) {
  const Spectrum s = tilt_preset("8.5");
  const EvolutionParams p;
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kappa(s, p.at(x)));
    x = x < 160.0 ? x + 0.1 : 0.0;
  }
}
BENCHMARK(BM_KappaClosedForm);

void BM_KappaQuadrature(benchmark::State& state) {
  const Spectrum s = tilt_preset("8.5");
  const EvolutionParams p;
  for (auto _ : state) benchmark::DoNotOptimize(kappa_quadrature(s, p.at(80.0)));
}
BENCHMARK(BM_KappaQuadrature);

void BM_Alpha(benchmark::State& state) {
  const ProcessMatrix chi = process_from_kappa(std::polar(0.6, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(alpha(chi).alpha);
}
BENCHMARK(BM_Alpha)->Unit(benchmark::kMicrosecond);

void BM_Beta(benchmark::State& state) {
  const ProcessMatrix chi = process_from_kappa(std::polar(0.6, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(beta(chi).beta);
}
BENCHMARK(BM_Beta)->Unit(benchmark::kMicrosecond);

void BM_Blp(benchmark::State& state) {
  const DynamicsFamily f{tilt_preset("9.0"), EvolutionParams{}, 160.0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(blp(f));
}
BENCHMARK(BM_Blp)->Unit(benchmark::kMillisecond);

void BM_QuantumnessTrajectory(benchmark::State& state) {
  const DynamicsFamily f{tilt_preset("4.0"), EvolutionParams{}, 20.0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(quantumness_trajectory(f).alpha.back());
}
BENCHMARK(BM_QuantumnessTrajectory)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
