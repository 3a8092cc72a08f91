#include "qmeas/joint.hpp"
#include "qmeas/schemes.hpp"

#include <benchmark/benchmark.h>

using namespace qmeas;

static void BM_Smear(benchmark::State& state) {
  const OutcomeGrid g(static_cast<std::size_t>(state.range(0)), 20.0);
  const Distribution k = vn_kernel(g, 1.0, WavePacket{});
  const Povm q = position_pvm(g);
  for (auto _ : state) benchmark::DoNotOptimize(smear(k, q));
}
BENCHMARK(BM_Smear)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_VnMeasuredObservable(benchmark::State& state) {
  const OutcomeGrid g(static_cast<std::size_t>(state.range(0)), 20.0);
  const MeasurementScheme m = vn_scheme(g, 1.0, WavePacket{});
  for (auto _ : state) benchmark::DoNotOptimize(measured_observable(m));
}
BENCHMARK(BM_VnMeasuredObservable)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_WernerConstant(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const OutcomeGrid g(n, std::sqrt(2.0 * 3.141592653589793 * static_cast<double>(n)));
  for (auto _ : state) benchmark::DoNotOptimize(werner_constant(g));
}
BENCHMARK(BM_WernerConstant)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_WernerDistanceAscent(benchmark::State& state) {
  // Non-convolution pair, so the alternating ascent runs.
  const OutcomeGrid g(static_cast<std::size_t>(state.range(0)), 20.0);
  const Povm e = smear(vn_kernel(g, 1.0, WavePacket{}), position_pvm(g));
  // Position after a short free evolution: same spectrum, rotated eigenbasis.
  const CMatrix fourier = momentum_basis(g);
  const RVector p = g.reciprocal().points();
  CVector phase(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) phase[k] = std::polar(1.0, -0.05 * p[k] * p[k]);
  const CMatrix u = fourier * phase.asDiagonal() * fourier.adjoint();
  const Povm f = pvm_from_hermitian(u * position_operator(g) * u.adjoint(), g);
  WernerOptions opts;
  opts.starts = 4;
  for (auto _ : state) benchmark::DoNotOptimize(werner_distance(e, f, opts));
}
BENCHMARK(BM_WernerDistanceAscent)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_SequentialQP(benchmark::State& state) {
  const OutcomeGrid g(static_cast<std::size_t>(state.range(0)), 40.0);
  for (auto _ : state) benchmark::DoNotOptimize(vn_qp_sequential(g, 1.0, WavePacket{}));
}
BENCHMARK(BM_SequentialQP)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
