#include <benchmark/benchmark.h>

#include "tflat/tflat.hpp"

using namespace tflat;

namespace {

void BM_ExactCover(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CommonDomain cd = common_fd_rational(n - 1, n, FdVariant::upper);
  const GeneratorMatrix& l = cd.lattices.back();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cover_classify(cd.omega, l, default_step(l), 1e-9, CoverMode::exact));
  }
}
BENCHMARK(BM_ExactCover)->Arg(2)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_FloatCover(benchmark::State& state) {
  const Region omega = Region::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1.2, 0.3));
  const GeneratorMatrix m(Eigen::MatrixXd(Eigen::Vector2d(1.2, 0.3).asDiagonal()));
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cover_classify(omega, m, h, 1e-9, CoverMode::floating));
}
BENCHMARK(BM_FloatCover)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_SmoothWindow(benchmark::State& state) {
  Eigen::Matrix2d shape;
  shape << 1.2, 0, 0.5, 0.3;
  const Region omega = Region::single(Parallelepiped(Eigen::Vector2d(0, 0), Eigen::MatrixXd(shape)));
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(smooth_window(omega, 7.0 / 120, h));
}
BENCHMARK(BM_SmoothWindow)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_FrameBounds(benchmark::State& state) {
  PipelineOptions opt;
  opt.h = 1.0 / 256;
  const PipelineDescriptor p = diag_pipeline(1.2, 0.3, 1, 1, opt);
  const SampledWindow g = build_reduced_window(p);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(frame_bounds(g, *p.target, samples));
}
BENCHMARK(BM_FrameBounds)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Gramian(benchmark::State& state) {
  const SampledWindow g = indicator_window(Region::box(RationalVector{0}, RationalVector{Rational(3, 2)}), 1.0 / 256);
  const SeparableTFLattice l(GeneratorMatrix::diagonal({Rational(1, 2)}), GeneratorMatrix::identity(1));
  GramianOptions opt;
  opt.section = static_cast<int>(state.range(0));
  Eigen::VectorXd x(1);
  x << 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(gramian(g, l, x, opt));
}
BENCHMARK(BM_Gramian)->Arg(16)->Arg(64);

void BM_Parseval(benchmark::State& state) {
  PipelineOptions opt;
  opt.h = 1.0 / 128;
  const PipelineDescriptor p = diag_pipeline(1.2, 0.3, 1, 1, opt);
  const SampledWindow g = build_reduced_window(p);
  const SampledWindow f = bump_window(Eigen::Vector2d(0.5, 0.5), 0.4, opt.h);
  const SeparableTFLattice l = p.target->as_separable();
  for (auto _ : state) benchmark::DoNotOptimize(parseval(f, g, l, 20));
}
BENCHMARK(BM_Parseval)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
