#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "weier/batch.hpp"
#include "weier/funcspace.hpp"
#include "weier/histogram.hpp"
#include "weier/kernel.hpp"
#include "weier/measure.hpp"
#include "weier/params.hpp"
#include "weier/phi.hpp"
#include "weier/weier.hpp"

namespace {

const weier::SystemParams kParams = weier::make_params(3, 0.7);

std::vector<double> points(std::size_t n) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(gen);
  return xs;
}

void BM_EvalW(benchmark::State& state) {
  const auto phi = weier::Phi::cosine();
  const auto xs = points(1024);
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(weier::eval_W(kParams, phi, xs[k++ & 1023], tol));
  }
}
BENCHMARK(BM_EvalW)->Arg(6)->Arg(10)->Arg(14);

void BM_EvalGamma(benchmark::State& state) {
  const auto phi = weier::Phi::cosine();
  const auto code = weier::Code::random(3, 1);
  const auto xs = points(1024);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(weier::eval_Gamma(kParams, phi, xs[k++ & 1023], code, 1e-10));
  }
}
BENCHMARK(BM_EvalGamma);

void BM_BankProjectGraph(benchmark::State& state) {
  const auto phi = weier::Phi::cosine();
  weier::ProjectionBank bank(kParams, phi, weier::seeded_codes(3, static_cast<int>(state.range(0)), 100), 1e-10);
  const auto xs = points(1024);
  std::vector<double> out(bank.size());
  std::size_t k = 0;
  for (auto _ : state) {
    bank.project_graph(xs[k++ & 1023], out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BankProjectGraph)->Arg(1)->Arg(8)->Arg(32);

void BM_SampleProjected(benchmark::State& state) {
  const auto phi = weier::Phi::cosine();
  const auto code = weier::Code::random(3, 1);
  weier::SampleOptions opt;
  opt.threads = 1;
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(weier::sample_projected_measure(kParams, phi, code, n, 10, 5, opt));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleProjected)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);

void BM_HistogramEntropy(benchmark::State& state) {
  const auto xs = points(static_cast<std::size_t>(state.range(0)));
  const auto h = weier::BadicHistogram::from_values(2, 16, xs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(h.entropy());
  }
}
BENCHMARK(BM_HistogramEntropy)->Arg(1 << 12)->Arg(1 << 16);

void BM_Convolve(benchmark::State& state) {
  const auto a = weier::BadicHistogram::uniform(2, 12, 0, state.range(0));
  const auto b = weier::BadicHistogram::uniform(2, 12, 0, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(weier::convolve(a, b));
  }
}
BENCHMARK(BM_Convolve)->Arg(64)->Arg(512);

void BM_ThetaEntropy(benchmark::State& state) {
  const auto p = weier::make_params(2, 0.7);
  const auto phi = weier::Phi::cosine();
  const auto code = weier::Code::random(2, 3);
  weier::ThetaOptions opt;
  opt.threads = 1;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(weier::theta_entropy(p, phi, code, n, {n}, 8, opt));
  }
}
BENCHMARK(BM_ThetaEntropy)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
