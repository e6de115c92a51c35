#include <benchmark/benchmark.h>

#include <cmath>

#include "stc/autodiff/ops.hpp"
#include "stc/nets/temporal_conv.hpp"
#include "stc/wpm/window_proposal.hpp"

using namespace stc;

namespace {

ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  ad::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = uniform(rng, -1.0, 1.0);
  return t;
}

std::vector<double> bumpy_trace(std::size_t T, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> p(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double a = std::sin(static_cast<double>(t) * 0.031) * 0.4 + 0.45;
    p[t] = std::clamp(a + uniform(rng, -0.05, 0.05), 0.0, 1.0);
  }
  return p;
}

void BM_Conv1d(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto C = static_cast<std::size_t>(state.range(1));
  const auto x = random_tensor({T, C}, 1);
  const auto w = random_tensor({3, C, C}, 2);
  const auto b = random_tensor({C}, 3);
  for (auto _ : state) {
    ad::Tape tape;
    auto y = ad::conv1d_same(tape.constant(x), tape.constant(w), tape.constant(b), 4);
    benchmark::DoNotOptimize(y.value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_Conv1d)->Args({300, 32})->Args({900, 32})->Args({900, 64});

void BM_LocalizationForward(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  nets::LocalizationModule lm({16, 5, width, 0.0});
  ad::ParamStore store;
  Rng rng(0);
  lm.init(store, rng);
  const auto x = random_tensor({T, 16}, 4);
  for (auto _ : state) {
    auto out = lm.infer(store, x);
    benchmark::DoNotOptimize(out.predicted_timestamp);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_LocalizationForward)->Args({600, 32})->Args({600, 64})->Unit(benchmark::kMillisecond);

void BM_LocalizationBackward(benchmark::State& state) {
  nets::LocalizationModule lm({16, 5, 32, 0.0});
  ad::ParamStore store;
  Rng rng(0);
  lm.init(store, rng);
  const auto x = random_tensor({600, 16}, 4);
  for (auto _ : state) {
    ad::Tape tape(&store);
    auto out = lm.forward(tape, tape.constant(x), nullptr);
    tape.backward(ad::sum(out.probabilities));
    store.zero_grad();
  }
}
BENCHMARK(BM_LocalizationBackward)->Unit(benchmark::kMillisecond);

void BM_GaussianFit(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  std::vector<double> p(T);
  const std::size_t mu = T / 3;
  Rng rng(5);
  for (std::size_t t = 0; t < T; ++t) {
    const double d = static_cast<double>(t) - static_cast<double>(mu);
    p[t] = 0.9 * std::exp(-d * d / (2.0 * 25.0 * 25.0)) + uniform(rng, -0.01, 0.01);
  }
  for (auto _ : state) {
    auto fit = wpm::fit_side_gaussian(p, mu, wpm::Side::right);
    benchmark::DoNotOptimize(fit.sigma);
  }
}
BENCHMARK(BM_GaussianFit)->Arg(300)->Arg(900);

void BM_DetectPeaks(benchmark::State& state) {
  const auto p = bumpy_trace(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) {
    auto peaks = wpm::detect_peaks(p, 0.5);
    benchmark::DoNotOptimize(peaks.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectPeaks)->Arg(900)->Arg(100000);

void BM_ProposeWindows(benchmark::State& state) {
  const auto p = bumpy_trace(900, 7);
  wpm::ProposalOptions opt;
  for (auto _ : state) {
    auto ws = wpm::propose_windows(p, opt);
    benchmark::DoNotOptimize(ws.data());
  }
}
BENCHMARK(BM_ProposeWindows);

}  // namespace

BENCHMARK_MAIN();
