// Serial reference vs OpenMP kernels, plus Viterbi vs threshold mixing.
// Run: ./build/bench/uanet_bench --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include <cmath>

#include "uanet/decode/decoders.hpp"
#include "uanet/model/encoder.hpp"
#include "uanet/model/mc.hpp"

using namespace uanet;

namespace {

constexpr std::size_t kWords = 500, kChars = 60, kLabels = 17;

model::Encoder bench_encoder() {
  model::EncoderConfig cfg;
  cfg.word_dim = 24;
  cfg.hidden = 32;
  model::Encoder enc(cfg, kWords, kChars, kLabels);
  Rng rng(1);
  for (auto& [name, t] : enc.params())
    for (auto& v : t.data()) v = rng.uniform(-0.2, 0.2);
  return enc;
}

model::EncodedSentence bench_sentence(std::size_t n, Rng& rng) {
  model::EncodedSentence s;
  for (std::size_t i = 0; i < n; ++i) {
    s.words.push_back(1 + rng.below(kWords - 1));
    s.chars.emplace_back(3 + rng.below(6));
    for (auto& c : s.chars.back()) c = 1 + rng.below(kChars - 1);
  }
  return s;
}

int threads(const benchmark::State& state) { return static_cast<int>(state.range(0)); }

void BM_McForwardSerial(benchmark::State& state) {
  const auto enc = bench_encoder();
  Rng rng(2);
  const auto s = bench_sentence(30, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model::mc_forward(enc, s, 8, 7));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_McForwardSerial)->Unit(benchmark::kMillisecond);

void BM_McForwardParallel(benchmark::State& state) {
  const auto enc = bench_encoder();
  Rng rng(2);
  const auto s = bench_sentence(30, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model::mc_forward_parallel(enc, s, 8, 7, threads(state)));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_McForwardParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_McCorpus(benchmark::State& state) {
  const auto enc = bench_encoder();
  Rng rng(3);
  std::vector<model::EncodedSentence> corpus;
  for (int k = 0; k < 16; ++k) corpus.push_back(bench_sentence(10 + rng.below(30), rng));
  for (auto _ : state) benchmark::DoNotOptimize(model::mc_forward_corpus(enc, corpus, 4, 7, threads(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus.size()));
}
BENCHMARK(BM_McCorpus)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

struct DecodeInputs {
  std::size_t n, C;
  std::vector<double> emissions, transitions, uncertainty;
  std::vector<std::size_t> draft, refined;
};

DecodeInputs decode_inputs(std::size_t n, std::size_t C) {
  Rng rng(4);
  DecodeInputs d{n, C, std::vector<double>(n * C), std::vector<double>((C + 2) * (C + 2)), std::vector<double>(n),
                 std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
  for (auto& v : d.emissions) v = rng.uniform(-2, 2);
  for (auto& v : d.transitions) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    d.uncertainty[i] = rng.uniform(0, std::log(static_cast<double>(C)));
    d.draft[i] = rng.below(C);
    d.refined[i] = rng.below(C);
  }
  return d;
}

void BM_Viterbi(benchmark::State& state) {
  const auto d = decode_inputs(40, static_cast<std::size_t>(state.range(0)));
  const decode::MatrixView e{d.emissions, d.n, d.C}, t{d.transitions, d.C + 2, d.C + 2};
  for (auto _ : state) benchmark::DoNotOptimize(decode::viterbi(e, t));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.n));
}
BENCHMARK(BM_Viterbi)->RangeMultiplier(2)->Range(5, 80);

void BM_ThresholdMix(benchmark::State& state) {
  const auto d = decode_inputs(40, static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> out(d.n);
  for (auto _ : state) {
    decode::threshold_mix_into(d.draft, d.uncertainty, d.refined, 0.5, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.n));
}
BENCHMARK(BM_ThresholdMix)->RangeMultiplier(2)->Range(5, 80);

}  // namespace

BENCHMARK_MAIN();
