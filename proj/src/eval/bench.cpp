#include "uanet/eval/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "uanet/core/error.hpp"
#include "uanet/core/rng.hpp"
#include "uanet/decode/decoders.hpp"
#include "uanet/eval/metrics.hpp"

namespace uanet::eval {

void to_json(nlohmann::json& j, const BenchConfig& c) {
  j = {{"label_sizes", c.label_sizes}, {"scaling_length", c.scaling_length}, {"labels", c.labels},
       {"sentences", c.sentences},     {"repeats", c.repeats},               {"min_seconds", c.min_seconds},
       {"workers", c.workers},         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, BenchConfig& c) {
  c.label_sizes = j.value("label_sizes", c.label_sizes);
  c.scaling_length = j.value("scaling_length", c.scaling_length);
  c.labels = j.value("labels", c.labels);
  c.sentences = j.value("sentences", c.sentences);
  c.repeats = j.value("repeats", c.repeats);
  c.min_seconds = j.value("min_seconds", c.min_seconds);
  c.workers = j.value("workers", c.workers);
  c.seed = j.value("seed", c.seed);
}

double median_time(const std::function<void()>& fn, std::size_t repeats, double min_seconds, std::size_t* reps) {
  using Clock = std::chrono::steady_clock;
  auto batch = [&](std::size_t n) {
    const auto t0 = Clock::now();
    for (std::size_t r = 0; r < n; ++r) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };
  fn();  // warm-up
  std::size_t n = 1;
  while (batch(n) < min_seconds && n < (std::size_t{1} << 30)) n *= 2;
  std::vector<double> times;
  for (std::size_t k = 0; k < std::max<std::size_t>(repeats, 1); ++k) times.push_back(batch(n) / static_cast<double>(n));
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  if (reps) *reps = n;
  return times[times.size() / 2];
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("slope fit needs at least two paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

struct Instance {
  std::size_t n = 0;
  std::vector<double> emissions;
  std::vector<std::size_t> draft, refined, out;
  std::vector<double> uncertainty;
};

struct Workload {
  std::size_t labels = 0;
  std::vector<double> transitions;
  std::vector<Instance> sentences;
  std::size_t tokens = 0;
};

Workload make_workload(std::size_t labels, std::size_t lo, std::size_t hi, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  Workload w;
  w.labels = labels;
  w.transitions.resize((labels + 2) * (labels + 2));
  for (auto& t : w.transitions) t = rng.uniform(-1.0, 1.0);
  const double top = std::log(static_cast<double>(labels));
  for (std::size_t k = 0; k < count; ++k) {
    Instance s;
    s.n = lo + rng.below(hi - lo + 1);
    s.emissions.resize(s.n * labels);
    for (auto& e : s.emissions) e = rng.uniform(-3.0, 3.0);
    s.draft.resize(s.n);
    s.refined.resize(s.n);
    s.out.resize(s.n);
    s.uncertainty.resize(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
      s.draft[i] = rng.below(labels);
      s.refined[i] = rng.below(labels);
      s.uncertainty[i] = rng.uniform(0.0, top);
    }
    w.tokens += s.n;
    w.sentences.push_back(std::move(s));
  }
  return w;
}

// One corpus pass of the named decoder.
std::function<void()> decoder_pass(const std::string& name, Workload& w, int workers, double gamma) {
  const auto count = static_cast<long>(w.sentences.size());
  const std::size_t C = w.labels;
  if (name == "viterbi")
    return [&w, count, C, workers] {
      const decode::MatrixView tv{w.transitions, C + 2, C + 2};
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
      for (long k = 0; k < count; ++k) {
        auto& s = w.sentences[k];
        const auto r = decode::viterbi({s.emissions, s.n, C}, tv);
        std::copy(r.path.begin(), r.path.end(), s.out.begin());
      }
    };
  if (name == "argmax")
    return [&w, count, C, workers] {
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
      for (long k = 0; k < count; ++k) {
        auto& s = w.sentences[k];
        const auto r = decode::argmax_rows({s.emissions, s.n, C});
        std::copy(r.begin(), r.end(), s.out.begin());
      }
    };
  return [&w, count, workers, gamma] {
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
    for (long k = 0; k < count; ++k) {
      auto& s = w.sentences[k];
      decode::threshold_mix_into(s.draft, s.uncertainty, s.refined, gamma, s.out);
    }
  };
}

ThroughputPoint measure(const std::string& name, Workload& w, std::size_t lo, std::size_t hi, const BenchConfig& cfg) {
  ThroughputPoint p;
  p.decoder = name;
  p.labels = w.labels;
  p.lo = lo;
  p.hi = hi;
  p.sentences = w.sentences.size();
  p.tokens = w.tokens;
  const double gamma = 0.5 * std::log(static_cast<double>(w.labels));
  p.seconds = median_time(decoder_pass(name, w, cfg.workers, gamma), cfg.repeats, cfg.min_seconds, &p.reps);
  p.sentences_per_s = static_cast<double>(p.sentences) / p.seconds;
  p.ns_per_token = 1e9 * p.seconds / static_cast<double>(p.tokens);
  return p;
}

}  // namespace

BenchReport decode_throughput(const BenchConfig& cfg) {
  BenchReport r;
  r.environment = environment_fingerprint(cfg.workers);
  if (cfg.sentences == 0) return r;
  if (cfg.labels == 0) throw ContractError("bench.labels must be positive");
  std::uint64_t tag = 0;
  for (const auto& b : default_buckets()) {
    const std::size_t hi = b.hi ? b.hi : b.lo + 19;
    auto w = make_workload(cfg.labels, b.lo, hi, cfg.sentences, derive_seed(cfg.seed, {++tag}));
    for (const char* d : {"viterbi", "mix"}) r.by_length.push_back(measure(d, w, b.lo, hi, cfg));
  }
  std::vector<double> cs, vit, mix;
  for (auto C : cfg.label_sizes) {
    if (C == 0) throw ContractError("bench.label_sizes entries must be positive");
    auto w = make_workload(C, cfg.scaling_length, cfg.scaling_length, cfg.sentences, derive_seed(cfg.seed, {++tag}));
    for (const char* d : {"viterbi", "mix", "argmax"}) {
      r.by_labels.push_back(measure(d, w, cfg.scaling_length, cfg.scaling_length, cfg));
      if (r.by_labels.back().decoder == "viterbi") vit.push_back(r.by_labels.back().ns_per_token);
      if (r.by_labels.back().decoder == "mix") mix.push_back(r.by_labels.back().ns_per_token);
    }
    cs.push_back(static_cast<double>(C));
  }
  if (cs.size() >= 2) {
    r.viterbi_exponent = loglog_slope(cs, vit);
    r.mix_exponent = loglog_slope(cs, mix);
  }
  return r;
}

nlohmann::json environment_fingerprint(int workers) {
  nlohmann::json j;
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  j["hardware_threads"] = std::thread::hardware_concurrency();
  j["omp_max_threads"] = omp_get_max_threads();
  j["workers"] = workers;
#ifdef NDEBUG
  j["assertions"] = false;
#else
  j["assertions"] = true;
#endif
  return j;
}

nlohmann::json to_json(const BenchReport& r) {
  auto points = [](const std::vector<ThroughputPoint>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v)
      a.push_back({{"decoder", p.decoder},
                   {"labels", p.labels},
                   {"lo", p.lo},
                   {"hi", p.hi},
                   {"sentences", p.sentences},
                   {"tokens", p.tokens},
                   {"reps", p.reps},
                   {"seconds", p.seconds},
                   {"sentences_per_s", p.sentences_per_s},
                   {"ns_per_token", p.ns_per_token}});
    return a;
  };
  return {{"by_length", points(r.by_length)},
          {"by_labels", points(r.by_labels)},
          {"viterbi_exponent", r.viterbi_exponent},
          {"mix_exponent", r.mix_exponent},
          {"environment", r.environment}};
}

}  // namespace uanet::eval
