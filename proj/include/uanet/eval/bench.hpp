#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace uanet::eval {

struct BenchConfig {
  // Label-set sizes for the scaling fit, all at one sentence length.
  std::vector<std::size_t> label_sizes = {5, 10, 20, 40, 80};
  std::size_t scaling_length = 40;
  // Label-set size for the per-length-bucket comparison.
  std::size_t labels = 73;
  std::size_t sentences = 100;  // per measured point
  std::size_t repeats = 7;      // median over this many timed batches
  double min_seconds = 0.01;    // each timed batch runs at least this long
  int workers = 1;              // > 1 spreads sentences over threads
  std::uint64_t seed = 1;
};

void to_json(nlohmann::json& j, const BenchConfig& c);
void from_json(const nlohmann::json& j, BenchConfig& c);

struct ThroughputPoint {
  std::string decoder;  // "viterbi", "mix" or "argmax"
  std::size_t labels = 0;
  std::size_t lo = 0, hi = 0;  // sentence length range
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t reps = 0;   // corpus passes per timed batch
  double seconds = 0.0;   // median time of one corpus pass
  double sentences_per_s = 0.0;
  double ns_per_token = 0.0;
};

struct BenchReport {
  std::vector<ThroughputPoint> by_length;  // fixed label count, per bucket
  std::vector<ThroughputPoint> by_labels;  // fixed length, per label count
  double viterbi_exponent = 0.0;           // slope of log time/token vs log C
  double mix_exponent = 0.0;
  nlohmann::json environment;
  bool empty() const { return by_length.empty() && by_labels.empty(); }
};

// Median seconds per call of fn. The repetition count doubles until one
// timed batch lasts min_seconds; `reps` receives the final count.
double median_time(const std::function<void()>& fn, std::size_t repeats, double min_seconds,
                   std::size_t* reps = nullptr);

// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// Decoding cost only: emissions, transitions, drafts, uncertainties and
// refined ids are generated up front. Viterbi runs on emissions plus
// transitions; threshold mixing selects between precomputed label ids.
BenchReport decode_throughput(const BenchConfig& cfg);

nlohmann::json environment_fingerprint(int workers);
nlohmann::json to_json(const BenchReport& r);

}  // namespace uanet::eval
