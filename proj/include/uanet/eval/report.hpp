#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uanet/data/tag_scheme.hpp"
#include "uanet/eval/bench.hpp"
#include "uanet/eval/metrics.hpp"
#include "uanet/model/tagger.hpp"

namespace uanet::eval {

// F1 of one decoder setting at each sample count M.
struct SamplePoint {
  std::size_t samples = 0;
  double f1 = 0.0;
  double draft_f1 = 0.0;
};

std::vector<SamplePoint> sample_sweep(const model::Tagger& t, const std::vector<data::Sentence>& sentences,
                                      const std::vector<std::size_t>& samples, model::PredictOptions opt);

// Everything the eval subcommand reports for one labeled set.
struct FullReport {
  std::string decoder;
  double gamma = 0.0;
  EvalReport scores;
  EvalReport draft_scores;
  Audit audit;
  std::optional<SpanCounts> constrained;        // synthetic data only
  std::optional<SpanCounts> constrained_draft;
};

nlohmann::json to_json(const FullReport& r, const data::TagScheme& scheme);

// Plain-text summary and per-type/per-bucket CSV.
void write_report_text(std::ostream& out, const FullReport& r, const data::TagScheme& scheme);
void write_report_csv(std::ostream& out, const FullReport& r);

void write_gamma_csv(std::ostream& out, const GammaSweep& s);
void write_samples_csv(std::ostream& out, const std::vector<SamplePoint>& s);
// gnuplot script drawing both sweeps from the CSV files next to it.
void write_sweep_gnuplot(std::ostream& out, const std::string& gamma_csv, const std::string& samples_csv);

void write_bench_csv(std::ostream& out, const BenchReport& r);
void write_bench_text(std::ostream& out, const BenchReport& r);
void write_bench_gnuplot(std::ostream& out, const std::string& csv);

}  // namespace uanet::eval
