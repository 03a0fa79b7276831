#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/data/tag_scheme.hpp"
#include "uanet/model/mc.hpp"

namespace uanet::eval {

using Sequences = std::vector<std::vector<std::size_t>>;

struct SpanCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;

  SpanCounts& operator+=(const SpanCounts& o) {
    gold += o.gold;
    predicted += o.predicted;
    correct += o.correct;
    return *this;
  }
  double precision() const { return predicted ? static_cast<double>(correct) / predicted : 0.0; }
  double recall() const { return gold ? static_cast<double>(correct) / gold : 0.0; }
  double f1() const;
};

// Exact-match segment counts for one sentence. Segments follow the
// conlleval reading of the label strings.
SpanCounts count_spans(const data::TagScheme& scheme, std::span<const std::size_t> gold,
                       std::span<const std::size_t> pred);

// Same, keeping only segments (gold or predicted) that cover at least one
// of `positions`.
SpanCounts count_spans_at(const data::TagScheme& scheme, std::span<const std::size_t> gold,
                          std::span<const std::size_t> pred, std::span<const std::size_t> positions);

struct LengthBucket {
  std::size_t lo = 0;
  std::size_t hi = 0;  // inclusive; 0 = open ended
  std::size_t sentences = 0;
  SpanCounts spans;
};

// Sentence-length split used by every report.
std::vector<LengthBucket> default_buckets();

struct EvalReport {
  SpanCounts spans;
  std::size_t tokens = 0;
  std::size_t correct_tokens = 0;
  std::map<std::string, SpanCounts> per_type;
  std::vector<LengthBucket> buckets;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]

  double precision() const { return spans.precision(); }
  double recall() const { return spans.recall(); }
  double f1() const { return spans.f1(); }
  double token_accuracy() const { return tokens ? static_cast<double>(correct_tokens) / tokens : 0.0; }
};

// Corpus-level scores. Throws ContractError when sentence counts or lengths
// differ.
EvalReport span_f1(const data::TagScheme& scheme, const Sequences& gold, const Sequences& pred);

// Refinement audit for one Γ. Flip counts partition the positions where the
// final label differs from the draft.
struct Audit {
  std::size_t tokens = 0;
  std::size_t draft_correct = 0;
  std::size_t unchanged = 0;
  std::size_t correct_to_wrong = 0;
  std::size_t wrong_to_correct = 0;
  std::size_t wrong_to_wrong = 0;
  std::optional<double> mean_u_correct;
  std::optional<double> mean_u_incorrect;

  std::optional<double> ratio() const;
};

Audit uncertainty_audit(const std::vector<model::DraftPrediction>& drafts, const Sequences& finals,
                        const Sequences& gold);

// {0, step, 2·step, ...} up to and including ln C.
std::vector<double> gamma_grid(std::size_t labels, double step = 0.05);

struct SweepPoint {
  double gamma = 0.0;
  double f1 = 0.0;
  double delta = 0.0;  // f1 minus the Γ = 0 value
  std::size_t refined_tokens = 0;
};

struct GammaSweep {
  std::vector<SweepPoint> points;
  double best_gamma = 0.0;
  double best_f1 = 0.0;
  double draft_f1 = 0.0;  // Γ = ∞
};

// F1 of threshold mixing at every grid value; the best Γ is the smallest
// one reaching the maximum.
GammaSweep gamma_sweep(const data::TagScheme& scheme, const std::vector<model::DraftPrediction>& drafts,
                       const Sequences& refined, const Sequences& gold, std::span<const double> grid);

nlohmann::json to_json(const EvalReport& r, const data::TagScheme& scheme);
nlohmann::json to_json(const Audit& a);
nlohmann::json to_json(const GammaSweep& s);

}  // namespace uanet::eval
