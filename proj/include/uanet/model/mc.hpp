#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "uanet/data/conll.hpp"
#include "uanet/data/tag_scheme.hpp"
#include "uanet/model/encoder.hpp"

namespace uanet::model {

// M-sample averaged label distribution with argmax drafts and predictive
// entropy per token.
struct DraftPrediction {
  std::size_t labels = 0;
  std::vector<double> probs;  // [n x C] row-major
  std::vector<std::size_t> draft;
  std::vector<double> uncertainty;

  std::size_t size() const { return draft.size(); }
  std::span<const double> row(std::size_t i) const { return {probs.data() + i * labels, labels}; }
};

// Natural-log entropy; 0 log 0 = 0.
double entropy(std::span<const double> p);

// Fills draft and uncertainty from probs.
DraftPrediction summarize(std::vector<double> probs, std::size_t labels);

// Seed of Monte-Carlo sample j under base seed `seed`.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t j);

// Softmax rows of one masked pass with masks drawn from `seed`.
std::vector<double> sample_pass(const Encoder& enc, const EncodedSentence& s, std::uint64_t seed);

// Serial reference: p = (1/M) Σ_j softmax(pass j), summed in sample order.
DraftPrediction mc_forward(const Encoder& enc, const EncodedSentence& s, std::size_t samples, std::uint64_t seed);

// Same result bit for bit; the M passes run on up to `workers` threads.
DraftPrediction mc_forward_parallel(const Encoder& enc, const EncodedSentence& s, std::size_t samples,
                                    std::uint64_t seed, int workers);

// One prediction per sentence; sentence k uses seed derive_seed(seed, {k}).
// Sentences are spread over `workers` threads.
std::vector<DraftPrediction> mc_forward_corpus(const Encoder& enc, const std::vector<EncodedSentence>& corpus,
                                               std::size_t samples, std::uint64_t seed, int workers = 1);

// Mask-free pass (all masks one), used for cheap dev selection.
DraftPrediction mean_field_forward(const Encoder& enc, const EncodedSentence& s);

// "token gold draft uncertainty" lines, uncertainty with 6 decimals; the
// gold column is omitted for unlabeled sentences.
void write_draft_dump(std::ostream& out, const std::vector<data::Sentence>& sentences,
                      const std::vector<DraftPrediction>& drafts, const data::TagScheme& scheme);

}  // namespace uanet::model
