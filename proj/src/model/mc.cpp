#include "uanet/model/mc.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"

namespace uanet::model {

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

DraftPrediction summarize(std::vector<double> probs, std::size_t labels) {
  if (labels == 0 || probs.size() % labels != 0) throw ContractError("probability table does not fit label count");
  DraftPrediction d;
  d.labels = labels;
  d.probs = std::move(probs);
  const std::size_t n = d.probs.size() / labels;
  d.draft.resize(n);
  d.uncertainty.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = d.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < labels; ++c)
      if (r[c] > r[best]) best = c;
    d.draft[i] = best;
    d.uncertainty[i] = entropy(r);
  }
  return d;
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t j) { return derive_seed(seed, {0x6d63, j}); }

std::vector<double> sample_pass(const Encoder& enc, const EncodedSentence& s, std::uint64_t seed) {
  ad::Tape::Pause no_record;
  Rng rng(seed);
  const auto& cfg = enc.config();
  const auto masks = sample_masks(cfg.input_dim(), cfg.hidden, cfg.recurrent_dropout, rng);
  const auto probs = ad::softmax_rows(enc.forward(s, masks).logits);
  return {probs.data().begin(), probs.data().end()};
}

namespace {

DraftPrediction average(std::vector<std::vector<double>>& passes, std::size_t labels) {
  std::vector<double> acc(passes.front().size(), 0.0);
  for (const auto& p : passes)
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
  const double m = static_cast<double>(passes.size());
  for (auto& v : acc) v /= m;
  return summarize(std::move(acc), labels);
}

}  // namespace

DraftPrediction mc_forward(const Encoder& enc, const EncodedSentence& s, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ContractError("sample count must be at least 1");
  std::vector<std::vector<double>> passes(samples);
  for (std::size_t j = 0; j < samples; ++j) passes[j] = sample_pass(enc, s, sample_seed(seed, j));
  return average(passes, enc.labels());
}

DraftPrediction mc_forward_parallel(const Encoder& enc, const EncodedSentence& s, std::size_t samples,
                                    std::uint64_t seed, int workers) {
  if (samples == 0) throw ContractError("sample count must be at least 1");
  std::vector<std::vector<double>> passes(samples);
  const auto m = static_cast<long>(samples);
#pragma omp parallel for num_threads(workers > 0 ? workers : 1) schedule(static)
  for (long j = 0; j < m; ++j) passes[j] = sample_pass(enc, s, sample_seed(seed, static_cast<std::size_t>(j)));
  return average(passes, enc.labels());
}

std::vector<DraftPrediction> mc_forward_corpus(const Encoder& enc, const std::vector<EncodedSentence>& corpus,
                                               std::size_t samples, std::uint64_t seed, int workers) {
  std::vector<DraftPrediction> out(corpus.size());
  const auto n = static_cast<long>(corpus.size());
#pragma omp parallel for num_threads(workers > 0 ? workers : 1) schedule(dynamic)
  for (long k = 0; k < n; ++k)
    out[k] = mc_forward(enc, corpus[k], samples, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
  return out;
}

DraftPrediction mean_field_forward(const Encoder& enc, const EncodedSentence& s) {
  ad::Tape::Pause no_record;
  const auto probs = ad::softmax_rows(enc.forward(s, SequenceMasks{}).logits);
  return summarize({probs.data().begin(), probs.data().end()}, enc.labels());
}

void write_draft_dump(std::ostream& out, const std::vector<data::Sentence>& sentences,
                      const std::vector<DraftPrediction>& drafts, const data::TagScheme& scheme) {
  if (sentences.size() != drafts.size()) throw ContractError("draft dump: sentence and prediction counts differ");
  char buf[32];
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const auto& s = sentences[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i] << ' ';
      if (s.labeled()) out << scheme.label(s.gold[i]) << ' ';
      std::snprintf(buf, sizeof buf, "%.6f", drafts[k].uncertainty[i]);
      out << scheme.label(drafts[k].draft[i]) << ' ' << buf << '\n';
    }
    out << '\n';
  }
}

}  // namespace uanet::model
