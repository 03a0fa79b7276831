#pragma once

#include <filesystem>
#include <vector>

#include "uanet/app/config.hpp"
#include "uanet/data/conll.hpp"
#include "uanet/data/tag_scheme.hpp"
#include "uanet/data/vocab.hpp"
#include "uanet/eval/report.hpp"
#include "uanet/model/tagger.hpp"
#include "uanet/train/trainer.hpp"

namespace uanet::app {

struct Corpus {
  data::TagScheme scheme;
  std::vector<data::Sentence> train, dev, test;
};

// Generated in memory for the synthetic source; read from the three files
// otherwise, with the label set taken from the training file.
Corpus load_corpus(const Config& c);

// Sentences from a CoNLL file under an existing scheme. One-column files are
// read as unlabeled text.
std::vector<data::Sentence> read_sentences(const Config& c, const std::filesystem::path& path,
                                           const data::TagScheme& scheme);

model::Tagger train_model(const Config& c, const Corpus& corpus, const train::LogSink& log = {},
                          train::TrainSummary* summary = nullptr);

// Inference settings from the config layered over the tagger's own.
model::PredictOptions predict_options(const Config& c, const model::Tagger& t);

// Scores, draft-only scores, audit and (for synthetic data) the
// constrained-position scores.
eval::FullReport evaluate(const Config& c, const model::Tagger& t, const std::vector<data::Sentence>& sentences,
                          const model::PredictOptions& opt);

}  // namespace uanet::app
