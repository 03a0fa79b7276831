#include "uanet/app/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "uanet/core/error.hpp"
#include "uanet/data/embeddings.hpp"
#include "uanet/data/synthetic.hpp"

namespace uanet::app {

namespace {

data::ColumnSpec columns(const Config& c) {
  data::ColumnSpec spec;
  spec.label_column = c.data.label_column;
  spec.bio2_to_bioes = c.data.bio2_to_bioes;
  return spec;
}

bool one_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string w, first;
    std::size_t n = 0;
    while (words >> w)
      if (n++ == 0) first = w;
    if (n == 0 || first == "-DOCSTART-") continue;
    return n == 1;
  }
  return false;
}

}  // namespace

Corpus load_corpus(const Config& c) {
  if (c.data.source == "synthetic") {
    auto s = data::generate_synthetic(c.data.synthetic);
    return {s.scheme, std::move(s.train), std::move(s.dev), std::move(s.test)};
  }
  const auto spec = columns(c);
  const auto raw_train = data::read_conll_raw(c.data.train, spec);
  std::set<std::string> seen;
  for (const auto& s : raw_train) seen.insert(s.labels.begin(), s.labels.end());
  std::vector<std::string> labels(seen.begin(), seen.end());
  Corpus out{data::TagScheme::from_labels(labels), {}, {}, {}};
  out.train = data::encode_sentences(raw_train, out.scheme);
  out.dev = data::read_conll(c.data.dev, out.scheme, spec);
  out.test = data::read_conll(c.data.test, out.scheme, spec);
  return out;
}

std::vector<data::Sentence> read_sentences(const Config& c, const std::filesystem::path& path,
                                           const data::TagScheme& scheme) {
  auto spec = columns(c);
  if (one_column(path)) spec.label_column.reset();
  return data::read_conll(path, scheme, spec);
}

model::Tagger train_model(const Config& c, const Corpus& corpus, const train::LogSink& log,
                          train::TrainSummary* summary) {
  data::CasePolicy policy;
  policy.lowercase_words = c.data.lowercase;
  policy.zero_digits = c.data.zero_digits;
  const auto vocab = data::Vocabulary::build(corpus.train, policy);
  data::EmbeddingMap pretrained;
  if (!c.data.embeddings.empty()) pretrained = data::load_embeddings(c.data.embeddings, c.encoder.word_dim);
  auto init = model::init_tagger(vocab, corpus.scheme, c.encoder, c.refiner, c.seed,
                                 c.data.embeddings.empty() ? nullptr : &pretrained);
  return train::train(c.training, std::move(init), corpus.train, corpus.dev, log, summary);
}

model::PredictOptions predict_options(const Config& c, const model::Tagger& t) {
  auto o = model::default_options(t);
  o.decoder = model::parse_decoder(c.inference.decoder);
  if (c.inference.gamma) o.gamma = *c.inference.gamma;
  if (c.inference.samples) o.samples = *c.inference.samples;
  o.legalize = c.inference.legalize;
  o.workers = c.inference.workers;
  return o;
}

eval::FullReport evaluate(const Config& c, const model::Tagger& t, const std::vector<data::Sentence>& sentences,
                          const model::PredictOptions& opt) {
  for (const auto& s : sentences)
    if (!s.labeled()) throw ContractError("evaluation needs labeled sentences");
  const auto tagged = model::tag(t, sentences, opt);
  eval::Sequences gold, fin, dr;
  std::vector<model::DraftPrediction> drafts;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    gold.push_back(sentences[k].gold);
    fin.push_back(tagged[k].final);
    dr.push_back(tagged[k].draft.draft);
    drafts.push_back(tagged[k].draft);
  }
  eval::FullReport r;
  r.decoder = model::decoder_name(opt.decoder);
  r.gamma = opt.gamma;
  r.scores = eval::span_f1(t.scheme, gold, fin);
  r.draft_scores = eval::span_f1(t.scheme, gold, dr);
  r.audit = eval::uncertainty_audit(drafts, fin, gold);
  if (c.data.source == "synthetic" && !c.data.synthetic.rules.empty()) {
    eval::SpanCounts a, b;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      const auto pos = data::dependent_positions(c.data.synthetic, sentences[k].size());
      a += eval::count_spans_at(t.scheme, gold[k], fin[k], pos);
      b += eval::count_spans_at(t.scheme, gold[k], dr[k], pos);
    }
    r.constrained = a;
    r.constrained_draft = b;
  }
  return r;
}

}  // namespace uanet::app
