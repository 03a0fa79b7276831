#include "uanet/model/tagger.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"
#include "uanet/decode/decoders.hpp"

namespace uanet::model {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;

nlohmann::json scheme_json(const data::TagScheme& s) {
  return {{"kind", s.kind() == data::SchemeKind::bioes ? "bioes" : "plain"}, {"types", s.types()}};
}

data::TagScheme scheme_from(const nlohmann::json& j) {
  const auto types = j.at("types").get<std::vector<std::string>>();
  return j.at("kind").get<std::string>() == "bioes" ? data::TagScheme::bioes(types) : data::TagScheme::plain(types);
}

}  // namespace

Tagger init_tagger(const data::Vocabulary& vocab, const data::TagScheme& scheme, const EncoderConfig& enc,
                   const RefinerConfig& ref, std::uint64_t seed, const data::EmbeddingMap* pretrained) {
  Tagger t{vocab, scheme, Encoder(enc, vocab.word_count(), vocab.char_count(), scheme.size()),
           Refiner(ref, enc.input_dim(), scheme.size())};
  t.seed = seed;
  Rng enc_rng(derive_seed(seed, {kInitTag, 1}));
  t.encoder.initialize(enc_rng, vocab, pretrained);
  Rng ref_rng(derive_seed(seed, {kInitTag, 2}));
  t.refiner.initialize(ref_rng);
  return t;
}

Tagger clone(const Tagger& t) {
  return Tagger{t.vocab, t.scheme, t.encoder.clone(), t.refiner.clone(), t.gamma, t.samples, t.seed};
}

void save_tagger(const std::filesystem::path& dir, const Tagger& t) {
  std::filesystem::create_directories(dir);
  nlohmann::json enc_meta = {{"vocab", t.vocab.to_json()},
                             {"scheme", scheme_json(t.scheme)},
                             {"encoder", t.encoder.config()},
                             {"seed", t.seed}};
  ad::save_checkpoint(dir / "encoder.json", t.encoder.params(), enc_meta);
  nlohmann::json ref_meta = {{"refiner", t.refiner.config()}, {"gamma", t.gamma}, {"samples", t.samples}};
  ad::save_checkpoint(dir / "refiner.json", t.refiner.params(), ref_meta);
}

Tagger load_tagger(const std::filesystem::path& dir) {
  for (const char* f : {"encoder.json", "refiner.json"})
    if (!std::filesystem::exists(dir / f)) throw MissingFileError((dir / f).string());
  // Read metadata first to size the networks, then load values.
  auto read_meta = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in).at("metadata");
  };
  const auto em = read_meta(dir / "encoder.json");
  const auto rm = read_meta(dir / "refiner.json");
  auto vocab = data::Vocabulary::from_json(em.at("vocab"));
  auto scheme = scheme_from(em.at("scheme"));
  const auto ecfg = em.at("encoder").get<EncoderConfig>();
  const auto rcfg = rm.at("refiner").get<RefinerConfig>();
  Tagger t{vocab, scheme, Encoder(ecfg, vocab.word_count(), vocab.char_count(), scheme.size()),
           Refiner(rcfg, ecfg.input_dim(), scheme.size())};
  ad::load_checkpoint(dir / "encoder.json", t.encoder.params());
  ad::load_checkpoint(dir / "refiner.json", t.refiner.params());
  t.seed = em.at("seed").get<std::uint64_t>();
  t.gamma = rm.at("gamma").get<double>();
  t.samples = rm.at("samples").get<std::size_t>();
  return t;
}

DecoderKind parse_decoder(const std::string& name) {
  if (name == "mix") return DecoderKind::mix;
  if (name == "draft") return DecoderKind::draft;
  if (name == "refined") return DecoderKind::refined;
  if (name == "viterbi") return DecoderKind::viterbi;
  throw ConfigError("decoder", "unknown decoder '" + name + "' (mix, draft, refined, viterbi)");
}

std::string decoder_name(DecoderKind k) {
  switch (k) {
    case DecoderKind::mix: return "mix";
    case DecoderKind::draft: return "draft";
    case DecoderKind::refined: return "refined";
    case DecoderKind::viterbi: return "viterbi";
  }
  return "mix";
}

PredictOptions default_options(const Tagger& t) {
  PredictOptions o;
  o.gamma = t.gamma;
  o.samples = t.samples;
  o.seed = t.seed;
  return o;
}

std::vector<Tagged> tag(const Tagger& t, const std::vector<data::Sentence>& sentences, const PredictOptions& opt) {
  if (opt.decoder == DecoderKind::viterbi && !t.encoder.config().crf)
    throw ConfigError("decoder", "viterbi needs a model trained with encoder.crf = true");
  std::vector<EncodedSentence> enc;
  enc.reserve(sentences.size());
  for (const auto& s : sentences) enc.push_back(encode(t.vocab, s));
  auto drafts = mc_forward_corpus(t.encoder, enc, opt.samples, opt.seed, opt.workers);

  std::vector<Tagged> out(sentences.size());
  const std::size_t C = t.scheme.size();
  const auto n = static_cast<long>(sentences.size());
#pragma omp parallel for num_threads(opt.workers > 0 ? opt.workers : 1) schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    ad::Tape::Pause no_record;
    auto& o = out[k];
    o.draft = std::move(drafts[k]);
    const std::size_t len = o.draft.size();
    RefinedPrediction ref;
    if (opt.decoder == DecoderKind::mix || opt.decoder == DecoderKind::refined) {
      std::vector<std::size_t> in = o.draft.draft;
      if (opt.mask_drafts) in.assign(len, t.refiner.mask_symbol());
      ref = refine(t.refiner, t.encoder.represent(enc[k]), in);
      o.refined = ref.refined;
    }
    const double gamma = opt.decoder == DecoderKind::refined ? -std::numeric_limits<double>::infinity()
                         : opt.decoder == DecoderKind::mix   ? opt.gamma
                                                             : std::numeric_limits<double>::infinity();
    if (opt.decoder == DecoderKind::viterbi) {
      const auto pass = t.encoder.forward(enc[k], SequenceMasks{});
      const auto& tr = t.encoder.params().get("encoder.transitions");
      o.final = decode::viterbi({pass.logits.data(), len, C}, {tr.data(), C + 2, C + 2}).path;
      o.from_refined.assign(len, false);
    } else {
      const auto& refined = o.refined.empty() ? o.draft.draft : o.refined;
      o.final = decode::threshold_mix(o.draft.draft, o.draft.uncertainty, refined, gamma);
      o.from_refined.resize(len);
      for (std::size_t i = 0; i < len; ++i) o.from_refined[i] = !o.refined.empty() && o.draft.uncertainty[i] > gamma;
    }
    // Viterbi output is already legal under learned transitions.
    if (opt.legalize && opt.decoder != DecoderKind::viterbi && t.scheme.kind() == data::SchemeKind::bioes) {
      std::vector<double> probs(len * C);
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t c = 0; c < C; ++c)
          probs[i * C + c] = o.from_refined[i] ? ref.probs[i * C + c] : o.draft.probs[i * C + c];
      o.final = decode::legalize({probs, len, C}, t.scheme);
    }
  }
  return out;
}

void write_predictions(std::ostream& out, const std::vector<data::Sentence>& sentences,
                       const std::vector<Tagged>& tagged, const data::TagScheme& scheme) {
  if (sentences.size() != tagged.size()) throw ContractError("prediction count differs from sentence count");
  char buf[32];
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const auto& s = sentences[k];
    const auto& t = tagged[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i] << ' ';
      if (s.labeled()) out << scheme.label(s.gold[i]) << ' ';
      std::snprintf(buf, sizeof buf, "%.6f", t.draft.uncertainty[i]);
      out << scheme.label(t.final[i]) << ' ' << buf << ' ' << (t.from_refined[i] ? "refined" : "draft") << '\n';
    }
    out << '\n';
  }
}

}  // namespace uanet::model
