#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uanet/data/conll.hpp"
#include "uanet/data/embeddings.hpp"
#include "uanet/data/tag_scheme.hpp"
#include "uanet/data/vocab.hpp"
#include "uanet/model/encoder.hpp"
#include "uanet/model/mc.hpp"
#include "uanet/model/refiner.hpp"

namespace uanet::model {

// Everything prediction needs: inventories, both networks, the tuned
// threshold and the inference sample count.
struct Tagger {
  data::Vocabulary vocab;
  data::TagScheme scheme;
  Encoder encoder;
  Refiner refiner;
  double gamma = 0.0;
  std::size_t samples = 8;
  std::uint64_t seed = 1;
};

Tagger init_tagger(const data::Vocabulary& vocab, const data::TagScheme& scheme, const EncoderConfig& enc,
                   const RefinerConfig& ref, std::uint64_t seed, const data::EmbeddingMap* pretrained = nullptr);

// Deep copy of both parameter stores.
Tagger clone(const Tagger& t);

// Writes encoder.json and refiner.json into dir.
void save_tagger(const std::filesystem::path& dir, const Tagger& t);
// Throws MissingFileError naming the first absent file.
Tagger load_tagger(const std::filesystem::path& dir);

enum class DecoderKind { mix, draft, refined, viterbi };
DecoderKind parse_decoder(const std::string& name);
std::string decoder_name(DecoderKind k);

struct PredictOptions {
  DecoderKind decoder = DecoderKind::mix;
  double gamma = 0.0;
  std::size_t samples = 8;
  std::uint64_t seed = 1;
  int workers = 1;
  bool legalize = false;
  // Replace every draft by the mask symbol before refining (label-stream
  // ablation).
  bool mask_drafts = false;
};

// Options taken from the tagger itself.
PredictOptions default_options(const Tagger& t);

struct Tagged {
  DraftPrediction draft;
  std::vector<std::size_t> refined;
  std::vector<std::size_t> final;
  std::vector<bool> from_refined;
};

std::vector<Tagged> tag(const Tagger& t, const std::vector<data::Sentence>& sentences, const PredictOptions& opt);

// "token gold pred uncertainty source" with blank lines between sentences;
// the gold column is dropped for unlabeled input.
void write_predictions(std::ostream& out, const std::vector<data::Sentence>& sentences,
                       const std::vector<Tagged>& tagged, const data::TagScheme& scheme);

}  // namespace uanet::model
