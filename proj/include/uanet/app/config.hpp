#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/data/synthetic.hpp"
#include "uanet/eval/bench.hpp"
#include "uanet/model/encoder.hpp"
#include "uanet/model/refiner.hpp"
#include "uanet/train/trainer.hpp"

namespace uanet::app {

struct DataConfig {
  std::string source = "synthetic";  // or "conll"
  data::SyntheticSpec synthetic;
  std::string train, dev, test;  // CoNLL paths when source = conll
  int label_column = -1;
  bool bio2_to_bioes = false;
  std::string embeddings;  // optional pretrained word vectors
  bool lowercase = true;
  bool zero_digits = true;
};

struct InferenceConfig {
  std::string decoder = "mix";
  std::optional<double> gamma;        // null = the tuned value
  std::optional<std::size_t> samples;  // null = the training value
  bool legalize = false;
  int workers = 1;
};

struct SweepConfig {
  std::vector<std::size_t> samples = {1, 2, 4, 8, 16};
};

struct Config {
  std::uint64_t seed = 1;
  DataConfig data;
  model::EncoderConfig encoder;
  model::RefinerConfig refiner;
  train::TrainConfig training;
  InferenceConfig inference;
  SweepConfig sweep;
  eval::BenchConfig bench;

  void validate() const;
};

nlohmann::json to_json(const Config& c);

// Strict reading: every key must exist in the default document and keep its
// type. Errors are ConfigError with the dotted key path.
Config config_from_json(const nlohmann::json& j);

// "a.b.c=value". The value is parsed as JSON when possible and taken as a
// string otherwise. Unknown paths raise ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Defaults, then the file (if any), then the overrides in order.
Config load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);

}  // namespace uanet::app
