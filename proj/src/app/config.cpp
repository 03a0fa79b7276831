#include "uanet/app/config.hpp"

#include <fstream>

#include "uanet/core/error.hpp"
#include "uanet/model/tagger.hpp"

namespace uanet::app {

using nlohmann::json;

void Config::validate() const {
  if (data.source != "synthetic" && data.source != "conll")
    throw ConfigError("data.source", "must be \"synthetic\" or \"conll\"");
  if (data.source == "synthetic") data.synthetic.validate();
  if (data.source == "conll" && (data.train.empty() || data.dev.empty() || data.test.empty()))
    throw ConfigError("data.train", "conll source needs train, dev and test paths");
  encoder.validate();
  refiner.validate();
  training.validate();
  model::parse_decoder(inference.decoder);
  if (inference.gamma && *inference.gamma < 0.0) throw ConfigError("inference.gamma", "must be >= 0");
  if (inference.samples && *inference.samples == 0) throw ConfigError("inference.samples", "must be positive");
  if (inference.workers < 1) throw ConfigError("inference.workers", "must be at least 1");
  if (sweep.samples.empty()) throw ConfigError("sweep.samples", "must not be empty");
  for (auto m : sweep.samples)
    if (m == 0) throw ConfigError("sweep.samples", "entries must be positive");
  if (bench.repeats == 0) throw ConfigError("bench.repeats", "must be positive");
  if (bench.workers < 1) throw ConfigError("bench.workers", "must be at least 1");
  if (bench.scaling_length == 0) throw ConfigError("bench.scaling_length", "must be positive");
}

json to_json(const Config& c) {
  json data = {{"source", c.data.source},
               {"synthetic", c.data.synthetic},
               {"train", c.data.train},
               {"dev", c.data.dev},
               {"test", c.data.test},
               {"label_column", c.data.label_column},
               {"bio2_to_bioes", c.data.bio2_to_bioes},
               {"embeddings", c.data.embeddings},
               {"lowercase", c.data.lowercase},
               {"zero_digits", c.data.zero_digits}};
  json inference = {{"decoder", c.inference.decoder},
                    {"gamma", c.inference.gamma ? json(*c.inference.gamma) : json()},
                    {"samples", c.inference.samples ? json(*c.inference.samples) : json()},
                    {"legalize", c.inference.legalize},
                    {"workers", c.inference.workers}};
  return {{"seed", c.seed},
          {"data", data},
          {"encoder", c.encoder},
          {"refiner", c.refiner},
          {"training", c.training},
          {"inference", inference},
          {"sweep", {{"samples", c.sweep.samples}}},
          {"bench", c.bench}};
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool numeric(const json& v) { return v.is_number(); }

// Keys that may hold free-form values: arrays of objects or matrices are
// checked by their own readers, nullable entries accept a number.
void check_against(const json& user, const json& defaults, const std::string& path) {
  for (const auto& [key, value] : user.items()) {
    const std::string here = join(path, key);
    if (!defaults.contains(key)) throw ConfigError(here, "unknown key");
    const json& d = defaults.at(key);
    if (d.is_object()) {
      if (!value.is_object()) throw ConfigError(here, "expected an object");
      check_against(value, d, here);
    } else if (d.is_null()) {
      if (!value.is_null() && !numeric(value)) throw ConfigError(here, "expected a number or null");
    } else if (d.is_boolean()) {
      if (!value.is_boolean()) throw ConfigError(here, "expected true or false");
    } else if (d.is_string()) {
      if (!value.is_string()) throw ConfigError(here, "expected a string");
    } else if (d.is_number_float()) {
      if (!numeric(value)) throw ConfigError(here, "expected a number");
    } else if (d.is_number_unsigned()) {
      if (!value.is_number_unsigned()) throw ConfigError(here, "expected a non-negative integer");
    } else if (d.is_number_integer()) {
      if (!value.is_number_integer()) throw ConfigError(here, "expected an integer");
    } else if (d.is_array()) {
      if (!value.is_array()) throw ConfigError(here, "expected an array");
    }
  }
}

template <class T>
T read_section(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

Config config_from_json(const json& j) {
  const json defaults = to_json(Config{});
  check_against(j, defaults, "");
  json merged = defaults;
  merged.merge_patch(j);
  // merge_patch drops keys set to null; restore the nullable ones.
  for (const char* k : {"gamma", "samples"})
    if (!merged["inference"].contains(k)) merged["inference"][k] = nullptr;
  Config c;
  c.seed = merged.at("seed").get<std::uint64_t>();
  const auto& d = merged.at("data");
  c.data.source = d.at("source").get<std::string>();
  try {
    c.data.synthetic = d.at("synthetic").get<data::SyntheticSpec>();
  } catch (const json::exception& e) {
    throw ConfigError("data.synthetic", e.what());
  }
  c.data.train = d.at("train").get<std::string>();
  c.data.dev = d.at("dev").get<std::string>();
  c.data.test = d.at("test").get<std::string>();
  c.data.label_column = d.at("label_column").get<int>();
  c.data.bio2_to_bioes = d.at("bio2_to_bioes").get<bool>();
  c.data.embeddings = d.at("embeddings").get<std::string>();
  c.data.lowercase = d.at("lowercase").get<bool>();
  c.data.zero_digits = d.at("zero_digits").get<bool>();
  c.encoder = read_section<model::EncoderConfig>(merged, "encoder");
  c.refiner = read_section<model::RefinerConfig>(merged, "refiner");
  c.training = read_section<train::TrainConfig>(merged, "training");
  c.bench = read_section<eval::BenchConfig>(merged, "bench");
  const auto& inf = merged.at("inference");
  c.inference.decoder = inf.at("decoder").get<std::string>();
  if (!inf.at("gamma").is_null()) c.inference.gamma = inf.at("gamma").get<double>();
  if (!inf.at("samples").is_null()) {
    if (!inf.at("samples").is_number_unsigned()) throw ConfigError("inference.samples", "expected a positive integer");
    c.inference.samples = inf.at("samples").get<std::size_t>();
  }
  c.inference.legalize = inf.at("legalize").get<bool>();
  c.inference.workers = inf.at("workers").get<int>();
  c.sweep.samples = merged.at("sweep").at("samples").get<std::vector<std::size_t>>();
  c.validate();
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key.path=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  const json defaults = to_json(Config{});
  const json* known = &defaults;
  json* node = &doc;
  std::size_t at = 0;
  while (true) {
    const auto dot = path.find('.', at);
    const std::string key = path.substr(at, dot == std::string::npos ? std::string::npos : dot - at);
    if (!known->is_object() || !known->contains(key)) throw ConfigError(path, "unknown key");
    known = &known->at(key);
    if (dot == std::string::npos) {
      json value = json::parse(text, nullptr, false);
      if (value.is_discarded()) value = text;
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object()) *node = json::object();
    at = dot + 1;
  }
}

Config load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw MissingFileError(file->string());
    doc = json::parse(in, nullptr, false, true);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError(file->string(), "not a JSON object");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace uanet::app
