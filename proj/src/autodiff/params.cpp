#include "uanet/autodiff/params.hpp"

#include <fstream>

#include "uanet/core/error.hpp"

namespace uanet::ad {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (contains(name)) throw ContractError("duplicate parameter " + name);
  t.set_requires_grad(true);
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(t));
  return entries_.back().second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return entries_[it->second].second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return entries_[it->second].second;
}

void ParamStore::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& [name, t] : entries_) out.add(name, t.clone());
  return out;
}

nlohmann::json to_json(const ParamStore& params, const nlohmann::json& metadata) {
  nlohmann::json doc;
  doc["format"] = "uanet-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["metadata"] = metadata;
  auto& list = doc["params"] = nlohmann::json::array();
  for (const auto& [name, t] : params) {
    nlohmann::json p;
    p["name"] = name;
    p["shape"] = t.shape();
    p["values"] = std::vector<double>(t.data().begin(), t.data().end());
    list.push_back(std::move(p));
  }
  return doc;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const nlohmann::json& metadata) {
  std::ofstream out(path);
  if (!out) throw MissingFileError(path.string());
  out << to_json(params, metadata).dump(1) << '\n';
}

nlohmann::json from_json(const nlohmann::json& doc, ParamStore& params) {
  if (!doc.contains("version")) throw ParseError("checkpoint has no version field");
  if (doc["version"].get<int>() != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + doc["version"].dump());
  std::size_t seen = 0;
  for (const auto& p : doc.at("params")) {
    const auto name = p.at("name").get<std::string>();
    if (!params.contains(name)) throw ParseError("checkpoint parameter " + name + " is not part of the model");
    auto& t = params.get(name);
    const auto shape = p.at("shape").get<Shape>();
    if (shape != t.shape())
      throw ParseError("checkpoint parameter " + name + " has shape " + to_string(shape) + ", model expects " +
                       to_string(t.shape()));
    const auto values = p.at("values").get<std::vector<double>>();
    if (values.size() != t.size()) throw ParseError("checkpoint parameter " + name + " has wrong value count");
    std::copy(values.begin(), values.end(), t.data().begin());
    ++seen;
  }
  if (seen != params.size())
    throw ParseError("checkpoint holds " + std::to_string(seen) + " parameters, model has " +
                     std::to_string(params.size()));
  return doc.value("metadata", nlohmann::json::object());
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamStore& params) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(doc, params);
}

}  // namespace uanet::ad
