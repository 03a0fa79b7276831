#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/autodiff/tensor.hpp"

namespace uanet::ad {

// Named trainable leaves in registration order. Registration order is also
// the serialization order, so checkpoints are byte-stable.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  std::size_t total_values() const;
  // Deep copy with fresh storage, grads dropped.
  ParamStore clone() const;

 private:
  std::deque<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

inline constexpr int kCheckpointVersion = 1;

// JSON manifest: {"format", "version", "metadata", "params": [{name, shape, values}]}.
// Names may be namespaced by prefix (e.g. "refiner.").
nlohmann::json to_json(const ParamStore& params, const nlohmann::json& metadata = nlohmann::json::object());
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const nlohmann::json& metadata = nlohmann::json::object());

// Overwrites values of parameters already present in `params`. Every stored
// parameter must exist with a matching shape and vice versa. Returns metadata.
nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamStore& params);
nlohmann::json from_json(const nlohmann::json& doc, ParamStore& params);

}  // namespace uanet::ad
