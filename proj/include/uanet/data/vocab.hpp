#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/data/conll.hpp"

namespace uanet::data {

// Words are normalized for the word channel only; the character channel
// always sees the original token.
struct CasePolicy {
  bool lowercase_words = true;
  bool zero_digits = true;  // map every ASCII digit to '0'
};

// Word and character inventories. Ids are dense from 0, id 0 is the unknown
// entry in both maps, and ids follow first occurrence in the corpus.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static inline const std::string kUnkToken = "<unk>";

  Vocabulary();
  static Vocabulary build(const std::vector<Sentence>& corpus, CasePolicy policy = {});

  std::string normalize(const std::string& token) const;
  std::size_t word_id(const std::string& token) const;
  std::vector<std::size_t> char_ids(const std::string& token) const;

  std::size_t word_count() const { return words_.size(); }
  std::size_t char_count() const { return chars_.size(); }
  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::size_t frequency(std::size_t id) const { return freq_.at(id); }
  bool singleton(std::size_t id) const { return id != kUnk && freq_.at(id) == 1; }
  const CasePolicy& policy() const { return policy_; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  CasePolicy policy_;
  std::vector<std::string> words_;
  std::vector<std::size_t> freq_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::vector<std::string> chars_;
  std::unordered_map<std::string, std::size_t> char_index_;
};

}  // namespace uanet::data
