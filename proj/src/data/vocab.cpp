#include "uanet/data/vocab.hpp"

#include <cctype>

#include "uanet/core/error.hpp"

namespace uanet::data {

Vocabulary::Vocabulary() {
  words_.push_back(kUnkToken);
  freq_.push_back(0);
  word_index_.emplace(kUnkToken, kUnk);
  chars_.push_back(kUnkToken);
  char_index_.emplace(kUnkToken, kUnk);
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& corpus, CasePolicy policy) {
  Vocabulary v;
  v.policy_ = policy;
  for (const auto& s : corpus)
    for (const auto& tok : s.tokens) {
      const auto w = v.normalize(tok);
      auto [it, inserted] = v.word_index_.emplace(w, v.words_.size());
      if (inserted) {
        v.words_.push_back(w);
        v.freq_.push_back(0);
      }
      ++v.freq_[it->second];
      for (auto& c : utf8_chars(tok))
        if (v.char_index_.emplace(c, v.chars_.size()).second) v.chars_.push_back(c);
    }
  return v;
}

std::string Vocabulary::normalize(const std::string& token) const {
  std::string out = token;
  for (auto& ch : out) {
    const auto u = static_cast<unsigned char>(ch);
    if (u >= 0x80) continue;
    if (policy_.zero_digits && std::isdigit(u)) ch = '0';
    else if (policy_.lowercase_words) ch = static_cast<char>(std::tolower(u));
  }
  return out;
}

std::size_t Vocabulary::word_id(const std::string& token) const {
  auto it = word_index_.find(normalize(token));
  return it == word_index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::char_ids(const std::string& token) const {
  std::vector<std::size_t> out;
  for (auto& c : utf8_chars(token)) {
    auto it = char_index_.find(c);
    out.push_back(it == char_index_.end() ? kUnk : it->second);
  }
  return out;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"lowercase_words", policy_.lowercase_words},
          {"zero_digits", policy_.zero_digits},
          {"words", words_},
          {"frequencies", freq_},
          {"chars", chars_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  v.policy_.lowercase_words = j.at("lowercase_words").get<bool>();
  v.policy_.zero_digits = j.at("zero_digits").get<bool>();
  v.words_ = j.at("words").get<std::vector<std::string>>();
  v.freq_ = j.at("frequencies").get<std::vector<std::size_t>>();
  v.chars_ = j.at("chars").get<std::vector<std::string>>();
  if (v.words_.empty() || v.words_[0] != kUnkToken || v.chars_.empty() || v.chars_[0] != kUnkToken ||
      v.freq_.size() != v.words_.size())
    throw ParseError("vocabulary file is malformed");
  v.word_index_.clear();
  v.char_index_.clear();
  for (std::size_t i = 0; i < v.words_.size(); ++i) v.word_index_.emplace(v.words_[i], i);
  for (std::size_t i = 0; i < v.chars_.size(); ++i) v.char_index_.emplace(v.chars_[i], i);
  return v;
}

}  // namespace uanet::data
