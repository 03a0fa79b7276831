#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uanet/data/tag_scheme.hpp"

namespace uanet::data {

// Pre-tokenized sentence with optional aligned gold label ids.
struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> gold;  // empty when unlabeled

  bool labeled() const { return !gold.empty(); }
  std::size_t size() const { return tokens.size(); }
};

// Splits a UTF-8 token into code points; each element holds one code point.
std::vector<std::string> utf8_chars(const std::string& token);

// Which whitespace-separated columns carry the word and the label. A negative
// label column counts from the end of the line (-1 = last column).
// label_column = nullopt reads unlabeled text.
struct ColumnSpec {
  std::size_t word_column = 0;
  std::optional<int> label_column = -1;
  // Convert BIO2 labels to BIOES while reading.
  bool bio2_to_bioes = false;
};

struct RawSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

// Sentences are separated by blank lines; -DOCSTART- lines are dropped.
std::vector<RawSentence> read_conll_raw(const std::filesystem::path& path, const ColumnSpec& spec = {});
std::vector<RawSentence> parse_conll_raw(std::istream& in, const ColumnSpec& spec = {});

// Labels must belong to the scheme; unknown labels raise ParseError listing them.
std::vector<Sentence> read_conll(const std::filesystem::path& path, const TagScheme& scheme,
                                 const ColumnSpec& spec = {});
std::vector<Sentence> encode_sentences(const std::vector<RawSentence>& raw, const TagScheme& scheme);

// Writes "token label" lines with blank-line separators; unlabeled sentences
// are written as tokens only.
void write_conll(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                 const TagScheme& scheme);

}  // namespace uanet::data
