#include "uanet/data/conll.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "uanet/core/error.hpp"

namespace uanet::data {

std::vector<std::string> utf8_chars(const std::string& token) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < token.size();) {
    const auto c = static_cast<unsigned char>(token[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    len = std::min(len, token.size() - i);
    out.push_back(token.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<RawSentence> parse_conll_raw(std::istream& in, const ColumnSpec& spec) {
  std::vector<RawSentence> out;
  RawSentence current;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      if (spec.bio2_to_bioes) {
        try {
          current.labels = convert_bio2_to_bioes(current.labels);
        } catch (const ParseError& e) {
          throw ParseError(std::string(e.what()) + " in sentence ending before line " + std::to_string(lineno),
                           lineno);
        }
      }
      out.push_back(std::move(current));
    }
    current = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> cols;
    for (std::string f; fields >> f;) cols.push_back(std::move(f));
    if (cols.empty()) {
      flush();
      continue;
    }
    if (cols[0] == "-DOCSTART-") continue;
    if (width == 0) width = cols.size();
    if (cols.size() != width)
      throw ParseError("ragged line: " + std::to_string(cols.size()) + " columns, expected " + std::to_string(width),
                       lineno);
    std::size_t needed = spec.word_column + 1;
    std::size_t label_col = 0;
    if (spec.label_column) {
      const int lc = *spec.label_column;
      if (lc < 0) {
        if (static_cast<std::size_t>(-lc) > cols.size())
          throw ParseError("expected at least " + std::to_string(-lc) + " columns, found " +
                           std::to_string(cols.size()), lineno);
        label_col = cols.size() - static_cast<std::size_t>(-lc);
        if (label_col == spec.word_column)
          throw ParseError("line has no label column (found " + std::to_string(cols.size()) + " columns)", lineno);
      } else {
        label_col = static_cast<std::size_t>(lc);
      }
      needed = std::max(needed, label_col + 1);
    }
    if (cols.size() < needed)
      throw ParseError("expected at least " + std::to_string(needed) + " columns, found " +
                       std::to_string(cols.size()), lineno);
    current.tokens.push_back(cols[spec.word_column]);
    if (spec.label_column) current.labels.push_back(cols[label_col]);
  }
  flush();
  return out;
}

std::vector<RawSentence> read_conll_raw(const std::filesystem::path& path, const ColumnSpec& spec) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  return parse_conll_raw(in, spec);
}

std::vector<Sentence> encode_sentences(const std::vector<RawSentence>& raw, const TagScheme& scheme) {
  std::set<std::string> unknown;
  for (const auto& r : raw)
    for (const auto& l : r.labels)
      if (!scheme.contains(l)) unknown.insert(l);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw ParseError("unknown label(s): " + list);
  }
  std::vector<Sentence> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back({r.tokens, scheme.encode(r.labels)});
  return out;
}

std::vector<Sentence> read_conll(const std::filesystem::path& path, const TagScheme& scheme, const ColumnSpec& spec) {
  return encode_sentences(read_conll_raw(path, spec), scheme);
}

void write_conll(const std::filesystem::path& path, const std::vector<Sentence>& sentences, const TagScheme& scheme) {
  std::ofstream out(path);
  if (!out) throw MissingFileError(path.string());
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i];
      if (s.labeled()) out << ' ' << scheme.label(s.gold[i]);
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace uanet::data
