#include "uanet/data/tag_scheme.hpp"

#include <algorithm>

#include "uanet/core/error.hpp"

namespace uanet::data {

TagParts split_tag(const std::string& label) {
  if (label == "O") return {'O', ""};
  if (label.size() >= 2 && label[1] == '-' && std::string("BIES").find(label[0]) != std::string::npos)
    return {label[0], label.substr(2)};
  return {'S', label};
}

std::vector<Segment> extract_segments(std::span<const std::string> labels) {
  std::vector<Segment> out;
  const std::size_t n = labels.size();
  std::vector<TagParts> parts;
  parts.reserve(n);
  for (const auto& l : labels) parts.push_back(split_tag(l));

  auto continues = [&](std::size_t prev, std::size_t next) {
    // Can `next` extend a segment that is open at `prev`?
    const auto& a = parts[prev];
    const auto& b = parts[next];
    return (a.prefix == 'B' || a.prefix == 'I') && (b.prefix == 'I' || b.prefix == 'E') && a.type == b.type;
  };

  std::size_t start = 0;
  bool open = false;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& p = parts[t];
    if (p.prefix == 'O') {
      open = false;
      continue;
    }
    if (!open || !continues(t - 1, t)) {
      start = t;
      open = true;
    }
    const bool closes = p.prefix == 'E' || p.prefix == 'S' || t + 1 == n || !continues(t, t + 1);
    if (closes) {
      out.push_back({start, t + 1, p.type});
      open = false;
    }
  }
  return out;
}

std::size_t first_illegal_bio2(std::span<const std::string> labels) {
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto p = split_tag(labels[t]);
    if (p.prefix == 'E' || p.prefix == 'S') return t;
    if (p.prefix == 'I') {
      if (t == 0) return t;
      const auto q = split_tag(labels[t - 1]);
      if (!((q.prefix == 'B' || q.prefix == 'I') && q.type == p.type)) return t;
    }
  }
  return labels.size();
}

std::size_t first_illegal_bioes(std::span<const std::string> labels) {
  char prev = 'O';
  std::string prev_type;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const std::string& l = labels[t];
    if (l != "O" && !(l.size() > 2 && l[1] == '-' && std::string("BIES").find(l[0]) != std::string::npos))
      return t;
    const auto p = split_tag(l);
    const bool inside = prev == 'B' || prev == 'I';
    if (inside) {
      if (!((p.prefix == 'I' || p.prefix == 'E') && p.type == prev_type)) return t;
    } else if (p.prefix == 'I' || p.prefix == 'E') {
      return t;
    }
    prev = p.prefix;
    prev_type = p.type;
  }
  if (prev == 'B' || prev == 'I') return labels.size() - 1;
  return labels.size();
}

std::vector<std::string> convert_bio2_to_bioes(std::span<const std::string> labels) {
  if (auto bad = first_illegal_bio2(labels); bad != labels.size())
    throw ParseError("illegal BIO2 label '" + labels[bad] + "' at index " + std::to_string(bad));
  std::vector<std::string> out(labels.begin(), labels.end());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto p = split_tag(labels[t]);
    if (p.prefix == 'O') continue;
    const bool next_continues = t + 1 < labels.size() && split_tag(labels[t + 1]).prefix == 'I';
    if (p.prefix == 'B' && !next_continues) out[t] = "S-" + p.type;
    if (p.prefix == 'I' && !next_continues) out[t] = "E-" + p.type;
  }
  return out;
}

std::vector<std::string> convert_bioes_to_bio2(std::span<const std::string> labels) {
  if (auto bad = first_illegal_bioes(labels); bad != labels.size())
    throw ParseError("illegal BIOES label '" + labels[bad] + "' at index " + std::to_string(bad));
  std::vector<std::string> out(labels.begin(), labels.end());
  for (auto& l : out) {
    const auto p = split_tag(l);
    if (p.prefix == 'S') l = "B-" + p.type;
    if (p.prefix == 'E') l = "I-" + p.type;
  }
  return out;
}

TagScheme TagScheme::bioes(const std::vector<std::string>& types) {
  TagScheme s;
  s.kind_ = SchemeKind::bioes;
  s.labels_.push_back("O");
  for (const auto& t : types)
    for (const char* p : {"B-", "I-", "E-", "S-"}) s.labels_.push_back(p + t);
  for (std::size_t i = 0; i < s.labels_.size(); ++i) {
    if (!s.index_.emplace(s.labels_[i], i).second) throw ContractError("duplicate label " + s.labels_[i]);
    s.parts_.push_back(split_tag(s.labels_[i]));
  }
  return s;
}

TagScheme TagScheme::plain(const std::vector<std::string>& labels) {
  TagScheme s;
  s.kind_ = SchemeKind::plain;
  s.labels_ = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!s.index_.emplace(labels[i], i).second) throw ContractError("duplicate label " + labels[i]);
    s.parts_.push_back({'S', labels[i]});
  }
  return s;
}

TagScheme TagScheme::from_labels(const std::vector<std::string>& labels) {
  std::vector<std::string> types;
  bool bioes = !labels.empty();
  for (const auto& l : labels) {
    if (l == "O") continue;
    if (!(l.size() > 2 && l[1] == '-' && std::string("BIES").find(l[0]) != std::string::npos)) {
      bioes = false;
      break;
    }
    auto t = l.substr(2);
    if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
  }
  if (!bioes) return plain(labels);
  std::sort(types.begin(), types.end());
  return TagScheme::bioes(types);
}

std::size_t TagScheme::id(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw ParseError("unknown label '" + label + "'");
  return it->second;
}

std::vector<std::string> TagScheme::types() const {
  if (kind_ == SchemeKind::plain) return labels_;
  std::vector<std::string> out;
  for (const auto& p : parts_)
    if (p.prefix == 'B') out.push_back(p.type);
  return out;
}

bool TagScheme::legal_start(std::size_t id) const {
  if (kind_ == SchemeKind::plain) return true;
  const char p = parts_.at(id).prefix;
  return p == 'O' || p == 'B' || p == 'S';
}

bool TagScheme::legal_end(std::size_t id) const {
  if (kind_ == SchemeKind::plain) return true;
  const char p = parts_.at(id).prefix;
  return p == 'O' || p == 'E' || p == 'S';
}

bool TagScheme::legal_transition(std::size_t prev, std::size_t next) const {
  if (kind_ == SchemeKind::plain) return true;
  const auto& a = parts_.at(prev);
  const auto& b = parts_.at(next);
  if (a.prefix == 'B' || a.prefix == 'I') return (b.prefix == 'I' || b.prefix == 'E') && a.type == b.type;
  return b.prefix == 'O' || b.prefix == 'B' || b.prefix == 'S';
}

bool TagScheme::legal(std::span<const std::size_t> ids) const {
  if (ids.empty()) return true;
  if (!legal_start(ids.front()) || !legal_end(ids.back())) return false;
  for (std::size_t t = 1; t < ids.size(); ++t)
    if (!legal_transition(ids[t - 1], ids[t])) return false;
  return true;
}

std::vector<std::string> TagScheme::decode(std::span<const std::size_t> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(labels_.at(i));
  return out;
}

std::vector<std::size_t> TagScheme::encode(std::span<const std::string> labels) const {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(id(l));
  return out;
}

}  // namespace uanet::data
