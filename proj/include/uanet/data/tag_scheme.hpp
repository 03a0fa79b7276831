#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace uanet::data {

enum class SchemeKind { bioes, plain };

// Splits "B-PER" into prefix 'B' and type "PER". "O" yields prefix 'O' and an
// empty type. Plain labels (no recognised prefix) yield prefix 'S' with the
// whole label as the type.
struct TagParts {
  char prefix;
  std::string type;
};
TagParts split_tag(const std::string& label);

// A typed token span [begin, end).
struct Segment {
  std::size_t begin;
  std::size_t end;
  std::string type;
  auto operator<=>(const Segment&) const = default;
};

// Segment extraction that tolerates ill-formed sequences the way conlleval
// does: a segment opens on B/S, or on I/E whose predecessor cannot continue
// it; it closes on E/S, or when the successor cannot continue it. Works for
// BIO2 and BIOES label strings.
std::vector<Segment> extract_segments(std::span<const std::string> labels);

// Returns the index of the first offending label, or labels.size() when the
// whole sequence is legal.
std::size_t first_illegal_bio2(std::span<const std::string> labels);
std::size_t first_illegal_bioes(std::span<const std::string> labels);

// Throws ParseError naming the offending index on illegal BIO2 input.
std::vector<std::string> convert_bio2_to_bioes(std::span<const std::string> labels);
std::vector<std::string> convert_bioes_to_bio2(std::span<const std::string> labels);

// Ordered label inventory with the segment grammar attached.
class TagScheme {
 public:
  // "O" first, then B-, I-, E-, S- for each type in the given order.
  static TagScheme bioes(const std::vector<std::string>& types);
  static TagScheme plain(const std::vector<std::string>& labels);
  // Infers the kind from the label strings (all O / X-Y with BIOES prefixes).
  static TagScheme from_labels(const std::vector<std::string>& labels);

  SchemeKind kind() const { return kind_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t id) const { return labels_.at(id); }
  // Throws ParseError("unknown label ...") for labels outside the scheme.
  std::size_t id(const std::string& label) const;
  bool contains(const std::string& label) const { return index_.count(label) != 0; }
  // Entity types in order (BIOES), or the labels themselves (plain).
  std::vector<std::string> types() const;

  bool legal_start(std::size_t id) const;
  bool legal_end(std::size_t id) const;
  bool legal_transition(std::size_t prev, std::size_t next) const;
  bool legal(std::span<const std::size_t> ids) const;

  std::vector<std::string> decode(std::span<const std::size_t> ids) const;
  std::vector<std::size_t> encode(std::span<const std::string> labels) const;

 private:
  SchemeKind kind_ = SchemeKind::plain;
  std::vector<std::string> labels_;
  std::vector<TagParts> parts_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace uanet::data
