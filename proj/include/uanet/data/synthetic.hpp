#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/data/conll.hpp"
#include "uanet/data/tag_scheme.hpp"

namespace uanet::data {

// Labels at `anchor` and `dependent` must share a type. Negative positions
// count from the sentence end (-1 = last token). The anchor token is drawn
// from its type's own words; the dependent token from the shared ambiguous
// pool, so only the constraint identifies its type.
struct ConstraintRule {
  int anchor = 0;
  int dependent = -1;
};

// Generator for corpora with long-range label agreement. Latent states are
// {O, type_1..type_K} for BIOES (runs of one type form a segment) and the
// labels themselves for the plain scheme.
struct SyntheticSpec {
  SchemeKind scheme = SchemeKind::bioes;
  std::size_t num_types = 4;
  // Row-stochastic matrix over latent states; empty selects a default chain.
  std::vector<std::vector<double>> transitions;
  std::size_t o_words = 200;
  std::size_t type_words = 40;
  std::size_t ambiguous_words = 30;
  // Chance that an unconstrained entity token uses an ambiguous word.
  double ambiguity = 0.05;
  std::vector<ConstraintRule> rules;
  std::size_t min_length = 8;
  std::size_t max_length = 20;
  std::size_t train_size = 1000;
  std::size_t dev_size = 200;
  std::size_t test_size = 200;
  std::uint64_t seed = 1;
  std::size_t max_retries = 64;

  std::size_t latent_states() const;
  std::size_t label_count() const;
  TagScheme tag_scheme() const;
  std::vector<std::vector<double>> transition_matrix() const;
  // Throws ConfigError on a malformed spec.
  void validate() const;
};

void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

struct SyntheticCorpus {
  TagScheme scheme;
  std::vector<Sentence> train;
  std::vector<Sentence> dev;
  std::vector<Sentence> test;
};

// Resolved (anchor, dependent) positions for a sentence of length n, or an
// empty optional-like result with feasible = false when the rules cannot be
// honoured at this length.
struct ResolvedRules {
  bool feasible = false;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};
ResolvedRules resolve_rules(const SyntheticSpec& spec, std::size_t n);

// Dependent (constraint-only) positions of a sentence of length n.
std::vector<std::size_t> dependent_positions(const SyntheticSpec& spec, std::size_t n);

// Deterministic in spec.seed. Throws GenerationError when no sentence length
// admits the rules within max_retries draws.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);
std::vector<Sentence> generate_sentences(const SyntheticSpec& spec, std::size_t count, std::uint64_t stream);

}  // namespace uanet::data
