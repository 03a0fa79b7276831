#include "uanet/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "uanet/core/error.hpp"
#include "uanet/core/rng.hpp"

namespace uanet::data {

namespace {

constexpr std::uint64_t kTrainStream = 1, kDevStream = 2, kTestStream = 3;

std::string type_name(std::size_t k) { return "T" + std::to_string(k); }

// Pseudo-random pronounceable-ish word for (kind, index); independent of the
// corpus seed so the lexicon is stable across corpora.
std::string make_word(std::uint64_t kind, std::uint64_t index, std::uint64_t salt, bool capitalized) {
  static constexpr char kConsonants[] = "bcdfghjklmnprstvwz";
  static constexpr char kVowels[] = "aeiou";
  std::uint64_t h = derive_seed(0x5eed, {kind, index, salt});
  const std::size_t len = 3 + h % 6;
  h = mix64(h);
  std::string w;
  for (std::size_t i = 0; i < len; ++i) {
    h = mix64(h + i);
    w += (i % 2 == 0) ? kConsonants[h % (sizeof(kConsonants) - 1)] : kVowels[h % (sizeof(kVowels) - 1)];
  }
  if (capitalized) w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

struct Lexicon {
  std::vector<std::string> o_words;
  std::vector<std::vector<std::string>> type_words;  // per latent entity type
  std::vector<std::string> ambiguous;
};

Lexicon build_lexicon(const SyntheticSpec& spec) {
  Lexicon lex;
  std::set<std::string> used;
  auto fresh = [&](std::uint64_t kind, std::uint64_t index, bool cap) {
    for (std::uint64_t salt = 0;; ++salt) {
      auto w = make_word(kind, index, salt, cap);
      if (used.insert(w).second) return w;
    }
  };
  const bool entity_caps = spec.scheme == SchemeKind::bioes;
  for (std::size_t i = 0; i < spec.o_words; ++i) lex.o_words.push_back(fresh(0, i, false));
  lex.type_words.resize(spec.num_types);
  for (std::size_t k = 0; k < spec.num_types; ++k)
    for (std::size_t i = 0; i < spec.type_words; ++i) lex.type_words[k].push_back(fresh(10 + k, i, entity_caps));
  for (std::size_t i = 0; i < spec.ambiguous_words; ++i) lex.ambiguous.push_back(fresh(1, i, entity_caps));
  return lex;
}

std::size_t draw_row(const std::vector<double>& row, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (u < row[j]) return j;
    u -= row[j];
  }
  return row.size() - 1;
}

}  // namespace

std::size_t SyntheticSpec::latent_states() const {
  return scheme == SchemeKind::bioes ? num_types + 1 : num_types;
}

std::size_t SyntheticSpec::label_count() const {
  return scheme == SchemeKind::bioes ? 4 * num_types + 1 : num_types;
}

TagScheme SyntheticSpec::tag_scheme() const {
  std::vector<std::string> types;
  for (std::size_t k = 0; k < num_types; ++k) types.push_back(type_name(k));
  return scheme == SchemeKind::bioes ? TagScheme::bioes(types) : TagScheme::plain(types);
}

std::vector<std::vector<double>> SyntheticSpec::transition_matrix() const {
  if (!transitions.empty()) return transitions;
  const std::size_t s = latent_states();
  std::vector<std::vector<double>> t(s, std::vector<double>(s, 0.0));
  if (scheme == SchemeKind::plain) {
    for (auto& row : t) std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(s));
    return t;
  }
  // O tends to persist; an entity run continues with probability 0.45 and
  // otherwise returns to O.
  t[0][0] = 0.8;
  for (std::size_t k = 1; k < s; ++k) t[0][k] = 0.2 / static_cast<double>(num_types);
  for (std::size_t k = 1; k < s; ++k) {
    t[k][k] = 0.45;
    t[k][0] = 0.55;
  }
  return t;
}

void SyntheticSpec::validate() const {
  if (num_types == 0) throw ConfigError("synthetic.num_types", "must be positive");
  if (min_length == 0 || min_length > max_length)
    throw ConfigError("synthetic.min_length", "need 0 < min_length <= max_length");
  if (o_words == 0 || type_words == 0 || ambiguous_words == 0)
    throw ConfigError("synthetic.o_words", "word pools must be non-empty");
  if (ambiguity < 0.0 || ambiguity > 1.0) throw ConfigError("synthetic.ambiguity", "must lie in [0, 1]");
  if (scheme == SchemeKind::plain && num_types < 1) throw ConfigError("synthetic.num_types", "must be positive");
  const auto t = transition_matrix();
  if (t.size() != latent_states()) throw ConfigError("synthetic.transitions", "wrong number of rows");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].size() != latent_states()) throw ConfigError("synthetic.transitions", "wrong number of columns");
    double s = 0.0;
    for (double p : t[i]) {
      if (p < 0.0) throw ConfigError("synthetic.transitions", "negative probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw ConfigError("synthetic.transitions", "row " + std::to_string(i) + " sums to " + std::to_string(s));
  }
  for (const auto& r : rules)
    if (std::abs(r.anchor) > static_cast<int>(max_length) || std::abs(r.dependent) > static_cast<int>(max_length))
      throw ConfigError("synthetic.rules", "rule offset beyond max_length");
}

ResolvedRules resolve_rules(const SyntheticSpec& spec, std::size_t n) {
  ResolvedRules out;
  const auto resolve = [n](int p) -> long {
    const long v = p < 0 ? static_cast<long>(n) + p : p;
    return v;
  };
  std::set<std::size_t> anchors, dependents;
  for (const auto& r : spec.rules) {
    const long a = resolve(r.anchor), b = resolve(r.dependent);
    if (a < 0 || b < 0 || a >= static_cast<long>(n) || b >= static_cast<long>(n) || a == b) return out;
    out.pairs.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    anchors.insert(static_cast<std::size_t>(a));
    dependents.insert(static_cast<std::size_t>(b));
  }
  for (auto d : dependents)
    if (anchors.count(d)) return out;  // a token cannot be both distinctive and ambiguous
  if (spec.scheme == SchemeKind::bioes) {
    // Constrained tokens are singleton mentions flanked by O, so no two of
    // them may touch.
    std::set<std::size_t> all(anchors);
    all.insert(dependents.begin(), dependents.end());
    std::size_t prev = 0;
    bool first = true;
    for (auto p : all) {
      if (!first && p - prev < 2) return out;
      prev = p;
      first = false;
    }
  }
  // Two rules that share a dependent must agree on the anchor's type; we only
  // allow that when the anchors coincide.
  for (std::size_t i = 0; i < out.pairs.size(); ++i)
    for (std::size_t j = i + 1; j < out.pairs.size(); ++j)
      if (out.pairs[i].second == out.pairs[j].second && out.pairs[i].first != out.pairs[j].first) return out;
  out.feasible = true;
  return out;
}

std::vector<std::size_t> dependent_positions(const SyntheticSpec& spec, std::size_t n) {
  auto r = resolve_rules(spec, n);
  std::vector<std::size_t> out;
  if (!r.feasible) return out;
  for (auto& [a, b] : r.pairs) out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Sentence> generate_sentences(const SyntheticSpec& spec, std::size_t count, std::uint64_t stream) {
  spec.validate();
  const auto lex = build_lexicon(spec);
  const auto trans = spec.transition_matrix();
  const auto scheme = spec.tag_scheme();
  const bool bioes = spec.scheme == SchemeKind::bioes;
  const std::size_t states = spec.latent_states();
  const std::vector<double> uniform(states, 1.0 / static_cast<double>(states));

  std::vector<Sentence> out;
  out.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    Rng rng(derive_seed(spec.seed, {stream, idx}));
    std::size_t n = 0;
    ResolvedRules rules;
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(spec.max_retries, 1); ++attempt) {
      n = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
      rules = resolve_rules(spec, n);
      if (rules.feasible) break;
    }
    if (!rules.feasible)
      throw GenerationError("constraint rules cannot be satisfied for lengths in [" +
                            std::to_string(spec.min_length) + ", " + std::to_string(spec.max_length) + "] after " +
                            std::to_string(spec.max_retries) + " draws");

    std::vector<std::size_t> latent(n);
    latent[0] = draw_row(bioes ? trans[0] : uniform, rng);
    for (std::size_t t = 1; t < n; ++t) latent[t] = draw_row(trans[latent[t - 1]], rng);

    std::vector<char> role(n, 0);  // 'a' anchor, 'd' dependent
    for (auto [a, b] : rules.pairs) {
      std::size_t type = latent[a];
      if (bioes && type == 0) type = 1 + rng.below(spec.num_types);
      latent[a] = latent[b] = type;
      role[a] = 'a';
      role[b] = 'd';
      if (bioes)
        for (std::size_t p : {a, b}) {
          if (p > 0) latent[p - 1] = 0;
          if (p + 1 < n) latent[p + 1] = 0;
        }
    }

    std::vector<std::string> labels(n);
    if (bioes) {
      for (std::size_t t = 0; t < n;) {
        if (latent[t] == 0) {
          labels[t++] = "O";
          continue;
        }
        std::size_t end = t;
        while (end + 1 < n && latent[end + 1] == latent[t]) ++end;
        const auto name = type_name(latent[t] - 1);
        if (end == t) {
          labels[t] = "S-" + name;
        } else {
          labels[t] = "B-" + name;
          for (std::size_t k = t + 1; k < end; ++k) labels[k] = "I-" + name;
          labels[end] = "E-" + name;
        }
        t = end + 1;
      }
    } else {
      for (std::size_t t = 0; t < n; ++t) labels[t] = type_name(latent[t]);
    }

    Sentence s;
    s.tokens.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t type = bioes ? latent[t] : latent[t] + 1;  // 0 = O
      const auto& own = type == 0 ? lex.o_words : lex.type_words[type - 1];
      if (role[t] == 'd') {
        s.tokens[t] = lex.ambiguous[rng.below(lex.ambiguous.size())];
      } else if (role[t] == 'a' || type == 0) {
        s.tokens[t] = own[rng.below(own.size())];
      } else if (rng.bernoulli(spec.ambiguity)) {
        s.tokens[t] = lex.ambiguous[rng.below(lex.ambiguous.size())];
      } else {
        s.tokens[t] = own[rng.below(own.size())];
      }
    }
    s.gold = scheme.encode(labels);
    out.push_back(std::move(s));
  }
  return out;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  SyntheticCorpus c{spec.tag_scheme(), {}, {}, {}};
  c.train = generate_sentences(spec, spec.train_size, kTrainStream);
  c.dev = generate_sentences(spec, spec.dev_size, kDevStream);
  c.test = generate_sentences(spec, spec.test_size, kTestStream);
  return c;
}

void to_json(nlohmann::json& j, const ConstraintRule& r) { j = {{"anchor", r.anchor}, {"dependent", r.dependent}}; }

void from_json(const nlohmann::json& j, ConstraintRule& r) {
  r.anchor = j.at("anchor").get<int>();
  r.dependent = j.at("dependent").get<int>();
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = {{"scheme", s.scheme == SchemeKind::bioes ? "bioes" : "plain"},
       {"num_types", s.num_types},
       {"transitions", s.transitions},
       {"o_words", s.o_words},
       {"type_words", s.type_words},
       {"ambiguous_words", s.ambiguous_words},
       {"ambiguity", s.ambiguity},
       {"rules", s.rules},
       {"min_length", s.min_length},
       {"max_length", s.max_length},
       {"train_size", s.train_size},
       {"dev_size", s.dev_size},
       {"test_size", s.test_size},
       {"seed", s.seed},
       {"max_retries", s.max_retries}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  const auto scheme = j.value("scheme", std::string("bioes"));
  if (scheme != "bioes" && scheme != "plain") throw ConfigError("synthetic.scheme", "expected bioes or plain");
  s.scheme = scheme == "bioes" ? SchemeKind::bioes : SchemeKind::plain;
  s.num_types = j.value("num_types", s.num_types);
  s.transitions = j.value("transitions", s.transitions);
  s.o_words = j.value("o_words", s.o_words);
  s.type_words = j.value("type_words", s.type_words);
  s.ambiguous_words = j.value("ambiguous_words", s.ambiguous_words);
  s.ambiguity = j.value("ambiguity", s.ambiguity);
  if (j.contains("rules")) s.rules = j.at("rules").get<std::vector<ConstraintRule>>();
  s.min_length = j.value("min_length", s.min_length);
  s.max_length = j.value("max_length", s.max_length);
  s.train_size = j.value("train_size", s.train_size);
  s.dev_size = j.value("dev_size", s.dev_size);
  s.test_size = j.value("test_size", s.test_size);
  s.seed = j.value("seed", s.seed);
  s.max_retries = j.value("max_retries", s.max_retries);
}

}  // namespace uanet::data
