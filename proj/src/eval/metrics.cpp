#include "uanet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uanet/core/error.hpp"
#include "uanet/decode/decoders.hpp"

namespace uanet::eval {

double SpanCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

namespace {

std::vector<data::Segment> segments(const data::TagScheme& scheme, std::span<const std::size_t> ids) {
  const auto labels = scheme.decode(ids);
  auto segs = data::extract_segments(labels);
  std::sort(segs.begin(), segs.end());
  return segs;
}

void check_aligned(std::span<const std::size_t> gold, std::span<const std::size_t> pred) {
  if (gold.size() != pred.size())
    throw ContractError("gold has " + std::to_string(gold.size()) + " tokens, prediction " +
                        std::to_string(pred.size()));
}

bool covers(const data::Segment& s, std::span<const std::size_t> positions) {
  for (auto p : positions)
    if (p >= s.begin && p < s.end) return true;
  return false;
}

std::size_t common(const std::vector<data::Segment>& a, const std::vector<data::Segment>& b) {
  std::vector<data::Segment> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.size();
}

}  // namespace

SpanCounts count_spans(const data::TagScheme& scheme, std::span<const std::size_t> gold,
                       std::span<const std::size_t> pred) {
  check_aligned(gold, pred);
  const auto g = segments(scheme, gold), p = segments(scheme, pred);
  return {g.size(), p.size(), common(g, p)};
}

SpanCounts count_spans_at(const data::TagScheme& scheme, std::span<const std::size_t> gold,
                          std::span<const std::size_t> pred, std::span<const std::size_t> positions) {
  check_aligned(gold, pred);
  auto keep = [&](std::vector<data::Segment> v) {
    std::erase_if(v, [&](const data::Segment& s) { return !covers(s, positions); });
    return v;
  };
  const auto g = keep(segments(scheme, gold)), p = keep(segments(scheme, pred));
  return {g.size(), p.size(), common(g, p)};
}

std::vector<LengthBucket> default_buckets() {
  return {{1, 10, 0, {}}, {11, 20, 0, {}}, {21, 30, 0, {}}, {31, 40, 0, {}}, {41, 0, 0, {}}};
}

EvalReport span_f1(const data::TagScheme& scheme, const Sequences& gold, const Sequences& pred) {
  if (gold.size() != pred.size())
    throw ContractError("gold has " + std::to_string(gold.size()) + " sentences, prediction " +
                        std::to_string(pred.size()));
  EvalReport r;
  r.buckets = default_buckets();
  r.confusion.assign(scheme.size(), std::vector<std::size_t>(scheme.size(), 0));
  for (const auto& t : scheme.types()) r.per_type[t];
  for (std::size_t k = 0; k < gold.size(); ++k) {
    check_aligned(gold[k], pred[k]);
    const auto g = segments(scheme, gold[k]), p = segments(scheme, pred[k]);
    const SpanCounts c{g.size(), p.size(), common(g, p)};
    r.spans += c;
    for (const auto& s : g) ++r.per_type[s.type].gold;
    for (const auto& s : p) ++r.per_type[s.type].predicted;
    std::vector<data::Segment> hit;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(hit));
    for (const auto& s : hit) ++r.per_type[s.type].correct;
    const std::size_t n = gold[k].size();
    for (auto& b : r.buckets)
      if (n >= b.lo && (b.hi == 0 || n <= b.hi)) {
        ++b.sentences;
        b.spans += c;
      }
    for (std::size_t i = 0; i < n; ++i) {
      ++r.confusion.at(gold[k][i]).at(pred[k][i]);
      r.correct_tokens += gold[k][i] == pred[k][i];
    }
    r.tokens += n;
  }
  return r;
}

std::optional<double> Audit::ratio() const {
  if (!mean_u_correct || !mean_u_incorrect || *mean_u_correct <= 0.0) return std::nullopt;
  return *mean_u_incorrect / *mean_u_correct;
}

Audit uncertainty_audit(const std::vector<model::DraftPrediction>& drafts, const Sequences& finals,
                        const Sequences& gold) {
  if (drafts.size() != finals.size() || drafts.size() != gold.size())
    throw ContractError("audit inputs have different sentence counts");
  Audit a;
  double u_ok = 0.0, u_bad = 0.0;
  for (std::size_t k = 0; k < drafts.size(); ++k) {
    const auto& d = drafts[k];
    check_aligned(gold[k], d.draft);
    check_aligned(gold[k], finals[k]);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool draft_ok = d.draft[i] == gold[k][i];
      const bool final_ok = finals[k][i] == gold[k][i];
      ++a.tokens;
      if (draft_ok) {
        ++a.draft_correct;
        u_ok += d.uncertainty[i];
      } else {
        u_bad += d.uncertainty[i];
      }
      if (finals[k][i] == d.draft[i])
        ++a.unchanged;
      else if (draft_ok)
        ++a.correct_to_wrong;
      else if (final_ok)
        ++a.wrong_to_correct;
      else
        ++a.wrong_to_wrong;
    }
  }
  if (a.draft_correct) a.mean_u_correct = u_ok / static_cast<double>(a.draft_correct);
  if (a.tokens > a.draft_correct) a.mean_u_incorrect = u_bad / static_cast<double>(a.tokens - a.draft_correct);
  return a;
}

std::vector<double> gamma_grid(std::size_t labels, double step) {
  if (step <= 0.0) throw ContractError("gamma grid step must be positive");
  const double top = std::log(static_cast<double>(labels));
  std::vector<double> g;
  for (std::size_t k = 0;; ++k) {
    const double v = static_cast<double>(k) * step;
    if (v >= top - 1e-12) break;
    g.push_back(v);
  }
  g.push_back(top);
  return g;
}

namespace {

double mixed_f1(const data::TagScheme& scheme, const std::vector<model::DraftPrediction>& drafts,
                const Sequences& refined, const Sequences& gold, double gamma, std::size_t* refined_tokens) {
  SpanCounts c;
  std::size_t taken = 0;
  for (std::size_t k = 0; k < drafts.size(); ++k) {
    const auto mix = decode::threshold_mix(drafts[k].draft, drafts[k].uncertainty, refined[k], gamma);
    for (double u : drafts[k].uncertainty) taken += u > gamma;
    c += count_spans(scheme, gold[k], mix);
  }
  if (refined_tokens) *refined_tokens = taken;
  return c.f1();
}

}  // namespace

GammaSweep gamma_sweep(const data::TagScheme& scheme, const std::vector<model::DraftPrediction>& drafts,
                       const Sequences& refined, const Sequences& gold, std::span<const double> grid) {
  if (drafts.size() != refined.size() || drafts.size() != gold.size())
    throw ContractError("sweep inputs have different sentence counts");
  GammaSweep s;
  double base = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    SweepPoint p;
    p.gamma = grid[k];
    p.f1 = mixed_f1(scheme, drafts, refined, gold, p.gamma, &p.refined_tokens);
    if (k == 0) base = p.f1;
    p.delta = p.f1 - base;
    if (k == 0 || p.f1 > s.best_f1) {
      s.best_f1 = p.f1;
      s.best_gamma = p.gamma;
    }
    s.points.push_back(p);
  }
  s.draft_f1 = mixed_f1(scheme, drafts, refined, gold, std::numeric_limits<double>::infinity(), nullptr);
  return s;
}

namespace {

nlohmann::json counts_json(const SpanCounts& c) {
  return {{"gold", c.gold},
          {"predicted", c.predicted},
          {"correct", c.correct},
          {"precision", c.precision()},
          {"recall", c.recall()},
          {"f1", c.f1()}};
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

nlohmann::json to_json(const EvalReport& r, const data::TagScheme& scheme) {
  nlohmann::json j = counts_json(r.spans);
  j["tokens"] = r.tokens;
  j["token_accuracy"] = r.token_accuracy();
  for (const auto& [type, c] : r.per_type) j["per_type"][type] = counts_json(c);
  for (const auto& b : r.buckets) {
    auto bj = counts_json(b.spans);
    bj["lo"] = b.lo;
    bj["hi"] = b.hi;
    bj["sentences"] = b.sentences;
    j["buckets"].push_back(bj);
  }
  j["labels"] = scheme.labels();
  j["confusion"] = r.confusion;
  return j;
}

nlohmann::json to_json(const Audit& a) {
  return {{"tokens", a.tokens},
          {"draft_correct", a.draft_correct},
          {"unchanged", a.unchanged},
          {"correct_to_wrong", a.correct_to_wrong},
          {"wrong_to_correct", a.wrong_to_correct},
          {"wrong_to_wrong", a.wrong_to_wrong},
          {"mean_u_correct", optional_json(a.mean_u_correct)},
          {"mean_u_incorrect", optional_json(a.mean_u_incorrect)},
          {"ratio", optional_json(a.ratio())}};
}

nlohmann::json to_json(const GammaSweep& s) {
  nlohmann::json j = {{"best_gamma", s.best_gamma}, {"best_f1", s.best_f1}, {"draft_f1", s.draft_f1}};
  j["points"] = nlohmann::json::array();
  for (const auto& p : s.points)
    j["points"].push_back({{"gamma", p.gamma}, {"f1", p.f1}, {"delta", p.delta}, {"refined_tokens", p.refined_tokens}});
  return j;
}

}  // namespace uanet::eval
