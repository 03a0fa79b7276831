#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "uanet/core/error.hpp"
#include "uanet/core/rng.hpp"
#include "uanet/eval/bench.hpp"
#include "uanet/eval/metrics.hpp"
#include "uanet/eval/report.hpp"

using namespace uanet;
using namespace uanet::eval;

namespace {

const auto kScheme = data::TagScheme::bioes({"PER", "LOC"});

std::vector<std::size_t> ids(std::vector<std::string> labels) { return kScheme.encode(labels); }

// Ten sentences; counts were tallied by hand.
struct HandFixture {
  Sequences gold, pred;
  HandFixture() {
    auto add = [&](std::vector<std::string> g, std::vector<std::string> p) {
      gold.push_back(ids(std::move(g)));
      pred.push_back(ids(std::move(p)));
    };
    add({"S-PER", "O"}, {"S-PER", "O"});
    add({"B-LOC", "E-LOC", "O"}, {"B-LOC", "E-LOC", "O"});
    add({"S-LOC"}, {"S-PER"});
    add({"O", "O"}, {"S-PER", "O"});
    add({"B-PER", "I-PER", "E-PER"}, {"B-PER", "E-PER", "O"});
    add({"S-PER", "S-LOC"}, {"S-PER", "S-LOC"});
    add({"O"}, {"O"});
    add({"B-LOC", "E-LOC"}, {"O", "O"});
    add({"S-PER", "O", "S-PER"}, {"S-PER", "O", "O"});
    add({"O", "B-PER", "E-PER"}, {"O", "B-PER", "E-PER"});
  }
};

model::DraftPrediction draft_with(std::vector<std::size_t> draft, std::vector<double> u, std::size_t labels) {
  model::DraftPrediction d;
  d.labels = labels;
  d.probs.assign(draft.size() * labels, 1.0 / labels);
  d.draft = std::move(draft);
  d.uncertainty = std::move(u);
  return d;
}

}  // namespace

TEST(SpanF1, HandFixture) {
  HandFixture fx;
  const auto r = span_f1(kScheme, fx.gold, fx.pred);
  EXPECT_EQ(r.spans.gold, 10u);
  EXPECT_EQ(r.spans.predicted, 9u);
  EXPECT_EQ(r.spans.correct, 6u);
  EXPECT_NEAR(r.precision(), 6.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.recall(), 0.6, 1e-15);
  EXPECT_NEAR(r.f1(), 12.0 / 19.0, 1e-15);
  EXPECT_EQ(r.tokens, 22u);
  EXPECT_EQ(r.correct_tokens, 15u);
  EXPECT_EQ(r.per_type.at("PER").gold, 6u);
  EXPECT_EQ(r.per_type.at("PER").predicted, 7u);
  EXPECT_EQ(r.per_type.at("PER").correct, 4u);
  EXPECT_EQ(r.per_type.at("LOC").gold, 4u);
  EXPECT_EQ(r.per_type.at("LOC").predicted, 2u);
  EXPECT_EQ(r.per_type.at("LOC").correct, 2u);
  ASSERT_EQ(r.buckets.size(), 5u);
  EXPECT_EQ(r.buckets[0].sentences, 10u);
  EXPECT_EQ(r.buckets[0].spans.correct, 6u);
  std::size_t diag = 0, all = 0;
  for (std::size_t g = 0; g < r.confusion.size(); ++g)
    for (std::size_t p = 0; p < r.confusion[g].size(); ++p) {
      all += r.confusion[g][p];
      if (g == p) diag += r.confusion[g][p];
    }
  EXPECT_EQ(all, 22u);
  EXPECT_EQ(diag, 15u);
}

TEST(SpanF1, NoPredictionsGivesZeroNotNan) {
  Sequences gold = {ids({"S-PER", "O"})}, pred = {ids({"O", "O"})};
  const auto r = span_f1(kScheme, gold, pred);
  EXPECT_EQ(r.precision(), 0.0);
  EXPECT_EQ(r.recall(), 0.0);
  EXPECT_EQ(r.f1(), 0.0);
  const auto empty = span_f1(kScheme, {}, {});
  EXPECT_EQ(empty.f1(), 0.0);
  EXPECT_EQ(empty.token_accuracy(), 0.0);
}

TEST(SpanF1, MismatchIsContractError) {
  Sequences gold = {ids({"S-PER", "O"})}, pred = {ids({"O"})};
  EXPECT_THROW(span_f1(kScheme, gold, pred), ContractError);
  EXPECT_THROW(span_f1(kScheme, gold, {}), ContractError);
}

TEST(SpanF1, RestrictedToPositions) {
  const auto g = ids({"S-PER", "O", "B-LOC", "E-LOC"}), p = ids({"S-PER", "O", "S-LOC", "O"});
  const std::vector<std::size_t> at = {3};
  const auto c = count_spans_at(kScheme, g, p, at);
  EXPECT_EQ(c.gold, 1u);
  EXPECT_EQ(c.predicted, 0u);
  const std::vector<std::size_t> at0 = {0, 2};
  const auto d = count_spans_at(kScheme, g, p, at0);
  EXPECT_EQ(d.gold, 2u);
  EXPECT_EQ(d.predicted, 2u);
  EXPECT_EQ(d.correct, 1u);
}

TEST(Audit, FlipsPartitionChangedTokens) {
  Rng rng(3);
  std::vector<model::DraftPrediction> drafts;
  Sequences finals, gold;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<std::size_t> d(n), f(n), g(n);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = rng.below(3);
      f[i] = rng.below(3);
      g[i] = rng.below(3);
      u[i] = rng.uniform(0.0, std::log(3.0));
    }
    drafts.push_back(draft_with(d, u, 3));
    finals.push_back(f);
    gold.push_back(g);
  }
  const auto a = uncertainty_audit(drafts, finals, gold);
  std::size_t tokens = 0, unchanged = 0, dc = 0, c2w = 0, w2c = 0, w2w = 0;
  double su_c = 0, su_w = 0;
  for (std::size_t k = 0; k < drafts.size(); ++k)
    for (std::size_t i = 0; i < gold[k].size(); ++i) {
      const auto d = drafts[k].draft[i], f = finals[k][i], g = gold[k][i];
      ++tokens;
      (d == g ? su_c : su_w) += drafts[k].uncertainty[i];
      dc += d == g;
      if (d == f) ++unchanged;
      else if (d == g) ++c2w;
      else if (f == g) ++w2c;
      else ++w2w;
    }
  EXPECT_EQ(a.tokens, tokens);
  EXPECT_EQ(a.draft_correct, dc);
  EXPECT_EQ(a.unchanged, unchanged);
  EXPECT_EQ(a.correct_to_wrong, c2w);
  EXPECT_EQ(a.wrong_to_correct, w2c);
  EXPECT_EQ(a.wrong_to_wrong, w2w);
  EXPECT_EQ(a.unchanged + a.correct_to_wrong + a.wrong_to_correct + a.wrong_to_wrong, a.tokens);
  ASSERT_TRUE(a.ratio());
  EXPECT_NEAR(*a.ratio(), (su_w / (tokens - dc)) / (su_c / dc), 1e-12);
}

TEST(Audit, AllCorrectHasNoRatio) {
  const std::vector<model::DraftPrediction> d = {draft_with({0, 1}, {0.1, 0.2}, 2)};
  const auto a = uncertainty_audit(d, {{0, 1}}, {{0, 1}});
  EXPECT_FALSE(a.mean_u_incorrect);
  EXPECT_FALSE(a.ratio());
}

TEST(GammaGrid, StepsThenLogC) {
  const auto g = gamma_grid(9, 0.5);
  const std::vector<double> want = {0.0, 0.5, 1.0, 1.5, 2.0, std::log(9.0)};
  ASSERT_EQ(g.size(), want.size());
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_DOUBLE_EQ(g[k], want[k]);
  EXPECT_EQ(gamma_grid(1, 0.1), std::vector<double>{0.0});
  EXPECT_THROW(gamma_grid(3, 0.0), ContractError);
}

TEST(GammaSweep, EndpointsAreRefinedAndDraft) {
  Rng rng(4);
  std::vector<model::DraftPrediction> drafts;
  Sequences refined, gold, draft_only;
  const std::size_t C = kScheme.size();
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<std::size_t> d(n), r(n), g(n);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = rng.below(C);
      r[i] = rng.below(C);
      g[i] = rng.bernoulli(0.5) ? r[i] : rng.below(C);
      u[i] = rng.uniform(1e-6, std::log(static_cast<double>(C)) * 0.999);
    }
    draft_only.push_back(d);
    drafts.push_back(draft_with(d, u, C));
    refined.push_back(r);
    gold.push_back(g);
  }
  const auto grid = gamma_grid(C, 0.1);
  const auto s = gamma_sweep(kScheme, drafts, refined, gold, grid);
  ASSERT_EQ(s.points.size(), grid.size());
  EXPECT_DOUBLE_EQ(s.points.front().f1, span_f1(kScheme, gold, refined).f1());
  EXPECT_DOUBLE_EQ(s.points.back().f1, span_f1(kScheme, gold, draft_only).f1());
  EXPECT_DOUBLE_EQ(s.draft_f1, span_f1(kScheme, gold, draft_only).f1());
  EXPECT_EQ(s.points.back().refined_tokens, 0u);
  EXPECT_EQ(s.points.front().delta, 0.0);
  double best = 0.0;
  for (const auto& p : s.points) best = std::max(best, p.f1);
  EXPECT_EQ(s.best_f1, best);
  for (const auto& p : s.points) {
    if (p.f1 == best) {
      EXPECT_EQ(s.best_gamma, p.gamma);
      break;
    }
  }
  for (std::size_t k = 1; k < s.points.size(); ++k)
    EXPECT_LE(s.points[k].refined_tokens, s.points[k - 1].refined_tokens);
}

TEST(Bench, SlopeOfPowerLaw) {
  const std::vector<double> x = {1, 2, 4, 8}, y = {3, 12, 48, 192};
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
  EXPECT_THROW(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), ContractError);
}

TEST(Bench, EmptyConfigGivesEmptyReport) {
  BenchConfig cfg;
  cfg.label_sizes.clear();
  cfg.sentences = 0;
  const auto r = decode_throughput(cfg);
  EXPECT_TRUE(r.empty());
  std::ostringstream out;
  write_bench_text(out, r);
  EXPECT_EQ(out.str(), "no measurements\n");
}

TEST(Bench, SingleLabelRuns) {
  BenchConfig cfg;
  cfg.label_sizes = {1, 2};
  cfg.labels = 1;
  cfg.sentences = 5;
  cfg.repeats = 1;
  cfg.min_seconds = 0.0;
  const auto r = decode_throughput(cfg);
  ASSERT_FALSE(r.by_length.empty());
  for (const auto& p : r.by_labels) {
    EXPECT_GT(p.tokens, 0u);
    EXPECT_TRUE(std::isfinite(p.ns_per_token));
  }
  EXPECT_TRUE(std::isfinite(r.viterbi_exponent));
  std::ostringstream csv;
  write_bench_csv(csv, r);
  EXPECT_EQ(csv.str().rfind("sweep,decoder,labels", 0), 0u);
}

TEST(Bench, MedianTimeCountsReps) {
  std::size_t calls = 0, reps = 0;
  median_time([&] { ++calls; }, 3, 0.0, &reps);
  EXPECT_GE(reps, 1u);
  EXPECT_GE(calls, 3u * reps);
}
