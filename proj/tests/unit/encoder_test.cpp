#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"
#include "uanet/model/encoder.hpp"
#include "uanet/model/mc.hpp"

using namespace uanet;
using namespace uanet::model;
using ad::Tensor;

namespace {

Tensor randn(ad::Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(v));
}

void randomize(ad::ParamStore& ps, Rng& rng, double scale = 0.5) {
  for (auto& [name, t] : ps)
    for (auto& x : t.data()) x = rng.uniform(-scale, scale);
}

// Sentence over a small fixed vocabulary: word ids 1..6, char ids 1..5.
EncodedSentence toy_sentence(std::size_t n, Rng& rng) {
  EncodedSentence s;
  for (std::size_t i = 0; i < n; ++i) {
    s.words.push_back(1 + rng.below(6));
    std::vector<std::size_t> cs(1 + rng.below(4));
    for (auto& c : cs) c = 1 + rng.below(5);
    s.chars.push_back(cs);
  }
  return s;
}

Encoder toy_encoder(double r, std::uint64_t seed = 5, std::size_t labels = 4) {
  EncoderConfig cfg;
  cfg.word_dim = 4;
  cfg.char_dim = 3;
  cfg.char_filters = 3;
  cfg.hidden = 5;
  cfg.recurrent_dropout = r;
  Encoder enc(cfg, 7, 6, labels);
  Rng rng(seed);
  randomize(enc.params(), rng);
  return enc;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST(CharCnn, SingleCharIsCentreTapPlusBias) {
  Rng rng(1);
  Tensor table = randn({5, 3}, rng), filters = randn({9, 2}, rng), bias = randn({1, 2}, rng);
  auto out = encode_chars(table, filters, bias, {{3}});
  ASSERT_EQ(out.shape(), (ad::Shape{1, 2}));
  for (std::size_t f = 0; f < 2; ++f) {
    double expect = bias.at(0, f);
    for (std::size_t k = 0; k < 3; ++k) expect += table.at(3, k) * filters.at(3 + k, f);
    EXPECT_NEAR(out.at(0, f), expect, 1e-15);
  }
}

TEST(CharCnn, MatchesNaiveConvolution) {
  Rng rng(2);
  Tensor table = randn({6, 3}, rng), filters = randn({9, 4}, rng), bias = randn({1, 4}, rng);
  const std::vector<std::size_t> tok = {2, 5, 1, 4};
  auto out = encode_chars(table, filters, bias, {tok});
  for (std::size_t f = 0; f < 4; ++f) {
    double best = -1e300;
    for (std::size_t t = 0; t < tok.size(); ++t) {
      double v = bias.at(0, f);
      for (int w = -1; w <= 1; ++w) {
        const long p = static_cast<long>(t) + w;
        if (p < 0 || p >= static_cast<long>(tok.size())) continue;
        for (std::size_t k = 0; k < 3; ++k) v += table.at(tok[p], k) * filters.at((w + 1) * 3 + k, f);
      }
      best = std::max(best, v);
    }
    EXPECT_NEAR(out.at(0, f), best, 1e-12);
  }
}

TEST(CharCnn, PaddingDoesNotLeakAcrossTokens) {
  Rng rng(3);
  Tensor table = randn({6, 3}, rng), filters = randn({9, 4}, rng), bias = randn({1, 4}, rng);
  auto alone = encode_chars(table, filters, bias, {{2, 5}});
  auto inside = encode_chars(table, filters, bias, {{1, 1, 1}, {2, 5}, {4}});
  for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(alone.at(0, f), inside.at(1, f));
  EXPECT_THROW(encode_chars(table, filters, bias, {{}}), ContractError);
}

TEST(VlstmStep, OnesMaskEqualsStandardLstm) {
  Rng rng(4);
  LstmWeights w{randn({3, 8}, rng), randn({2, 8}, rng), randn({1, 8}, rng)};
  Tensor x = randn({1, 3}, rng);
  LstmState prev{randn({1, 2}, rng), randn({1, 2}, rng)};
  auto masked = vlstm_step(x, prev, MaskPair{{1, 1, 1}, {1, 1}}, w);
  auto plain = vlstm_step(x, prev, MaskPair{}, w);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(masked.h.at(0, k), plain.h.at(0, k));
    EXPECT_EQ(masked.c.at(0, k), plain.c.at(0, k));
  }
  // Textbook LSTM on the same weights.
  for (std::size_t k = 0; k < 2; ++k) {
    double z[4];
    for (std::size_t gate = 0; gate < 4; ++gate) {
      const std::size_t col = gate * 2 + k;
      z[gate] = w.b.at(0, col);
      for (std::size_t p = 0; p < 3; ++p) z[gate] += x.at(0, p) * w.wx.at(p, col);
      for (std::size_t p = 0; p < 2; ++p) z[gate] += prev.h.at(0, p) * w.wh.at(p, col);
    }
    const double c = std::tanh(z[0]) * sigmoid(z[1]) + prev.c.at(0, k) * sigmoid(z[2]);
    EXPECT_NEAR(plain.c.at(0, k), c, 1e-14);
    EXPECT_NEAR(plain.h.at(0, k), sigmoid(z[3]) * std::tanh(c), 1e-14);
  }
}

TEST(VlstmStep, ZeroWeightsGiveZeroState) {
  LstmWeights w{Tensor::zeros({3, 8}), Tensor::zeros({2, 8}), Tensor::zeros({1, 8})};
  LstmState s{Tensor::zeros({1, 2}), Tensor::zeros({1, 2})};
  for (int t = 0; t < 3; ++t) s = vlstm_step(Tensor::from({1, 3}, {1, -2, 3}), s, MaskPair{}, w);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(s.h.at(0, k), 0.0);
    EXPECT_EQ(s.c.at(0, k), 0.0);
  }
}

TEST(VlstmStep, HandSetTwoDimStep) {
  LstmWeights w{Tensor::from({2, 8}, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8,  //
                                      0.05, 0.15, -0.25, 0.35, 0.45, -0.55, 0.65, 0.75}),
                Tensor::from({2, 8}, {0.2, 0.1, -0.1, 0.3, 0.2, -0.3, 0.1, 0.4,  //
                                      -0.2, 0.5, 0.2, -0.1, 0.3, 0.1, -0.4, 0.2}),
                Tensor::from({1, 8}, {0.01, -0.02, 0.03, 0.04, 1.0, 1.0, -0.05, 0.06})};
  LstmState prev{Tensor::from({1, 2}, {0.1, 0.2}), Tensor::from({1, 2}, {0.3, -0.4})};
  auto s = vlstm_step(Tensor::from({1, 2}, {0.5, -1.0}), prev, MaskPair{{2.0, 0.0}, {0.0, 2.0}}, w);
  EXPECT_NEAR(s.h.at(0, 0), 0.13017578668886026, 1e-12);
  EXPECT_NEAR(s.h.at(0, 1), -0.11370480380003843, 1e-12);
  EXPECT_NEAR(s.c.at(0, 0), 0.21309279309350512, 1e-12);
  EXPECT_NEAR(s.c.at(0, 1), -0.3469861319249424, 1e-12);
}

TEST(VlstmStep, ShapeMismatchIsContractError) {
  LstmWeights w{Tensor::zeros({3, 8}), Tensor::zeros({2, 8}), Tensor::zeros({1, 8})};
  LstmState s{Tensor::zeros({1, 2}), Tensor::zeros({1, 2})};
  EXPECT_THROW(vlstm_step(Tensor::zeros({1, 4}), s, MaskPair{}, w), ContractError);
}

TEST(MaskLocking, ReplayIsBitExactAndStepwiseMatches) {
  Rng rng(6);
  LstmWeights w{randn({3, 16}, rng), randn({4, 16}, rng), randn({1, 16}, rng)};
  Tensor x = randn({7, 3}, rng);
  auto masks = sample_mask_pair(3, 4, 0.25, rng);
  auto a = run_direction(x, masks, w, false);
  auto b = run_direction(x, masks, w, false);
  LstmState s{Tensor::zeros({1, 4}), Tensor::zeros({1, 4})};
  for (std::size_t t = 0; t < 7; ++t) {
    s = vlstm_step(ad::slice_rows(x, t, 1), s, masks, w);
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(a.at(t, k), b.at(t, k));
      EXPECT_EQ(a.at(t, k), s.h.at(0, k));
    }
  }
}

// Mutation check: resampling the masks at every step (the non-variational
// scheme) must produce different hidden states.
TEST(MaskLocking, PerStepResamplingDiffers) {
  Rng rng(7);
  LstmWeights w{randn({3, 16}, rng), randn({4, 16}, rng), randn({1, 16}, rng)};
  Tensor x = randn({7, 3}, rng);
  Rng mask_rng(8);
  auto locked = sample_mask_pair(3, 4, 0.25, mask_rng);
  auto ref = run_direction(x, locked, w, false);
  Rng step_rng(8);
  LstmState s{Tensor::zeros({1, 4}), Tensor::zeros({1, 4})};
  double diff = 0.0;
  for (std::size_t t = 0; t < 7; ++t) {
    auto m = sample_mask_pair(3, 4, 0.25, step_rng);
    s = vlstm_step(ad::slice_rows(x, t, 1), s, m, w);
    for (std::size_t k = 0; k < 4; ++k) diff += std::abs(s.h.at(0, k) - ref.at(t, k));
  }
  EXPECT_GT(diff, 1e-3);
}

TEST(MaskSampling, ScaledBernoulli) {
  Rng rng(9);
  auto m = dropout_mask(20000, 0.25, rng);
  std::size_t zeros = 0;
  for (double v : m) {
    if (v == 0.0) ++zeros;
    else EXPECT_DOUBLE_EQ(v, 1.0 / 0.75);
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 20000.0, 0.25, 0.02);
  for (double v : dropout_mask(10, 0.0, rng)) EXPECT_EQ(v, 1.0);
}

TEST(Bidirectional, ReversedSentenceWithSwappedDirectionsMirrors) {
  auto enc = toy_encoder(0.25);
  Rng rng(10);
  auto s = toy_sentence(6, rng);
  auto masks = sample_masks(enc.config().input_dim(), enc.config().hidden, 0.25, rng);
  auto pass = enc.forward(s, masks);

  auto swapped = enc.clone();
  for (const char* part : {".wx", ".wh", ".b"}) {
    auto f = swapped.params().get(std::string("encoder.fwd") + part).data();
    auto b = swapped.params().get(std::string("encoder.bwd") + part).data();
    std::swap_ranges(f.begin(), f.end(), b.begin());
  }
  EncodedSentence rev{{s.words.rbegin(), s.words.rend()}, {s.chars.rbegin(), s.chars.rend()}};
  auto mirrored = swapped.forward(rev, SequenceMasks{masks.backward, masks.forward});
  const std::size_t n = 6, h = enc.config().hidden;
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < h; ++k) {
      EXPECT_EQ(pass.hidden.at(t, k), mirrored.hidden.at(n - 1 - t, h + k));
      EXPECT_EQ(pass.hidden.at(t, h + k), mirrored.hidden.at(n - 1 - t, k));
    }
}

TEST(Entropy, KnownValues) {
  std::vector<double> uniform(5, 0.2);
  EXPECT_NEAR(entropy(uniform), std::log(5.0), 1e-12);
  EXPECT_EQ(entropy(std::vector<double>{0, 1, 0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.7, 0.2, 0.1}), 0.8018185525433372, 1e-12);
}

TEST(Entropy, BoundedOnRandomSimplexPoints) {
  Rng rng(11);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t c = 2 + rng.below(20);
    std::vector<double> p(c);
    double s = 0.0;
    for (auto& v : p) s += v = -std::log(1.0 - rng.uniform());
    for (auto& v : p) v /= s;
    const double u = entropy(p);
    ASSERT_GE(u, 0.0);
    ASSERT_LE(u, std::log(static_cast<double>(c)) + 1e-12);
  }
}

TEST(McForward, ZeroRateMakesSamplesIdentical) {
  auto enc = toy_encoder(0.0);
  Rng rng(12);
  auto s = toy_sentence(5, rng);
  auto p0 = sample_pass(enc, s, sample_seed(3, 0));
  for (std::size_t j = 1; j < 8; ++j) EXPECT_EQ(sample_pass(enc, s, sample_seed(3, j)), p0);
  auto d = mc_forward(enc, s, 8, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    auto single = std::span<const double>(p0).subspan(i * 4, 4);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(d.row(i)[c], single[c], 1e-15);
    EXPECT_NEAR(d.uncertainty[i], entropy(single), 1e-12);
  }
}

TEST(McForward, SingleSampleIsOnePass) {
  auto enc = toy_encoder(0.3);
  Rng rng(13);
  auto s = toy_sentence(4, rng);
  auto d = mc_forward(enc, s, 1, 77);
  EXPECT_EQ(d.probs, sample_pass(enc, s, sample_seed(77, 0)));
}

TEST(McForward, InvariantsOfPrediction) {
  auto enc = toy_encoder(0.25);
  Rng rng(14);
  auto s = toy_sentence(6, rng);
  auto d = mc_forward(enc, s, 8, 1);
  for (std::size_t i = 0; i < 6; ++i) {
    double sum = 0.0;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      sum += d.row(i)[c];
      if (d.row(i)[c] > d.row(i)[arg]) arg = c;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(d.draft[i], arg);
    EXPECT_GE(d.uncertainty[i], 0.0);
    EXPECT_LE(d.uncertainty[i], std::log(4.0) + 1e-12);
  }
}

TEST(McForward, ParallelMatchesSerialBitForBit) {
  auto enc = toy_encoder(0.25);
  Rng rng(15);
  auto s = toy_sentence(9, rng);
  auto ref = mc_forward(enc, s, 8, 42);
  for (int workers : {1, 2, 4}) {
    auto par = mc_forward_parallel(enc, s, 8, 42, workers);
    EXPECT_EQ(par.probs, ref.probs);
    EXPECT_EQ(par.uncertainty, ref.uncertainty);
  }
  std::vector<EncodedSentence> corpus = {s, toy_sentence(3, rng), toy_sentence(5, rng)};
  auto one = mc_forward_corpus(enc, corpus, 4, 9, 1);
  auto many = mc_forward_corpus(enc, corpus, 4, 9, 3);
  for (std::size_t k = 0; k < corpus.size(); ++k) EXPECT_EQ(one[k].probs, many[k].probs);
}

TEST(McForward, VarianceShrinksWithMoreSamples) {
  auto enc = toy_encoder(0.25, 21);
  Rng rng(16);
  auto s = toy_sentence(5, rng);
  auto spread = [&](std::size_t m) {
    const std::size_t reps = 40;
    std::vector<std::vector<double>> runs;
    for (std::size_t k = 0; k < reps; ++k) runs.push_back(mc_forward(enc, s, m, 1000 + k).probs);
    double total = 0.0;
    for (std::size_t e = 0; e < runs[0].size(); ++e) {
      double mean = 0.0, sq = 0.0;
      for (auto& r : runs) mean += r[e];
      mean /= reps;
      for (auto& r : runs) sq += (r[e] - mean) * (r[e] - mean);
      total += sq / (reps - 1);
    }
    return total;
  };
  const double v2 = spread(2), v32 = spread(32);
  EXPECT_GT(v2, 0.0);
  EXPECT_LT(v32, 0.5 * v2);
}

TEST(McForward, DraftDumpFormat) {
  data::TagScheme scheme = data::TagScheme::bioes({"PER"});
  std::vector<data::Sentence> sents = {{{"Ann", "ran"}, {4, 0}}};
  DraftPrediction d = summarize({0.1, 0.1, 0.1, 0.1, 0.6, 1, 0, 0, 0, 0}, 5);
  std::ostringstream out;
  write_draft_dump(out, sents, {d}, scheme);
  const double u = entropy(std::vector<double>{0.1, 0.1, 0.1, 0.1, 0.6});
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", u);
  EXPECT_EQ(out.str(), std::string("Ann S-PER S-PER ") + buf + "\nran O O 0.000000\n\n");
}
