#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/autodiff/params.hpp"
#include "uanet/autodiff/tensor.hpp"
#include "uanet/core/rng.hpp"

namespace uanet::model {

using ad::Tensor;

struct RefinerConfig {
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t head_dim = 16;
  std::size_t ff_dim = 64;
  std::size_t max_len = 512;

  void validate() const;
};

void to_json(nlohmann::json& j, const RefinerConfig& c);
void from_json(const nlohmann::json& j, RefinerConfig& c);

// Alternating sin/cos encoding of a signed offset: entry 2k is
// sin(offset / 10000^(2k/d)), entry 2k+1 the matching cosine.
std::vector<double> sinusoid(long offset, std::size_t dim);

// Rows for offsets n-1, n-2, ..., -(n-1): the layout rel_shift expects.
Tensor relative_table(std::size_t n, std::size_t dim);

// Per-head weights of one layer, already sliced.
struct HeadWeights {
  Tensor wq, wk, wkr;  // [d x dh]
  Tensor u, v;         // [1 x dh]
};

// Relative attention logits, already scaled by 1/sqrt(dh):
//   (q_i + u)·k_j + (q_i + v)·(W_kR R_{i-j}),  q = Q W_q, k = K W_k.
// Q are the query rows, K the key rows (words for x2x, draft labels for x2l).
Tensor relative_scores(const Tensor& queries, const Tensor& keys, const HeadWeights& w, std::size_t max_len);

// Output of one layer for both streams.
struct StreamPair {
  Tensor x;  // [n x d] word stream
  Tensor l;  // [n x d] label stream
};

// Two-stream refiner over frozen token representations and draft-label
// embeddings. Row `labels` of the label table is a reserved mask symbol.
class Refiner {
 public:
  Refiner(const RefinerConfig& cfg, std::size_t model_dim, std::size_t labels);

  void initialize(Rng& rng);
  Refiner clone() const;

  const RefinerConfig& config() const { return cfg_; }
  std::size_t model_dim() const { return dim_; }
  std::size_t labels() const { return labels_; }
  std::size_t mask_symbol() const { return labels_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  HeadWeights head(std::size_t layer, std::size_t h, bool label_stream) const;

  // A^{x2x} and A^{x2l} for one head of one layer.
  Tensor scores_x2x(const Tensor& ex, std::size_t layer, std::size_t h) const;
  Tensor scores_x2l(const Tensor& ex, const Tensor& ey, std::size_t layer, std::size_t h) const;

  Tensor embed_labels(std::span<const std::size_t> drafts) const;
  StreamPair layer(const StreamPair& in, std::size_t layer) const;

  // Pre-softmax output scores [n x C] from the concatenated final streams.
  Tensor logits(const Tensor& ex, std::span<const std::size_t> drafts) const;
  // Refined distributions [n x C].
  Tensor predict(const Tensor& ex, std::span<const std::size_t> drafts) const;

 private:
  std::string key(std::size_t layer, const std::string& name) const;

  RefinerConfig cfg_;
  std::size_t dim_;
  std::size_t labels_;
  ad::ParamStore params_;
};

// Refined distributions with their argmax labels.
struct RefinedPrediction {
  std::size_t labels = 0;
  std::vector<double> probs;  // [n x C]
  std::vector<std::size_t> refined;
  std::size_t size() const { return refined.size(); }
};

// Value-only refiner pass (no recording).
RefinedPrediction refine(const Refiner& r, const Tensor& ex, std::span<const std::size_t> drafts);

}  // namespace uanet::model
