#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uanet/autodiff/tensor.hpp"
#include "uanet/model/encoder.hpp"
#include "uanet/model/refiner.hpp"

namespace uanet::train {

using ad::Tensor;

// Σ_i -log softmax(logits_i)[gold_i], not normalized.
Tensor token_nll_sum(const Tensor& logits, std::span<const std::size_t> gold);

// (1 - r) / (2N) · Σ ||θ||² over the given tensors.
Tensor weight_penalty(std::span<const Tensor> params, double r, std::size_t n_train);

// One stage-one training item: a sentence with its gold ids and the masks
// drawn for this step.
struct Stage1Item {
  const model::EncodedSentence* sentence = nullptr;
  std::span<const std::size_t> gold;
  model::SequenceMasks masks;
  std::vector<double> embed_mask;  // empty = none
};

// Mean per-token NLL over the batch (CRF NLL over the token count when the
// encoder has transitions) plus the weight penalty with r = the recurrent
// dropout rate.
Tensor loss_stage1(const model::Encoder& enc, std::span<const Stage1Item> batch, std::size_t n_train);

struct Stage2Item {
  const Tensor* repr = nullptr;  // frozen [n x d] token representations
  std::span<const std::size_t> drafts;
  std::span<const std::size_t> gold;
};

// Cross entropy of the refined distributions, mean over the batch tokens.
Tensor loss_stage2(const model::Refiner& ref, std::span<const Stage2Item> batch);

}  // namespace uanet::train
