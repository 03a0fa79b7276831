#include "uanet/train/losses.hpp"

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"
#include "uanet/decode/decoders.hpp"

namespace uanet::train {

using namespace uanet::ad;

Tensor token_nll_sum(const Tensor& logits, std::span<const std::size_t> gold) {
  if (gold.size() != logits.rows()) throw ContractError("gold length differs from logits rows");
  return scale(sum(pick(log_softmax_rows(logits), gold)), -1.0);
}

Tensor weight_penalty(std::span<const Tensor> params, double r, std::size_t n_train) {
  if (n_train == 0) throw ContractError("penalty needs a positive training size");
  std::vector<Tensor> terms;
  for (const auto& p : params) terms.push_back(sum_squares(p));
  Tensor total = terms.front();
  for (std::size_t k = 1; k < terms.size(); ++k) total = add(total, terms[k]);
  return scale(total, (1.0 - r) / (2.0 * static_cast<double>(n_train)));
}

Tensor loss_stage1(const model::Encoder& enc, std::span<const Stage1Item> batch, std::size_t n_train) {
  if (batch.empty()) throw ContractError("empty batch");
  std::size_t tokens = 0;
  Tensor total;
  for (const auto& item : batch) {
    const auto pass = enc.forward(*item.sentence, item.masks, item.embed_mask);
    const Tensor nll = enc.config().crf
                           ? decode::crf_nll(pass.logits, enc.params().get("encoder.transitions"), item.gold)
                           : token_nll_sum(pass.logits, item.gold);
    total = total.defined() ? add(total, nll) : nll;
    tokens += item.gold.size();
  }
  const auto pen = enc.penalized();
  return add(scale(total, 1.0 / static_cast<double>(tokens)),
             weight_penalty(pen, enc.config().recurrent_dropout, n_train));
}

Tensor loss_stage2(const model::Refiner& ref, std::span<const Stage2Item> batch) {
  if (batch.empty()) throw ContractError("empty batch");
  std::size_t tokens = 0;
  Tensor total;
  for (const auto& item : batch) {
    const Tensor nll = token_nll_sum(ref.logits(*item.repr, item.drafts), item.gold);
    total = total.defined() ? add(total, nll) : nll;
    tokens += item.gold.size();
  }
  return scale(total, 1.0 / static_cast<double>(tokens));
}

}  // namespace uanet::train
