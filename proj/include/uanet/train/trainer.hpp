#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/data/conll.hpp"
#include "uanet/eval/metrics.hpp"
#include "uanet/model/tagger.hpp"
#include "uanet/train/optim.hpp"

namespace uanet::train {

struct TrainConfig {
  std::size_t stage1_epochs = 30;
  std::size_t stage2_epochs = 20;
  std::size_t batch_size = 10;
  double sgd_lr = 0.015;
  double sgd_decay = 0.05;
  AdamConfig adam;
  double clip_norm = 5.0;  // 0 disables
  std::size_t patience = 5;
  // Chance of replacing a singleton training word by the unknown id.
  double unk_replace = 0.5;
  // MC samples behind the phase-B drafts and the inference default.
  std::size_t samples = 8;
  double gamma_step = 0.05;
  // Alternate one epoch of each stage instead of running them in sequence.
  bool joint = false;
  int workers = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainSummary {
  double dev_token_accuracy = 0.0;  // stage one, mask-free
  std::size_t stage1_best_epoch = 0;
  std::size_t stage2_best_epoch = 0;
  eval::GammaSweep sweep;  // dev
};

using LogSink = std::function<void(const nlohmann::json&)>;

// Two-phase schedule on an initialized tagger. Returns the dev-selected
// networks with the tuned Γ. Throws NumericalError on a non-finite loss.
model::Tagger train(const TrainConfig& cfg, model::Tagger init, const std::vector<data::Sentence>& train_set,
                    const std::vector<data::Sentence>& dev_set, const LogSink& log = {},
                    TrainSummary* summary = nullptr);

}  // namespace uanet::train
