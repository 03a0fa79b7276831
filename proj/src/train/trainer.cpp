#include "uanet/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "uanet/core/error.hpp"
#include "uanet/train/losses.hpp"

namespace uanet::train {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("training.batch_size", "must be positive");
  if (!(sgd_lr > 0.0)) throw ConfigError("training.sgd_lr", "must be > 0");
  if (sgd_decay < 0.0) throw ConfigError("training.sgd_decay", "must be >= 0");
  if (!(adam.lr > 0.0)) throw ConfigError("training.adam.lr", "must be > 0");
  if (adam.beta1 < 0.0 || adam.beta1 >= 1.0) throw ConfigError("training.adam.beta1", "must be in [0, 1)");
  if (adam.beta2 < 0.0 || adam.beta2 >= 1.0) throw ConfigError("training.adam.beta2", "must be in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("training.adam.eps", "must be > 0");
  if (clip_norm < 0.0) throw ConfigError("training.clip_norm", "must be >= 0");
  if (unk_replace < 0.0 || unk_replace > 1.0) throw ConfigError("training.unk_replace", "must be in [0, 1]");
  if (samples == 0) throw ConfigError("training.samples", "must be positive");
  if (!(gamma_step > 0.0)) throw ConfigError("training.gamma_step", "must be > 0");
  if (workers < 1) throw ConfigError("training.workers", "must be at least 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"stage1_epochs", c.stage1_epochs},
       {"stage2_epochs", c.stage2_epochs},
       {"batch_size", c.batch_size},
       {"sgd_lr", c.sgd_lr},
       {"sgd_decay", c.sgd_decay},
       {"adam", {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
       {"clip_norm", c.clip_norm},
       {"patience", c.patience},
       {"unk_replace", c.unk_replace},
       {"samples", c.samples},
       {"gamma_step", c.gamma_step},
       {"joint", c.joint},
       {"workers", c.workers}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.stage1_epochs = j.value("stage1_epochs", c.stage1_epochs);
  c.stage2_epochs = j.value("stage2_epochs", c.stage2_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.sgd_lr = j.value("sgd_lr", c.sgd_lr);
  c.sgd_decay = j.value("sgd_decay", c.sgd_decay);
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    c.adam.lr = a.value("lr", c.adam.lr);
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.eps = a.value("eps", c.adam.eps);
  }
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.patience = j.value("patience", c.patience);
  c.unk_replace = j.value("unk_replace", c.unk_replace);
  c.samples = j.value("samples", c.samples);
  c.gamma_step = j.value("gamma_step", c.gamma_step);
  c.joint = j.value("joint", c.joint);
  c.workers = j.value("workers", c.workers);
}

namespace {

constexpr std::uint64_t kStage1 = 0x7331, kStage2 = 0x7332, kOrder = 0x6f72;

using Clock = std::chrono::steady_clock;

std::string dump_batch(const std::vector<data::Sentence>& corpus, std::span<const std::size_t> ids,
                       const data::TagScheme& scheme) {
  std::ostringstream out;
  for (auto k : ids) {
    out << "# sentence " << k << '\n';
    for (std::size_t i = 0; i < corpus[k].size(); ++i)
      out << corpus[k].tokens[i] << ' ' << scheme.label(corpus[k].gold[i]) << '\n';
    out << '\n';
  }
  return out.str();
}

class Run {
 public:
  Run(const TrainConfig& cfg, model::Tagger& t, const std::vector<data::Sentence>& train,
      const std::vector<data::Sentence>& dev, const LogSink& log)
      : cfg_(cfg), t_(t), train_(train), dev_(dev), log_(log), adam_(cfg.adam), start_(Clock::now()) {
    for (const auto& s : train_) {
      if (!s.labeled()) throw ContractError("training sentences must be labeled");
      train_enc_.push_back(model::encode(t_.vocab, s));
      tokens_ += s.size();
    }
    for (const auto& s : dev_) dev_enc_.push_back(model::encode(t_.vocab, s));
  }

  double stage1_epoch(std::size_t epoch) {
    const double lr = decayed_lr(cfg_.sgd_lr, cfg_.sgd_decay, epoch);
    const auto& ecfg = t_.encoder.config();
    double total = 0.0;
    std::size_t batches = 0;
    for (const auto& ids : batches_of(derive_seed(t_.seed, {kStage1, kOrder, epoch}))) {
      std::vector<model::EncodedSentence> words;
      std::vector<Stage1Item> items;
      words.reserve(ids.size());
      for (auto k : ids) {
        Rng rng(derive_seed(t_.seed, {kStage1, epoch, k}));
        words.push_back(train_enc_[k]);
        for (auto& w : words.back().words)
          if (t_.vocab.singleton(w) && rng.bernoulli(cfg_.unk_replace)) w = data::Vocabulary::kUnk;
        Stage1Item it;
        it.gold = train_[k].gold;
        it.masks = model::sample_masks(ecfg.input_dim(), ecfg.hidden, ecfg.recurrent_dropout, rng);
        it.embed_mask = model::dropout_mask(train_[k].size() * ecfg.input_dim(), ecfg.embed_dropout, rng);
        items.push_back(std::move(it));
      }
      for (std::size_t b = 0; b < items.size(); ++b) items[b].sentence = &words[b];
      ad::Tape tape;
      {
        auto scope = tape.activate();
        const auto loss = loss_stage1(t_.encoder, items, tokens_);
        total += checked(loss.item(), "stage one", ids);
        tape.backward(loss);
      }
      step_clip(t_.encoder.params(), ids, "stage one");
      sgd_step(t_.encoder.params(), lr);
      t_.encoder.params().zero_grad();
      ++batches;
    }
    return batches ? total / static_cast<double>(batches) : 0.0;
  }

  double dev_accuracy() const {
    std::size_t ok = 0, n = 0;
    for (std::size_t k = 0; k < dev_.size(); ++k) {
      const auto p = model::mean_field_forward(t_.encoder, dev_enc_[k]);
      for (std::size_t i = 0; i < p.size(); ++i) ok += p.draft[i] == dev_[k].gold[i];
      n += p.size();
    }
    return n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
  }

  // Frozen token representations and the fixed-seed dev drafts.
  void freeze_encoder() {
    train_repr_.clear();
    dev_repr_.clear();
    ad::Tape::Pause no_record;
    for (const auto& s : train_enc_) train_repr_.push_back(t_.encoder.represent(s));
    for (const auto& s : dev_enc_) dev_repr_.push_back(t_.encoder.represent(s));
    dev_drafts_ = model::mc_forward_corpus(t_.encoder, dev_enc_, cfg_.samples, t_.seed, cfg_.workers);
  }

  double stage2_epoch(std::size_t epoch) {
    const auto drafts =
        model::mc_forward_corpus(t_.encoder, train_enc_, cfg_.samples, derive_seed(t_.seed, {kStage2, epoch}),
                                 cfg_.workers);
    double total = 0.0;
    std::size_t batches = 0;
    for (const auto& ids : batches_of(derive_seed(t_.seed, {kStage2, kOrder, epoch}))) {
      std::vector<Stage2Item> items;
      for (auto k : ids) items.push_back({&train_repr_[k], drafts[k].draft, train_[k].gold});
      ad::Tape tape;
      {
        auto scope = tape.activate();
        const auto loss = loss_stage2(t_.refiner, items);
        total += checked(loss.item(), "stage two", ids);
        tape.backward(loss);
      }
      step_clip(t_.refiner.params(), ids, "stage two");
      adam_.step(t_.refiner.params());
      t_.refiner.params().zero_grad();
      ++batches;
    }
    return batches ? total / static_cast<double>(batches) : 0.0;
  }

  eval::Sequences dev_refined() const {
    eval::Sequences out(dev_.size());
    const auto n = static_cast<long>(dev_.size());
#pragma omp parallel for num_threads(cfg_.workers) schedule(dynamic)
    for (long k = 0; k < n; ++k) out[k] = model::refine(t_.refiner, dev_repr_[k], dev_drafts_[k].draft).refined;
    return out;
  }

  eval::Sequences dev_gold() const {
    eval::Sequences g;
    for (const auto& s : dev_) g.push_back(s.gold);
    return g;
  }

  double dev_refined_f1() const { return eval::span_f1(t_.scheme, dev_gold(), dev_refined()).f1(); }

  eval::GammaSweep sweep() const {
    const auto grid = eval::gamma_grid(t_.scheme.size(), cfg_.gamma_step);
    return eval::gamma_sweep(t_.scheme, dev_drafts_, dev_refined(), dev_gold(), grid);
  }

  void log(nlohmann::json rec) const {
    if (!log_) return;
    rec["elapsed_s"] = std::chrono::duration<double>(Clock::now() - start_).count();
    log_(rec);
  }

 private:
  std::vector<std::vector<std::size_t>> batches_of(std::uint64_t seed) const {
    std::vector<std::size_t> order(train_.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t b = 0; b < order.size(); b += cfg_.batch_size)
      out.emplace_back(order.begin() + b, order.begin() + std::min(order.size(), b + cfg_.batch_size));
    return out;
  }

  double checked(double loss, const char* stage, std::span<const std::size_t> ids) const {
    if (!std::isfinite(loss))
      throw NumericalError(std::string(stage) + " loss is not finite", dump_batch(train_, ids, t_.scheme));
    return loss;
  }

  void step_clip(ad::ParamStore& p, std::span<const std::size_t> ids, const char* stage) const {
    const double norm = clip_grad_norm(p, cfg_.clip_norm);
    if (!std::isfinite(norm))
      throw NumericalError(std::string(stage) + " gradient is not finite", dump_batch(train_, ids, t_.scheme));
  }

  const TrainConfig& cfg_;
  model::Tagger& t_;
  const std::vector<data::Sentence>& train_;
  const std::vector<data::Sentence>& dev_;
  const LogSink& log_;
  Adam adam_;
  Clock::time_point start_;
  std::vector<model::EncodedSentence> train_enc_, dev_enc_;
  std::vector<ad::Tensor> train_repr_, dev_repr_;
  std::vector<model::DraftPrediction> dev_drafts_;
  std::size_t tokens_ = 0;
};

}  // namespace

model::Tagger train(const TrainConfig& cfg, model::Tagger t, const std::vector<data::Sentence>& train_set,
                    const std::vector<data::Sentence>& dev_set, const LogSink& log, TrainSummary* summary) {
  cfg.validate();
  if (train_set.empty() && (cfg.stage1_epochs || cfg.stage2_epochs))
    throw ContractError("training set is empty");
  t.samples = cfg.samples;
  Run run(cfg, t, train_set, dev_set, log);
  TrainSummary sum;

  if (cfg.joint) {
    // Alternating schedule; the last state is kept.
    const std::size_t epochs = std::max(cfg.stage1_epochs, cfg.stage2_epochs);
    for (std::size_t e = 0; e < epochs; ++e) {
      if (e < cfg.stage1_epochs) {
        const double loss = run.stage1_epoch(e);
        run.log({{"phase", "stage1"}, {"epoch", e}, {"loss", loss}, {"dev_accuracy", run.dev_accuracy()}});
      }
      run.freeze_encoder();
      if (e < cfg.stage2_epochs) {
        const double loss = run.stage2_epoch(e);
        run.log({{"phase", "stage2"}, {"epoch", e}, {"loss", loss}, {"dev_refined_f1", run.dev_refined_f1()}});
      }
    }
    if (epochs == 0) run.freeze_encoder();
    sum.stage1_best_epoch = cfg.stage1_epochs;
    sum.stage2_best_epoch = cfg.stage2_epochs;
  } else {
    double best = -1.0;
    std::size_t stale = 0;
    model::Encoder kept = t.encoder.clone();
    for (std::size_t e = 0; e < cfg.stage1_epochs; ++e) {
      const double loss = run.stage1_epoch(e);
      const double acc = run.dev_accuracy();
      run.log({{"phase", "stage1"},
               {"epoch", e},
               {"loss", loss},
               {"lr", decayed_lr(cfg.sgd_lr, cfg.sgd_decay, e)},
               {"dev_accuracy", acc}});
      if (acc > best) {
        best = acc;
        kept = t.encoder.clone();
        sum.stage1_best_epoch = e + 1;
        stale = 0;
      } else if (cfg.patience && ++stale >= cfg.patience) {
        break;
      }
    }
    t.encoder = std::move(kept);

    run.freeze_encoder();
    best = -1.0;
    stale = 0;
    model::Refiner kept_ref = t.refiner.clone();
    for (std::size_t e = 0; e < cfg.stage2_epochs; ++e) {
      const double loss = run.stage2_epoch(e);
      const double f1 = run.dev_refined_f1();
      run.log({{"phase", "stage2"}, {"epoch", e}, {"loss", loss}, {"dev_refined_f1", f1}});
      if (f1 > best) {
        best = f1;
        kept_ref = t.refiner.clone();
        sum.stage2_best_epoch = e + 1;
        stale = 0;
      } else if (cfg.patience && ++stale >= cfg.patience) {
        break;
      }
    }
    t.refiner = std::move(kept_ref);
  }

  sum.dev_token_accuracy = run.dev_accuracy();
  if (!dev_set.empty()) {
    sum.sweep = run.sweep();
    t.gamma = sum.sweep.best_gamma;
    run.log({{"phase", "gamma"}, {"gamma", t.gamma}, {"dev_f1", sum.sweep.best_f1}, {"dev_draft_f1", sum.sweep.draft_f1}});
  }
  if (summary) *summary = sum;
  return t;
}

}  // namespace uanet::train
