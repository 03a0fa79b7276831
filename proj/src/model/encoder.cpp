#include "uanet/model/encoder.hpp"

#include <cmath>

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"

namespace uanet::model {

using namespace uanet::ad;

void EncoderConfig::validate() const {
  if (word_dim == 0) throw ConfigError("encoder.word_dim", "must be positive");
  if (char_dim == 0) throw ConfigError("encoder.char_dim", "must be positive");
  if (char_filters == 0) throw ConfigError("encoder.char_filters", "must be positive");
  if (hidden == 0) throw ConfigError("encoder.hidden", "must be positive");
  if (embed_dropout < 0.0 || embed_dropout >= 1.0) throw ConfigError("encoder.embed_dropout", "must lie in [0, 1)");
  if (recurrent_dropout < 0.0 || recurrent_dropout >= 1.0)
    throw ConfigError("encoder.recurrent_dropout", "must lie in [0, 1)");
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"word_dim", c.word_dim},           {"char_dim", c.char_dim},
       {"char_filters", c.char_filters},   {"hidden", c.hidden},
       {"embed_dropout", c.embed_dropout}, {"recurrent_dropout", c.recurrent_dropout},
       {"crf", c.crf}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  c.word_dim = j.value("word_dim", c.word_dim);
  c.char_dim = j.value("char_dim", c.char_dim);
  c.char_filters = j.value("char_filters", c.char_filters);
  c.hidden = j.value("hidden", c.hidden);
  c.embed_dropout = j.value("embed_dropout", c.embed_dropout);
  c.recurrent_dropout = j.value("recurrent_dropout", c.recurrent_dropout);
  c.crf = j.value("crf", c.crf);
}

EncodedSentence encode(const data::Vocabulary& vocab, const data::Sentence& s) {
  EncodedSentence out;
  out.words.reserve(s.size());
  out.chars.reserve(s.size());
  for (const auto& tok : s.tokens) {
    out.words.push_back(vocab.word_id(tok));
    out.chars.push_back(vocab.char_ids(tok));
  }
  return out;
}

std::vector<double> dropout_mask(std::size_t n, double r, Rng& rng) {
  std::vector<double> m(n, 1.0);
  if (r <= 0.0) return m;
  const double keep = 1.0 - r;
  for (auto& v : m) v = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  return m;
}

MaskPair sample_mask_pair(std::size_t input_dim, std::size_t hidden, double r, Rng& rng) {
  MaskPair p;
  p.zx = dropout_mask(input_dim, r, rng);
  p.zh = dropout_mask(hidden, r, rng);
  return p;
}

SequenceMasks sample_masks(std::size_t input_dim, std::size_t hidden, double r, Rng& rng) {
  SequenceMasks m;
  m.forward = sample_mask_pair(input_dim, hidden, r, rng);
  m.backward = sample_mask_pair(input_dim, hidden, r, rng);
  return m;
}

namespace {

Tensor apply_mask(const Tensor& x, const std::vector<double>& mask) {
  if (mask.empty()) return x;
  if (mask.size() != x.cols())
    throw ContractError("dropout mask of length " + std::to_string(mask.size()) + " for " + to_string(x.shape()));
  return mul_row(x, Tensor::from({1, mask.size()}, mask));
}

// Shared tail of a step once the input projection (x ⊙ z_x) W_x is known.
LstmState step_projected(const Tensor& xproj, const LstmState& prev, const std::vector<double>& zh,
                         const LstmWeights& w) {
  const std::size_t h = w.wh.rows();
  Tensor gates = add(add(xproj, matmul(apply_mask(prev.h, zh), w.wh)), w.b);
  Tensor g = ad::tanh(slice_cols(gates, 0, h));
  Tensor i = sigmoid(slice_cols(gates, h, h));
  Tensor f = sigmoid(slice_cols(gates, 2 * h, h));
  Tensor o = sigmoid(slice_cols(gates, 3 * h, h));
  Tensor c = add(mul(g, i), mul(prev.c, f));
  return {mul(o, ad::tanh(c)), c};
}

void check_weights(const LstmWeights& w, std::size_t input_dim) {
  const std::size_t h = w.wh.rows();
  if (w.wx.rows() != input_dim || w.wx.cols() != 4 * h || w.wh.cols() != 4 * h || w.b.cols() != 4 * h)
    throw ContractError("LSTM weights " + to_string(w.wx.shape()) + ", " + to_string(w.wh.shape()) + ", " +
                        to_string(w.b.shape()) + " do not fit input width " + std::to_string(input_dim));
}

double uniform_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(v));
}

}  // namespace

LstmState vlstm_step(const Tensor& x, const LstmState& prev, const MaskPair& masks, const LstmWeights& w) {
  check_weights(w, x.cols());
  if (x.rows() != 1 || prev.h.cols() != w.wh.rows() || prev.c.cols() != w.wh.rows())
    throw ContractError("vlstm_step: bad state or input shape");
  return step_projected(matmul(apply_mask(x, masks.zx), w.wx), prev, masks.zh, w);
}

Tensor run_direction(const Tensor& x, const MaskPair& masks, const LstmWeights& w, bool reverse) {
  check_weights(w, x.cols());
  const std::size_t n = x.rows(), h = w.wh.rows();
  // z_x is constant over time, so the masked input projection of every
  // step comes from one matrix product.
  const Tensor xproj = matmul(apply_mask(x, masks.zx), w.wx);
  LstmState state{Tensor::zeros({1, h}), Tensor::zeros({1, h})};
  std::vector<Tensor> hs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    state = step_projected(slice_rows(xproj, t, 1), state, masks.zh, w);
    hs[t] = state.h;
  }
  return concat_rows(hs);
}

Tensor encode_chars(const Tensor& char_table, const Tensor& filters, const Tensor& bias,
                    const std::vector<std::vector<std::size_t>>& chars) {
  const std::size_t pad = char_table.rows();
  const std::size_t dc = char_table.cols();
  if (filters.rows() != 3 * dc) throw ContractError("char filters must have 3 x char_dim rows");
  std::vector<std::size_t> left, centre, right, offsets{0};
  for (const auto& tok : chars) {
    if (tok.empty()) throw ContractError("token without characters");
    for (std::size_t t = 0; t < tok.size(); ++t) {
      left.push_back(t == 0 ? pad : tok[t - 1]);
      centre.push_back(tok[t]);
      right.push_back(t + 1 == tok.size() ? pad : tok[t + 1]);
    }
    offsets.push_back(centre.size());
  }
  // Zero row appended as the padding symbol.
  const std::vector<Tensor> rows = {char_table, Tensor::zeros({1, dc})};
  const Tensor table = concat_rows(rows);
  const std::vector<Tensor> windows = {gather_rows(table, left), gather_rows(table, centre),
                                       gather_rows(table, right)};
  Tensor conv = add_row(matmul(concat_cols(windows), filters), bias);
  return segment_max_rows(conv, offsets);
}

Encoder::Encoder(const EncoderConfig& cfg, std::size_t words, std::size_t chars, std::size_t labels)
    : cfg_(cfg), labels_(labels) {
  cfg_.validate();
  if (labels == 0) throw ConfigError("labels", "label set is empty");
  const std::size_t d = cfg_.input_dim(), h = cfg_.hidden;
  params_.add("encoder.word_embedding", Tensor::zeros({words, cfg_.word_dim}));
  params_.add("encoder.char_embedding", Tensor::zeros({chars, cfg_.char_dim}));
  params_.add("encoder.char_filters", Tensor::zeros({3 * cfg_.char_dim, cfg_.char_filters}));
  params_.add("encoder.char_bias", Tensor::zeros({1, cfg_.char_filters}));
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string p = std::string("encoder.") + dir;
    params_.add(p + ".wx", Tensor::zeros({d, 4 * h}));
    params_.add(p + ".wh", Tensor::zeros({h, 4 * h}));
    params_.add(p + ".b", Tensor::zeros({1, 4 * h}));
  }
  params_.add("encoder.out.w", Tensor::zeros({2 * h, labels}));
  params_.add("encoder.out.b", Tensor::zeros({1, labels}));
  if (cfg_.crf) params_.add("encoder.transitions", Tensor::zeros({labels + 2, labels + 2}));
}

void Encoder::initialize(Rng& rng, const data::Vocabulary& vocab, const data::EmbeddingMap* pretrained) {
  const std::size_t d = cfg_.input_dim(), h = cfg_.hidden;
  auto set = [&](const std::string& name, const Tensor& v) {
    auto dst = params_.get(name).data();
    auto src = v.data();
    if (dst.size() != src.size()) throw ContractError("init size mismatch for " + name);
    std::copy(src.begin(), src.end(), dst.begin());
  };
  set("encoder.word_embedding", data::build_embedding_table(vocab, pretrained, cfg_.word_dim, rng));
  const std::size_t chars = params_.get("encoder.char_embedding").rows();
  set("encoder.char_embedding", uniform_tensor({chars, cfg_.char_dim}, data::embedding_init_bound(cfg_.char_dim), rng));
  set("encoder.char_filters",
      uniform_tensor({3 * cfg_.char_dim, cfg_.char_filters}, uniform_bound(3 * cfg_.char_dim, cfg_.char_filters), rng));
  const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string p = std::string("encoder.") + dir;
    set(p + ".wx", uniform_tensor({d, 4 * h}, lstm_bound, rng));
    set(p + ".wh", uniform_tensor({h, 4 * h}, lstm_bound, rng));
    // Forget gate starts open.
    auto b = params_.get(p + ".b").data();
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(b.begin() + 2 * h, b.begin() + 3 * h, 1.0);
  }
  set("encoder.out.w", uniform_tensor({2 * h, labels_}, uniform_bound(2 * h, labels_), rng));
}

Encoder Encoder::clone() const {
  Encoder e(*this);
  e.params_ = params_.clone();
  return e;
}

LstmWeights Encoder::direction(bool backward) const {
  const std::string p = backward ? "encoder.bwd" : "encoder.fwd";
  return {params_.get(p + ".wx"), params_.get(p + ".wh"), params_.get(p + ".b")};
}

Tensor Encoder::represent(const EncodedSentence& s) const {
  if (s.size() == 0) throw ContractError("empty sentence");
  const std::vector<Tensor> parts = {
      gather_rows(params_.get("encoder.word_embedding"), s.words),
      encode_chars(params_.get("encoder.char_embedding"), params_.get("encoder.char_filters"),
                   params_.get("encoder.char_bias"), s.chars)};
  return concat_cols(parts);
}

EncoderPass Encoder::forward(const EncodedSentence& s, const SequenceMasks& masks,
                             const std::vector<double>& embed_mask) const {
  EncoderPass out;
  out.repr = represent(s);
  Tensor x = out.repr;
  if (!embed_mask.empty()) {
    if (embed_mask.size() != x.size()) throw ContractError("embedding dropout mask has the wrong size");
    x = mul(x, Tensor::from(x.shape(), embed_mask));
  }
  const std::vector<Tensor> dirs = {run_direction(x, masks.forward, direction(false), false),
                                    run_direction(x, masks.backward, direction(true), true)};
  out.hidden = concat_cols(dirs);
  out.logits = add_row(matmul(out.hidden, params_.get("encoder.out.w")), params_.get("encoder.out.b"));
  return out;
}

std::vector<Tensor> Encoder::penalized() const {
  return {params_.get("encoder.word_embedding"), params_.get("encoder.char_embedding"),
          params_.get("encoder.char_filters"),   params_.get("encoder.fwd.wx"),
          params_.get("encoder.fwd.wh"),         params_.get("encoder.bwd.wx"),
          params_.get("encoder.bwd.wh")};
}

}  // namespace uanet::model
