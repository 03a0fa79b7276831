#include "uanet/model/refiner.hpp"

#include <cmath>
#include <map>

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"

namespace uanet::model {

using namespace uanet::ad;

void RefinerConfig::validate() const {
  if (layers == 0) throw ConfigError("refiner.layers", "must be positive");
  if (heads == 0) throw ConfigError("refiner.heads", "must be positive");
  if (head_dim == 0) throw ConfigError("refiner.head_dim", "must be positive");
  if (ff_dim == 0) throw ConfigError("refiner.ff_dim", "must be positive");
  if (max_len < 2) throw ConfigError("refiner.max_len", "must be at least 2");
}

void to_json(nlohmann::json& j, const RefinerConfig& c) {
  j = {{"layers", c.layers}, {"heads", c.heads}, {"head_dim", c.head_dim}, {"ff_dim", c.ff_dim}, {"max_len", c.max_len}};
}

void from_json(const nlohmann::json& j, RefinerConfig& c) {
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.head_dim = j.value("head_dim", c.head_dim);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.max_len = j.value("max_len", c.max_len);
}

std::vector<double> sinusoid(long offset, std::size_t dim) {
  std::vector<double> r(dim);
  for (std::size_t k = 0; k < dim; k += 2) {
    const double freq = std::pow(10000.0, -static_cast<double>(k) / static_cast<double>(dim));
    r[k] = std::sin(static_cast<double>(offset) * freq);
    if (k + 1 < dim) r[k + 1] = std::cos(static_cast<double>(offset) * freq);
  }
  return r;
}

Tensor relative_table(std::size_t n, std::size_t dim) {
  std::vector<double> v;
  v.reserve((2 * n - 1) * dim);
  for (long off = static_cast<long>(n) - 1; off >= -(static_cast<long>(n) - 1); --off) {
    const auto row = sinusoid(off, dim);
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor::from({2 * n - 1, dim}, std::move(v));
}

Tensor relative_scores(const Tensor& queries, const Tensor& keys, const HeadWeights& w, std::size_t max_len) {
  const std::size_t n = queries.rows();
  if (n > max_len)
    throw CapacityError("sequence of length " + std::to_string(n) + " exceeds the relative table limit " +
                        std::to_string(max_len));
  if (keys.rows() != n) throw DimensionError("relative_scores: query and key lengths differ");
  const double inv = 1.0 / std::sqrt(static_cast<double>(w.wq.cols()));
  const Tensor q = matmul(queries, w.wq);
  const Tensor k = matmul(keys, w.wk);
  // The table is constant, so keep one per (length, width) on each thread.
  thread_local std::map<std::pair<std::size_t, std::size_t>, Tensor> tables;
  auto& table = tables[{n, queries.cols()}];
  if (!table.defined()) table = relative_table(n, queries.cols());
  const Tensor rproj = matmul(table, w.wkr);
  const Tensor content = matmul_nt(add_row(q, w.u), k);
  const Tensor position = rel_shift(matmul_nt(add_row(q, w.v), rproj));
  return scale(add(content, position), inv);
}

namespace {

double xavier(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  for (auto& x : t.data()) x = rng.uniform(-bound, bound);
}

}  // namespace

Refiner::Refiner(const RefinerConfig& cfg, std::size_t model_dim, std::size_t labels)
    : cfg_(cfg), dim_(model_dim), labels_(labels) {
  cfg_.validate();
  if (model_dim == 0) throw ConfigError("refiner.model_dim", "must be positive");
  if (labels == 0) throw ConfigError("labels", "label set is empty");
  const std::size_t d = dim_, hd = cfg_.heads * cfg_.head_dim, ff = cfg_.ff_dim;
  params_.add("refiner.label_embedding", Tensor::zeros({labels + 1, d}));
  for (const char* b : {"u_x", "v_x", "u_l", "v_l"}) params_.add(std::string("refiner.") + b, Tensor::zeros({1, hd}));
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    for (const char* w : {"W_qx", "W_kx", "W_ql", "W_kl", "W_kR", "W_x", "W_l"}) params_.add(key(l, w), Tensor::zeros({d, hd}));
    for (const char* s : {"x", "l"}) {
      const std::string p = std::string(".") + s;
      params_.add(key(l, "linear" + p + ".w"), Tensor::zeros({hd, d}));
      params_.add(key(l, "linear" + p + ".b"), Tensor::zeros({1, d}));
      params_.add(key(l, "norm" + p + ".gain"), Tensor::full({1, d}, 1.0));
      params_.add(key(l, "norm" + p + ".bias"), Tensor::zeros({1, d}));
      params_.add(key(l, "ff" + p + ".w1"), Tensor::zeros({d, ff}));
      params_.add(key(l, "ff" + p + ".b1"), Tensor::zeros({1, ff}));
      params_.add(key(l, "ff" + p + ".w2"), Tensor::zeros({ff, d}));
      params_.add(key(l, "ff" + p + ".b2"), Tensor::zeros({1, d}));
    }
  }
  params_.add("refiner.out.w", Tensor::zeros({2 * d, labels}));
  params_.add("refiner.out.b", Tensor::zeros({1, labels}));
}

std::string Refiner::key(std::size_t layer, const std::string& name) const {
  return "refiner.layer" + std::to_string(layer) + "." + name;
}

void Refiner::initialize(Rng& rng) {
  const std::size_t d = dim_, hd = cfg_.heads * cfg_.head_dim, ff = cfg_.ff_dim;
  fill_uniform(params_.get("refiner.label_embedding"), std::sqrt(3.0 / static_cast<double>(d)), rng);
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    for (const char* w : {"W_qx", "W_kx", "W_ql", "W_kl", "W_kR", "W_x", "W_l"})
      fill_uniform(params_.get(key(l, w)), xavier(d, hd), rng);
    for (const char* s : {"x", "l"}) {
      const std::string p = std::string(".") + s;
      fill_uniform(params_.get(key(l, "linear" + p + ".w")), xavier(hd, d), rng);
      fill_uniform(params_.get(key(l, "ff" + p + ".w1")), xavier(d, ff), rng);
      fill_uniform(params_.get(key(l, "ff" + p + ".w2")), xavier(ff, d), rng);
    }
  }
  fill_uniform(params_.get("refiner.out.w"), xavier(2 * d, labels_), rng);
}

Refiner Refiner::clone() const {
  Refiner r(*this);
  r.params_ = params_.clone();
  return r;
}

HeadWeights Refiner::head(std::size_t layer, std::size_t h, bool label_stream) const {
  const std::size_t dh = cfg_.head_dim, at = h * dh;
  auto cut = [&](const Tensor& t) { return slice_cols(t, at, dh); };
  const char* q = label_stream ? "W_ql" : "W_qx";
  const char* k = label_stream ? "W_kl" : "W_kx";
  const char* u = label_stream ? "refiner.u_l" : "refiner.u_x";
  const char* v = label_stream ? "refiner.v_l" : "refiner.v_x";
  return {cut(params_.get(key(layer, q))), cut(params_.get(key(layer, k))), cut(params_.get(key(layer, "W_kR"))),
          cut(params_.get(u)), cut(params_.get(v))};
}

Tensor Refiner::scores_x2x(const Tensor& ex, std::size_t layer, std::size_t h) const {
  return relative_scores(ex, ex, head(layer, h, false), cfg_.max_len);
}

Tensor Refiner::scores_x2l(const Tensor& ex, const Tensor& ey, std::size_t layer, std::size_t h) const {
  return relative_scores(ex, ey, head(layer, h, true), cfg_.max_len);
}

Tensor Refiner::embed_labels(std::span<const std::size_t> drafts) const {
  for (auto y : drafts)
    if (y > labels_) throw ContractError("draft label id " + std::to_string(y) + " out of range");
  return gather_rows(params_.get("refiner.label_embedding"), drafts);
}

StreamPair Refiner::layer(const StreamPair& in, std::size_t l) const {
  const std::size_t dh = cfg_.head_dim;
  auto stream = [&](const Tensor& residual, const Tensor& values, bool label_stream) {
    const Tensor v = matmul(values, params_.get(key(l, label_stream ? "W_l" : "W_x")));
    std::vector<Tensor> heads;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      const Tensor a = label_stream ? scores_x2l(in.x, in.l, l, h) : scores_x2x(in.x, l, h);
      heads.push_back(matmul(softmax_rows(a), slice_cols(v, h * dh, dh)));
    }
    const std::string s = label_stream ? ".l" : ".x";
    const Tensor lin = add_row(matmul(concat_cols(heads), params_.get(key(l, "linear" + s + ".w"))),
                               params_.get(key(l, "linear" + s + ".b")));
    const Tensor o = layer_norm(add(lin, residual), params_.get(key(l, "norm" + s + ".gain")),
                                params_.get(key(l, "norm" + s + ".bias")));
    const Tensor hidden =
        relu(add_row(matmul(o, params_.get(key(l, "ff" + s + ".w1"))), params_.get(key(l, "ff" + s + ".b1"))));
    return add(o, add_row(matmul(hidden, params_.get(key(l, "ff" + s + ".w2"))), params_.get(key(l, "ff" + s + ".b2"))));
  };
  return {stream(in.x, in.x, false), stream(in.l, in.l, true)};
}

Tensor Refiner::logits(const Tensor& ex, std::span<const std::size_t> drafts) const {
  if (ex.cols() != dim_) throw DimensionError("refiner input width " + to_string(ex.shape()) + " != model dim");
  if (drafts.size() != ex.rows()) throw ContractError("draft count differs from sentence length");
  StreamPair s{ex, embed_labels(drafts)};
  for (std::size_t l = 0; l < cfg_.layers; ++l) s = layer(s, l);
  const std::vector<Tensor> both = {s.x, s.l};
  return add_row(matmul(concat_cols(both), params_.get("refiner.out.w")), params_.get("refiner.out.b"));
}

Tensor Refiner::predict(const Tensor& ex, std::span<const std::size_t> drafts) const {
  return softmax_rows(logits(ex, drafts));
}

RefinedPrediction refine(const Refiner& r, const Tensor& ex, std::span<const std::size_t> drafts) {
  ad::Tape::Pause no_record;
  const Tensor p = r.predict(ex, drafts);
  RefinedPrediction out;
  out.labels = r.labels();
  out.probs.assign(p.data().begin(), p.data().end());
  out.refined.resize(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < out.labels; ++c)
      if (p.at(i, c) > p.at(i, best)) best = c;
    out.refined[i] = best;
  }
  return out;
}

}  // namespace uanet::model
