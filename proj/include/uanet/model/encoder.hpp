#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "uanet/autodiff/params.hpp"
#include "uanet/autodiff/tensor.hpp"
#include "uanet/core/rng.hpp"
#include "uanet/data/conll.hpp"
#include "uanet/data/embeddings.hpp"
#include "uanet/data/vocab.hpp"

namespace uanet::model {

using ad::Tensor;

struct EncoderConfig {
  std::size_t word_dim = 24;
  std::size_t char_dim = 8;      // char embedding width
  std::size_t char_filters = 8;  // width of the char encoding x^c
  std::size_t hidden = 32;       // per direction
  double embed_dropout = 0.5;
  double recurrent_dropout = 0.25;
  bool crf = false;  // add a transition matrix and train with the CRF likelihood

  std::size_t input_dim() const { return word_dim + char_filters; }
  void validate() const;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

// Vocabulary ids for one sentence.
struct EncodedSentence {
  std::vector<std::size_t> words;
  std::vector<std::vector<std::size_t>> chars;
  std::size_t size() const { return words.size(); }
};

EncodedSentence encode(const data::Vocabulary& vocab, const data::Sentence& s);

// Locked dropout masks for one direction of one sequence. Entries are 0 or
// 1/(1-r); empty vectors mean "no dropout".
struct MaskPair {
  std::vector<double> zx;  // over the LSTM input
  std::vector<double> zh;  // over the previous hidden state
};

struct SequenceMasks {
  MaskPair forward;
  MaskPair backward;
};

// Bernoulli(1-r) / (1-r) draws; r = 0 gives all-ones masks.
std::vector<double> dropout_mask(std::size_t n, double r, Rng& rng);
MaskPair sample_mask_pair(std::size_t input_dim, std::size_t hidden, double r, Rng& rng);
SequenceMasks sample_masks(std::size_t input_dim, std::size_t hidden, double r, Rng& rng);

// Gate weights for one direction. Columns are ordered g, i, f, o.
struct LstmWeights {
  Tensor wx;  // [D x 4H]
  Tensor wh;  // [H x 4H]
  Tensor b;   // [1 x 4H]
};

struct LstmState {
  Tensor h;  // [1 x H]
  Tensor c;  // [1 x H]
};

// One variational LSTM step on [x ⊙ z_x ; h ⊙ z_h].
LstmState vlstm_step(const Tensor& x, const LstmState& prev, const MaskPair& masks, const LstmWeights& w);

// Runs one direction over the rows of x ([n x D]); returns hidden states
// [n x H] in input order. reverse = true scans from the last row.
Tensor run_direction(const Tensor& x, const MaskPair& masks, const LstmWeights& w, bool reverse);

// Char CNN: window-3 same-padded convolution followed by max over positions.
Tensor encode_chars(const Tensor& char_table, const Tensor& filters, const Tensor& bias,
                    const std::vector<std::vector<std::size_t>>& chars);

struct EncoderPass {
  Tensor repr;    // [n x D], token representations before dropout
  Tensor hidden;  // [n x 2H], forward then backward
  Tensor logits;  // [n x C]
};

// Stage one: word+char representation, bidirectional variational LSTM and
// a linear output layer. Parameter names are stable checkpoint keys.
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, std::size_t words, std::size_t chars, std::size_t labels);

  // Random init (uniform ±sqrt(3/fan) style) with optional pretrained rows.
  void initialize(Rng& rng, const data::Vocabulary& vocab, const data::EmbeddingMap* pretrained = nullptr);

  // Deep copy; the default copy shares parameter storage.
  Encoder clone() const;

  const EncoderConfig& config() const { return cfg_; }
  std::size_t labels() const { return labels_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  LstmWeights direction(bool backward) const;

  // Token representations [w ; x^c] with no dropout.
  Tensor represent(const EncodedSentence& s) const;

  // Full pass. embed_mask (if non-empty) multiplies the [n x D]
  // representation elementwise before the LSTM.
  EncoderPass forward(const EncodedSentence& s, const SequenceMasks& masks,
                      const std::vector<double>& embed_mask = {}) const;

  // Parameters under the weight penalty: embeddings, char filters and gate
  // weights (biases and the output layer are excluded).
  std::vector<Tensor> penalized() const;

 private:
  EncoderConfig cfg_;
  std::size_t labels_;
  ad::ParamStore params_;
};

}  // namespace uanet::model
