#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "uanet/autodiff/tensor.hpp"
#include "uanet/data/tag_scheme.hpp"
#include "uanet/model/mc.hpp"
#include "uanet/model/refiner.hpp"

namespace uanet::decode {

// Row-major [rows x cols] view over borrowed storage.
struct MatrixView {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Transition scores are [(C+2) x (C+2)]: state C is the virtual start and
// C+1 the virtual stop. T(a, b) scores a -> b.
inline std::size_t start_state(std::size_t labels) { return labels; }
inline std::size_t stop_state(std::size_t labels) { return labels + 1; }

struct PathResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

// Emissions plus transitions (including start and stop) along `path`.
double path_score(const MatrixView& emissions, const MatrixView& transitions, std::span<const std::size_t> path);

// Highest-scoring path. Equal candidates resolve to the lower label id, both
// at every backpointer and for the final state.
PathResult viterbi(const MatrixView& emissions, const MatrixView& transitions);

// log Σ_paths exp(score), forward algorithm in log space.
double crf_log_partition(const MatrixView& emissions, const MatrixView& transitions);

// -(score(gold) - log Z), differentiable in both emissions [n x C] and
// transitions [(C+2) x (C+2)].
ad::Tensor crf_nll(const ad::Tensor& emissions, const ad::Tensor& transitions, std::span<const std::size_t> gold);

// Per-row argmax, lowest id on ties.
std::vector<std::size_t> argmax_rows(const MatrixView& scores);

// final_i = refined_i when u_i > gamma, else draft_i.
std::vector<std::size_t> threshold_mix(std::span<const std::size_t> draft, std::span<const double> uncertainty,
                                       std::span<const std::size_t> refined, double gamma);
std::vector<std::size_t> threshold_mix(const model::DraftPrediction& draft, const model::RefinedPrediction& refined,
                                       double gamma);

// Same rule writing into `out`, with no allocation; the benchmarked kernel.
void threshold_mix_into(std::span<const std::size_t> draft, std::span<const double> uncertainty,
                        std::span<const std::size_t> refined, double gamma, std::span<std::size_t> out);

// 0 for legal moves, -inf for illegal ones, in the layout viterbi expects.
std::vector<double> legality_transitions(const data::TagScheme& scheme);

// Most probable legal label sequence under per-token distributions.
std::vector<std::size_t> legalize(const MatrixView& probs, const data::TagScheme& scheme);

}  // namespace uanet::decode
