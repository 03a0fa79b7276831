#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "uanet/autodiff/tensor.hpp"
#include "uanet/core/rng.hpp"
#include "uanet/data/vocab.hpp"

namespace uanet::data {

using EmbeddingMap = std::unordered_map<std::string, std::vector<double>>;

// Text format: one "word v1 ... v_dim" entry per line.
EmbeddingMap load_embeddings(const std::filesystem::path& path, std::size_t dim);
EmbeddingMap parse_embeddings(std::istream& in, std::size_t dim);

// Bound of the uniform init for words missing from the pretrained file.
double embedding_init_bound(std::size_t dim);

// [word_count x dim] table. Rows of words found in `pretrained` (looked up by
// normalized form) are copied verbatim; the rest are drawn uniformly in
// ±embedding_init_bound(dim), in id order. `matched` receives the count of
// copied rows.
ad::Tensor build_embedding_table(const Vocabulary& vocab, const EmbeddingMap* pretrained, std::size_t dim, Rng& rng,
                                 std::size_t* matched = nullptr);

}  // namespace uanet::data
