#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uanet/autodiff/tensor.hpp"

// Differentiable ops. All inputs are treated as matrices (rank-1 = one row).
// Broadcasting is limited to scalar-with-tensor in add/sub/mul and the
// explicit row-wise variants add_row / mul_row.
namespace uanet::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
// a · bᵀ without materializing the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor mul_row(const Tensor& a, const Tensor& row);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
// Throws DomainError on any non-positive entry.
Tensor log(const Tensor& a);

enum class Elementwise { add, mul, tanh, sigmoid, relu, exp, log };
// Dispatches to the named op; unary kinds ignore `b`.
Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b = {});

Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_squares(const Tensor& a);

// out[i] = table[ids[i]]
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);
// out[i] = a[i, ids[i]], shape [n x 1]
Tensor pick(const Tensor& a, std::span<const std::size_t> ids);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);

// Column-wise max over each row segment [offsets[s], offsets[s+1]).
// Result has one row per segment. Ties route the gradient to the first row.
Tensor segment_max_rows(const Tensor& a, std::span<const std::size_t> offsets);

// Relative-offset gather for attention: for s of shape [n x (2n-1)] whose
// column k holds offset (n-1-k), returns [n x n] with out[i][j] = s[i][j-i+n-1],
// i.e. the entry for offset i-j.
Tensor rel_shift(const Tensor& s);

// Row-wise normalization to zero mean / unit variance, then gain and bias
// (each 1 x d). Biased variance, eps added inside the square root.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-12);

}  // namespace uanet::ad
