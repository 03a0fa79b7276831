#include "uanet/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uanet/core/error.hpp"

namespace uanet::ad {

namespace {

using detail::Node;

Node& parent(Node& out, std::size_t i) { return *out.parents[i]; }

bool wants(const Node& n) { return n.requires_grad; }

Shape mat_shape(std::size_t r, std::size_t c) { return {r, c}; }

template <typename F, typename D>
Tensor unary(const Tensor& a, F forward, D derivative) {
  std::vector<double> v(a.size());
  auto in = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = forward(in[i]);
  return make_result(a.shape(), std::move(v), {a}, [derivative](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < out.value.size(); ++i)
      pa.grad[i] += out.grad[i] * derivative(pa.value[i], out.value[i]);
  });
}

enum class Binary { add, sub, mul };

Tensor binary(const Tensor& a, const Tensor& b, Binary kind, const char* name) {
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  const bool a_scalar = a.size() == 1 && !same;
  const bool b_scalar = b.size() == 1 && !same;
  if (!same && !a_scalar && !b_scalar)
    throw DimensionError(std::string(name) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  const Tensor& big = a_scalar ? b : a;
  const std::size_t n = big.size();
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[a_scalar ? 0 : i];
    const double y = bv[b_scalar ? 0 : i];
    v[i] = kind == Binary::add ? x + y : kind == Binary::sub ? x - y : x * y;
  }
  return make_result(big.shape(), std::move(v), {a, b}, [kind, a_scalar, b_scalar](Node& out) {
    auto& pa = parent(out, 0);
    auto& pb = parent(out, 1);
    const std::size_t n = out.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = out.grad[i];
      const std::size_t ia = a_scalar ? 0 : i;
      const std::size_t ib = b_scalar ? 0 : i;
      switch (kind) {
        case Binary::add:
          if (wants(pa)) pa.grad[ia] += g;
          if (wants(pb)) pb.grad[ib] += g;
          break;
        case Binary::sub:
          if (wants(pa)) pa.grad[ia] += g;
          if (wants(pb)) pb.grad[ib] -= g;
          break;
        case Binary::mul:
          if (wants(pa)) pa.grad[ia] += g * pb.value[ib];
          if (wants(pb)) pb.grad[ib] += g * pa.value[ia];
          break;
      }
    }
  });
}

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[m x n] += a[m x k] * b[n x k]ᵀ
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] += s;
    }
}

// c[k x n] += a[m x k]ᵀ * b[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bi = b + i * n;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  std::vector<double> v(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), v.data(), m, k, n);
  return make_result(mat_shape(m, n), std::move(v), {a, b}, [m, k, n](Node& out) {
    auto& pa = parent(out, 0);
    auto& pb = parent(out, 1);
    if (wants(pa)) gemm_nt(out.grad.data(), pb.value.data(), pa.grad.data(), m, n, k);
    if (wants(pb)) gemm_tn(pa.value.data(), out.grad.data(), pb.grad.data(), m, k, n);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k)
    throw DimensionError("matmul_nt: inner dimensions differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()) + "ᵀ");
  std::vector<double> v(m * n, 0.0);
  gemm_nt(a.data().data(), b.data().data(), v.data(), m, k, n);
  return make_result(mat_shape(m, n), std::move(v), {a, b}, [m, k, n](Node& out) {
    auto& pa = parent(out, 0);
    auto& pb = parent(out, 1);
    // dA = G · B, dB = Gᵀ · A
    if (wants(pa)) gemm_nn(out.grad.data(), pb.value.data(), pa.grad.data(), m, n, k);
    if (wants(pb)) gemm_tn(out.grad.data(), pa.value.data(), pb.grad.data(), m, n, k);
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> v(r * c);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[j * r + i] = in[i * c + j];
  return make_result(mat_shape(c, r), std::move(v), {a}, [r, c](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) pa.grad[i * c + j] += out.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, Binary::add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, Binary::sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, Binary::mul, "mul"); }

Tensor scale(const Tensor& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  const std::size_t r = a.rows(), c = a.cols();
  if (row.size() != c)
    throw DimensionError("add_row: row " + to_string(row.shape()) + " does not fit " + to_string(a.shape()));
  std::vector<double> v(a.data().begin(), a.data().end());
  auto rv = row.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] += rv[j];
  return make_result(a.shape(), std::move(v), {a, row}, [r, c](Node& out) {
    auto& pa = parent(out, 0);
    auto& pr = parent(out, 1);
    if (wants(pa))
      for (std::size_t i = 0; i < r * c; ++i) pa.grad[i] += out.grad[i];
    if (wants(pr))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) pr.grad[j] += out.grad[i * c + j];
  });
}

Tensor mul_row(const Tensor& a, const Tensor& row) {
  const std::size_t r = a.rows(), c = a.cols();
  if (row.size() != c)
    throw DimensionError("mul_row: row " + to_string(row.shape()) + " does not fit " + to_string(a.shape()));
  std::vector<double> v(a.data().begin(), a.data().end());
  auto rv = row.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] *= rv[j];
  return make_result(a.shape(), std::move(v), {a, row}, [r, c](Node& out) {
    auto& pa = parent(out, 0);
    auto& pr = parent(out, 1);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        const double g = out.grad[i * c + j];
        if (wants(pa)) pa.grad[i * c + j] += g * pr.value[j];
        if (wants(pr)) pr.grad[j] += g * pa.value[i * c + j];
      }
  });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double x : a.data())
    if (!(x > 0.0)) throw DomainError("log: non-positive argument " + std::to_string(x));
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b) {
  switch (kind) {
    case Elementwise::add: return add(a, b);
    case Elementwise::mul: return mul(a, b);
    case Elementwise::tanh: return tanh(a);
    case Elementwise::sigmoid: return sigmoid(a);
    case Elementwise::relu: return relu(a);
    case Elementwise::exp: return exp(a);
    case Elementwise::log: return log(a);
  }
  throw ContractError("elementwise: unknown kind");
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> v(r * c);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = in.data() + i * c;
    double* y = v.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < c; ++j) y[j] /= z;
  }
  return make_result(a.shape(), std::move(v), {a}, [r, c](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = out.value.data() + i * c;
      const double* g = out.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) pa.grad[i * c + j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> v(r * c);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = in.data() + i * c;
    double* y = v.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(x[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) y[j] = x[j] - lse;
  }
  return make_result(a.shape(), std::move(v), {a}, [r, c](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = out.value.data() + i * c;
      const double* g = out.grad.data() + i * c;
      double gs = 0.0;
      for (std::size_t j = 0; j < c; ++j) gs += g[j];
      for (std::size_t j = 0; j < c; ++j) pa.grad[i * c + j] += g[j] - std::exp(y[j]) * gs;
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  return make_result(mat_shape(1, 1), {s}, {a}, [](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (auto& g : pa.grad) g += out.grad[0];
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor sum_squares(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return make_result(mat_shape(1, 1), {s}, {a}, [](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < pa.value.size(); ++i) pa.grad[i] += 2.0 * pa.value[i] * out.grad[0];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
  const std::size_t c = table.cols(), vocab = table.rows(), n = ids.size();
  if (n == 0) throw DimensionError("gather_rows: empty id list");
  std::vector<double> v(n * c);
  auto tv = table.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (ids[i] >= vocab)
      throw ContractError("gather_rows: id " + std::to_string(ids[i]) + " out of range for table " +
                          to_string(table.shape()));
    std::copy_n(tv.begin() + static_cast<std::ptrdiff_t>(ids[i] * c), c, v.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  return make_result(mat_shape(n, c), std::move(v), {table}, [idx = std::move(idx), c](Node& out) {
    auto& pt = parent(out, 0);
    if (!wants(pt)) return;
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) pt.grad[idx[i] * c + j] += out.grad[i * c + j];
  });
}

Tensor pick(const Tensor& a, std::span<const std::size_t> ids) {
  const std::size_t r = a.rows(), c = a.cols();
  if (ids.size() != r)
    throw DimensionError("pick: " + std::to_string(ids.size()) + " ids for " + to_string(a.shape()));
  std::vector<double> v(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (ids[i] >= c) throw ContractError("pick: column " + std::to_string(ids[i]) + " out of range");
    v[i] = a.data()[i * c + ids[i]];
  }
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  return make_result(mat_shape(r, 1), std::move(v), {a}, [idx = std::move(idx), c](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < idx.size(); ++i) pa.grad[i * c + idx[i]] += out.grad[i];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != r)
      throw DimensionError("concat_cols: row mismatch " + to_string(parts[0].shape()) + " vs " +
                           to_string(p.shape()));
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> v(r * total);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      auto pv = parts[k].data();
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(i * widths[k]), widths[k],
                  v.begin() + static_cast<std::ptrdiff_t>(i * total + off));
      off += widths[k];
    }
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result(mat_shape(r, total), std::move(v), std::move(inputs),
                     [widths = std::move(widths), r, total](Node& out) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         auto& pk = parent(out, k);
                         if (wants(pk))
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               pk.grad[i * widths[k] + j] += out.grad[i * total + off + j];
                         off += widths[k];
                       }
                     });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.cols() != c)
      throw DimensionError("concat_rows: column mismatch " + to_string(parts[0].shape()) + " vs " +
                           to_string(p.shape()));
    total += p.rows();
  }
  std::vector<double> v;
  v.reserve(total * c);
  for (const auto& p : parts) v.insert(v.end(), p.data().begin(), p.data().end());
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result(mat_shape(total, c), std::move(v), std::move(inputs), [](Node& out) {
    std::size_t off = 0;
    for (auto& p : out.parents) {
      const std::size_t n = p->value.size();
      if (wants(*p))
        for (std::size_t i = 0; i < n; ++i) p->grad[i] += out.grad[off + i];
      off += n;
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  const std::size_t r = a.rows(), c = a.cols();
  if (count == 0 || begin + count > c)
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + to_string(a.shape()));
  std::vector<double> v(r * count);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(i * c + begin), count,
                v.begin() + static_cast<std::ptrdiff_t>(i * count));
  return make_result(mat_shape(r, count), std::move(v), {a}, [r, c, begin, count](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < count; ++j) pa.grad[i * c + begin + j] += out.grad[i * count + j];
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  const std::size_t r = a.rows(), c = a.cols();
  if (count == 0 || begin + count > r)
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + to_string(a.shape()));
  auto in = a.data();
  std::vector<double> v(in.begin() + static_cast<std::ptrdiff_t>(begin * c),
                        in.begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  return make_result(mat_shape(count, c), std::move(v), {a}, [c, begin](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t i = 0; i < out.value.size(); ++i) pa.grad[begin * c + i] += out.grad[i];
  });
}

Tensor segment_max_rows(const Tensor& a, std::span<const std::size_t> offsets) {
  const std::size_t c = a.cols();
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != a.rows())
    throw ContractError("segment_max_rows: offsets must run from 0 to rows()");
  const std::size_t segs = offsets.size() - 1;
  std::vector<double> v(segs * c);
  std::vector<std::size_t> argmax(segs * c);
  auto in = a.data();
  for (std::size_t s = 0; s < segs; ++s) {
    if (offsets[s + 1] <= offsets[s]) throw ContractError("segment_max_rows: empty segment");
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = offsets[s];
      for (std::size_t i = offsets[s] + 1; i < offsets[s + 1]; ++i)
        if (in[i * c + j] > in[best * c + j]) best = i;
      argmax[s * c + j] = best;
      v[s * c + j] = in[best * c + j];
    }
  }
  return make_result(mat_shape(segs, c), std::move(v), {a}, [argmax = std::move(argmax), c](Node& out) {
    auto& pa = parent(out, 0);
    if (!wants(pa)) return;
    for (std::size_t k = 0; k < argmax.size(); ++k) pa.grad[argmax[k] * c + k % c] += out.grad[k];
  });
}

Tensor rel_shift(const Tensor& s) {
  const std::size_t n = s.rows();
  if (s.cols() != 2 * n - 1)
    throw DimensionError("rel_shift: expected [n x 2n-1], got " + to_string(s.shape()));
  const std::size_t w = 2 * n - 1;
  std::vector<double> v(n * n);
  auto in = s.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = in[i * w + (j + n - 1 - i)];
  return make_result(mat_shape(n, n), std::move(v), {s}, [n, w](Node& out) {
    auto& ps = parent(out, 0);
    if (!wants(ps)) return;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ps.grad[i * w + (j + n - 1 - i)] += out.grad[i * n + j];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t r = x.rows(), c = x.cols();
  if (gain.size() != c || bias.size() != c)
    throw DimensionError("layer_norm: gain/bias " + to_string(gain.shape()) + "/" + to_string(bias.shape()) +
                         " do not fit " + to_string(x.shape()));
  std::vector<double> normed(r * c), inv_std(r), v(r * c);
  auto in = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* xi = in.data() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += xi[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      normed[i * c + j] = (xi[j] - mu) * inv_std[i];
      v[i * c + j] = normed[i * c + j] * gv[j] + bv[j];
    }
  }
  return make_result(x.shape(), std::move(v), {x, gain, bias},
                     [normed = std::move(normed), inv_std = std::move(inv_std), r, c](Node& out) {
                       auto& px = parent(out, 0);
                       auto& pg = parent(out, 1);
                       auto& pb = parent(out, 2);
                       const double inv_c = 1.0 / static_cast<double>(c);
                       for (std::size_t i = 0; i < r; ++i) {
                         const double* g = out.grad.data() + i * c;
                         const double* nh = normed.data() + i * c;
                         if (wants(pg))
                           for (std::size_t j = 0; j < c; ++j) pg.grad[j] += g[j] * nh[j];
                         if (wants(pb))
                           for (std::size_t j = 0; j < c; ++j) pb.grad[j] += g[j];
                         if (!wants(px)) continue;
                         // dx = inv_std * (dn - mean(dn) - n * mean(dn * n)), dn = g * gain
                         double m1 = 0.0, m2 = 0.0;
                         for (std::size_t j = 0; j < c; ++j) {
                           const double dn = g[j] * pg.value[j];
                           m1 += dn;
                           m2 += dn * nh[j];
                         }
                         m1 *= inv_c;
                         m2 *= inv_c;
                         for (std::size_t j = 0; j < c; ++j) {
                           const double dn = g[j] * pg.value[j];
                           px.grad[i * c + j] += inv_std[i] * (dn - m1 - nh[j] * m2);
                         }
                       }
                     });
}

}  // namespace uanet::ad
