#include "uanet/decode/decoders.hpp"

#include <algorithm>
#include <cmath>

#include "uanet/autodiff/ops.hpp"
#include "uanet/core/error.hpp"

namespace uanet::decode {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shapes(const MatrixView& e, const MatrixView& t) {
  if (e.rows == 0) throw ContractError("decoder input has no tokens");
  if (e.values.size() != e.rows * e.cols) throw DimensionError("emission view size mismatch");
  if (t.rows != e.cols + 2 || t.cols != e.cols + 2 || t.values.size() != t.rows * t.cols)
    throw DimensionError("transitions must be [(C+2) x (C+2)] for C = " + std::to_string(e.cols));
}

double log_sum_exp(const double* v, std::size_t n) {
  double m = kNegInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// alpha[t][c]: log-sum of scores of prefixes ending in c at t (emission included).
std::vector<double> forward_table(const MatrixView& e, const MatrixView& t) {
  const std::size_t n = e.rows, c = e.cols, s = start_state(c);
  std::vector<double> alpha(n * c), tmp(c);
  for (std::size_t j = 0; j < c; ++j) alpha[j] = t(s, j) + e(0, j);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t k = 0; k < c; ++k) tmp[k] = alpha[(i - 1) * c + k] + t(k, j);
      alpha[i * c + j] = log_sum_exp(tmp.data(), c) + e(i, j);
    }
  return alpha;
}

// beta[t][c]: log-sum of suffix scores after being in c at t (stop included).
std::vector<double> backward_table(const MatrixView& e, const MatrixView& t) {
  const std::size_t n = e.rows, c = e.cols, stop = stop_state(c);
  std::vector<double> beta(n * c), tmp(c);
  for (std::size_t j = 0; j < c; ++j) beta[(n - 1) * c + j] = t(j, stop);
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t k = 0; k < c; ++k) tmp[k] = t(j, k) + e(i + 1, k) + beta[(i + 1) * c + k];
      beta[i * c + j] = log_sum_exp(tmp.data(), c);
    }
  return beta;
}

}  // namespace

double path_score(const MatrixView& e, const MatrixView& t, std::span<const std::size_t> path) {
  check_shapes(e, t);
  if (path.size() != e.rows) throw ContractError("path length differs from emissions");
  const std::size_t c = e.cols;
  double s = t(start_state(c), path[0]);
  for (std::size_t i = 0; i < path.size(); ++i) {
    s += e(i, path[i]);
    if (i > 0) s += t(path[i - 1], path[i]);
  }
  return s + t(path.back(), stop_state(c));
}

PathResult viterbi(const MatrixView& e, const MatrixView& t) {
  check_shapes(e, t);
  const std::size_t n = e.rows, c = e.cols;
  std::vector<double> score(c), next(c);
  std::vector<std::size_t> back(n * c, 0);
  for (std::size_t j = 0; j < c; ++j) score[j] = t(start_state(c), j) + e(0, j);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t arg = 0;
      double best = score[0] + t(0, j);
      for (std::size_t k = 1; k < c; ++k) {
        const double v = score[k] + t(k, j);
        if (v > best) best = v, arg = k;
      }
      next[j] = best + e(i, j);
      back[i * c + j] = arg;
    }
    score.swap(next);
  }
  std::size_t last = 0;
  double best = score[0] + t(0, stop_state(c));
  for (std::size_t j = 1; j < c; ++j) {
    const double v = score[j] + t(j, stop_state(c));
    if (v > best) best = v, last = j;
  }
  PathResult r;
  r.score = best;
  r.path.resize(n);
  r.path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) r.path[i - 1] = back[i * c + r.path[i]];
  return r;
}

double crf_log_partition(const MatrixView& e, const MatrixView& t) {
  check_shapes(e, t);
  const std::size_t n = e.rows, c = e.cols;
  const auto alpha = forward_table(e, t);
  std::vector<double> tmp(c);
  for (std::size_t j = 0; j < c; ++j) tmp[j] = alpha[(n - 1) * c + j] + t(j, stop_state(c));
  return log_sum_exp(tmp.data(), c);
}

ad::Tensor crf_nll(const ad::Tensor& emissions, const ad::Tensor& transitions, std::span<const std::size_t> gold) {
  const MatrixView e{emissions.data(), emissions.rows(), emissions.cols()};
  const MatrixView t{transitions.data(), transitions.rows(), transitions.cols()};
  check_shapes(e, t);
  if (gold.size() != e.rows) throw ContractError("gold length differs from emissions");
  for (auto g : gold)
    if (g >= e.cols) throw ContractError("gold label out of range");
  const double log_z = crf_log_partition(e, t);
  const double loss = log_z - path_score(e, t, gold);
  std::vector<std::size_t> g(gold.begin(), gold.end());
  return ad::make_result({1, 1}, {loss}, {emissions, transitions}, [g, log_z](ad::detail::Node& out) {
    auto& pe = *out.parents[0];
    auto& pt = *out.parents[1];
    const double up = out.grad[0];
    const std::size_t n = pe.shape[0], c = pe.shape[1], w = c + 2;
    const MatrixView e{pe.value, n, c};
    const MatrixView t{pt.value, w, w};
    const auto alpha = forward_table(e, t);
    const auto beta = backward_table(e, t);
    if (pe.requires_grad) {
      pe.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j)
          pe.grad[i * c + j] += up * std::exp(alpha[i * c + j] + beta[i * c + j] - log_z);
        pe.grad[i * c + g[i]] -= up;
      }
    }
    if (pt.requires_grad) {
      pt.ensure_grad();
      const std::size_t s = start_state(c), stop = stop_state(c);
      for (std::size_t j = 0; j < c; ++j) {
        pt.grad[s * w + j] += up * std::exp(t(s, j) + e(0, j) + beta[j] - log_z);
        pt.grad[j * w + stop] += up * std::exp(alpha[(n - 1) * c + j] + t(j, stop) - log_z);
      }
      for (std::size_t i = 1; i < n; ++i)
        for (std::size_t a = 0; a < c; ++a)
          for (std::size_t b = 0; b < c; ++b)
            pt.grad[a * w + b] +=
                up * std::exp(alpha[(i - 1) * c + a] + t(a, b) + e(i, b) + beta[i * c + b] - log_z);
      pt.grad[s * w + g[0]] -= up;
      for (std::size_t i = 1; i < n; ++i) pt.grad[g[i - 1] * w + g[i]] -= up;
      pt.grad[g[n - 1] * w + stop] -= up;
    }
  });
}

std::vector<std::size_t> argmax_rows(const MatrixView& m) {
  std::vector<std::size_t> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols; ++j)
      if (m(i, j) > m(i, best)) best = j;
    out[i] = best;
  }
  return out;
}

void threshold_mix_into(std::span<const std::size_t> draft, std::span<const double> uncertainty,
                        std::span<const std::size_t> refined, double gamma, std::span<std::size_t> out) {
  const std::size_t n = draft.size();
  if (uncertainty.size() != n || refined.size() != n || out.size() != n)
    throw ContractError("threshold_mix: lengths differ (" + std::to_string(n) + ", " +
                        std::to_string(uncertainty.size()) + ", " + std::to_string(refined.size()) + ")");
  for (std::size_t i = 0; i < n; ++i) out[i] = uncertainty[i] > gamma ? refined[i] : draft[i];
}

std::vector<std::size_t> threshold_mix(std::span<const std::size_t> draft, std::span<const double> uncertainty,
                                       std::span<const std::size_t> refined, double gamma) {
  std::vector<std::size_t> out(draft.size());
  threshold_mix_into(draft, uncertainty, refined, gamma, out);
  return out;
}

std::vector<std::size_t> threshold_mix(const model::DraftPrediction& draft, const model::RefinedPrediction& refined,
                                       double gamma) {
  return threshold_mix(draft.draft, draft.uncertainty, refined.refined, gamma);
}

std::vector<double> legality_transitions(const data::TagScheme& scheme) {
  const std::size_t c = scheme.size(), w = c + 2;
  std::vector<double> t(w * w, kNegInf);
  for (std::size_t a = 0; a < c; ++a) {
    if (scheme.legal_start(a)) t[start_state(c) * w + a] = 0.0;
    if (scheme.legal_end(a)) t[a * w + stop_state(c)] = 0.0;
    for (std::size_t b = 0; b < c; ++b)
      if (scheme.legal_transition(a, b)) t[a * w + b] = 0.0;
  }
  return t;
}

std::vector<std::size_t> legalize(const MatrixView& probs, const data::TagScheme& scheme) {
  if (probs.cols != scheme.size()) throw DimensionError("legalize: distribution width differs from label count");
  std::vector<double> logp(probs.values.size());
  for (std::size_t k = 0; k < logp.size(); ++k)
    logp[k] = probs.values[k] > 0.0 ? std::log(probs.values[k]) : -1e300;
  const auto t = legality_transitions(scheme);
  const std::size_t w = scheme.size() + 2;
  return viterbi({logp, probs.rows, probs.cols}, {t, w, w}).path;
}

}  // namespace uanet::decode
