#pragma once

// Exhaustive enumeration over label paths; the oracle for Viterbi and the
// CRF partition function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace uanet::oracle {

// Calls f on every label sequence of length n over C labels, in
// lexicographic order.
template <class F>
void each_path(std::size_t n, std::size_t C, F&& f) {
  std::vector<std::size_t> p(n, 0);
  while (true) {
    f(p);
    std::size_t i = n;
    while (i > 0 && ++p[i - 1] == C) p[--i] = 0;
    if (i == 0) return;
  }
}

// Straight sum over emissions [n x C] and transitions [(C+2) x (C+2)] with
// start row C and stop column C+1. Independent of path_score.
inline double brute_score(const std::vector<double>& e, const std::vector<double>& t, std::size_t C,
                          const std::vector<std::size_t>& p) {
  const std::size_t S = C + 2;
  double s = t[C * S + p[0]] + t[p.back() * S + C + 1];
  for (std::size_t i = 0; i < p.size(); ++i) s += e[i * C + p[i]];
  for (std::size_t i = 1; i < p.size(); ++i) s += t[p[i - 1] * S + p[i]];
  return s;
}

inline double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity(), s = 0.0;
  for (double x : v) m = std::max(m, x);
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace uanet::oracle
