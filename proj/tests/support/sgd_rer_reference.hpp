#pragma once

// Standalone single-agent buffered reverse-replay estimator, written
// directly against the documented arithmetic conventions (ascending-index
// dot products, precomputed 2*gamma, explicit tail division) and sharing
// no code with the library implementation. Used to pin the m = 1 reduction
// bitwise.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sgd_rer_reference {

struct Result {
  // One d*d row-major tail-average matrix per completed buffer.
  std::vector<std::vector<double>> tail_averages;
  double gamma = 0.0;
};

inline double radius(std::span<const double> states, int d, long long horizon) {
  long long window = (long long)(2.0 * std::log((double)(horizon)));
  double sum = 0.0;
  for (long long t = 0; t < window; ++t) {
    double sq = 0.0;
    for (int j = 0; j < d; ++j) {
      double v = states[size_t(t) * d + j];
      sq += v * v;
    }
    sum += std::sqrt(sq);
  }
  return sum;
}

/// Runs on states x_0..x_T (row-major (T+1) x d) with buffer block
/// S = B + u: per buffer t, updates on pair (x_cur, x_next) for i = 0..B-1
/// where the regressor x_cur is state S*t + (S-2) - i and the target
/// x_next is its successor in time, then folds the end-of-buffer iterate
/// into a running average.
inline Result run(std::span<const double> states, int d, long long horizon, long long B,
                  long long u) {
  long long S = B + u;
  long long N = horizon / S;

  Result out;
  out.gamma = 1.0 / (2.0 * radius(states, d, horizon));
  const double c = 2.0 * out.gamma;

  std::vector<double> est(size_t(d) * d, 0.0);
  std::vector<double> tail_sum(size_t(d) * d, 0.0);

  for (long long t = 0; t < N; ++t) {
    for (long long i = 0; i < B; ++i) {
      const double* cur = states.data() + size_t(S * t + (S - 2) - i) * d;
      const double* nxt = cur + d;
      for (int row = 0; row < d; ++row) {
        double r = 0.0;
        for (int j = 0; j < d; ++j) r += est[size_t(row) * d + j] * cur[j];
        r -= nxt[row];
        double cr = c * r;
        for (int j = 0; j < d; ++j) est[size_t(row) * d + j] -= cr * cur[j];
      }
    }
    std::vector<double> avg(size_t(d) * d);
    for (size_t k = 0; k < est.size(); ++k) {
      tail_sum[k] += est[k];
      avg[k] = tail_sum[k] / double(t + 1);
    }
    out.tail_averages.push_back(std::move(avg));
  }
  return out;
}

}  // namespace sgd_rer_reference
