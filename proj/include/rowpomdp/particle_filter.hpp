#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "rowpomdp/rng.hpp"

namespace rowpomdp::pf {

/// Scales weights to sum to one; returns the pre-normalization total.
/// A zero (or non-finite) total leaves the weights untouched.
inline double normalize(std::span<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total > 0.0 && std::isfinite(total)) {
    for (double& x : w) x /= total;
  }
  return total;
}

inline double effective_sample_size(std::span<const double> w) {
  double sq = 0.0;
  for (double x : w) sq += x * x;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

/// Systematic (low-variance) resampling of normalized weights.
inline std::vector<std::size_t> systematic_resample(std::span<const double> w, std::size_t n, Rng& rng) {
  std::vector<std::size_t> picks;
  picks.reserve(n);
  if (w.empty() || n == 0) return picks;
  const double step = 1.0 / static_cast<double>(n);
  double u = rng.uniform() * step;
  double c = w[0];
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    while (u > c && i + 1 < w.size()) c += w[++i];
    picks.push_back(i);
    u += step;
  }
  return picks;
}

/// Multiplies weights by exp(log_lik - max) and normalizes. Returns the
/// largest log-likelihood, or -inf when every particle was ruled out.
inline double reweight_log(std::span<double> w, std::span<const double> log_lik) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) best = std::max(best, log_lik[i]);
  }
  if (!std::isfinite(best)) return best;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::exp(log_lik[i] - best);
  if (normalize(w) <= 0.0) return -std::numeric_limits<double>::infinity();
  return best;
}

/// Weighted particle approximation of a distribution over `State`.
template <class State>
struct ParticleSet {
  std::vector<State> states;
  std::vector<double> weights;

  std::size_t size() const { return states.size(); }

  /// Propagate each particle through `step(state, rng)`, reweight by
  /// `likelihood(state)` (a probability, not a log) and normalize. Weights are
  /// left un-resampled so they can be inspected.
  template <class Step, class Likelihood>
  bool predict_and_weight(Step&& step, Likelihood&& likelihood, Rng& rng) {
    for (auto& s : states) s = step(s, rng);
    for (std::size_t i = 0; i < states.size(); ++i) weights[i] *= likelihood(states[i]);
    return normalize(weights) > 0.0;
  }

  void resample(std::size_t n, Rng& rng) {
    auto picks = systematic_resample(weights, n, rng);
    std::vector<State> next;
    next.reserve(n);
    for (std::size_t i : picks) next.push_back(states[i]);
    states = std::move(next);
    weights.assign(n, 1.0 / static_cast<double>(n));
  }

  void resample_if_degenerate(Rng& rng, double threshold_fraction = 0.5) {
    if (effective_sample_size(weights) < threshold_fraction * static_cast<double>(size())) {
      resample(size(), rng);
    }
  }
};

}  // namespace rowpomdp::pf
