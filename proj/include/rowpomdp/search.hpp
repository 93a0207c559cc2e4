#pragma once

#include <concepts>
#include <cstdint>

#include "rowpomdp/domain.hpp"
#include "rowpomdp/rng.hpp"

namespace rowpomdp {

/// One generative-model step as seen by the tree searches.
template <class State>
struct StepOutcome {
  State next;
  std::uint64_t obs_key = 0;  // discretized observation used to branch the tree
  double reward = 0.0;
  bool terminal = false;
};

/// What POMCP needs from a model.
template <class M>
concept SearchModel = requires(const M& m, const typename M::State& s, Action a, Rng& rng) {
  { m.step(s, a, rng) } -> std::same_as<StepOutcome<typename M::State>>;
  { m.rollout_action(s, rng) } -> std::same_as<Action>;
  { m.discount() } -> std::convertible_to<double>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
};

/// DESPOT additionally needs an upper bound and a default policy.
template <class M>
concept BoundedSearchModel = SearchModel<M> && requires(const M& m, const typename M::State& s, Rng& rng) {
  { m.upper_bound(s) } -> std::convertible_to<double>;
  { m.default_action(s, rng) } -> std::same_as<Action>;
};

}  // namespace rowpomdp
