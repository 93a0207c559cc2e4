#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rowpomdp/planner.hpp"

namespace rowpomdp {

/// Small finite MDP: sparse transitions and expected rewards per
/// (state, action). Terminal states have value zero.
struct CompactModel {
  int n_states = 0;
  std::vector<std::array<std::vector<std::pair<int, double>>, kNumActions>> transitions;
  std::vector<std::array<double, kNumActions>> rewards;
  std::vector<bool> terminal;

  /// Row sums within 1e-9 of one, indices in range.
  void check() const;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QTable {
  std::vector<std::array<double, kNumActions>> q;
  int iterations = 0;
  double residual = 0.0;

  double value(int s) const;
  Action best_action(int s) const;
};

/// Value iteration until the largest Q change is below `tol`. Throws
/// NonConvergence after `max_iterations` sweeps.
QTable qmdp_solve(const CompactModel& m, double gamma, double tol = 1e-10, int max_iterations = 100000);

// Compact intersection abstraction: ego phase x priority x pedestrian in
// path x active conflict = 4 x 3 x 2 x 2 = 48 states.
enum class Priority : std::uint8_t { EgoFirst = 0, OtherFirst = 1, Tie = 2 };

struct CompactState {
  Phase phase = Phase::Approaching;
  Priority priority = Priority::EgoFirst;
  bool pedestrian = false;
  bool conflict = false;
  friend bool operator==(const CompactState&, const CompactState&) = default;
};

inline constexpr int kCompactStates = 48;

int compact_index(const CompactState& c);
CompactState compact_from_index(int i);
CompactState encode_compact(const WorldState& s);

/// Rule-of-the-road action in the compact space; agrees with
/// ground_truth_action on encoded states.
Action compact_safe_action(const CompactState& c);

/// Per-step probabilities of the compact abstraction.
struct CompactDynamics {
  double arrive_go = 0.35;
  double arrive_yield = 0.2;
  double arrive_stop = 0.02;
  double clear_go = 0.4;
  double ped_leave = 0.35;
  double ped_appear = 0.03;
  double conflict_leave = 0.45;
  double conflict_appear = 0.08;
  double other_first_resolve = 0.3;
  double tie_resolve = 0.5;
  double lose_priority_go = 0.02;
  double lose_priority_wait = 0.08;
  double collide_ped = 0.9;
  double collide_conflict = 0.8;
  double collide_other_first = 0.6;
  double collide_tie = 0.5;
  double collide_in_box_conflict = 0.2;
};

CompactModel intersection_compact_model(const RewardWeights& w, const CompactDynamics& dyn = {});

class QmdpPlanner final : public Planner {
 public:
  QmdpPlanner(const SimConfig& sim, const CompactDynamics& dyn = {});
  std::string_view name() const override { return "qmdp"; }
  bool uses_belief() const override { return true; }
  PlannerDecision decide(const PlannerInput& in) override;
  const QTable& table() const { return table_; }

 private:
  QTable table_;
};

/// Belief-weighted Q values: sum_i w_i Q(encode(s_i), a).
std::array<double, kNumActions> qmdp_action_values(const Belief& b, const QTable& q);

}  // namespace rowpomdp
