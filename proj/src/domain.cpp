#include "rowpomdp/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace rowpomdp {

std::string_view to_string(Approach a) {
  static constexpr std::array<std::string_view, 4> kNames{"north", "east", "south", "west"};
  return kNames[index(a)];
}

std::string_view to_string(Intent i) {
  static constexpr std::array<std::string_view, 3> kNames{"straight", "left", "right"};
  return kNames[index(i)];
}

std::string_view to_string(Action a) {
  static constexpr std::array<std::string_view, 3> kNames{"STOP", "YIELD", "GO"};
  return kNames[index(a)];
}

std::string_view to_string(Phase p) {
  static constexpr std::array<std::string_view, 4> kNames{"approaching", "at_line",
                                                          "in_intersection", "cleared"};
  return kNames[index(p)];
}

namespace {

template <class E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& values) {
  for (E v : values) {
    std::string_view name = to_string(v);
    if (name.size() != s.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(name[i])) !=
          std::tolower(static_cast<unsigned char>(s[i]))) {
        same = false;
        break;
      }
    }
    if (same) return v;
  }
  return std::nullopt;
}

constexpr int entry_point(Approach a) { return 2 * index(a); }
constexpr int exit_point(Approach a) { return 2 * index(a) + 1; }

// Strictly inside the clockwise open arc (from, to).
bool on_arc(int from, int to, int p) {
  int span = (to - from + 8) % 8;
  int off = (p - from + 8) % 8;
  return off > 0 && off < span;
}

// u must go before v when both arrive on the same step.
bool tie_precedence(const VehicleState& u, const VehicleState& v) {
  if (u.approach == right_neighbor(v.approach)) return true;
  if (v.intent == Intent::Left && u.approach == opposite(v.approach) &&
      u.intent != Intent::Left) {
    return true;
  }
  return false;
}

}  // namespace

std::optional<Approach> parse_approach(std::string_view s) { return parse_enum(s, kApproaches); }
std::optional<Intent> parse_intent(std::string_view s) { return parse_enum(s, kIntents); }
std::optional<Action> parse_action(std::string_view s) { return parse_enum(s, kActions); }
std::optional<Phase> parse_phase(std::string_view s) {
  static constexpr std::array<Phase, 4> kPhases{Phase::Approaching, Phase::AtLine,
                                                Phase::InIntersection, Phase::Cleared};
  return parse_enum(s, kPhases);
}

bool paths_conflict(Path a, Path b) {
  if (a.approach == b.approach) return true;  // shared entry lane
  const int a0 = entry_point(a.approach);
  const int a1 = exit_point(exit_leg(a.approach, a.intent));
  const int b0 = entry_point(b.approach);
  const int b1 = exit_point(exit_leg(b.approach, b.intent));
  if (a1 == b1) return true;  // merge into the same exit lane
  return on_arc(a0, a1, b0) != on_arc(a0, a1, b1);
}

const VehicleState* WorldState::find(int id) const {
  if (ego.id == id) return &ego;
  for (const auto& v : others) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

bool RewardWeights::valid() const {
  return collision_penalty < unsafe_penalty && unsafe_penalty < 0.0 && progress_reward > 0.0 &&
         step_cost <= 0.0 && unsafe_penalty <= hesitation_penalty && hesitation_penalty <= 0.0 &&
         std::isfinite(collision_penalty);
}

int predicted_arrival_step(const VehicleState& v, int timestep) {
  if (v.phase != Phase::Approaching) return v.arrival_step;
  if (v.speed <= 0.0) return std::numeric_limits<int>::max() / 4;
  // Small tolerance so that exact multiples do not round up through noise.
  return timestep + static_cast<int>(std::ceil(v.distance_to_line / v.speed - 1e-9));
}

void assign_arrival_ranks(WorldState& s) {
  std::vector<VehicleState*> all;
  all.reserve(s.others.size() + 1);
  all.push_back(&s.ego);
  for (auto& v : s.others) all.push_back(&v);
  for (auto* v : all) v->arrival_step = predicted_arrival_step(*v, s.timestep);

  std::sort(all.begin(), all.end(), [](const VehicleState* a, const VehicleState* b) {
    if (a->arrival_step != b->arrival_step) return a->arrival_step < b->arrival_step;
    return a->id < b->id;
  });

  int rank = 1;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j]->arrival_step == all[i]->arrival_step) ++j;
    std::vector<VehicleState*> group(all.begin() + static_cast<long>(i),
                                     all.begin() + static_cast<long>(j));
    while (!group.empty()) {
      // First vehicle (by id) that no remaining tied vehicle must precede;
      // a precedence cycle falls back to the lowest id.
      auto pick = group.begin();
      for (auto it = group.begin(); it != group.end(); ++it) {
        bool blocked = std::any_of(group.begin(), group.end(), [&](const VehicleState* u) {
          return u != *it && tie_precedence(*u, **it);
        });
        if (!blocked) {
          pick = it;
          break;
        }
      }
      (*pick)->arrival_rank = rank++;
      group.erase(pick);
    }
    i = j;
  }
}

}  // namespace rowpomdp
