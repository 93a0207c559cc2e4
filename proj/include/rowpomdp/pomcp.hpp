#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rowpomdp/particle_filter.hpp"
#include "rowpomdp/search.hpp"

namespace rowpomdp {

struct PomcpConfig {
  int n_simulations = 150;
  int max_depth = 6;
  double exploration = 50.0;  // UCB constant, on the reward scale

  void validate() const {
    if (n_simulations < 1) throw std::invalid_argument("pomcp: n_simulations must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("pomcp: max_depth must be >= 1");
    if (!(exploration >= 0.0)) throw std::invalid_argument("pomcp: exploration must be >= 0");
  }
};

struct PomcpResult {
  Action action = Action::Stop;
  std::array<int, kNumActions> root_visits{};
  std::array<double, kNumActions> root_values{};
  int simulations = 0;
  int max_depth_reached = 0;
  std::size_t tree_nodes = 0;
};

/// Monte-Carlo tree search over histories with root particles drawn from
/// the belief. A fresh tree is built per decision.
template <SearchModel Model>
class Pomcp {
 public:
  using State = typename Model::State;

  Pomcp(const Model& model, PomcpConfig cfg) : model_(model), cfg_(cfg) { cfg_.validate(); }

  PomcpResult plan(std::span<const State> particles, std::span<const double> weights, Rng& rng) {
    if (particles.empty() || particles.size() != weights.size()) {
      throw std::invalid_argument("pomcp: particle/weight mismatch");
    }
    nodes_.clear();
    nodes_.emplace_back();
    max_depth_ = 0;
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = acc += weights[i];

    for (int n = 0; n < cfg_.n_simulations; ++n) {
      const double u = rng.uniform() * acc;
      const auto i = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                           cdf.size() - 1);
      simulate(particles[i], 0, 0, rng);
    }

    PomcpResult r;
    r.simulations = cfg_.n_simulations;
    r.tree_nodes = nodes_.size();
    r.max_depth_reached = max_depth_;
    const Node& root = nodes_[0];
    for (int a = 0; a < kNumActions; ++a) {
      r.root_visits[a] = root.edges[a].visits;
      r.root_values[a] = root.edges[a].value;
    }
    Action best = Action::Stop;
    for (Action a : kActions) {
      const auto& e = root.edges[index(a)];
      const auto& b = root.edges[index(best)];
      if (e.visits > b.visits || (e.visits == b.visits && e.value > b.value)) best = a;
    }
    r.action = best;
    return r;
  }

 private:
  struct Edge {
    int visits = 0;
    double value = 0.0;
    std::vector<std::pair<std::uint64_t, int>> children;  // obs key -> node
  };
  struct Node {
    int visits = 0;
    bool expanded = false;
    std::array<Edge, kNumActions> edges;
  };

  int child(int node, int a, std::uint64_t key) {
    for (auto [k, c] : nodes_[node].edges[a].children) {
      if (k == key) return c;
    }
    const int c = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[node].edges[a].children.emplace_back(key, c);
    return c;
  }

  int select(const Node& n) const {
    for (int a = 0; a < kNumActions; ++a) {
      if (n.edges[a].visits == 0) return a;
    }
    const double log_n = std::log(static_cast<double>(n.visits));
    int best = 0;
    double best_score = -1e300;
    for (int a = 0; a < kNumActions; ++a) {
      const auto& e = n.edges[a];
      const double score = e.value + cfg_.exploration * std::sqrt(log_n / e.visits);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  double rollout(State s, int depth, Rng& rng) {
    double total = 0.0;
    double discount = 1.0;
    while (depth < cfg_.max_depth && !model_.is_terminal(s)) {
      const Action a = model_.rollout_action(s, rng);
      auto out = model_.step(s, a, rng);
      total += discount * out.reward;
      if (out.terminal) break;
      discount *= model_.discount();
      s = std::move(out.next);
      ++depth;
    }
    return total;
  }

  double simulate(const State& s, int node, int depth, Rng& rng) {
    max_depth_ = std::max(max_depth_, depth);
    if (depth >= cfg_.max_depth || model_.is_terminal(s)) return 0.0;
    if (!nodes_[node].expanded && node != 0) {
      nodes_[node].expanded = true;
      nodes_[node].visits += 1;
      return rollout(s, depth, rng);
    }
    nodes_[node].expanded = true;
    const int a = select(nodes_[node]);
    auto out = model_.step(s, kActions[a], rng);
    double ret = out.reward;
    if (!out.terminal) {
      const int c = child(node, a, out.obs_key);
      ret += model_.discount() * simulate(out.next, c, depth + 1, rng);
    }
    Node& n = nodes_[node];
    n.visits += 1;
    auto& e = n.edges[a];
    e.visits += 1;
    e.value += (ret - e.value) / e.visits;
    return ret;
  }

  const Model& model_;
  PomcpConfig cfg_;
  std::vector<Node> nodes_;
  int max_depth_ = 0;
};

}  // namespace rowpomdp
