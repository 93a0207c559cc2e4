#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rowpomdp/search.hpp"

namespace rowpomdp {

struct DespotConfig {
  int n_scenarios = 32;
  int max_depth = 4;
  double lambda = 0.01;        // regularization per policy-tree node
  double xi = 0.95;            // target gap fraction at the root
  int max_trials = 60;         // deterministic search budget
  int rollout_horizon = 40;    // default-policy rollouts stop at this depth

  void validate() const {
    if (n_scenarios < 1) throw std::invalid_argument("despot: n_scenarios must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("despot: max_depth must be >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("despot: lambda must be >= 0");
    if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("despot: xi must lie in (0, 1]");
    if (max_trials < 1) throw std::invalid_argument("despot: max_trials must be >= 1");
    if (rollout_horizon < max_depth) throw std::invalid_argument("despot: rollout_horizon must be >= max_depth");
  }
};

struct DespotResult {
  Action action = Action::Stop;
  std::array<double, kNumActions> root_lower{};  // regularized
  double lower = 0.0;
  double upper = 0.0;
  int trials = 0;
  std::size_t tree_nodes = 0;
  int bound_violations = 0;  // nodes seen with lower > upper
};

/// Sparse scenario tree search. Each scenario fixes a start state and a
/// random stream per depth, so every policy is evaluated on the same
/// determinized futures.
template <BoundedSearchModel Model>
class Despot {
 public:
  using State = typename Model::State;

  Despot(const Model& model, DespotConfig cfg) : model_(model), cfg_(cfg) { cfg_.validate(); }

  DespotResult plan(std::span<const State> particles, std::span<const double> weights, Rng& rng) {
    if (particles.empty() || particles.size() != weights.size()) {
      throw std::invalid_argument("despot: particle/weight mismatch");
    }
    nodes_.clear();
    scenarios_.clear();
    violations_ = 0;
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = acc += weights[i];
    Node root;
    root.depth = 0;
    for (int k = 0; k < cfg_.n_scenarios; ++k) {
      const double u = rng.uniform() * acc;
      const auto i = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                           cdf.size() - 1);
      scenarios_.push_back(rng.next_u64());
      root.particles.push_back({particles[i], k});
    }
    nodes_.push_back(std::move(root));
    init_bounds(0);

    DespotResult r;
    expand(0);
    backup(0);
    r.trials = 1;
    while (r.trials < cfg_.max_trials && gap(0) > 1e-9) {
      trial();
      ++r.trials;
    }
    const Node& n = nodes_[0];
    Action best = Action::Stop;
    for (Action a : kActions) {
      r.root_lower[index(a)] = n.branches[index(a)].mu;
      if (n.branches[index(a)].mu > n.branches[index(best)].mu) best = a;
    }
    r.action = best;
    r.lower = n.lower;
    r.upper = n.upper;
    r.tree_nodes = nodes_.size();
    r.bound_violations = violations_;
    return r;
  }

 private:
  struct Particle {
    State state;
    int scenario;
  };
  struct Branch {
    double reward = 0.0;  // weighted, discounted immediate reward
    std::vector<int> children;
    double lower = 0.0;
    double upper = 0.0;
    double mu = 0.0;
  };
  struct Node {
    int depth = 0;
    int parent = -1;
    std::vector<Particle> particles;
    bool expanded = false;
    bool closed = false;  // every scenario terminated
    double default_lower = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double mu = 0.0;
    std::array<Branch, kNumActions> branches;
  };

  static constexpr std::uint64_t kStepStream = 0x73746570ULL;
  static constexpr std::uint64_t kPolicyStream = 0x706f6c69ULL;

  Rng stream(int scenario, std::uint64_t tag, int depth) const {
    return Rng(derive_seed(scenarios_[scenario], tag, static_cast<std::uint64_t>(depth)));
  }

  double weight_at(int depth) const {
    double g = 1.0;
    for (int i = 0; i < depth; ++i) g *= model_.discount();
    return g / static_cast<double>(cfg_.n_scenarios);
  }

  double default_value(State s, int scenario, int depth) const {
    double total = 0.0;
    double discount = 1.0;
    for (int i = 0; depth + i < cfg_.rollout_horizon && !model_.is_terminal(s); ++i) {
      Rng pr = stream(scenario, kPolicyStream, depth + i);
      const Action a = model_.default_action(s, pr);
      Rng sr = stream(scenario, kStepStream, depth + i);
      auto out = model_.step(s, a, sr);
      total += discount * out.reward;
      if (out.terminal) break;
      discount *= model_.discount();
      s = std::move(out.next);
    }
    return total;
  }

  void init_bounds(int id) {
    Node& n = nodes_[id];
    const double w = weight_at(n.depth);
    double lo = 0.0;
    double up = 0.0;
    bool all_terminal = true;
    const bool at_horizon = n.depth >= cfg_.rollout_horizon;
    for (const auto& p : n.particles) {
      if (model_.is_terminal(p.state) || at_horizon) continue;
      all_terminal = false;
      lo += w * default_value(p.state, p.scenario, n.depth);
      up += w * model_.upper_bound(p.state);
    }
    n.closed = all_terminal;
    n.default_lower = lo;
    n.lower = lo;
    n.upper = up;
    n.mu = lo - cfg_.lambda;
    check(n);
  }

  void check(const Node& n) {
    if (n.lower > n.upper + 1e-9) ++violations_;
  }

  void expand(int id) {
    nodes_[id].expanded = true;
    const int depth = nodes_[id].depth;
    const double w = weight_at(depth);
    for (Action a : kActions) {
      std::vector<std::pair<std::uint64_t, std::vector<Particle>>> groups;
      double reward = 0.0;
      for (const auto& p : nodes_[id].particles) {
        if (model_.is_terminal(p.state)) continue;
        Rng sr = stream(p.scenario, kStepStream, depth);
        auto out = model_.step(p.state, a, sr);
        reward += w * out.reward;
        if (out.terminal) continue;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == out.obs_key; });
        if (it == groups.end()) {
          groups.push_back({out.obs_key, {}});
          it = groups.end() - 1;
        }
        it->second.push_back({std::move(out.next), p.scenario});
      }
      std::vector<int> children;
      for (auto& [key, ps] : groups) {
        Node c;
        c.depth = depth + 1;
        c.parent = id;
        c.particles = std::move(ps);
        const int cid = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(c));
        init_bounds(cid);
        children.push_back(cid);
      }
      Branch& b = nodes_[id].branches[index(a)];
      b.reward = reward;
      b.children = std::move(children);
    }
  }

  void refresh(int id) {
    Node& n = nodes_[id];
    if (!n.expanded) return;
    double best_lower = n.default_lower;
    double best_upper = -1e300;
    double best_mu = n.default_lower - cfg_.lambda;
    for (auto& b : n.branches) {
      b.lower = b.reward;
      b.upper = b.reward;
      b.mu = b.reward - cfg_.lambda;
      for (int c : b.children) {
        b.lower += nodes_[c].lower;
        b.upper += nodes_[c].upper;
        b.mu += nodes_[c].mu;
      }
      best_lower = std::max(best_lower, b.lower);
      best_upper = std::max(best_upper, b.upper);
      best_mu = std::max(best_mu, b.mu);
    }
    n.lower = best_lower;
    n.upper = best_upper;
    n.mu = best_mu;
    check(n);
  }

  void backup(int id) {
    for (int cur = id; cur >= 0; cur = nodes_[cur].parent) refresh(cur);
  }

  double gap(int id) const { return nodes_[id].upper - nodes_[id].mu; }

  double excess(int id) const {
    const double share = static_cast<double>(nodes_[id].particles.size()) / cfg_.n_scenarios;
    return gap(id) - cfg_.xi * share * gap(0);
  }

  void trial() {
    int cur = 0;
    while (nodes_[cur].depth < cfg_.max_depth && !nodes_[cur].closed && excess(cur) > 0.0) {
      if (!nodes_[cur].expanded) {
        expand(cur);
        backup(cur);
      }
      const Node& n = nodes_[cur];
      int a_best = 0;
      for (int a = 1; a < kNumActions; ++a) {
        if (n.branches[a].upper > n.branches[a_best].upper) a_best = a;
      }
      int next = -1;
      double next_excess = -1e300;
      for (int c : n.branches[a_best].children) {
        const double e = excess(c);
        if (e > next_excess) {
          next_excess = e;
          next = c;
        }
      }
      if (next < 0) break;
      cur = next;
    }
    backup(cur);
  }

  const Model& model_;
  DespotConfig cfg_;
  std::vector<Node> nodes_;
  std::vector<std::uint64_t> scenarios_;
  int violations_ = 0;
};

}  // namespace rowpomdp
