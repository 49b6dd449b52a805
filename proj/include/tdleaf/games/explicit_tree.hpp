// A game given by an explicit tree, used for hand-built search fixtures.
//
// Nodes carry a side to move, a feature vector and optionally a terminal
// reward. Edges carry an action label and one or more weighted outcomes;
// an edge with several outcomes is a chance node.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf::games {

class ExplicitTree {
 public:
  static constexpr bool kStochastic = false;

  using State = int;
  using Action = int;  // global edge index

  struct Node {
    std::string label;
    Side side = Side::Learner;
    FeatureVector features;
    bool terminal = false;
    Reward reward = 0.0;
    std::vector<int> edges;
  };

  struct Edge {
    int from = 0;
    std::string label;
    std::vector<std::pair<int, double>> outcomes;  // (child node, probability)
  };

  explicit ExplicitTree(std::size_t feature_count) : k_(feature_count) {}

  int add_node(std::string label, Side side, FeatureVector features) {
    if (features.size() != k_) throw Error("feature length mismatch for node " + label);
    nodes_.push_back({std::move(label), side, std::move(features), false, 0.0, {}});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_terminal(std::string label, Reward reward) {
    nodes_.push_back({std::move(label), Side::Learner, FeatureVector(k_, 0.0), true, reward, {}});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_edge(int from, int to) { return add_chance_edge(from, {{to, 1.0}}); }

  int add_chance_edge(int from, std::vector<std::pair<int, double>> outcomes) {
    if (nodes_.at(from).terminal) throw Error("terminal node " + nodes_[from].label + " cannot have moves");
    std::string label = nodes_.at(from).label + ">";
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      label += (i ? "|" : "") + nodes_.at(outcomes[i].first).label;
    edges_.push_back({from, std::move(label), std::move(outcomes)});
    nodes_[from].edges.push_back(static_cast<int>(edges_.size()) - 1);
    return static_cast<int>(edges_.size()) - 1;
  }

  const Node& node(int id) const { return nodes_.at(id); }
  Node& node(int id) { return nodes_.at(id); }
  const Edge& edge(int id) const { return edges_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }

  int find(std::string_view label) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].label == label) return static_cast<int>(i);
    throw Error("no node labelled " + std::string(label));
  }

  std::vector<Action> legal_actions(const State& s) const {
    if (node(s).terminal) return {};
    return node(s).edges;
  }

  std::vector<ChanceEvent> chance_events(const State&, const Action& a) const {
    const auto& e = edge(a);
    if (e.outcomes.size() == 1) return {kUnitEvent};
    std::vector<ChanceEvent> out;
    for (std::size_t i = 0; i < e.outcomes.size(); ++i)
      out.push_back({static_cast<int>(i), e.outcomes[i].second});
    return out;
  }

  State apply(const State& s, const Action& a, const ChanceEvent& ev = kUnitEvent) const {
    if (a < 0 || static_cast<std::size_t>(a) >= edges_.size() || edges_[a].from != s)
      throw Error("illegal action " + std::to_string(a) + " in state " + serialize(s));
    const auto& e = edges_[a];
    if (ev.outcome < 0 || static_cast<std::size_t>(ev.outcome) >= e.outcomes.size())
      throw Error("chance outcome " + std::to_string(ev.outcome) + " impossible on edge " + e.label);
    return e.outcomes[ev.outcome].first;
  }

  bool is_terminal(const State& s) const { return node(s).terminal; }
  Side side_to_move(const State& s) const { return node(s).side; }

  Reward terminal_reward(const State& s) const {
    if (!node(s).terminal) throw Error("reward undefined before termination: " + serialize(s));
    return node(s).reward;
  }

  std::size_t feature_count() const { return k_; }
  FeatureVector features(const State& s) const { return node(s).features; }

  std::string serialize(const State& s) const { return node(s).label; }
  std::string action_name(const Action& a) const { return edge(a).label; }

 private:
  std::size_t k_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

// The full-breadth three-ply tree used to illustrate minimax backup: root A
// (Learner), opponent nodes B and C, Learner nodes D..G, leaves H..O. Leaf i
// has the i-th unit feature vector, so with weights equal to the leaf scores
// each leaf evaluates to its score and its gradient is the unit vector.
// Each leaf has one move to a drawn terminal so that it is not itself terminal.
inline ExplicitTree figure1_tree() {
  ExplicitTree t(8);
  const FeatureVector zero(8, 0.0);
  const int a = t.add_node("A", Side::Learner, zero);
  const int b = t.add_node("B", Side::Opponent, zero);
  const int c = t.add_node("C", Side::Opponent, zero);
  t.add_edge(a, b);
  t.add_edge(a, c);
  const char* inner[4] = {"D", "E", "F", "G"};
  const char* leaves[8] = {"H", "I", "J", "K", "L", "M", "N", "O"};
  for (int i = 0; i < 4; ++i) {
    const int n = t.add_node(inner[i], Side::Learner, zero);
    t.add_edge(i < 2 ? b : c, n);
    for (int j = 0; j < 2; ++j) {
      FeatureVector f(8, 0.0);
      f[2 * i + j] = 1.0;
      const int leaf = t.add_node(leaves[2 * i + j], Side::Opponent, f);
      t.add_edge(n, leaf);
      t.add_edge(leaf, t.add_terminal(std::string("end") + leaves[2 * i + j], 0.0));
    }
  }
  return t;
}

inline std::vector<double> figure1_leaf_scores() { return {3, -9, -5, -6, 4, 2, -9, 5}; }

}  // namespace tdleaf::games
