#pragma once

#include <deque>
#include <limits>
#include <utility>
#include <vector>

namespace mvqa {

// Successive-shortest-path min-cost flow with unit augmentations. Shortest
// paths come from a label-correcting SPFA pass, so negative arc costs are
// fine (KL marginal costs can be negative); the initial network is acyclic
// and exact shortest-path augmentation keeps the residual free of negative
// cycles.
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : graph_(n) {}

  int add_edge(int from, int to, int cap, double cost) {
    int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap, cost});
    edges_.push_back({from, 0, -cost});
    graph_[from].push_back(id);
    graph_[to].push_back(id + 1);
    return id;
  }

  int flow_on(int id) const { return initial_cap_of(id) - edges_[id].cap; }

  // Pushes up to `want` units one at a time; returns (units pushed, cost).
  std::pair<int, double> run(int s, int t, int want) {
    int pushed = 0;
    double total_cost = 0.0;
    while (pushed < want) {
      if (!shortest_path(s, t)) break;
      // walk back, capacity is >= 1 on every residual arc by construction
      int v = t;
      while (v != s) {
        int id = parent_edge_[v];
        edges_[id].cap -= 1;
        edges_[id ^ 1].cap += 1;
        v = edges_[id ^ 1].to;
      }
      total_cost += dist_[t];
      ++pushed;
    }
    return {pushed, total_cost};
  }

 private:
  struct Edge {
    int to;
    int cap;  // residual capacity
    double cost;
  };

  int initial_cap_of(int id) const {
    // forward edges sit at even ids; residual pair sums to the initial cap
    return edges_[id].cap + edges_[id ^ 1].cap;
  }

  bool shortest_path(int s, int t) {
    const double inf = std::numeric_limits<double>::infinity();
    dist_.assign(graph_.size(), inf);
    parent_edge_.assign(graph_.size(), -1);
    in_queue_.assign(graph_.size(), false);
    dist_[s] = 0.0;
    std::deque<int> queue{s};
    in_queue_[s] = true;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      in_queue_[v] = false;
      for (int id : graph_[v]) {
        const Edge& e = edges_[id];
        if (e.cap <= 0) continue;
        double cand = dist_[v] + e.cost;
        if (cand < dist_[e.to] - 1e-15) {
          dist_[e.to] = cand;
          parent_edge_[e.to] = id;
          if (!in_queue_[e.to]) {
            in_queue_[e.to] = true;
            queue.push_back(e.to);
          }
        }
      }
    }
    return dist_[t] < inf;
  }

  std::vector<std::vector<int>> graph_;
  std::vector<Edge> edges_;
  std::vector<double> dist_;
  std::vector<int> parent_edge_;
  std::vector<bool> in_queue_;
};

}  // namespace mvqa
