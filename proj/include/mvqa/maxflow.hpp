#pragma once

#include <limits>
#include <queue>
#include <vector>

namespace mvqa {

// Dinic max-flow on small integral networks (admissibility checks and
// representative-world construction).
class MaxFlow {
 public:
  explicit MaxFlow(int n) : graph_(n) {}

  int add_edge(int from, int to, int cap) {
    int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap, 0});
    edges_.push_back({from, 0, 0});
    graph_[from].push_back(id);
    graph_[to].push_back(id + 1);
    return id;
  }

  int flow_on(int edge_id) const { return edges_[edge_id].flow; }

  int run(int s, int t) {
    int total = 0;
    while (bfs(s, t)) {
      iter_.assign(graph_.size(), 0);
      while (int pushed = dfs(s, t, std::numeric_limits<int>::max())) total += pushed;
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    int cap;
    int flow;
  };

  bool bfs(int s, int t) {
    level_.assign(graph_.size(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int id : graph_[v]) {
        const Edge& e = edges_[id];
        if (e.cap - e.flow > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  int dfs(int v, int t, int limit) {
    if (v == t) return limit;
    for (size_t& i = iter_[v]; i < graph_[v].size(); ++i) {
      int id = graph_[v][i];
      Edge& e = edges_[id];
      if (e.cap - e.flow > 0 && level_[e.to] == level_[v] + 1) {
        int pushed = dfs(e.to, t, std::min(limit, e.cap - e.flow));
        if (pushed > 0) {
          e.flow += pushed;
          edges_[id ^ 1].flow -= pushed;
          return pushed;
        }
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> graph_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<size_t> iter_;
};

}  // namespace mvqa
