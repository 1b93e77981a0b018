#include "mvqa/mcc.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "mvqa/mincostflow.hpp"
#include "mvqa/numeric.hpp"
#include "mvqa/text.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("mcc_flow", code, msg);
}

}  // namespace

FlowNetwork build_network(const BidRelation& rel, const Support& support, DistanceKind kind,
                          const InducedSupportDistribution& induced) {
  FlowNetwork net;
  net.n = static_cast<int>(rel.blocks.size());
  net.m = support.size();
  net.row_blocks.resize(net.m);
  for (int i = 0; i < net.n; ++i)
    for (int j : support.block_rows[i]) net.row_blocks[j].push_back(i);
  net.capacity = support.multiplicity;
  net.cost.resize(net.m);
  for (int j = 0; j < net.m; ++j) {
    net.cost[j].resize(net.capacity[j] + 1);
    for (int c = 0; c <= net.capacity[j]; ++c)
      net.cost[j][c] = per_tuple_term(kind, c, net.n, induced.p[j]);
  }
  return net;
}

MccSolver::MccSolver(FlowNetwork network) : net_(std::move(network)) {
  for (int j = 0; j < net_.m; ++j) base_cost_ += net_.cost[j][0];
}

std::optional<std::pair<double, ClassVector>> MccSolver::run(const std::vector<int>& prefix) {
  ++solves_;
  const int l = static_cast<int>(prefix.size());
  int forced_units = 0;
  double constant = base_cost_;
  for (int j = 0; j < l; ++j) {
    if (prefix[j] > net_.capacity[j]) return std::nullopt;
    forced_units += prefix[j];
    constant += net_.cost[j][prefix[j]] - net_.cost[j][0];
  }
  if (forced_units > net_.n) return std::nullopt;

  // node layout: s, u_0..u_{n-1}, v_0..v_{m-1}, t, T
  const int s = 0;
  const int u0 = 1;
  const int v0 = 1 + net_.n;
  const int t = 1 + net_.n + net_.m;
  const int super = t + 1;
  MinCostFlow flow(super + 1);
  for (int i = 0; i < net_.n; ++i) flow.add_edge(s, u0 + i, 1, 0.0);
  for (int j = 0; j < net_.m; ++j)
    for (int i : net_.row_blocks[j]) flow.add_edge(u0 + i, v0 + j, 1, 0.0);
  std::vector<std::vector<int>> sink_arcs(net_.m);
  for (int j = 0; j < net_.m; ++j) {
    if (j < l) {
      if (prefix[j] > 0) flow.add_edge(v0 + j, super, prefix[j], 0.0);
      continue;
    }
    sink_arcs[j].reserve(net_.capacity[j]);
    for (int c = 1; c <= net_.capacity[j]; ++c)
      sink_arcs[j].push_back(
          flow.add_edge(v0 + j, t, 1, net_.cost[j][c] - net_.cost[j][c - 1]));
  }
  if (net_.n - forced_units > 0) flow.add_edge(t, super, net_.n - forced_units, 0.0);
  auto [sent, cost] = flow.run(s, super, net_.n);
  if (sent != net_.n) return std::nullopt;
  ClassVector k(net_.m, 0);
  for (int j = 0; j < l; ++j) k[j] = prefix[j];
  for (int j = l; j < net_.m; ++j)
    for (int id : sink_arcs[j]) k[j] += flow.flow_on(id);
  return std::make_pair(cost + constant, k);
}

MccSolution MccSolver::solve_any() {
  auto result = run({});
  if (!result)
    fail("Infeasible", "cannot route one unit per block; the BID is malformed");
  return MccSolution{result->second, result->first};
}

std::optional<double> MccSolver::constrained_optimum(const std::vector<int>& prefix) {
  auto result = run(prefix);
  if (!result) return std::nullopt;
  return result->first;
}

MccEnumerator::MccEnumerator(const BidRelation& rel, const Support& support, DistanceKind kind,
                             const InducedSupportDistribution& induced)
    : solver_(build_network(rel, support, kind, induced)) {
  c_min_ = solver_.solve_any().c_min;
  const FlowNetwork& net = solver_.network();
  suffix_cap_.assign(net.m + 1, 0);
  for (int j = net.m - 1; j >= 0; --j) suffix_cap_[j] = suffix_cap_[j + 1] + net.capacity[j];
  forced_.assign(net.m, 0);
  for (size_t i = 0; i < rel.blocks.size(); ++i)
    if (rel.blocks[i].tuples.size() == 1) forced_[support.block_rows[i][0]]++;
}

// Opens the next depth with its candidate range; returns false when the
// range is empty (the caller then backtracks).
bool MccEnumerator::push_level() {
  const FlowNetwork& net = solver_.network();
  int l = static_cast<int>(prefix_.size());
  int rem = net.n;
  for (int v : prefix_) rem -= v;
  int hi = std::min(net.capacity[l], rem);
  int lo = std::max({0, rem - suffix_cap_[l + 1], forced_[l]});
  if (l == net.m - 1) lo = hi = rem;  // last row takes whatever remains
  if (lo > hi) return false;
  stack_.push_back({lo - 1, hi, false});
  return true;
}

std::optional<ClassVector> MccEnumerator::next() {
  if (done_) return std::nullopt;
  const FlowNetwork& net = solver_.network();
  if (net.m == 0) {
    done_ = true;
    return std::nullopt;
  }
  if (!primed_) {
    primed_ = true;
    if (!push_level()) {
      done_ = true;
      return std::nullopt;
    }
  }
  while (!stack_.empty()) {
    Level& top = stack_.back();
    if (top.value >= top.hi) {
      stack_.pop_back();
      if (!prefix_.empty()) prefix_.pop_back();
      continue;
    }
    ++top.value;
    prefix_.push_back(top.value);
    auto opt = solver_.constrained_optimum(prefix_);
    bool valid = opt.has_value() && approx_equal(*opt, c_min_);
    if (!valid) {
      prefix_.pop_back();
      if (top.seen_valid) {
        // convexity: the valid values at this level form an interval
        stack_.pop_back();
        if (!prefix_.empty()) prefix_.pop_back();
      }
      continue;
    }
    top.seen_valid = true;
    if (prefix_.size() == static_cast<size_t>(net.m)) {
      ClassVector k = prefix_;
      prefix_.pop_back();
      per_emission_.push_back(solver_.solve_count() - solves_at_last_emission_);
      solves_at_last_emission_ = solver_.solve_count();
      return k;
    }
    if (!push_level())
      prefix_.pop_back();  // no viable child range; treat as invalid candidate
  }
  done_ = true;
  return std::nullopt;
}

MccSolution solve_mcc(const BidRelation& rel, const Support& support, DistanceKind kind,
                      const InducedSupportDistribution& induced) {
  MccEnumerator en(rel, support, kind, induced);
  auto first = en.next();
  if (!first) fail("Infeasible", "no admissible class vector exists");
  return MccSolution{*first, en.c_min()};
}

bool verify_optimal(const BidRelation& rel, const Support& support, DistanceKind kind,
                    const InducedSupportDistribution& induced, const ClassVector& k,
                    double c_min) {
  if (!is_admissible(rel, support, k)) return false;
  return approx_equal(class_distance(kind, k, static_cast<int>(rel.blocks.size()), induced),
                      c_min);
}

std::uint64_t count_mcc(const BidRelation& rel, const Support& support, DistanceKind kind,
                        const InducedSupportDistribution& induced,
                        std::uint64_t max_emissions) {
  MccEnumerator en(rel, support, kind, induced);
  std::uint64_t count = 0;
  while (en.next()) {
    if (++count > max_emissions)
      fail("EnumerationBudgetExceeded",
           "more than " + std::to_string(max_emissions) + " optimal classes");
  }
  return count;
}

// ---------------------------------------------------------------------------
// Hardness-instance generator

BipartiteGraph parse_bipartite_graph(const std::string& text) {
  std::vector<std::pair<int, int>> raw_edges;
  int max_vertex = -1;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    std::istringstream ls(line);
    int u = -1, v = -1;
    if (!(ls >> u >> v) || u < 0 || v < 0)
      fail("ParseError", "graph line " + std::to_string(line_no) +
                             ": expected two non-negative vertex ids");
    raw_edges.emplace_back(u, v);
    max_vertex = std::max({max_vertex, u, v});
  }
  if (raw_edges.empty()) fail("ParseError", "empty graph");

  int vertex_count = max_vertex + 1;
  std::vector<std::vector<int>> adj(vertex_count);
  for (auto [u, v] : raw_edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  // 2-coloring by BFS over every component
  std::vector<int> color(vertex_count, -1);
  for (int start = 0; start < vertex_count; ++start) {
    if (color[start] >= 0 || adj[start].empty()) continue;
    color[start] = 0;
    std::vector<int> queue{start};
    for (size_t head = 0; head < queue.size(); ++head) {
      int v = queue[head];
      for (int w : adj[v]) {
        if (color[w] < 0) {
          color[w] = 1 - color[v];
          queue.push_back(w);
        } else if (color[w] == color[v]) {
          fail("NotBipartite", "graph contains an odd cycle");
        }
      }
    }
  }
  for (int v = 0; v < vertex_count; ++v)
    if (!adj[v].empty() && adj[v].size() != 3)
      fail("NotThreeRegular", "vertex " + std::to_string(v) + " has degree " +
                                  std::to_string(adj[v].size()));

  std::vector<int> left, right;
  for (int v = 0; v < vertex_count; ++v) {
    if (adj[v].empty()) continue;
    (color[v] == 0 ? left : right).push_back(v);
  }
  if (left.size() != right.size())
    fail("NotBipartite", "sides have different sizes");

  std::map<int, int> left_index, right_index;
  for (size_t i = 0; i < left.size(); ++i) left_index[left[i]] = static_cast<int>(i);
  for (size_t i = 0; i < right.size(); ++i) right_index[right[i]] = static_cast<int>(i);
  BipartiteGraph g;
  g.n = static_cast<int>(left.size());
  for (auto [u, v] : raw_edges) {
    if (color[u] == 1) std::swap(u, v);
    g.edges.emplace_back(left_index[u], right_index[v]);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

MatchingsInstance matchings_instance(const BipartiteGraph& g) {
  if (g.n == 0) fail("ParseError", "empty graph");
  std::vector<std::vector<std::pair<int, int>>> by_left(g.n), by_right(g.n);
  std::set<std::pair<int, int>> seen;
  for (auto [i, j] : g.edges) {
    if (i < 0 || i >= g.n || j < 0 || j >= g.n)
      fail("ParseError", "edge endpoint out of range");
    if (!seen.insert({i, j}).second) fail("ParseError", "duplicate edge");
    by_left[i].emplace_back(j, 0);
    by_right[j].emplace_back(i, 0);
  }
  for (int i = 0; i < g.n; ++i) {
    if (by_left[i].size() != 3 || by_right[i].size() != 3)
      fail("NotThreeRegular", "every vertex must have degree 3");
    std::sort(by_left[i].begin(), by_left[i].end());
    std::sort(by_right[i].begin(), by_right[i].end());
  }

  auto edge_token = [](int i, int j) {
    return "t" + std::to_string(i) + "_" + std::to_string(j);
  };

  MatchingsInstance inst;
  BidRelation rel;
  rel.name = "M";
  rel.attrs = {"T"};
  // one primary block per left vertex, uniform over its incident edges
  for (int i = 0; i < g.n; ++i) {
    Block block;
    block.origin = "u" + std::to_string(i);
    for (size_t t = 0; t < by_left[i].size(); ++t) {
      BidTuple tup;
      tup.tid = block.origin + "#" + std::to_string(t + 1);
      tup.values = {edge_token(i, by_left[i][t].first)};
      tup.prob = 1.0 / 3.0;
      block.tuples.push_back(std::move(tup));
    }
    rel.blocks.push_back(std::move(block));
  }
  // two supplementary blocks per right vertex over consecutive incident pairs
  for (int j = 0; j < g.n; ++j) {
    for (int which = 0; which < 2; ++which) {
      Block block;
      block.origin = "v" + std::to_string(j) + (which == 0 ? "a" : "b");
      for (int t = which; t < which + 2; ++t) {
        BidTuple tup;
        tup.tid = block.origin + "#" + std::to_string(t - which + 1);
        tup.values = {edge_token(by_right[j][t].first, j)};
        tup.prob = 0.5;
        block.tuples.push_back(std::move(tup));
      }
      rel.blocks.push_back(std::move(block));
    }
  }
  inst.bid.relations.push_back(std::move(rel));
  inst.kind = DistanceKind::ExcessCount;
  Support support = support_of(inst.bid.relations[0]);
  inst.induced.p.assign(support.rows.size(), 1.0 / (3.0 * g.n));
  return inst;
}

}  // namespace mvqa
