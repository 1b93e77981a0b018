#include "mvqa/worlds.hpp"

#include <algorithm>

#include "mvqa/maxflow.hpp"
#include "mvqa/numeric.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("worlds", code, msg);
}

}  // namespace

Support support_of(const BidRelation& rel) {
  Support s;
  std::map<std::vector<std::string>, int> index;
  s.block_rows.resize(rel.blocks.size());
  for (size_t i = 0; i < rel.blocks.size(); ++i) {
    for (const auto& t : rel.blocks[i].tuples) {
      auto [it, inserted] = index.emplace(t.values, s.size());
      if (inserted) {
        s.rows.push_back(t.values);
        s.multiplicity.push_back(0);
      }
      s.multiplicity[it->second]++;
      s.block_rows[i].push_back(it->second);
    }
  }
  return s;
}

EmpiricalDistribution empirical_distribution(const ClassVector& k, int n) {
  EmpiricalDistribution e;
  e.mass.reserve(k.size());
  for (int kj : k) e.mass.push_back(static_cast<double>(kj) / n);
  return e;
}

void check_world_cap(const Bid& bid, std::uint64_t cap) {
  std::uint64_t count = world_count(bid);
  if (count > cap)
    fail("CapExceeded", "world space has " + std::to_string(count) +
                            " worlds, cap is " + std::to_string(cap));
}

std::vector<std::pair<World, double>> enumerate_worlds(const Bid& bid, std::uint64_t cap) {
  check_world_cap(bid, cap);
  std::vector<std::pair<World, double>> out;
  out.reserve(world_count(bid));
  for_each_world(bid, [&](const std::vector<int>& choices, double prob) {
    out.push_back({World{choices}, prob});
  });
  return out;
}

ClassVector class_of(const BidRelation& rel, const Support& support,
                     const std::vector<int>& choices) {
  ClassVector k(support.size(), 0);
  for (size_t i = 0; i < rel.blocks.size(); ++i) k[support.block_rows[i][choices[i]]]++;
  return k;
}

namespace {

struct ScanLayout {
  std::vector<std::uint64_t> strides;  // last block fastest
  std::uint64_t total = 1;
};

ScanLayout scan_layout(const BidRelation& rel) {
  ScanLayout lay;
  lay.strides.assign(rel.blocks.size(), 1);
  std::uint64_t acc = 1;
  for (int i = static_cast<int>(rel.blocks.size()) - 1; i >= 0; --i) {
    lay.strides[i] = acc;
    acc *= rel.blocks[i].tuples.size();
  }
  lay.total = acc;
  return lay;
}

// Scans world indices [begin, end), accumulating per-class probability mass
// and world counts into `local`. The class vector and the probability are
// maintained incrementally across the odometer steps.
void scan_range(const BidRelation& rel, const Support& support, const ScanLayout& lay,
                std::uint64_t begin, std::uint64_t end,
                std::map<ClassVector, ClassAgg>& local) {
  const size_t n = rel.blocks.size();
  std::vector<int> choices(n, 0);
  for (size_t i = 0; i < n; ++i)
    choices[i] = static_cast<int>((begin / lay.strides[i]) % rel.blocks[i].tuples.size());
  ClassVector k(support.size(), 0);
  for (size_t i = 0; i < n; ++i) k[support.block_rows[i][choices[i]]]++;
  std::vector<double> prefix(n + 1, 1.0);
  for (size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] * rel.blocks[i].tuples[choices[i]].prob;
  for (std::uint64_t idx = begin; idx < end; ++idx) {
    ClassAgg& agg = local[k];
    agg.probability += prefix[n];
    agg.worlds++;
    if (idx + 1 == end) break;
    int pos = static_cast<int>(n) - 1;
    while (choices[pos] + 1 >= static_cast<int>(rel.blocks[pos].tuples.size())) {
      k[support.block_rows[pos][choices[pos]]]--;
      choices[pos] = 0;
      k[support.block_rows[pos][0]]++;
      --pos;
    }
    k[support.block_rows[pos][choices[pos]]]--;
    ++choices[pos];
    k[support.block_rows[pos][choices[pos]]]++;
    for (size_t i = pos; i < n; ++i)
      prefix[i + 1] = prefix[i] * rel.blocks[i].tuples[choices[i]].prob;
  }
}

constexpr std::uint64_t kScanChunk = 8192;

}  // namespace

std::map<ClassVector, ClassAgg> scan_classes_reference(const BidRelation& rel,
                                                       const Support& support,
                                                       std::uint64_t cap) {
  ScanLayout lay = scan_layout(rel);
  if (lay.total > cap)
    fail("CapExceeded", "world space has " + std::to_string(lay.total) +
                            " worlds, cap is " + std::to_string(cap));
  std::map<ClassVector, ClassAgg> out;
  if (rel.blocks.empty()) return out;
  scan_range(rel, support, lay, 0, lay.total, out);
  return out;
}

std::map<ClassVector, ClassAgg> scan_classes(const BidRelation& rel, const Support& support,
                                             std::uint64_t cap) {
  ScanLayout lay = scan_layout(rel);
  if (lay.total > cap)
    fail("CapExceeded", "world space has " + std::to_string(lay.total) +
                            " worlds, cap is " + std::to_string(cap));
  if (rel.blocks.empty()) return {};
  if (lay.total <= 2 * kScanChunk) {
    std::map<ClassVector, ClassAgg> out;
    scan_range(rel, support, lay, 0, lay.total, out);
    return out;
  }
  const std::uint64_t n_chunks = (lay.total + kScanChunk - 1) / kScanChunk;
  std::vector<std::map<ClassVector, ClassAgg>> partial(n_chunks);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
  for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
    std::uint64_t begin = static_cast<std::uint64_t>(c) * kScanChunk;
    std::uint64_t end = std::min(begin + kScanChunk, lay.total);
    scan_range(rel, support, lay, begin, end, partial[c]);
  }
#else
  for (std::uint64_t c = 0; c < n_chunks; ++c) {
    std::uint64_t begin = c * kScanChunk;
    std::uint64_t end = std::min(begin + kScanChunk, lay.total);
    scan_range(rel, support, lay, begin, end, partial[c]);
  }
#endif
  // Chunk-ordered merge: per-class sums see addends in a fixed order, so the
  // result does not depend on the thread count.
  std::map<ClassVector, ClassAgg> out;
  for (const auto& p : partial)
    for (const auto& [k, agg] : p) {
      ClassAgg& dst = out[k];
      dst.probability += agg.probability;
      dst.worlds += agg.worlds;
    }
  return out;
}

namespace {

struct DpLayout {
  std::vector<std::uint64_t> strides;
  std::uint64_t total = 1;
};

DpLayout dp_layout(const ClassVector& k, std::uint64_t max_states) {
  DpLayout lay;
  lay.strides.assign(k.size(), 1);
  std::uint64_t acc = 1;
  for (int j = static_cast<int>(k.size()) - 1; j >= 0; --j) {
    lay.strides[j] = acc;
    std::uint64_t size = static_cast<std::uint64_t>(k[j]) + 1;
    if (acc > max_states / size)
      throw Error("worlds", "StateSpaceExceeded",
                  "class-probability DP needs more than " + std::to_string(max_states) +
                      " states");
    acc *= size;
  }
  lay.total = acc;
  return lay;
}

template <class Value>
Value dp_over_blocks(const BidRelation& rel, const Support& support, const ClassVector& k,
                     std::uint64_t max_states, bool weighted) {
  if (k.size() != static_cast<size_t>(support.size())) return Value(0);
  int n = static_cast<int>(rel.blocks.size());
  long long sum = 0;
  for (size_t j = 0; j < k.size(); ++j) {
    if (k[j] < 0 || k[j] > support.multiplicity[j]) return Value(0);
    sum += k[j];
  }
  if (sum != n) return Value(0);
  DpLayout lay = dp_layout(k, max_states);
  std::vector<Value> state(lay.total, Value(0));
  std::vector<Value> next(lay.total, Value(0));
  state[0] = Value(1);
  for (int i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), Value(0));
    for (std::uint64_t s = 0; s < lay.total; ++s) {
      if (state[s] == Value(0)) continue;
      for (size_t t = 0; t < rel.blocks[i].tuples.size(); ++t) {
        int j = support.block_rows[i][t];
        std::uint64_t digit = (s / lay.strides[j]) % (static_cast<std::uint64_t>(k[j]) + 1);
        if (static_cast<int>(digit) >= k[j]) continue;
        Value w = weighted ? Value(rel.blocks[i].tuples[t].prob) : Value(1);
        next[s + lay.strides[j]] += state[s] * w;
      }
    }
    state.swap(next);
  }
  std::uint64_t target = 0;
  for (size_t j = 0; j < k.size(); ++j) target += static_cast<std::uint64_t>(k[j]) * lay.strides[j];
  return state[target];
}

}  // namespace

double class_probability(const BidRelation& rel, const Support& support, const ClassVector& k,
                         std::uint64_t max_states) {
  return dp_over_blocks<double>(rel, support, k, max_states, /*weighted=*/true);
}

std::uint64_t class_world_count(const BidRelation& rel, const Support& support,
                                const ClassVector& k, std::uint64_t max_states) {
  return dp_over_blocks<std::uint64_t>(rel, support, k, max_states, /*weighted=*/false);
}

namespace {

// Shared by is_admissible and representative_world: blocks on the left, rows
// on the right with quota k_j, value must reach the block count.
struct QuotaFlow {
  MaxFlow flow;
  std::vector<std::vector<std::pair<int, int>>> middle;  // per block: (edge id, tuple index)
  int value = 0;

  QuotaFlow(const BidRelation& rel, const Support& support, const ClassVector& k)
      : flow(static_cast<int>(rel.blocks.size()) + support.size() + 2),
        middle(rel.blocks.size()) {
    int n = static_cast<int>(rel.blocks.size());
    int m = support.size();
    int source = n + m;
    int sink = n + m + 1;
    for (int i = 0; i < n; ++i) flow.add_edge(source, i, 1);
    for (int i = 0; i < n; ++i)
      for (size_t t = 0; t < rel.blocks[i].tuples.size(); ++t) {
        int j = support.block_rows[i][t];
        if (k[j] == 0) continue;
        middle[i].push_back({flow.add_edge(i, n + j, 1), static_cast<int>(t)});
      }
    for (int j = 0; j < m; ++j)
      if (k[j] > 0) flow.add_edge(n + j, sink, k[j]);
    value = flow.run(source, sink);
  }
};

}  // namespace

bool is_admissible(const BidRelation& rel, const Support& support, const ClassVector& k) {
  if (k.size() != static_cast<size_t>(support.size())) return false;
  long long sum = 0;
  for (size_t j = 0; j < k.size(); ++j) {
    if (k[j] < 0 || k[j] > support.multiplicity[j]) return false;
    sum += k[j];
  }
  if (sum != static_cast<long long>(rel.blocks.size())) return false;
  QuotaFlow qf(rel, support, k);
  return qf.value == static_cast<int>(rel.blocks.size());
}

std::vector<int> representative_world(const BidRelation& rel, const Support& support,
                                      const ClassVector& k) {
  QuotaFlow qf(rel, support, k);
  if (qf.value != static_cast<int>(rel.blocks.size()))
    fail("Infeasible", "class vector is not admissible, no representative world exists");
  std::vector<int> choices(rel.blocks.size(), -1);
  for (size_t i = 0; i < rel.blocks.size(); ++i) {
    for (const auto& [edge_id, tuple_idx] : qf.middle[i]) {
      if (qf.flow.flow_on(edge_id) > 0) {
        choices[i] = tuple_idx;
        break;
      }
    }
    if (choices[i] < 0) fail("Infeasible", "flow left a block unassigned");
  }
  return choices;
}

std::vector<std::pair<ClassVector, double>> most_probable_classes_brute(const BidRelation& rel,
                                                                        const Support& support,
                                                                        std::uint64_t cap) {
  auto classes = scan_classes(rel, support, cap);
  double best = 0.0;
  for (const auto& [k, agg] : classes) best = std::max(best, agg.probability);
  std::vector<std::pair<ClassVector, double>> out;
  for (const auto& [k, agg] : classes)
    if (approx_equal(agg.probability, best)) out.push_back({k, agg.probability});
  return out;
}

}  // namespace mvqa
