#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mvqa/bid.hpp"

namespace mvqa {

// The ordered sequence of distinct tuple rows in a BID relation
// (first-appearance order) with per-row multiplicities, plus, per block, the
// support index of each of its tuples.
struct Support {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> multiplicity;           // n_j = number of blocks holding row j
  std::vector<std::vector<int>> block_rows;  // block_rows[i][t] = support index

  int size() const { return static_cast<int>(rows.size()); }
};

Support support_of(const BidRelation& rel);

// A class vector k: occurrences of each support row, sum = block count.
using ClassVector = std::vector<int>;

// One choice of tuple index per block, across all relations in order.
struct World {
  std::vector<int> choices;
};

struct EmpiricalDistribution {
  std::vector<double> mass;  // k_j / n
};

EmpiricalDistribution empirical_distribution(const ClassVector& k, int n);

// Streams every possible world (one tuple per block, relations concatenated)
// with its probability. Throws CapExceeded when world_count(bid) > cap.
void check_world_cap(const Bid& bid, std::uint64_t cap);

template <class Fn>
void for_each_world(const Bid& bid, Fn&& fn) {
  std::vector<const Block*> blocks;
  for (const auto& rel : bid.relations)
    for (const auto& block : rel.blocks) blocks.push_back(&block);
  std::vector<int> choices(blocks.size(), 0);
  std::vector<double> prefix(blocks.size() + 1, 1.0);
  for (size_t i = 0; i < blocks.size(); ++i)
    prefix[i + 1] = prefix[i] * blocks[i]->tuples[0].prob;
  if (blocks.empty()) {
    fn(choices, 1.0);
    return;
  }
  while (true) {
    fn(choices, prefix[blocks.size()]);
    int pos = static_cast<int>(blocks.size()) - 1;
    while (pos >= 0 && choices[pos] + 1 >= static_cast<int>(blocks[pos]->tuples.size())) {
      choices[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++choices[pos];
    for (size_t i = pos; i < blocks.size(); ++i)
      prefix[i + 1] = prefix[i] * blocks[i]->tuples[choices[i]].prob;
  }
}

std::vector<std::pair<World, double>> enumerate_worlds(const Bid& bid, std::uint64_t cap);

// Multiplicity vector of the chosen rows (single-relation).
ClassVector class_of(const BidRelation& rel, const Support& support,
                     const std::vector<int>& choices);

struct ClassAgg {
  double probability = 0.0;
  std::uint64_t worlds = 0;
};

// Scans the whole world space of one relation and groups it into classes.
// The default entry point uses the chunked kernel (parallel under OpenMP,
// chunk-ordered merge keeps results deterministic); the _reference version is
// the plain serial scan kept for tests and the benchmark.
std::map<ClassVector, ClassAgg> scan_classes(const BidRelation& rel, const Support& support,
                                             std::uint64_t cap);
std::map<ClassVector, ClassAgg> scan_classes_reference(const BidRelation& rel,
                                                       const Support& support,
                                                       std::uint64_t cap);

// Exact class probability by dynamic programming over blocks; the state space
// is the product of (k_j + 1) and must stay within max_states.
double class_probability(const BidRelation& rel, const Support& support, const ClassVector& k,
                         std::uint64_t max_states = 10'000'000);

// DP with all probabilities 1: number of worlds realizing k.
std::uint64_t class_world_count(const BidRelation& rel, const Support& support,
                                const ClassVector& k, std::uint64_t max_states = 10'000'000);

// True iff some world realizes k (counting checks plus bipartite max-flow).
bool is_admissible(const BidRelation& rel, const Support& support, const ClassVector& k);

// A world realizing k, built from the admissibility flow. Throws Infeasible
// when k is not admissible.
std::vector<int> representative_world(const BidRelation& rel, const Support& support,
                                      const ClassVector& k);

// All classes maximizing class probability (relative tie tolerance 1e-9),
// by exhaustive world scan.
std::vector<std::pair<ClassVector, double>> most_probable_classes_brute(const BidRelation& rel,
                                                                        const Support& support,
                                                                        std::uint64_t cap);

}  // namespace mvqa
