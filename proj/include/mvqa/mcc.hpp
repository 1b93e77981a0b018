#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/compliance.hpp"
#include "mvqa/worlds.hpp"

namespace mvqa {

// The block–tuple flow network of the MCC reduction: source arcs with lower
// bound 1 (implicit: exactly n units are routed), unit middle arcs wherever a
// block holds a support row, and per-row convex sink schedules expanded into
// unit arcs carrying marginal costs d_j(c) - d_j(c-1).
struct FlowNetwork {
  int n = 0;                                // blocks
  int m = 0;                                // support rows
  std::vector<std::vector<int>> row_blocks; // per row: block indices holding it
  std::vector<std::vector<double>> cost;    // cost[j][c] = d_j(c), c = 0..n_j
  std::vector<int> capacity;                // n_j = multiplicity = in-degree of v_j
};

FlowNetwork build_network(const BidRelation& rel, const Support& support, DistanceKind kind,
                          const InducedSupportDistribution& induced);

struct MccSolution {
  ClassVector k;
  double c_min = 0.0;
};

// Runs prefix-constrained min-cost flows over the network. Each solve fixes
// the first `prefix.size()` sink flows exactly (lower bounds eliminated by
// adding the forced units' cost as a constant and redirecting those rows to
// a super-sink) and leaves the rest free.
class MccSolver {
 public:
  explicit MccSolver(FlowNetwork network);

  // Optimal cost over all admissible classes and one witness vector (no lex
  // guarantee). Throws Infeasible when n units cannot be routed.
  MccSolution solve_any();

  // Optimal completion cost with a fixed prefix; nullopt when infeasible.
  std::optional<double> constrained_optimum(const std::vector<int>& prefix);

  std::uint64_t solve_count() const { return solves_; }

  const FlowNetwork& network() const { return net_; }

 private:
  std::optional<std::pair<double, ClassVector>> run(const std::vector<int>& prefix);

  FlowNetwork net_;
  double base_cost_ = 0.0;  // sum of d_j(0)
  std::uint64_t solves_ = 0;
};

// Lexicographically smallest optimal class vector and the optimal cost.
MccSolution solve_mcc(const BidRelation& rel, const Support& support, DistanceKind kind,
                      const InducedSupportDistribution& induced);

// Admissibility (quota max-flow) plus cost equality within the tie tolerance.
bool verify_optimal(const BidRelation& rel, const Support& support, DistanceKind kind,
                    const InducedSupportDistribution& induced, const ClassVector& k,
                    double c_min);

// Streams every optimal class vector in lexicographic order, no duplicates.
// Depth-first over prefix vectors; a prefix survives iff the constrained
// network still reaches c_min. Candidate values per level are pre-trimmed by
// suffix capacities and singleton-forced counts (no flow solve spent), and a
// level's scan stops at the first invalid value after a valid one, since the
// constrained optimum is discretely convex in each k_l.
class MccEnumerator {
 public:
  MccEnumerator(const BidRelation& rel, const Support& support, DistanceKind kind,
                const InducedSupportDistribution& induced);

  std::optional<ClassVector> next();

  double c_min() const { return c_min_; }
  // Constrained solves spent up to and including each emission (deltas).
  const std::vector<std::uint64_t>& solves_per_emission() const { return per_emission_; }

 private:
  struct Level {
    int value;       // current candidate at this depth (last one tested)
    int hi;          // inclusive upper bound
    bool seen_valid;
  };

  bool push_level();

  MccSolver solver_;
  double c_min_ = 0.0;
  std::vector<int> prefix_;
  std::vector<Level> stack_;
  std::vector<int> suffix_cap_;  // suffix sums of multiplicities
  std::vector<int> forced_;      // singleton blocks per row
  std::vector<std::uint64_t> per_emission_;
  std::uint64_t solves_at_last_emission_ = 0;
  bool done_ = false;
  bool primed_ = false;
};

std::uint64_t count_mcc(const BidRelation& rel, const Support& support, DistanceKind kind,
                        const InducedSupportDistribution& induced,
                        std::uint64_t max_emissions = 1'000'000);

// ---------------------------------------------------------------------------
// Hardness-instance generator: BIDs whose optimal classes are in bijection
// with the perfect matchings of a 3-regular bipartite graph.

struct BipartiteGraph {
  int n = 0;                                // vertices per side
  std::vector<std::pair<int, int>> edges;   // (left index, right index)
};

// General undirected edge list; 2-colors it and errors with NotBipartite /
// NotThreeRegular when the hardness construction does not apply.
BipartiteGraph parse_bipartite_graph(const std::string& text);

struct MatchingsInstance {
  Bid bid;  // single relation, attribute T, one tuple per edge
  DistanceKind kind = DistanceKind::ExcessCount;
  InducedSupportDistribution induced;  // uniform 1/(3n)
};

MatchingsInstance matchings_instance(const BipartiteGraph& g);

}  // namespace mvqa
