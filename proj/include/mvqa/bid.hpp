#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvqa/observed.hpp"

namespace mvqa {

struct BidTuple {
  std::string tid;                  // "<origin tid>#<index>" for derived tuples
  std::vector<std::string> values;  // complete row over the underlying schema
  double prob = 1.0;
};

struct Block {
  std::string origin;  // observed tid
  std::vector<BidTuple> tuples;
};

struct BidRelation {
  std::string name;
  std::vector<std::string> attrs;  // underlying attribute names, schema order
  std::vector<Block> blocks;       // observed tuple order
};

struct Bid {
  std::vector<BidRelation> relations;

  const BidRelation& single_relation(const std::string& caller_module) const;
};

// Builds the block-independent probabilistic database: one block per observed
// tuple, one tuple per completion of its missing cells, with the conditional
// probability given the tuple's observed cells (missing positions condition
// on star = na). Zero-probability completions are dropped.
Bid build_bid(const BoundDatabase& bound);

// Product of block sizes, saturating at uint64 max.
std::uint64_t world_count(const Bid& bid);

// TSV: `block_id  tid  <attrs...>  prob`, one `# relation <name>` marker and
// one header row per relation, probabilities at 12 significant digits.
void write_bid_tsv(const Bid& bid, std::ostream& out);
Bid read_bid_tsv(std::istream& in);

}  // namespace mvqa
