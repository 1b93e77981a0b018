#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/bid.hpp"
#include "mvqa/observed.hpp"

namespace mvqa {

struct BidEquivalenceWitness {
  // origin-id pairs (block bijection f) and tid pairs (tuple bijection g)
  std::vector<std::pair<std::string, std::string>> block_pairs;
  std::vector<std::pair<std::string, std::string>> tuple_pairs;
};

// Matching ignores tids and block order: blocks are paired when their
// multisets of (value row, probability) agree, probabilities within 1e-12.
std::optional<BidEquivalenceWitness> bid_equivalent(const Bid& a, const Bid& b);

// The embedding of an arbitrary single-relation BID as an observed database
// plus MG: one observed row per block (its own selector attribute observed as
// 1, everything else na), tuple identity carried by a single encoded
// attribute T whose CPT is conditioned on the indicator pattern.
struct Embedding {
  ObservedDatabase observed;
  MissingnessGraph mg;
  std::vector<std::string> original_attrs;
  std::vector<std::vector<std::string>> row_decoding;  // token r<j> -> original row
};

Embedding embed_bid(const BidRelation& rel, std::uint64_t max_assignment_space = 10'000'000);

// Projects a BID built from an embedding back onto the original schema
// (drops the selector attributes, decodes T) so bid_equivalent can compare
// it with the source BID.
Bid decode_embedded(const Bid& built, const Embedding& emb, const std::string& relation_name);

// ---------------------------------------------------------------------------
// Tuple-independent PDBs and the reduction behind the hardness theorem.

struct TidTuple {
  std::string tid;
  std::vector<std::string> values;
  double prob = 1.0;  // in (0,1]
};

struct TidRelation {
  std::string name;
  std::vector<std::string> attrs;
  std::vector<TidTuple> tuples;
};

struct Tid {
  std::vector<TidRelation> relations;
};

// Text format: `relation <name> <attr1> <attr2> ...` then
// `row <relation> <tid> <v1> ... <vk> <prob>` lines, whitespace separated.
Tid parse_tid(const std::string& text, const std::string& source_name = "<tid>");

struct TidReduction {
  ObservedDatabase observed;                      // original attrs + M (all na)
  std::map<std::string, MissingnessGraph> mgs;    // conditional(M=1 | row) = p
  std::string rewritten_query;                    // constant 1 appended per atom
};

TidReduction tid_to_observed(const Tid& tid, const std::string& query_text);

// P(Q) on the TID by exhaustive subset enumeration (a tuple with probability
// p is in or out with weight p / 1-p). Boolean queries only.
double tid_query_probability(const Tid& tid, const std::string& query_text);

}  // namespace mvqa
