#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/bid.hpp"
#include "mvqa/worlds.hpp"

namespace mvqa {

struct Term {
  bool is_var = false;
  std::string text;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;
};

enum class AggKind { None, Sum, Count, Avg, Min, Max, CountStar };

// Datalog-style conjunctive query: `ans(x, y) :- R(x, 0, z), S(z, y)`,
// aggregates as `sum(z) :- R(x, 0, z)`, boolean when the head is `ans()`.
// A bare argument token is a constant iff it belongs to the attribute's
// declared domain at its position; quoting ("...") forces constant reading.
struct Query {
  std::vector<Atom> atoms;
  std::vector<std::string> head_vars;
  AggKind agg = AggKind::None;
  std::string agg_var;

  bool is_boolean() const { return agg == AggKind::None && head_vars.empty(); }
};

Query parse_query(const std::string& text, const std::vector<RelationSchema>& schemas);

// Purely syntactic: appends `,<constant>` to every atom of the query text
// (the TID-reduction rewrite).
std::string append_constant_to_atoms(const std::string& query_text,
                                     const std::string& constant);

using Row = std::vector<std::string>;
using RelationInstance = std::map<std::string, std::vector<Row>>;  // bags

RelationInstance materialize_world(const Bid& bid, const std::vector<int>& choices);

// Bag-semantics evaluation on one world. The result is rendered canonically:
// scalars as %.12g numbers, booleans as 1/0, projection bags as
// sorted `v1,v2;v1,v2` multiset text (the canonical form doubles as the
// merge key across classes).
std::string evaluate_on_world(const Query& q, const RelationInstance& world);

// Scalar shortcut for boolean queries (1 when some embedding satisfies the body).
bool holds_on_world(const Query& q, const RelationInstance& world);

struct AnswerEntry {
  std::string value;
  double probability;
};

struct PerClassAnswer {
  ClassVector k;
  std::string value;
  double probability;
};

struct AnswerSet {
  std::vector<AnswerEntry> merged;        // identical answers merged, ordered
  std::vector<PerClassAnswer> per_class;  // one entry per input class
};

// Evaluates the query on one representative world per class and merges
// identical answers by summing class probabilities. Ordering: numeric when
// every answer parses as a number, lexicographic otherwise.
AnswerSet preferred_answers(const Query& q,
                            const std::vector<std::pair<ClassVector, double>>& classes,
                            const Bid& bid, const Support& support);

}  // namespace mvqa
