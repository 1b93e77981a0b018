#include "mvqa/bid.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "mvqa/text.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("bid_builder", code, msg);
}

}  // namespace

const BidRelation& Bid::single_relation(const std::string& caller_module) const {
  if (relations.size() != 1)
    throw Error(caller_module, "MultiRelation",
                "this operation is defined for single-relation BIDs only (got " +
                    std::to_string(relations.size()) + " relations)");
  return relations.front();
}

Bid build_bid(const BoundDatabase& bound) {
  Bid bid;
  for (const auto& schema : bound.db.schemas) {
    const MissingnessGraph& mg = bound.mgs.at(schema.name);
    BidRelation rel;
    rel.name = schema.name;
    for (const auto& a : schema.attributes) rel.attrs.push_back(a.name);
    auto rows_it = bound.db.relations.find(schema.name);
    static const std::vector<ObservedTuple> kEmpty;
    const auto& rows = rows_it == bound.db.relations.end() ? kEmpty : rows_it->second;
    for (const auto& tuple : rows) {
      Block block;
      block.origin = tuple.tid;
      std::vector<size_t> missing;
      Assignment evidence;
      for (size_t c = 0; c < schema.attributes.size(); ++c) {
        const AttributeDecl& attr = schema.attributes[c];
        if (tuple.cells[c] == kNa) {
          missing.push_back(c);
          evidence[star_name(attr.name)] = kNa;
        } else if (attr.role == AttrRole::PartiallyObserved) {
          evidence[star_name(attr.name)] = tuple.cells[c];
        } else {
          evidence[attr.name] = tuple.cells[c];
        }
      }
      if (missing.empty()) {
        BidTuple t;
        t.tid = tuple.tid;
        t.values = tuple.cells;
        t.prob = 1.0;  // singleton block
        block.tuples.push_back(std::move(t));
        rel.blocks.push_back(std::move(block));
        continue;
      }
      double denom;
      try {
        denom = marginal(mg, evidence);
      } catch (const Error& e) {
        throw;
      }
      if (denom <= 0.0)
        fail("ObservedTupleImpossible",
             "tid " + tuple.tid + ": observed row has probability 0 under the MG");
      // Completions in domain declaration order, odometer over missing cells.
      std::vector<int> digits(missing.size(), 0);
      int emitted = 0;
      while (true) {
        Assignment merged = evidence;
        std::vector<std::string> values = tuple.cells;
        for (size_t i = 0; i < missing.size(); ++i) {
          const AttributeDecl& attr = schema.attributes[missing[i]];
          const std::string& v = attr.domain[digits[i]];
          merged[attr.name] = v;  // underlying variable carries the completion
          values[missing[i]] = v;
        }
        double p = marginal(mg, merged) / denom;
        if (p > 0.0) {
          BidTuple t;
          ++emitted;
          t.tid = tuple.tid + "#" + std::to_string(emitted);
          t.values = std::move(values);
          t.prob = p;
          block.tuples.push_back(std::move(t));
        }
        int pos = static_cast<int>(missing.size()) - 1;
        while (pos >= 0) {
          const AttributeDecl& attr = schema.attributes[missing[pos]];
          if (++digits[pos] < static_cast<int>(attr.domain.size())) break;
          digits[pos] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
      if (block.tuples.empty())
        fail("ObservedTupleImpossible",
             "tid " + tuple.tid + ": no completion has positive probability");
      rel.blocks.push_back(std::move(block));
    }
    bid.relations.push_back(std::move(rel));
  }
  return bid;
}

std::uint64_t world_count(const Bid& bid) {
  std::uint64_t total = 1;
  for (const auto& rel : bid.relations)
    for (const auto& block : rel.blocks) {
      std::uint64_t size = block.tuples.size();
      if (size != 0 && total > UINT64_MAX / size) return UINT64_MAX;
      total *= size;
    }
  return total;
}

void write_bid_tsv(const Bid& bid, std::ostream& out) {
  for (const auto& rel : bid.relations) {
    out << "# relation " << rel.name << "\n";
    out << "block_id\ttid";
    for (const auto& a : rel.attrs) out << "\t" << a;
    out << "\tprob\n";
    for (const auto& block : rel.blocks) {
      for (const auto& t : block.tuples) {
        out << block.origin << "\t" << t.tid;
        for (const auto& v : t.values) out << "\t" << v;
        out << "\t" << fmt_prob(t.prob) << "\n";
      }
    }
  }
}

Bid read_bid_tsv(std::istream& in) {
  Bid bid;
  BidRelation* rel = nullptr;
  std::string line;
  int line_no = 0;
  bool expect_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (starts_with(line, "# relation ")) {
      BidRelation r;
      r.name = trim(line.substr(11));
      bid.relations.push_back(std::move(r));
      rel = &bid.relations.back();
      expect_header = true;
      continue;
    }
    if (starts_with(line, "#")) continue;
    auto fields = split(line, '\t');
    if (expect_header) {
      if (fields.size() < 3 || fields.front() != "block_id" || fields.back() != "prob")
        fail("ParseError", "line " + std::to_string(line_no) + ": bad BID header");
      for (size_t i = 2; i + 1 < fields.size(); ++i) rel->attrs.push_back(fields[i]);
      expect_header = false;
      continue;
    }
    if (rel == nullptr)
      fail("ParseError", "line " + std::to_string(line_no) + ": data before a relation marker");
    if (fields.size() != rel->attrs.size() + 3)
      fail("ParseError", "line " + std::to_string(line_no) + ": wrong field count");
    BidTuple t;
    const std::string& block_id = fields[0];
    t.tid = fields[1];
    for (size_t i = 0; i < rel->attrs.size(); ++i) t.values.push_back(fields[i + 2]);
    char* endp = nullptr;
    t.prob = std::strtod(fields.back().c_str(), &endp);
    if (endp == fields.back().c_str() || *endp != '\0' || !(t.prob > 0.0) || t.prob > 1.0)
      fail("ParseError", "line " + std::to_string(line_no) + ": bad probability '" +
                             fields.back() + "'");
    if (rel->blocks.empty() || rel->blocks.back().origin != block_id) {
      Block b;
      b.origin = block_id;
      rel->blocks.push_back(std::move(b));
    }
    rel->blocks.back().tuples.push_back(std::move(t));
  }
  if (bid.relations.empty()) fail("ParseError", "empty BID file");
  return bid;
}

}  // namespace mvqa
