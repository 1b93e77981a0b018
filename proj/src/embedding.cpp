#include "mvqa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "mvqa/query.hpp"
#include "mvqa/text.hpp"
#include "mvqa/worlds.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("embedding", code, msg);
}

// (row, prob) multisets equal, probs within 1e-12.
bool blocks_equivalent(const Block& a, const Block& b) {
  if (a.tuples.size() != b.tuples.size()) return false;
  auto key = [](const Block& blk) {
    std::vector<std::pair<std::string, double>> items;
    for (const auto& t : blk.tuples) items.emplace_back(join(t.values, "\x1f"), t.prob);
    std::sort(items.begin(), items.end());
    return items;
  };
  auto ka = key(a), kb = key(b);
  for (size_t i = 0; i < ka.size(); ++i) {
    if (ka[i].first != kb[i].first) return false;
    if (std::abs(ka[i].second - kb[i].second) > 1e-12) return false;
  }
  return true;
}

// Kuhn's augmenting-path matching over block compatibility.
bool perfect_block_matching(const std::vector<const Block*>& left,
                            const std::vector<const Block*>& right,
                            std::vector<int>& match_left) {
  size_t n = left.size();
  std::vector<std::vector<int>> compat(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (blocks_equivalent(*left[i], *right[j])) compat[i].push_back(static_cast<int>(j));
  std::vector<int> match_right(n, -1);
  match_left.assign(n, -1);
  std::function<bool(size_t, std::vector<bool>&)> try_match = [&](size_t i,
                                                                  std::vector<bool>& used) {
    for (int j : compat[i]) {
      if (used[j]) continue;
      used[j] = true;
      if (match_right[j] < 0 || try_match(match_right[j], used)) {
        match_right[j] = static_cast<int>(i);
        match_left[i] = j;
        return true;
      }
    }
    return false;
  };
  for (size_t i = 0; i < n; ++i) {
    std::vector<bool> used(n, false);
    if (!try_match(i, used)) return false;
  }
  return true;
}

}  // namespace

std::optional<BidEquivalenceWitness> bid_equivalent(const Bid& a, const Bid& b) {
  if (a.relations.size() != b.relations.size()) return std::nullopt;
  BidEquivalenceWitness witness;
  for (const auto& ra : a.relations) {
    const BidRelation* rb = nullptr;
    for (const auto& r : b.relations)
      if (r.name == ra.name) rb = &r;
    if (rb == nullptr || rb->attrs != ra.attrs) return std::nullopt;
    if (rb->blocks.size() != ra.blocks.size()) return std::nullopt;
    std::vector<const Block*> left, right;
    for (const auto& blk : ra.blocks) left.push_back(&blk);
    for (const auto& blk : rb->blocks) right.push_back(&blk);
    std::vector<int> match_left;
    if (!perfect_block_matching(left, right, match_left)) return std::nullopt;
    for (size_t i = 0; i < left.size(); ++i) {
      const Block& ba = *left[i];
      const Block& bb = *right[match_left[i]];
      witness.block_pairs.emplace_back(ba.origin, bb.origin);
      // align tuples by (row, prob) sort; ties are interchangeable
      auto order = [](const Block& blk) {
        std::vector<int> idx(blk.tuples.size());
        for (size_t t = 0; t < idx.size(); ++t) idx[t] = static_cast<int>(t);
        std::sort(idx.begin(), idx.end(), [&](int x, int y) {
          auto kx = std::make_pair(join(blk.tuples[x].values, "\x1f"), blk.tuples[x].prob);
          auto ky = std::make_pair(join(blk.tuples[y].values, "\x1f"), blk.tuples[y].prob);
          return kx < ky;
        });
        return idx;
      };
      auto oa = order(ba), ob = order(bb);
      for (size_t t = 0; t < oa.size(); ++t)
        witness.tuple_pairs.emplace_back(ba.tuples[oa[t]].tid, bb.tuples[ob[t]].tid);
    }
  }
  return witness;
}

// ---------------------------------------------------------------------------

Embedding embed_bid(const BidRelation& rel, std::uint64_t max_assignment_space) {
  int n = static_cast<int>(rel.blocks.size());
  if (n == 0) fail("UnencodableBid", "cannot embed an empty BID");
  Support support = support_of(rel);
  int m = support.size();

  // full assignment space of the target MG:
  //   T(m) * A^m(2^n) * I_A(2^n) * A*(3^n) * T*(m+1) * I_T(2)
  long double space = static_cast<long double>(m) * (m + 1) * 2.0L;
  for (int i = 0; i < n; ++i) space *= 12.0L;  // 2 * 2 * 3 per selector attribute
  if (space > static_cast<long double>(max_assignment_space))
    fail("UnencodableBid", "embedding MG would need " + std::to_string((double)space) +
                               " assignments, cap is " + std::to_string(max_assignment_space));

  Embedding emb;
  emb.original_attrs = rel.attrs;
  emb.row_decoding = support.rows;

  std::vector<std::string> tokens(m);
  for (int j = 0; j < m; ++j) tokens[j] = "r" + std::to_string(j);

  // observed schema and rows: one row per block, selector i observed as 1
  RelationSchema schema;
  schema.name = rel.name;
  AttributeDecl t_attr{"T", AttrRole::PartiallyObserved, tokens};
  schema.attributes.push_back(t_attr);
  for (int i = 0; i < n; ++i)
    schema.attributes.push_back({"A" + std::to_string(i + 1),
                                 AttrRole::PartiallyObserved,
                                 {"0", "1"}});
  emb.observed.schemas.push_back(schema);
  auto& rows = emb.observed.relations[rel.name];
  for (int i = 0; i < n; ++i) {
    ObservedTuple t;
    t.tid = "b" + std::to_string(i + 1);
    t.cells.assign(n + 1, kNa);
    t.cells[1 + i] = "1";
    rows.push_back(std::move(t));
  }

  // the MG: T conditioned on the indicator pattern, selectors deterministic
  // functions of T, indicator chain realizing the uniform 1/n block mix
  std::ostringstream mg_text;
  mg_text << "relation " << rel.name << "\n";
  mg_text << "var T kind=m domain=" << join(tokens, ",") << "\n";
  for (int i = 1; i <= n; ++i) mg_text << "var A" << i << " kind=m domain=0,1\n";
  // indicator chain
  for (int l = 2; l <= n; ++l) {
    mg_text << "parents I_A" << l << " =";
    for (int p = 1; p < l; ++p) mg_text << (p > 1 ? "," : " ") << "I_A" << p;
    mg_text << "\n";
  }
  mg_text << "cpt I_A1 : 0=" << fmt_prob(1.0 / n) << ", 1=" << fmt_prob(1.0 - 1.0 / n)
          << "\n";
  for (int l = 2; l <= n; ++l) {
    int combos = 1 << (l - 1);
    for (int mask = 0; mask < combos; ++mask) {
      // bit p set means I_A{p+1} = 1 (still unselected)
      bool all_ones = mask == combos - 1;
      mg_text << "cpt I_A" << l << " |";
      for (int p = 0; p < l - 1; ++p)
        mg_text << (p ? ", " : " ") << "I_A" << (p + 1) << "="
                << (((mask >> p) & 1) ? "1" : "0");
      double p_zero = all_ones ? 1.0 / (n - l + 1) : 0.0;
      mg_text << " : 0=" << fmt_prob(p_zero) << ", 1=" << fmt_prob(1.0 - p_zero) << "\n";
    }
  }
  // T | indicator pattern
  {
    mg_text << "parents T =";
    for (int p = 1; p <= n; ++p) mg_text << (p > 1 ? "," : " ") << "I_A" << p;
    mg_text << "\n";
    int combos = 1 << n;
    for (int mask = 0; mask < combos; ++mask) {
      // bit i set means I_A{i+1} = 1; the active block is the single zero bit
      int active = -1;
      int zeros = 0;
      for (int i = 0; i < n; ++i)
        if (!((mask >> i) & 1)) {
          active = i;
          ++zeros;
        }
      mg_text << "cpt T |";
      for (int i = 0; i < n; ++i)
        mg_text << (i ? ", " : " ") << "I_A" << (i + 1) << "=" << (((mask >> i) & 1) ? "1" : "0");
      mg_text << " : ";
      std::vector<double> dist(m, 0.0);
      if (zeros == 1) {
        for (size_t t = 0; t < rel.blocks[active].tuples.size(); ++t)
          dist[support.block_rows[active][t]] = rel.blocks[active].tuples[t].prob;
      } else {
        for (int j = 0; j < m; ++j) dist[j] = 1.0 / m;  // unreachable patterns
      }
      for (int j = 0; j < m; ++j) mg_text << (j ? ", " : "") << tokens[j] << "=" << fmt_prob(dist[j]);
      mg_text << "\n";
    }
  }
  // selector attributes: deterministic membership of the encoded row
  for (int i = 1; i <= n; ++i) {
    mg_text << "parents A" << i << " = T\n";
    for (int j = 0; j < m; ++j) {
      bool member = std::find(support.block_rows[i - 1].begin(),
                              support.block_rows[i - 1].end(),
                              j) != support.block_rows[i - 1].end();
      mg_text << "cpt A" << i << " | T=" << tokens[j] << " : 0=" << (member ? "0" : "1")
              << ", 1=" << (member ? "1" : "0") << "\n";
    }
  }
  emb.mg = parse_mg(mg_text.str(), "<embedding>");
  auto diags = validate_mg(emb.mg);
  if (!diags.empty())
    fail("InternalError", "generated embedding MG is invalid: " + diags.front().message);
  return emb;
}

Bid decode_embedded(const Bid& built, const Embedding& emb, const std::string& relation_name) {
  Bid out;
  for (const auto& rel : built.relations) {
    BidRelation decoded;
    decoded.name = relation_name;
    decoded.attrs = emb.original_attrs;
    auto t_pos = std::find(rel.attrs.begin(), rel.attrs.end(), "T");
    if (t_pos == rel.attrs.end()) fail("InternalError", "embedded BID lacks attribute T");
    size_t t_idx = t_pos - rel.attrs.begin();
    for (const auto& block : rel.blocks) {
      Block b;
      b.origin = block.origin;
      for (const auto& tup : block.tuples) {
        BidTuple t;
        t.tid = tup.tid;
        const std::string& token = tup.values[t_idx];
        if (token.size() < 2 || token[0] != 'r')
          fail("InternalError", "bad encoded row token '" + token + "'");
        size_t j = std::strtoull(token.c_str() + 1, nullptr, 10);
        if (j >= emb.row_decoding.size())
          fail("InternalError", "encoded row token out of range: " + token);
        t.values = emb.row_decoding[j];
        t.prob = tup.prob;
        b.tuples.push_back(std::move(t));
      }
      decoded.blocks.push_back(std::move(b));
    }
    out.relations.push_back(std::move(decoded));
  }
  return out;
}

// ---------------------------------------------------------------------------

Tid parse_tid(const std::string& text, const std::string& source_name) {
  Tid tid;
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
    std::string keyword;
    ls >> keyword;
    auto err = [&](const std::string& msg) {
      fail("ParseError", source_name + ":" + std::to_string(line_no) + ": " + msg);
    };
    if (keyword == "relation") {
      TidRelation rel;
      ls >> rel.name;
      std::string attr;
      while (ls >> attr) rel.attrs.push_back(attr);
      if (rel.name.empty() || rel.attrs.empty()) err("relation needs a name and attributes");
      tid.relations.push_back(std::move(rel));
    } else if (keyword == "row") {
      std::string rel_name;
      ls >> rel_name;
      TidRelation* rel = nullptr;
      for (auto& r : tid.relations)
        if (r.name == rel_name) rel = &r;
      if (rel == nullptr) err("row for undeclared relation '" + rel_name + "'");
      std::vector<std::string> fields;
      std::string f;
      while (ls >> f) fields.push_back(f);
      if (fields.size() != rel->attrs.size() + 2)
        err("row needs tid, " + std::to_string(rel->attrs.size()) + " values and a probability");
      TidTuple t;
      t.tid = fields.front();
      for (size_t i = 0; i < rel->attrs.size(); ++i) t.values.push_back(fields[i + 1]);
      char* endp = nullptr;
      t.prob = std::strtod(fields.back().c_str(), &endp);
      if (endp == fields.back().c_str() || *endp != '\0' || !(t.prob > 0.0) || t.prob > 1.0)
        err("tuple probability must be in (0,1], got '" + fields.back() + "'");
      for (const auto& existing : rel->tuples)
        if (existing.values == t.values)
          fail("DuplicateRow", source_name + ":" + std::to_string(line_no) +
                                   ": duplicate value row in relation " + rel_name +
                                   " (the reduction conditions on row values)");
      rel->tuples.push_back(std::move(t));
    } else {
      err("unrecognized keyword '" + keyword + "'");
    }
  }
  if (tid.relations.empty()) fail("ParseError", source_name + ": no relations");
  return tid;
}

TidReduction tid_to_observed(const Tid& tid, const std::string& query_text) {
  TidReduction red;
  for (const auto& rel : tid.relations) {
    // column domains from the data, sorted for determinism
    std::vector<std::vector<std::string>> domains(rel.attrs.size());
    for (size_t c = 0; c < rel.attrs.size(); ++c) {
      std::set<std::string> values;
      for (const auto& t : rel.tuples) values.insert(t.values[c]);
      if (values.empty()) values.insert("0");  // empty relation still needs a domain
      domains[c].assign(values.begin(), values.end());
    }

    RelationSchema schema;
    schema.name = rel.name;
    for (size_t c = 0; c < rel.attrs.size(); ++c)
      schema.attributes.push_back({rel.attrs[c], AttrRole::FullyObserved, domains[c]});
    schema.attributes.push_back({"M", AttrRole::PartiallyObserved, {"0", "1"}});
    red.observed.schemas.push_back(schema);

    auto& rows = red.observed.relations[rel.name];
    for (const auto& t : rel.tuples) {
      ObservedTuple o;
      o.tid = t.tid;
      o.cells = t.values;
      o.cells.push_back(kNa);
      rows.push_back(std::move(o));
    }

    // MG: attrs are independent sources, M conditioned on all of them so
    // that conditional(M=1 | row, M* = na) = the TID tuple probability
    std::ostringstream mg_text;
    mg_text << "relation " << rel.name << "\n";
    for (size_t c = 0; c < rel.attrs.size(); ++c)
      mg_text << "var " << rel.attrs[c] << " kind=o domain=" << join(domains[c], ",") << "\n";
    mg_text << "var M kind=m domain=0,1\n";
    for (size_t c = 0; c < rel.attrs.size(); ++c) {
      mg_text << "cpt " << rel.attrs[c] << " : ";
      for (size_t v = 0; v < domains[c].size(); ++v)
        mg_text << (v ? ", " : "") << domains[c][v] << "="
                << fmt_prob(1.0 / domains[c].size());
      mg_text << "\n";
    }
    if (!rel.attrs.empty()) mg_text << "parents M = " << join(rel.attrs, ",") << "\n";
    // one row per value combination; combos not present in the data get 1/2
    std::vector<size_t> digits(rel.attrs.size(), 0);
    while (true) {
      std::vector<std::string> combo(rel.attrs.size());
      for (size_t c = 0; c < rel.attrs.size(); ++c) combo[c] = domains[c][digits[c]];
      double p = 0.5;
      for (const auto& t : rel.tuples)
        if (t.values == combo) p = t.prob;
      mg_text << "cpt M";
      if (!rel.attrs.empty()) {
        mg_text << " |";
        for (size_t c = 0; c < rel.attrs.size(); ++c)
          mg_text << (c ? ", " : " ") << rel.attrs[c] << "=" << combo[c];
      }
      mg_text << " : 0=" << fmt_prob(1.0 - p) << ", 1=" << fmt_prob(p) << "\n";
      int pos = static_cast<int>(rel.attrs.size()) - 1;
      while (pos >= 0 && ++digits[pos] >= domains[pos].size()) {
        digits[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    mg_text << "cpt I_M : 0=0.5, 1=0.5\n";
    red.mgs.emplace(rel.name, parse_mg(mg_text.str(), "<tid-reduce>"));
  }
  red.rewritten_query = append_constant_to_atoms(query_text, "1");
  return red;
}

double tid_query_probability(const Tid& tid, const std::string& query_text) {
  // schema view of the TID for query parsing
  std::vector<RelationSchema> schemas;
  std::vector<std::pair<std::string, const TidTuple*>> all_tuples;
  for (const auto& rel : tid.relations) {
    RelationSchema s;
    s.name = rel.name;
    for (size_t c = 0; c < rel.attrs.size(); ++c) {
      std::set<std::string> values;
      for (const auto& t : rel.tuples) values.insert(t.values[c]);
      if (values.empty()) values.insert("0");
      s.attributes.push_back(
          {rel.attrs[c], AttrRole::FullyObserved,
           std::vector<std::string>(values.begin(), values.end())});
    }
    schemas.push_back(s);
    for (const auto& t : rel.tuples) all_tuples.emplace_back(rel.name, &t);
  }
  Query q = parse_query(query_text, schemas);
  if (!q.is_boolean())
    fail("BadArgument", "tid_query_probability expects a boolean query");
  size_t n = all_tuples.size();
  if (n > 30) fail("CapExceeded", "TID subset enumeration capped at 30 tuples");
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double weight = 1.0;
    RelationInstance instance;
    for (const auto& rel : tid.relations) instance[rel.name];  // empty bags exist
    for (size_t i = 0; i < n; ++i) {
      const auto& [rel_name, tuple] = all_tuples[i];
      if ((mask >> i) & 1) {
        weight *= tuple->prob;
        instance[rel_name].push_back(tuple->values);
      } else {
        weight *= 1.0 - tuple->prob;
      }
    }
    if (weight == 0.0) continue;
    if (holds_on_world(q, instance)) total += weight;
  }
  return total;
}

}  // namespace mvqa
