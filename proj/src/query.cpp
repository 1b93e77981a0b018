#include "mvqa/query.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "mvqa/text.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("query_engine", code, msg);
}

bool is_decimal(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

double parse_numeric(const std::string& token) {
  if (!is_decimal(token))
    fail("NonNumericAggregate", "token '" + token + "' is not a decimal number");
  return std::stod(token);
}

struct RawAtom {
  std::string name;
  std::vector<std::string> args;  // quoted args keep their quotes
};

// name(arg, arg, ...) list scanner; quotes protect commas and parens.
std::vector<RawAtom> scan_atoms(const std::string& text) {
  std::vector<RawAtom> atoms;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  while (true) {
    skip_ws();
    if (i >= text.size()) break;
    RawAtom atom;
    size_t start = i;
    while (i < text.size() && text[i] != '(') ++i;
    if (i >= text.size()) fail("ParseError", "expected '(' after atom name");
    atom.name = trim(text.substr(start, i - start));
    if (atom.name.empty()) fail("ParseError", "empty atom name");
    ++i;  // consume '('
    std::string arg;
    bool in_quotes = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (in_quotes) {
        arg += c;
        if (c == '"') in_quotes = false;
        continue;
      }
      if (c == '"') {
        arg += c;
        in_quotes = true;
      } else if (c == ',') {
        atom.args.push_back(trim(arg));
        arg.clear();
      } else if (c == ')') {
        std::string last = trim(arg);
        if (!last.empty() || !atom.args.empty()) atom.args.push_back(last);
        break;
      } else {
        arg += c;
      }
    }
    if (i >= text.size()) fail("ParseError", "unterminated atom argument list");
    ++i;  // consume ')'
    skip_ws();
    if (i < text.size()) {
      if (text[i] != ',') fail("ParseError", "expected ',' between atoms");
      ++i;
    }
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

}  // namespace

Query parse_query(const std::string& text, const std::vector<RelationSchema>& schemas) {
  auto sep = text.find(":-");
  if (sep == std::string::npos) fail("ParseError", "query must contain ':-'");
  std::string head_text = trim(text.substr(0, sep));
  std::string body_text = trim(text.substr(sep + 2));
  auto heads = scan_atoms(head_text);
  if (heads.size() != 1) fail("ParseError", "query needs exactly one head");
  const RawAtom& head = heads[0];

  Query q;
  if (head.name == "ans") {
    for (const auto& a : head.args) {
      if (a.empty()) fail("ParseError", "empty head variable");
      q.head_vars.push_back(a);
    }
  } else if (head.name == "count" && head.args.size() == 1 && head.args[0] == "*") {
    q.agg = AggKind::CountStar;
  } else {
    static const std::map<std::string, AggKind> kAggs = {
        {"sum", AggKind::Sum},   {"count", AggKind::Count}, {"avg", AggKind::Avg},
        {"min", AggKind::Min},   {"max", AggKind::Max}};
    auto it = kAggs.find(head.name);
    if (it == kAggs.end())
      fail("ParseError", "head must be ans(...), count(*) or an aggregate, got '" +
                             head.name + "'");
    if (head.args.size() != 1)
      fail("ParseError", head.name + "() takes exactly one variable");
    q.agg = it->second;
    q.agg_var = head.args[0];
  }

  std::set<std::string> body_vars;
  for (const auto& raw : scan_atoms(body_text)) {
    const RelationSchema* schema = nullptr;
    for (const auto& s : schemas)
      if (s.name == raw.name) schema = &s;
    if (schema == nullptr) fail("ParseError", "unknown relation '" + raw.name + "'");
    if (raw.args.size() != schema->attributes.size())
      fail("ParseError", "atom " + raw.name + " has arity " + std::to_string(raw.args.size()) +
                             ", schema says " + std::to_string(schema->attributes.size()));
    Atom atom;
    atom.relation = raw.name;
    for (size_t pos = 0; pos < raw.args.size(); ++pos) {
      const std::string& tok = raw.args[pos];
      Term term;
      if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        term.is_var = false;
        term.text = tok.substr(1, tok.size() - 2);
      } else {
        const auto& domain = schema->attributes[pos].domain;
        bool in_domain = std::find(domain.begin(), domain.end(), tok) != domain.end();
        term.is_var = !in_domain;
        term.text = tok;
      }
      if (!term.is_var) {
        const auto& domain = schema->attributes[pos].domain;
        if (std::find(domain.begin(), domain.end(), term.text) == domain.end())
          fail("ParseError", "constant '" + term.text + "' is outside the domain of " +
                                 schema->attributes[pos].name);
      } else {
        if (term.text.empty()) fail("ParseError", "empty variable name");
        body_vars.insert(term.text);
      }
      atom.args.push_back(std::move(term));
    }
    q.atoms.push_back(std::move(atom));
  }
  if (q.atoms.empty()) fail("ParseError", "query body is empty");

  // safe-range: head/aggregate variables must occur in the body
  for (const auto& v : q.head_vars)
    if (!body_vars.count(v))
      fail("ParseError", "head variable '" + v + "' does not occur in the body");
  if (q.agg != AggKind::None && q.agg != AggKind::CountStar && !body_vars.count(q.agg_var))
    fail("ParseError", "aggregate variable '" + q.agg_var + "' does not occur in the body");
  return q;
}

std::string append_constant_to_atoms(const std::string& query_text,
                                     const std::string& constant) {
  auto sep = query_text.find(":-");
  if (sep == std::string::npos) fail("ParseError", "query must contain ':-'");
  std::string head = trim(query_text.substr(0, sep));
  std::string out = head + " :- ";
  auto atoms = scan_atoms(query_text.substr(sep + 2));
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ", ";
    out += atoms[i].name + "(";
    for (size_t a = 0; a < atoms[i].args.size(); ++a) out += atoms[i].args[a] + ", ";
    out += constant + ")";
  }
  return out;
}

RelationInstance materialize_world(const Bid& bid, const std::vector<int>& choices) {
  RelationInstance world;
  size_t block_idx = 0;
  for (const auto& rel : bid.relations) {
    auto& bag = world[rel.name];
    for (const auto& block : rel.blocks) {
      bag.push_back(block.tuples[choices[block_idx]].values);
      ++block_idx;
    }
  }
  return world;
}

namespace {

// Nested-loop join over the atoms; calls fn once per embedding.
// Returns false if fn short-circuits.
bool enumerate_matches(const Query& q, const RelationInstance& world,
                       const std::function<bool(const std::map<std::string, std::string>&)>& fn) {
  std::map<std::string, std::string> bindings;
  std::function<bool(size_t)> rec = [&](size_t idx) -> bool {
    if (idx == q.atoms.size()) return fn(bindings);
    const Atom& atom = q.atoms[idx];
    auto it = world.find(atom.relation);
    static const std::vector<Row> kEmpty;
    const auto& bag = it == world.end() ? kEmpty : it->second;
    for (const Row& row : bag) {
      std::vector<std::string> newly_bound;
      bool ok = true;
      for (size_t pos = 0; pos < atom.args.size() && ok; ++pos) {
        const Term& term = atom.args[pos];
        const std::string& cell = row[pos];
        if (!term.is_var) {
          ok = term.text == cell;
        } else {
          auto [bit, inserted] = bindings.emplace(term.text, cell);
          if (inserted) newly_bound.push_back(term.text);
          else ok = bit->second == cell;
        }
      }
      if (ok && !rec(idx + 1)) return false;
      for (const auto& v : newly_bound) bindings.erase(v);
    }
    return true;
  };
  return rec(0);
}

std::string format_scalar(double v) { return fmt_prob(v); }

}  // namespace

bool holds_on_world(const Query& q, const RelationInstance& world) {
  bool found = false;
  enumerate_matches(q, world, [&](const auto&) {
    found = true;
    return false;  // short-circuit
  });
  return found;
}

std::string evaluate_on_world(const Query& q, const RelationInstance& world) {
  if (q.is_boolean()) return holds_on_world(q, world) ? "1" : "0";

  if (q.agg != AggKind::None) {
    std::vector<std::string> values;
    std::uint64_t matches = 0;
    enumerate_matches(q, world, [&](const std::map<std::string, std::string>& b) {
      ++matches;
      if (q.agg != AggKind::CountStar) values.push_back(b.at(q.agg_var));
      return true;
    });
    switch (q.agg) {
      case AggKind::CountStar:
        return format_scalar(static_cast<double>(matches));
      case AggKind::Count:
        return format_scalar(static_cast<double>(values.size()));
      case AggKind::Sum: {
        double sum = 0.0;
        for (const auto& v : values) sum += parse_numeric(v);
        return format_scalar(sum);
      }
      case AggKind::Avg: {
        if (values.empty())
          fail("EmptyAggregate", "avg of an empty bag is undefined");
        double sum = 0.0;
        for (const auto& v : values) sum += parse_numeric(v);
        return format_scalar(sum / values.size());
      }
      case AggKind::Min:
      case AggKind::Max: {
        if (values.empty())
          fail("EmptyAggregate", "min/max of an empty bag is undefined");
        double best = parse_numeric(values[0]);
        for (size_t i = 1; i < values.size(); ++i) {
          double v = parse_numeric(values[i]);
          best = q.agg == AggKind::Min ? std::min(best, v) : std::max(best, v);
        }
        return format_scalar(best);
      }
      case AggKind::None:
        break;
    }
  }

  // projection: canonical multiset text, rows sorted
  std::vector<std::string> rows;
  enumerate_matches(q, world, [&](const std::map<std::string, std::string>& b) {
    std::vector<std::string> cells;
    for (const auto& v : q.head_vars) cells.push_back(b.at(v));
    rows.push_back(join(cells, ","));
    return true;
  });
  std::sort(rows.begin(), rows.end());
  return join(rows, ";");
}

AnswerSet preferred_answers(const Query& q,
                            const std::vector<std::pair<ClassVector, double>>& classes,
                            const Bid& bid, const Support& support) {
  const BidRelation& rel = bid.single_relation("query_engine");
  AnswerSet out;
  std::map<std::string, double> merged;
  for (const auto& [k, prob] : classes) {
    auto choices = representative_world(rel, support, k);
    auto world = materialize_world(bid, choices);
    std::string value = evaluate_on_world(q, world);
    merged[value] += prob;
    out.per_class.push_back({k, value, prob});
  }
  for (const auto& [value, prob] : merged) out.merged.push_back({value, prob});
  bool all_numeric = true;
  for (const auto& e : out.merged)
    if (!is_decimal(e.value)) all_numeric = false;
  if (all_numeric) {
    std::sort(out.merged.begin(), out.merged.end(), [](const auto& a, const auto& b) {
      double x = std::stod(a.value), y = std::stod(b.value);
      if (x != y) return x < y;
      return a.value < b.value;
    });
  } else {
    std::sort(out.merged.begin(), out.merged.end(),
              [](const auto& a, const auto& b) { return a.value < b.value; });
  }
  return out;
}

}  // namespace mvqa
