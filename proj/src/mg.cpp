#include "mvqa/mg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <set>
#include <sstream>

#include "mvqa/text.hpp"

namespace mvqa {

namespace {

constexpr double kRowSumTolerance = 1e-9;

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("mg_model", code, msg);
}

int cpt_row_rank(const MissingnessGraph& mg, const Cpt& cpt,
                 const std::vector<int>& parent_values) {
  int rank = 0;
  for (size_t i = 0; i < cpt.parents.size(); ++i) {
    int pid = mg.index_of(cpt.parents[i]);
    rank = rank * mg.arity(pid) + parent_values[i];
  }
  return rank;
}

int cpt_row_count(const MissingnessGraph& mg, const Cpt& cpt) {
  int count = 1;
  for (const auto& p : cpt.parents) count *= mg.arity(mg.index_of(p));
  return count;
}

Cpt derive_star_cpt(const MissingnessGraph& mg, const Variable& star) {
  // Eqs for star determinism: I=1 forces na, I=0 copies the underlying value.
  Cpt cpt;
  cpt.child = star.name;
  cpt.parents = {star.partner, indicator_name(star.partner)};
  int u = mg.index_of(star.partner);
  int u_arity = mg.arity(u);
  int star_arity = static_cast<int>(star.domain.size());  // u_arity + 1, na last
  cpt.rows.assign(static_cast<size_t>(u_arity) * 2, std::vector<double>(star_arity, 0.0));
  for (int uv = 0; uv < u_arity; ++uv) {
    for (int iv = 0; iv < 2; ++iv) {
      auto& row = cpt.rows[static_cast<size_t>(uv) * 2 + iv];
      if (iv == 1) row[star_arity - 1] = 1.0;  // X* = na
      else row[uv] = 1.0;                      // X* = X^m
    }
  }
  return cpt;
}

}  // namespace

void MissingnessGraph::finalize() {
  var_index.clear();
  for (size_t i = 0; i < variables.size(); ++i) {
    if (!var_index.emplace(variables[i].name, static_cast<int>(i)).second)
      fail("DuplicateVariable", "variable '" + variables[i].name + "' declared twice");
  }
  value_index.assign(variables.size(), {});
  for (size_t i = 0; i < variables.size(); ++i) {
    for (size_t v = 0; v < variables[i].domain.size(); ++v) {
      if (!value_index[i].emplace(variables[i].domain[v], static_cast<int>(v)).second)
        fail("DuplicateDomainValue", "variable '" + variables[i].name +
                                         "' repeats domain value '" + variables[i].domain[v] + "'");
    }
  }
  parent_ids.assign(variables.size(), {});
  if (cpts.size() != variables.size())
    fail("MissingCpt", "expected one CPT per variable");
  for (size_t i = 0; i < variables.size(); ++i) {
    if (cpts[i].child != variables[i].name)
      fail("MissingCpt", "CPT misaligned for variable '" + variables[i].name + "'");
    for (const auto& p : cpts[i].parents) {
      auto it = var_index.find(p);
      if (it == var_index.end())
        fail("UnknownVariable", "CPT of '" + cpts[i].child + "' references unknown parent '" + p + "'");
      parent_ids[i].push_back(it->second);
    }
  }
}

int MissingnessGraph::index_of(const std::string& name) const {
  auto it = var_index.find(name);
  if (it == var_index.end()) fail("UnknownVariable", "unknown variable '" + name + "'");
  return it->second;
}

int MissingnessGraph::value_id(int var_id, const std::string& value) const {
  auto it = value_index[var_id].find(value);
  if (it == value_index[var_id].end())
    fail("DomainViolation", "value '" + value + "' is not in the domain of '" +
                                variables[var_id].name + "'");
  return it->second;
}

std::vector<int> to_dense(const MissingnessGraph& mg, const Assignment& a) {
  std::vector<int> dense(mg.variables.size(), -1);
  for (const auto& [name, value] : a) {
    int id = mg.index_of(name);
    dense[id] = mg.value_id(id, value);
  }
  return dense;
}

std::uint64_t assignment_space(const MissingnessGraph& mg) {
  std::uint64_t total = 1;
  for (const auto& v : mg.variables) {
    std::uint64_t size = v.domain.size();
    if (size != 0 && total > UINT64_MAX / size) return UINT64_MAX;
    total *= size;
  }
  return total;
}

std::vector<Diagnostic> validate_mg(const MissingnessGraph& mg) {
  std::vector<Diagnostic> out;
  auto diag = [&](const std::string& code, const std::string& msg) {
    out.push_back({code, msg});
  };

  // Parent edges must form a DAG.
  {
    size_t n = mg.variables.size();
    std::vector<int> out_degree(n, 0);  // edges child -> parent for Kahn on reversed graph
    std::vector<std::vector<int>> children(n);
    for (size_t i = 0; i < n; ++i) {
      out_degree[i] = static_cast<int>(mg.parent_ids[i].size());
      for (int p : mg.parent_ids[i]) children[p].push_back(static_cast<int>(i));
    }
    std::deque<int> ready;
    for (size_t i = 0; i < n; ++i)
      if (out_degree[i] == 0) ready.push_back(static_cast<int>(i));
    size_t seen = 0;
    std::vector<int> order;
    while (!ready.empty()) {
      int v = ready.front();
      ready.pop_front();
      ++seen;
      for (int c : children[v])
        if (--out_degree[c] == 0) ready.push_back(c);
    }
    if (seen != n) diag("cycle", "parent edges contain a cycle");
  }

  // Star wiring: exactly two parents (underlying + indicator), and a sink.
  std::set<std::string> used_as_parent;
  for (const auto& cpt : mg.cpts)
    for (const auto& p : cpt.parents) used_as_parent.insert(p);
  for (size_t i = 0; i < mg.variables.size(); ++i) {
    const Variable& v = mg.variables[i];
    if (v.kind == VariableKind::Star) {
      if (used_as_parent.count(v.name))
        diag("star-not-sink", "Star variable " + v.name + " is not a sink");
      const auto& parents = mg.cpts[i].parents;
      if (parents.size() != 2 || parents[0] != v.partner ||
          parents[1] != indicator_name(v.partner))
        diag("star-parents", "Star variable " + v.name +
                                 " must have exactly its underlying and indicator as parents");
      if (v.domain.empty() || v.domain.back() != kNa)
        diag("star-domain", "Star variable " + v.name + " must end its domain with na");
    }
    if (v.kind == VariableKind::Indicator) {
      if (v.domain != std::vector<std::string>{"0", "1"})
        diag("indicator-domain", "Indicator variable " + v.name + " must have domain {0,1}");
    }
    if (v.kind == VariableKind::Underlying) {
      if (!mg.var_index.count(star_name(v.name)) || !mg.var_index.count(indicator_name(v.name)))
        diag("bad-partner", "Underlying variable " + v.name +
                                " lacks its star/indicator partners");
    }
  }

  // CPT rows: non-negative, sum 1 within tolerance.
  for (const auto& cpt : mg.cpts) {
    for (size_t r = 0; r < cpt.rows.size(); ++r) {
      double sum = 0.0;
      bool negative = false;
      for (double p : cpt.rows[r]) {
        sum += p;
        if (p < 0.0) negative = true;
      }
      if (negative)
        diag("row-negative", "CPT of " + cpt.child + ", row " + std::to_string(r) +
                                 " has a negative probability");
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        diag("row-sum", "CPT of " + cpt.child + ", row " + std::to_string(r) +
                            " sum != 1 (got " + fmt_prob(sum) + ")");
    }
  }

  // User-supplied star CPTs must agree with the derived deterministic ones.
  for (const auto& user : mg.user_star_cpts) {
    auto it = mg.var_index.find(user.child);
    if (it == mg.var_index.end()) continue;
    const Cpt& derived = mg.cpts[it->second];
    bool same_shape = user.parents == derived.parents && user.rows.size() == derived.rows.size();
    bool equal = same_shape;
    if (same_shape) {
      for (size_t r = 0; r < user.rows.size() && equal; ++r) {
        if (user.rows[r].size() != derived.rows[r].size()) { equal = false; break; }
        for (size_t c = 0; c < user.rows[r].size(); ++c)
          if (std::abs(user.rows[r][c] - derived.rows[r][c]) > kRowSumTolerance) {
            equal = false;
            break;
          }
      }
    }
    if (!equal)
      diag("star-cpt-violation", "user-supplied CPT for star variable " + user.child +
                                     " violates the star determinism equations");
  }

  return out;
}

namespace {

// Factor product at a full dense assignment.
double joint_dense(const MissingnessGraph& mg, const std::vector<int>& dense) {
  double prob = 1.0;
  for (size_t i = 0; i < mg.variables.size(); ++i) {
    const Cpt& cpt = mg.cpts[i];
    int rank = 0;
    for (size_t j = 0; j < mg.parent_ids[i].size(); ++j) {
      int pid = mg.parent_ids[i][j];
      rank = rank * mg.arity(pid) + dense[pid];
    }
    prob *= cpt.rows[rank][dense[i]];
    if (prob == 0.0) return 0.0;
  }
  return prob;
}

struct CompletionSpace {
  std::vector<int> free_vars;
  std::vector<std::uint64_t> strides;  // last free var fastest
  std::uint64_t total = 1;
};

CompletionSpace completion_space(const MissingnessGraph& mg, const std::vector<int>& dense) {
  CompletionSpace cs;
  for (size_t i = 0; i < dense.size(); ++i)
    if (dense[i] < 0) cs.free_vars.push_back(static_cast<int>(i));
  cs.strides.assign(cs.free_vars.size(), 1);
  for (int i = static_cast<int>(cs.free_vars.size()) - 1; i >= 0; --i) {
    cs.strides[i] = cs.total;
    std::uint64_t size = mg.arity(cs.free_vars[i]);
    if (size != 0 && cs.total > UINT64_MAX / size) fail("CapExceeded", "completion space overflow");
    cs.total *= size;
  }
  return cs;
}

// Sum of the joint over completions [begin, end) of the free variables, in
// odometer order. Shared by the serial reference and the chunked kernel.
double sum_range(const MissingnessGraph& mg, std::vector<int>& scratch,
                 const CompletionSpace& cs, std::uint64_t begin, std::uint64_t end) {
  const size_t k = cs.free_vars.size();
  std::vector<int> digits(k, 0);
  for (size_t i = 0; i < k; ++i)
    digits[i] = static_cast<int>((begin / cs.strides[i]) % mg.arity(cs.free_vars[i]));
  for (size_t i = 0; i < k; ++i) scratch[cs.free_vars[i]] = digits[i];
  double sum = 0.0;
  for (std::uint64_t idx = begin; idx < end; ++idx) {
    sum += joint_dense(mg, scratch);
    // odometer increment, last position fastest
    for (int i = static_cast<int>(k) - 1; i >= 0; --i) {
      int vid = cs.free_vars[i];
      if (++digits[i] < mg.arity(vid)) {
        scratch[vid] = digits[i];
        break;
      }
      digits[i] = 0;
      scratch[vid] = 0;
    }
  }
  return sum;
}

constexpr std::uint64_t kChunk = 4096;

}  // namespace

double joint_probability(const MissingnessGraph& mg, const Assignment& a) {
  std::vector<int> dense = to_dense(mg, a);
  for (size_t i = 0; i < dense.size(); ++i)
    if (dense[i] < 0)
      fail("MissingAssignment", "variable '" + mg.variables[i].name + "' is unassigned");
  return joint_dense(mg, dense);
}

double marginal_dense_reference(const MissingnessGraph& mg, const std::vector<int>& dense) {
  CompletionSpace cs = completion_space(mg, dense);
  std::vector<int> scratch = dense;
  return sum_range(mg, scratch, cs, 0, cs.total);
}

double marginal_dense(const MissingnessGraph& mg, const std::vector<int>& dense) {
  CompletionSpace cs = completion_space(mg, dense);
  if (cs.total <= 2 * kChunk) {
    std::vector<int> scratch = dense;
    return sum_range(mg, scratch, cs, 0, cs.total);
  }
  // Fixed-size chunks combined in chunk order: the result is identical for
  // any thread count, which keeps CLI output byte-stable.
  const std::uint64_t n_chunks = (cs.total + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel
  {
    std::vector<int> scratch = dense;
#pragma omp for schedule(static)
    for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
      std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
      std::uint64_t end = std::min(begin + kChunk, cs.total);
      partial[c] = sum_range(mg, scratch, cs, begin, end);
    }
  }
#else
  std::vector<int> scratch = dense;
  for (std::uint64_t c = 0; c < n_chunks; ++c) {
    std::uint64_t begin = c * kChunk;
    std::uint64_t end = std::min(begin + kChunk, cs.total);
    partial[c] = sum_range(mg, scratch, cs, begin, end);
  }
#endif
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

double marginal(const MissingnessGraph& mg, const Assignment& a) {
  return marginal_dense(mg, to_dense(mg, a));
}

double marginal_reference(const MissingnessGraph& mg, const Assignment& a) {
  return marginal_dense_reference(mg, to_dense(mg, a));
}

double conditional(const MissingnessGraph& mg, const Assignment& target,
                   const Assignment& evidence) {
  double denom = marginal(mg, evidence);
  if (denom <= 0.0)
    fail("ZeroEvidence", "evidence has probability 0 under the missingness graph");
  Assignment merged = evidence;
  for (const auto& [name, value] : target) {
    auto [it, inserted] = merged.emplace(name, value);
    if (!inserted && it->second != value) return 0.0;  // conflicting overlap
  }
  return marginal(mg, merged) / denom;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct PendingCpt {
  std::vector<std::pair<std::string, std::string>> parent_values;
  std::vector<std::pair<std::string, double>> distribution;
  int line;
};

void check_token(const std::string& tok, int line, const std::string& what) {
  if (tok.empty())
    fail("ParseError", what + " is empty (line " + std::to_string(line) + ")");
  if (tok.find_first_of(" \t,|:=#") != std::string::npos)
    fail("ParseError", what + " '" + tok + "' contains a reserved character (line " +
                           std::to_string(line) + ")");
}

}  // namespace

MissingnessGraph parse_mg(const std::string& text, const std::string& source_name) {
  MissingnessGraph mg;
  struct Decl {
    std::string name;
    bool partially_observed;
    std::vector<std::string> domain;
  };
  std::vector<Decl> decls;
  std::map<std::string, std::vector<std::string>> parents_of;
  std::map<std::string, std::vector<PendingCpt>> cpt_rows;
  std::vector<std::string> decl_order;  // cpt/parents may also target indicators

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto err = [&](const std::string& msg) {
      fail("ParseError", source_name + ":" + std::to_string(line_no) + ": " + msg);
    };

    if (starts_with(line, "relation ")) {
      mg.relation = trim(line.substr(9));
      check_token(mg.relation, line_no, "relation name");
    } else if (starts_with(line, "var ")) {
      std::istringstream ls(line.substr(4));
      Decl d;
      std::string kind_kv, domain_kv;
      ls >> d.name >> kind_kv >> domain_kv;
      check_token(d.name, line_no, "variable name");
      if (!starts_with(kind_kv, "kind=")) err("expected kind=<m|o>");
      std::string kind = kind_kv.substr(5);
      if (kind == "m") d.partially_observed = true;
      else if (kind == "o") d.partially_observed = false;
      else err("kind must be m or o, got '" + kind + "'");
      if (!starts_with(domain_kv, "domain=")) err("expected domain=<v1,v2,...>");
      d.domain = split_trim(domain_kv.substr(7), ',');
      if (d.domain.empty()) err("empty domain for variable " + d.name);
      for (const auto& v : d.domain) {
        check_token(v, line_no, "domain value");
        if (v == kNa) err("'na' may not appear in a declared domain (variable " + d.name + ")");
      }
      decls.push_back(d);
    } else if (starts_with(line, "parents ")) {
      auto eq = line.find('=');
      if (eq == std::string::npos) err("expected parents <name> = <p1,...>");
      std::string name = trim(line.substr(8, eq - 8));
      auto list = split_trim(line.substr(eq + 1), ',');
      if (parents_of.count(name)) err("duplicate parents line for " + name);
      parents_of[name] = list;
    } else if (starts_with(line, "cpt ")) {
      auto colon = line.find(':');
      if (colon == std::string::npos) err("expected ':' in cpt line");
      std::string head = trim(line.substr(4, colon - 4));
      std::string name;
      PendingCpt row;
      row.line = line_no;
      auto bar = head.find('|');
      if (bar == std::string::npos) {
        name = trim(head);
      } else {
        name = trim(head.substr(0, bar));
        for (const auto& pv : split_trim(head.substr(bar + 1), ',')) {
          auto eq = pv.find('=');
          if (eq == std::string::npos) err("parent assignment must be name=value");
          row.parent_values.emplace_back(trim(pv.substr(0, eq)), trim(pv.substr(eq + 1)));
        }
      }
      check_token(name, line_no, "cpt target");
      for (const auto& vp : split_trim(line.substr(colon + 1), ',')) {
        auto eq = vp.find('=');
        if (eq == std::string::npos) err("cpt entry must be value=prob");
        std::string value = trim(vp.substr(0, eq));
        std::string prob_text = trim(vp.substr(eq + 1));
        char* endp = nullptr;
        double prob = std::strtod(prob_text.c_str(), &endp);
        if (endp == prob_text.c_str() || *endp != '\0')
          err("bad probability '" + prob_text + "'");
        row.distribution.emplace_back(value, prob);
      }
      cpt_rows[name].push_back(std::move(row));
    } else {
      err("unrecognized line: " + line);
    }
  }

  if (mg.relation.empty())
    fail("ParseError", source_name + ": missing 'relation' line");

  // Materialize variables: declared ones first, then derived stars/indicators.
  for (const auto& d : decls) {
    Variable v;
    v.name = d.name;
    v.kind = d.partially_observed ? VariableKind::Underlying : VariableKind::FullyObserved;
    v.domain = d.domain;
    mg.variables.push_back(v);
    decl_order.push_back(d.name);
  }
  for (const auto& d : decls) {
    if (!d.partially_observed) continue;
    Variable ind;
    ind.name = indicator_name(d.name);
    ind.kind = VariableKind::Indicator;
    ind.domain = {"0", "1"};
    ind.partner = d.name;
    mg.variables.push_back(ind);
    Variable star;
    star.name = star_name(d.name);
    star.kind = VariableKind::Star;
    star.domain = d.domain;
    star.domain.push_back(kNa);
    star.partner = d.name;
    mg.variables.push_back(star);
  }

  // First pass over indexes so CPT construction can rank parent rows.
  mg.var_index.clear();
  for (size_t i = 0; i < mg.variables.size(); ++i) mg.var_index[mg.variables[i].name] = (int)i;
  mg.value_index.assign(mg.variables.size(), {});
  for (size_t i = 0; i < mg.variables.size(); ++i)
    for (size_t v = 0; v < mg.variables[i].domain.size(); ++v)
      mg.value_index[i][mg.variables[i].domain[v]] = static_cast<int>(v);

  mg.cpts.resize(mg.variables.size());
  for (size_t i = 0; i < mg.variables.size(); ++i) {
    Variable& var = mg.variables[i];
    Cpt& cpt = mg.cpts[i];
    cpt.child = var.name;
    if (var.kind == VariableKind::Star) {
      mg.cpts[i] = derive_star_cpt(mg, var);
      continue;
    }
    auto pit = parents_of.find(var.name);
    if (pit != parents_of.end()) {
      for (const auto& p : pit->second) {
        if (!mg.var_index.count(p))
          fail("ParseError", source_name + ": parents of " + var.name +
                                 " reference unknown variable '" + p + "'");
        cpt.parents.push_back(p);
      }
      parents_of.erase(pit);
    }
    auto rit = cpt_rows.find(var.name);
    if (rit == cpt_rows.end())
      fail("ParseError", source_name + ": no cpt rows for variable " + var.name);
    int expected_rows = cpt_row_count(mg, cpt);
    int arity = static_cast<int>(var.domain.size());
    cpt.rows.assign(expected_rows, {});
    for (const auto& pending : rit->second) {
      if (pending.parent_values.size() != cpt.parents.size())
        fail("ParseError", source_name + ":" + std::to_string(pending.line) +
                               ": cpt row for " + var.name + " must assign exactly its parents");
      std::vector<int> parent_vals(cpt.parents.size(), -1);
      for (const auto& [pname, pvalue] : pending.parent_values) {
        auto found = std::find(cpt.parents.begin(), cpt.parents.end(), pname);
        if (found == cpt.parents.end())
          fail("ParseError", source_name + ":" + std::to_string(pending.line) + ": '" + pname +
                                 "' is not a parent of " + var.name);
        int slot = static_cast<int>(found - cpt.parents.begin());
        int pid = mg.index_of(pname);
        parent_vals[slot] = mg.value_id(pid, pvalue);
      }
      int rank = cpt_row_rank(mg, cpt, parent_vals);
      if (!cpt.rows[rank].empty())
        fail("ParseError", source_name + ":" + std::to_string(pending.line) +
                               ": duplicate cpt row for " + var.name);
      std::vector<double> row(arity, 0.0);
      for (const auto& [value, prob] : pending.distribution) {
        int vid = mg.value_id(static_cast<int>(i), value);
        row[vid] = prob;
      }
      // Renormalize tiny drift; larger deviations are left for validate_mg.
      double sum = 0.0;
      for (double p : row) sum += p;
      if (sum > 0.0 && std::abs(sum - 1.0) <= kRowSumTolerance && sum != 1.0)
        for (double& p : row) p /= sum;
      cpt.rows[rank] = std::move(row);
    }
    for (int r = 0; r < expected_rows; ++r)
      if (cpt.rows[r].empty())
        fail("ParseError", source_name + ": cpt for " + var.name + " is missing row " +
                               std::to_string(r) + " of " + std::to_string(expected_rows));
    cpt_rows.erase(rit);
  }

  // Leftover cpt/parents lines target stars (kept for validation) or unknowns.
  for (auto& [name, rows] : cpt_rows) {
    auto it = mg.var_index.find(name);
    if (it == mg.var_index.end())
      fail("ParseError", source_name + ": cpt for unknown variable '" + name + "'");
    const Variable& star = mg.variables[it->second];
    Cpt user;
    user.child = name;
    auto pit = parents_of.find(name);
    user.parents = pit != parents_of.end() ? pit->second
                                           : std::vector<std::string>{star.partner,
                                                                      indicator_name(star.partner)};
    if (pit != parents_of.end()) parents_of.erase(pit);
    int expected_rows = 1;
    bool rankable = true;
    for (const auto& p : user.parents) {
      if (!mg.var_index.count(p)) { rankable = false; break; }
      expected_rows *= mg.arity(mg.index_of(p));
    }
    if (!rankable) {
      mg.user_star_cpts.push_back(std::move(user));
      continue;
    }
    user.rows.assign(expected_rows, std::vector<double>(star.domain.size(), 0.0));
    for (const auto& pending : rows) {
      std::vector<int> parent_vals(user.parents.size(), 0);
      bool ok = pending.parent_values.size() == user.parents.size();
      for (const auto& [pname, pvalue] : pending.parent_values) {
        auto found = std::find(user.parents.begin(), user.parents.end(), pname);
        if (found == user.parents.end()) { ok = false; break; }
        parent_vals[found - user.parents.begin()] =
            mg.value_id(mg.index_of(pname), pvalue);
      }
      if (!ok) continue;
      int rank = cpt_row_rank(mg, user, parent_vals);
      for (const auto& [value, prob] : pending.distribution)
        user.rows[rank][mg.value_id(it->second, value)] = prob;
    }
    mg.user_star_cpts.push_back(std::move(user));
  }
  for (const auto& [name, list] : parents_of) {
    auto it = mg.var_index.find(name);
    if (it == mg.var_index.end())
      fail("ParseError", source_name + ": parents for unknown variable '" + name + "'");
    // parents line for a star: record as a user CPT with those parents so
    // validation flags the fixed-parents rule.
    Cpt user;
    user.child = name;
    user.parents = list;
    mg.user_star_cpts.push_back(std::move(user));
  }

  mg.finalize();
  return mg;
}

std::string write_mg_text(const MissingnessGraph& mg) {
  std::ostringstream out;
  out << "relation " << mg.relation << "\n";
  for (const auto& v : mg.variables) {
    if (v.kind == VariableKind::Star || v.kind == VariableKind::Indicator) continue;
    out << "var " << v.name << " kind=" << (v.kind == VariableKind::Underlying ? "m" : "o")
        << " domain=" << join(v.domain, ",") << "\n";
  }
  for (size_t i = 0; i < mg.variables.size(); ++i) {
    const Variable& v = mg.variables[i];
    if (v.kind == VariableKind::Star) continue;
    const Cpt& cpt = mg.cpts[i];
    if (!cpt.parents.empty())
      out << "parents " << v.name << " = " << join(cpt.parents, ",") << "\n";
  }
  for (size_t i = 0; i < mg.variables.size(); ++i) {
    const Variable& v = mg.variables[i];
    if (v.kind == VariableKind::Star) continue;
    const Cpt& cpt = mg.cpts[i];
    int rows = static_cast<int>(cpt.rows.size());
    for (int r = 0; r < rows; ++r) {
      out << "cpt " << v.name;
      if (!cpt.parents.empty()) {
        out << " |";
        int rank = r;
        std::vector<int> vals(cpt.parents.size(), 0);
        for (int j = static_cast<int>(cpt.parents.size()) - 1; j >= 0; --j) {
          int pid = mg.index_of(cpt.parents[j]);
          vals[j] = rank % mg.arity(pid);
          rank /= mg.arity(pid);
        }
        for (size_t j = 0; j < cpt.parents.size(); ++j) {
          int pid = mg.index_of(cpt.parents[j]);
          out << (j ? ", " : " ") << cpt.parents[j] << "=" << mg.variables[pid].domain[vals[j]];
        }
      }
      out << " : ";
      for (size_t c = 0; c < cpt.rows[r].size(); ++c) {
        out << (c ? ", " : "") << v.domain[c] << "=" << fmt_prob(cpt.rows[r][c]);
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace mvqa
