#include "mvqa/observed.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "mvqa/text.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("observed_db", code, msg);
}

}  // namespace

const RelationSchema& ObservedDatabase::schema(const std::string& relation) const {
  for (const auto& s : schemas)
    if (s.name == relation) return s;
  fail("UnknownRelation", "no schema for relation '" + relation + "'");
}

std::vector<RelationSchema> parse_schema(const std::string& text,
                                         const std::string& source_name) {
  std::vector<RelationSchema> schemas;
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
      RelationSchema s;
      s.name = trim(line.substr(9));
      if (s.name.empty()) err("empty relation name");
      for (const auto& existing : schemas)
        if (existing.name == s.name) err("duplicate relation '" + s.name + "'");
      schemas.push_back(s);
    } else if (starts_with(line, "attr ")) {
      if (schemas.empty()) err("attr line before any relation line");
      std::istringstream ls(line.substr(5));
      AttributeDecl a;
      std::string role_kv, domain_kv;
      ls >> a.name >> role_kv >> domain_kv;
      if (a.name.empty()) err("empty attribute name");
      if (!starts_with(role_kv, "role=")) err("expected role=<o|m>");
      std::string role = role_kv.substr(5);
      if (role == "o") a.role = AttrRole::FullyObserved;
      else if (role == "m") a.role = AttrRole::PartiallyObserved;
      else err("role must be o or m, got '" + role + "'");
      if (!starts_with(domain_kv, "domain=")) err("expected domain=<v1,...>");
      a.domain = split_trim(domain_kv.substr(7), ',');
      if (a.domain.empty()) err("empty domain for attribute " + a.name);
      for (const auto& v : a.domain)
        if (v == kNa)
          err("'na' may not be a declared domain value (attribute " + a.name + ")");
      for (const auto& existing : schemas.back().attributes)
        if (existing.name == a.name)
          err("duplicate attribute '" + a.name + "' in relation " + schemas.back().name);
      schemas.back().attributes.push_back(a);
    } else {
      err("unrecognized line: " + line);
    }
  }
  if (schemas.empty()) fail("ParseError", source_name + ": no relations declared");
  return schemas;
}

std::string write_schema_text(const std::vector<RelationSchema>& schemas) {
  std::ostringstream out;
  for (const auto& s : schemas) {
    out << "relation " << s.name << "\n";
    for (const auto& a : s.attributes)
      out << "attr " << a.name << " role=" << (a.role == AttrRole::FullyObserved ? "o" : "m")
          << " domain=" << join(a.domain, ",") << "\n";
  }
  return out.str();
}

ObservedDatabase load_observed(const std::string& schema_text,
                               const std::map<std::string, std::string>& csv_texts) {
  ObservedDatabase db;
  db.schemas = parse_schema(schema_text);
  std::set<std::string> seen_tids;  // globally unique across relations
  for (const auto& schema : db.schemas) {
    auto csv_it = csv_texts.find(schema.name);
    if (csv_it == csv_texts.end())
      fail("SchemaMismatch", "no CSV supplied for relation '" + schema.name + "'");
    auto rows = parse_csv(csv_it->second);
    if (rows.empty())
      fail("SchemaMismatch", "relation " + schema.name + ": CSV has no header row");
    const auto& header = rows.front();
    std::vector<std::string> expected = {"tid"};
    for (const auto& a : schema.attributes) expected.push_back(a.name);
    if (header != expected)
      fail("SchemaMismatch", "relation " + schema.name + ": header '" + join(header, ",") +
                                 "' does not match schema '" + join(expected, ",") + "'");
    auto& tuples = db.relations[schema.name];
    for (size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() != expected.size())
        fail("SchemaMismatch", "relation " + schema.name + ", row " + std::to_string(r) +
                                   ": expected " + std::to_string(expected.size()) +
                                   " fields, got " + std::to_string(row.size()));
      ObservedTuple t;
      t.tid = row[0];
      if (t.tid.empty())
        fail("SchemaMismatch", "relation " + schema.name + ", row " + std::to_string(r) +
                                   ": empty tid");
      if (!seen_tids.insert(t.tid).second)
        fail("DuplicateTid", "tid '" + t.tid + "' appears more than once");
      for (size_t c = 0; c < schema.attributes.size(); ++c) {
        const AttributeDecl& attr = schema.attributes[c];
        const std::string& value = row[c + 1];
        if (value == kNa) {
          if (attr.role == AttrRole::FullyObserved)
            fail("NaInObservedColumn", "tid " + t.tid + ": na under fully observed attribute " +
                                           attr.name);
        } else if (std::find(attr.domain.begin(), attr.domain.end(), value) ==
                   attr.domain.end()) {
          fail("DomainViolation", "tid " + t.tid + ": value '" + value +
                                      "' is outside the domain of " + attr.name);
        }
        t.cells.push_back(value);
      }
      tuples.push_back(std::move(t));
    }
  }
  if (csv_texts.size() > db.schemas.size())
    fail("SchemaMismatch", "CSV supplied for a relation that is not in the schema");
  return db;
}

std::string write_csv_text(const RelationSchema& schema,
                           const std::vector<ObservedTuple>& rows) {
  std::ostringstream out;
  out << "tid";
  for (const auto& a : schema.attributes) out << "," << csv_escape(a.name);
  out << "\n";
  for (const auto& t : rows) {
    out << csv_escape(t.tid);
    for (const auto& c : t.cells) out << "," << csv_escape(c);
    out << "\n";
  }
  return out.str();
}

BoundDatabase bind_mg(ObservedDatabase db, std::map<std::string, MissingnessGraph> mgs) {
  for (const auto& schema : db.schemas) {
    auto it = mgs.find(schema.name);
    if (it == mgs.end())
      fail("AttributeMgMismatch", "relation " + schema.name + " has no missingness graph");
    const MissingnessGraph& mg = it->second;
    if (mg.relation != schema.name)
      fail("AttributeMgMismatch", "MG governs relation '" + mg.relation +
                                      "', bound to '" + schema.name + "'");
    size_t declared = 0;
    for (const auto& v : mg.variables)
      if (v.kind == VariableKind::Underlying || v.kind == VariableKind::FullyObserved)
        ++declared;
    if (declared != schema.attributes.size())
      fail("AttributeMgMismatch", "relation " + schema.name + ": MG declares " +
                                      std::to_string(declared) + " variables for " +
                                      std::to_string(schema.attributes.size()) + " attributes");
    for (const auto& attr : schema.attributes) {
      auto vit = mg.var_index.find(attr.name);
      if (vit == mg.var_index.end())
        fail("AttributeMgMismatch", "attribute " + attr.name + " has no MG variable");
      const Variable& v = mg.variables[vit->second];
      bool role_ok = (attr.role == AttrRole::FullyObserved &&
                      v.kind == VariableKind::FullyObserved) ||
                     (attr.role == AttrRole::PartiallyObserved &&
                      v.kind == VariableKind::Underlying);
      if (!role_ok)
        fail("AttributeMgMismatch", "attribute " + attr.name +
                                        ": role does not match the MG variable kind");
      if (v.domain != attr.domain)
        fail("AttributeMgMismatch", "attribute " + attr.name +
                                        ": schema and MG domains differ");
    }
  }
  BoundDatabase bound;
  bound.db = std::move(db);
  bound.mgs = std::move(mgs);
  return bound;
}

}  // namespace mvqa
