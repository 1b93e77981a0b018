#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvqa/mg.hpp"

namespace mvqa {

enum class AttrRole { FullyObserved, PartiallyObserved };

struct AttributeDecl {
  std::string name;
  AttrRole role = AttrRole::FullyObserved;
  std::vector<std::string> domain;
};

struct RelationSchema {
  std::string name;
  std::vector<AttributeDecl> attributes;
};

struct ObservedTuple {
  std::string tid;
  std::vector<std::string> cells;  // "na" marks a missing value
};

struct ObservedDatabase {
  std::vector<RelationSchema> schemas;                       // declaration order
  std::map<std::string, std::vector<ObservedTuple>> relations;

  const RelationSchema& schema(const std::string& relation) const;
};

// Schema text: `relation <name>` then `attr <name> role=<o|m> domain=<v1,...>`.
std::vector<RelationSchema> parse_schema(const std::string& text,
                                         const std::string& source_name = "<schema>");
std::string write_schema_text(const std::vector<RelationSchema>& schemas);

// One CSV per relation, header `tid,<attr1>,...` in schema order.
ObservedDatabase load_observed(const std::string& schema_text,
                               const std::map<std::string, std::string>& csv_texts);
std::string write_csv_text(const RelationSchema& schema,
                           const std::vector<ObservedTuple>& rows);

// An observed database paired with one validated MG per relation.
struct BoundDatabase {
  ObservedDatabase db;
  std::map<std::string, MissingnessGraph> mgs;
};

BoundDatabase bind_mg(ObservedDatabase db, std::map<std::string, MissingnessGraph> mgs);

}  // namespace mvqa
