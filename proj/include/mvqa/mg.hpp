#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvqa/error.hpp"

namespace mvqa {

enum class VariableKind { Underlying, FullyObserved, Indicator, Star };

constexpr const char* kNa = "na";

inline std::string star_name(const std::string& underlying) { return underlying + "*"; }
inline std::string indicator_name(const std::string& underlying) { return "I_" + underlying; }

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::FullyObserved;
  std::vector<std::string> domain;   // ordered; star domains end with "na"
  std::string partner;               // underlying's name, set on Star/Indicator
};

// Rows are indexed by the mixed-radix rank of the parent assignment, first
// parent most significant; each row is a distribution over the child domain.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::vector<std::vector<double>> rows;
};

// A missingness graph: the Bayesian network over underlying, fully observed,
// indicator and star variables governing one relation. Star variables are
// derived, never parsed from user CPT lines (those are kept aside only so
// validation can flag them). Immutable once finalized; inference is pure.
struct MissingnessGraph {
  std::string relation;
  std::vector<Variable> variables;
  std::vector<Cpt> cpts;                       // aligned with variables
  std::vector<Cpt> user_star_cpts;             // kept for validation only

  // finalize() products
  std::unordered_map<std::string, int> var_index;
  std::vector<std::unordered_map<std::string, int>> value_index;
  std::vector<std::vector<int>> parent_ids;    // aligned with variables

  void finalize();

  int index_of(const std::string& var) const;
  const Variable& var(int id) const { return variables[id]; }
  int arity(int id) const { return static_cast<int>(variables[id].domain.size()); }
  int value_id(int var_id, const std::string& value) const;
};

// A (possibly partial) assignment of value tokens to variables by name.
using Assignment = std::map<std::string, std::string>;

// Dense form: value index per variable, -1 where unassigned.
std::vector<int> to_dense(const MissingnessGraph& mg, const Assignment& a);

// Product of all domain sizes, saturating at uint64 max.
std::uint64_t assignment_space(const MissingnessGraph& mg);

std::vector<Diagnostic> validate_mg(const MissingnessGraph& mg);

// Eq-by-eq product of CPT factors at a full assignment.
double joint_probability(const MissingnessGraph& mg, const Assignment& a);

// Sum of the joint over all completions of a partial assignment. The default
// entry point runs the chunked kernel (OpenMP when available, deterministic
// combine order either way); marginal_reference is the plain serial loop kept
// for tests and the benchmark.
double marginal(const MissingnessGraph& mg, const Assignment& a);
double marginal_reference(const MissingnessGraph& mg, const Assignment& a);
double marginal_dense(const MissingnessGraph& mg, const std::vector<int>& dense);
double marginal_dense_reference(const MissingnessGraph& mg, const std::vector<int>& dense);

// marginal(target ∪ evidence) / marginal(evidence); throws ZeroEvidence when
// the evidence has probability 0 (the observed data is impossible under M).
double conditional(const MissingnessGraph& mg, const Assignment& target,
                   const Assignment& evidence);

MissingnessGraph parse_mg(const std::string& text, const std::string& source_name = "<mg>");
std::string write_mg_text(const MissingnessGraph& mg);

}  // namespace mvqa
