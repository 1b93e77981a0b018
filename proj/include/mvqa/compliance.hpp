#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mvqa/mg.hpp"
#include "mvqa/worlds.hpp"

namespace mvqa {

// Convex-separable compliance distances: each kind's per-tuple term is
// discretely convex in k_j, which the flow solver relies on. ExcessCount is
// the hardness construction's term (0 for k <= 1, k-1 above), registered as a
// first-class kind so those instances exercise the same solver path.
enum class DistanceKind {
  KullbackLeibler,
  SquaredEuclidean,
  L1,
  ChiSquareStat,
  Hellinger,
  ExcessCount,
};

DistanceKind parse_distance_kind(const std::string& token);  // kl|eu2|l1|chi2|hellinger|excess
std::string distance_kind_name(DistanceKind kind);

// P^M restricted to the support rows (marginal over the underlying
// attributes); masses are positive but need not sum to 1.
struct InducedSupportDistribution {
  std::vector<double> p;
};

InducedSupportDistribution induced_distribution(const MissingnessGraph& mg,
                                                const std::vector<std::string>& attrs,
                                                const Support& support);

// d_j(k_j; n, p_j). KL's term is (k/n)ln(k/(np)) with value 0 at k = 0; since
// the induced distribution is restricted to the support it may be negative.
double per_tuple_term(DistanceKind kind, int k, int n, double p);

double class_distance(DistanceKind kind, const ClassVector& k, int n,
                      const InducedSupportDistribution& induced);
double class_distance(DistanceKind kind, const EmpiricalDistribution& empirical, int n,
                      const InducedSupportDistribution& induced);

// chi-square statistic of the class plus the survival probability of the
// chi2_{m-1} distribution at it (regularized upper incomplete gamma,
// absolute error <= 1e-10).
std::pair<double, double> chi_square_p_value(const ClassVector& k, int n,
                                             const InducedSupportDistribution& induced);

double chi_square_survival(double statistic, int degrees_of_freedom);
double regularized_gamma_q(double a, double x);

void write_induced_tsv(const Support& support, const InducedSupportDistribution& induced,
                       std::ostream& out);
InducedSupportDistribution read_induced_tsv(std::istream& in, const Support& support);

}  // namespace mvqa
