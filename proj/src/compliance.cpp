#include "mvqa/compliance.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "mvqa/text.hpp"

namespace mvqa {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
  throw Error("compliance", code, msg);
}

}  // namespace

DistanceKind parse_distance_kind(const std::string& token) {
  if (token == "kl") return DistanceKind::KullbackLeibler;
  if (token == "eu2") return DistanceKind::SquaredEuclidean;
  if (token == "l1") return DistanceKind::L1;
  if (token == "chi2") return DistanceKind::ChiSquareStat;
  if (token == "hellinger") return DistanceKind::Hellinger;
  if (token == "excess") return DistanceKind::ExcessCount;
  fail("UnknownDistance", "unknown distance kind '" + token +
                              "' (expected kl|eu2|l1|chi2|hellinger|excess)");
}

std::string distance_kind_name(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::KullbackLeibler: return "kl";
    case DistanceKind::SquaredEuclidean: return "eu2";
    case DistanceKind::L1: return "l1";
    case DistanceKind::ChiSquareStat: return "chi2";
    case DistanceKind::Hellinger: return "hellinger";
    case DistanceKind::ExcessCount: return "excess";
  }
  fail("UnknownDistance", "bad distance kind value");
}

InducedSupportDistribution induced_distribution(const MissingnessGraph& mg,
                                                const std::vector<std::string>& attrs,
                                                const Support& support) {
  InducedSupportDistribution out;
  out.p.reserve(support.rows.size());
  for (const auto& row : support.rows) {
    Assignment a;
    for (size_t c = 0; c < attrs.size(); ++c) a[attrs[c]] = row[c];
    out.p.push_back(marginal(mg, a));
  }
  return out;
}

double per_tuple_term(DistanceKind kind, int k, int n, double p) {
  double q = static_cast<double>(k) / n;
  switch (kind) {
    case DistanceKind::KullbackLeibler:
      return k == 0 ? 0.0 : q * std::log(q / p);
    case DistanceKind::SquaredEuclidean:
      return (q - p) * (q - p);
    case DistanceKind::L1:
      return std::abs(q - p);
    case DistanceKind::ChiSquareStat:
      return (q - p) * (q - p) / p;
    case DistanceKind::Hellinger: {
      double d = std::sqrt(q) - std::sqrt(p);
      return d * d;
    }
    case DistanceKind::ExcessCount:
      return k <= 1 ? 0.0 : static_cast<double>(k - 1);
  }
  fail("UnknownDistance", "bad distance kind value");
}

double class_distance(DistanceKind kind, const ClassVector& k, int n,
                      const InducedSupportDistribution& induced) {
  if (k.size() != induced.p.size())
    fail("SizeMismatch", "class vector and induced distribution sizes differ");
  double sum = 0.0;
  for (size_t j = 0; j < k.size(); ++j) sum += per_tuple_term(kind, k[j], n, induced.p[j]);
  return sum;
}

double class_distance(DistanceKind kind, const EmpiricalDistribution& empirical, int n,
                      const InducedSupportDistribution& induced) {
  ClassVector k;
  k.reserve(empirical.mass.size());
  for (double mass : empirical.mass) k.push_back(static_cast<int>(std::lround(mass * n)));
  return class_distance(kind, k, n, induced);
}

namespace {

// Regularized incomplete gamma, P(a,x) by series and Q(a,x) by Lentz's
// continued fraction; switches at x = a + 1 as usual.
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 1; i < 1000; ++i) {
    term *= x / (a + i);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) fail("BadArgument", "regularized gamma needs x >= 0, a > 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_survival(double statistic, int degrees_of_freedom) {
  if (degrees_of_freedom < 1) fail("BadArgument", "chi-square needs df >= 1");
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(degrees_of_freedom / 2.0, statistic / 2.0);
}

std::pair<double, double> chi_square_p_value(const ClassVector& k, int n,
                                             const InducedSupportDistribution& induced) {
  if (k.size() < 2) fail("BadArgument", "chi-square test needs a support of size >= 2");
  double stat = class_distance(DistanceKind::ChiSquareStat, k, n, induced);
  double p_value = chi_square_survival(stat, static_cast<int>(k.size()) - 1);
  return {stat, p_value};
}

void write_induced_tsv(const Support& support, const InducedSupportDistribution& induced,
                       std::ostream& out) {
  out << "row\tp\n";
  for (size_t j = 0; j < support.rows.size(); ++j)
    out << join(support.rows[j], "|") << "\t" << fmt_prob(induced.p[j]) << "\n";
}

InducedSupportDistribution read_induced_tsv(std::istream& in, const Support& support) {
  InducedSupportDistribution induced;
  induced.p.assign(support.rows.size(), -1.0);
  std::string line;
  bool header_seen = false;
  std::map<std::string, int> row_index;
  for (size_t j = 0; j < support.rows.size(); ++j)
    row_index[join(support.rows[j], "|")] = static_cast<int>(j);
  while (std::getline(in, line)) {
    if (trim(line).empty() || starts_with(line, "#")) continue;
    if (!header_seen) {
      header_seen = true;
      if (starts_with(line, "row\t")) continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 2) fail("ParseError", "induced TSV rows are `row<TAB>p`");
    auto it = row_index.find(fields[0]);
    if (it == row_index.end())
      fail("ParseError", "induced TSV row '" + fields[0] + "' is not in the support");
    char* endp = nullptr;
    double p = std::strtod(fields[1].c_str(), &endp);
    if (endp == fields[1].c_str() || *endp != '\0' || !(p > 0.0))
      fail("ParseError", "induced TSV probability must be positive, got '" + fields[1] + "'");
    induced.p[it->second] = p;
  }
  for (size_t j = 0; j < induced.p.size(); ++j)
    if (induced.p[j] < 0.0)
      fail("ParseError", "induced TSV misses support row " + join(support.rows[j], "|"));
  return induced;
}

}  // namespace mvqa
