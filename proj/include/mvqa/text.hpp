#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mvqa {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
// split + trim each piece, dropping empty trailing fields caused by "a, b,"
std::vector<std::string> split_trim(std::string_view s, char sep);

bool starts_with(std::string_view s, std::string_view prefix);

// Probabilities print with 12 significant digits, distances with 9; golden
// files depend on these exact widths.
std::string fmt_prob(double p);
std::string fmt_dist(double d);

std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string join_ints(const std::vector<int>& v, const std::string& sep);

// RFC-4180-ish CSV: quoted fields, doubled quotes, CR/LF tolerant.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& field);

}  // namespace mvqa
