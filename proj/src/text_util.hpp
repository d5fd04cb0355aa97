#pragma once

#include <string>
#include <vector>

#include "riemspline/types.hpp"

namespace riemspline::text {

std::string trim(const std::string& s);

/// Strict double parse; the whole token must be consumed.
double parse_double(const std::string& token, int line = 0);

/// Number with optional pi factor: "2", "-0.75*pi", "pi/2", "0.5*pi/3", "-pi".
double parse_number_expr(const std::string& token, int line = 0);

/// "[a, b, c]" -> tokens; throws ParseError if not bracketed.
std::vector<std::string> split_list(const std::string& token, int line = 0);

Vec parse_vector_expr(const std::string& token, int line = 0);

/// Key-value line "key = value"; returns false for blank / comment lines.
bool parse_kv(const std::string& line, std::string& key, std::string& value);

}  // namespace riemspline::text
