#include "text_util.hpp"

#include <cmath>

namespace riemspline::text {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, int line) {
  const std::string t = trim(token);
  try {
    size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw ParseError("unparseable value '" + token + "'", line);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("unparseable value '" + token + "'", line);
  }
}

double parse_number_expr(const std::string& token, int line) {
  std::string t = trim(token);
  if (t.empty()) throw ParseError("empty value", line);

  double sign = 1.0;
  if (t[0] == '+' || t[0] == '-') {
    if (t[0] == '-') sign = -1.0;
    t = trim(t.substr(1));
  }

  // Optional "/ divisor" suffix.
  double divisor = 1.0;
  size_t slash = t.find('/');
  if (slash != std::string::npos) {
    divisor = parse_double(t.substr(slash + 1), line);
    if (divisor == 0.0) throw ParseError("division by zero in '" + token + "'", line);
    t = trim(t.substr(0, slash));
  }

  double value;
  size_t pipos = t.find("pi");
  if (pipos != std::string::npos) {
    if (t.substr(pipos) != "pi") throw ParseError("unparseable value '" + token + "'", line);
    std::string coeff = trim(t.substr(0, pipos));
    if (!coeff.empty() && coeff.back() == '*') coeff = trim(coeff.substr(0, coeff.size() - 1));
    double c = coeff.empty() ? 1.0 : parse_double(coeff, line);
    value = c * M_PI;
  } else {
    value = parse_double(t, line);
  }
  return sign * value / divisor;
}

std::vector<std::string> split_list(const std::string& token, int line) {
  const std::string t = trim(token);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ParseError("expected a bracketed list, got '" + token + "'", line);
  std::vector<std::string> out;
  std::string inner = t.substr(1, t.size() - 2);
  size_t pos = 0;
  while (pos <= inner.size()) {
    size_t comma = inner.find(',', pos);
    std::string item =
        comma == std::string::npos ? inner.substr(pos) : inner.substr(pos, comma - pos);
    item = trim(item);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Vec parse_vector_expr(const std::string& token, int line) {
  auto items = split_list(token, line);
  Vec v(static_cast<int>(items.size()));
  for (size_t i = 0; i < items.size(); ++i) v[static_cast<int>(i)] = parse_number_expr(items[i], line);
  return v;
}

bool parse_kv(const std::string& raw, std::string& key, std::string& value) {
  std::string line = raw;
  size_t hash = line.find('#');
  if (hash != std::string::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return false;
  size_t eq = line.find('=');
  if (eq == std::string::npos) {
    key = line;
    value = "";
    return true;
  }
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return true;
}

}  // namespace riemspline::text
