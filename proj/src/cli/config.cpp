#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "srdp/cli.hpp"

namespace srdp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

}  // namespace

double parse_number(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || p != end)
    throw UsageError(key + ": '" + text + "' is not a number");
  return v;
}

Params::Params(std::vector<ParamSpec> schema) : schema_(std::move(schema)) {
  for (const auto& s : schema_) values_[s.key] = s.fallback;
}

void Params::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    std::string known;
    for (const auto& s : schema_) known += (known.empty() ? "" : ", ") + s.key;
    throw UsageError("unknown key '" + key + "' (expected one of: " + known + ")");
  }
  it->second = trim(value);
}

const std::string& Params::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("parameter not in schema: " + key);
  return it->second;
}

double Params::num(const std::string& key) const {
  if (!has(key)) throw UsageError(key + " is required");
  return parse_number(str(key), key);
}

std::size_t Params::count(const std::string& key) const {
  const double v = num(key);
  if (!(v >= 0.0 && v < 9e15) || v != std::floor(v))
    throw UsageError(key + " must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> Params::list(const std::string& key) const {
  if (!has(key)) throw UsageError(key + " is required");
  std::vector<double> out;
  for (const auto& part : split(str(key), ',')) out.push_back(parse_number(part, key));
  return out;
}

std::vector<std::vector<double>> Params::matrix(const std::string& key) const {
  if (!has(key)) throw UsageError(key + " is required");
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(str(key), ';')) {
    std::vector<double> r;
    for (const auto& part : split(row, ',')) r.push_back(parse_number(part, key));
    rows.push_back(std::move(r));
  }
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) throw UsageError(key + ": rows differ in length");
  return rows;
}

std::vector<std::pair<std::string, std::string>> Params::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : schema_) out.emplace_back(s.key, values_.at(s.key));
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in,
                                                                  const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(where + ": empty key");
    if (!seen.insert(key).second) throw UsageError(where + ": duplicate key '" + key + "'");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace srdp::cli
