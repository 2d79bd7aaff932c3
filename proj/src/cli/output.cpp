#include <charconv>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "srdp/cli.hpp"

namespace srdp::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

namespace {

std::string matrix_text(const Matrix& m) {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += '|';
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      if (j) s += ' ';
      s += format_number(m[i][j]);
    }
  }
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

struct CsvCell {
  std::string operator()(std::monostate) const { return ""; }
  std::string operator()(double v) const { return format_number(v); }
  std::string operator()(std::uint64_t v) const { return std::to_string(v); }
  std::string operator()(const std::string& s) const { return csv_field(s); }
  std::string operator()(const Matrix& m) const { return matrix_text(m); }
};

// Round-trips through the 12-digit text so JSON and CSV carry the same values.
nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  const std::string t = format_number(v);
  double r = 0.0;
  std::from_chars(t.data(), t.data() + t.size(), r);
  return r;
}

struct JsonCell {
  nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
  nlohmann::ordered_json operator()(double v) const { return json_number(v); }
  nlohmann::ordered_json operator()(std::uint64_t v) const { return v; }
  nlohmann::ordered_json operator()(const std::string& s) const { return s; }
  nlohmann::ordered_json operator()(const Matrix& m) const {
    auto a = nlohmann::ordered_json::array();
    for (const auto& row : m) {
      auto r = nlohmann::ordered_json::array();
      for (double v : row) r.push_back(json_number(v));
      a.push_back(std::move(r));
    }
    return a;
  }
};

}  // namespace

void write_csv(std::ostream& out, const Document& doc) {
  out << "# srdp " << SRDP_VERSION << '\n';
  out << "# command = " << doc.command << '\n';
  for (const auto& [k, v] : doc.parameters) out << "# " << k << " = " << v << '\n';
  for (const auto& [k, v] : doc.notes) out << "# note " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < doc.columns.size(); ++i) out << (i ? "," : "") << doc.columns[i];
  out << '\n';
  for (const auto& row : doc.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << std::visit(CsvCell{}, row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Document& doc) {
  nlohmann::ordered_json j;
  j["srdp_version"] = SRDP_VERSION;
  j["command"] = doc.command;
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : doc.parameters) j["parameters"][k] = v;
  j["notes"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : doc.notes) j["notes"][k] = v;
  j["columns"] = doc.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : doc.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[doc.columns[i]] = std::visit(JsonCell{}, row[i]);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

}  // namespace srdp::cli
