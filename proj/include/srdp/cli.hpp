#pragma once

// Command-line front end: flat key = value parameters, CSV/JSON tables with a
// self-describing header, and the five commands.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace srdp::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kCapExceeded = 3 };

/// Bad flags, unknown keys or malformed values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamSpec {
  std::string key;
  std::string fallback;  // empty means "not set"
  std::string help;
};

class Params {
 public:
  explicit Params(std::vector<ParamSpec> schema);

  /// Throws UsageError for a key outside the schema.
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return !str(key).empty(); }
  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  /// Comma-separated numbers.
  std::vector<double> list(const std::string& key) const;
  /// Rows separated by ';', entries by ','.
  std::vector<std::vector<double>> matrix(const std::string& key) const;

  /// (key, value) in schema order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  const std::vector<ParamSpec>& schema() const { return schema_; }

 private:
  std::vector<ParamSpec> schema_;
  std::map<std::string, std::string> values_;
};

/// Parses "key = value" lines; '#' starts a comment. Duplicate keys and lines
/// without '=' throw UsageError naming `origin` and the line.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in,
                                                                  const std::string& origin);

double parse_number(const std::string& text, const std::string& key);

/// 12 significant digits, '.' separator, independent of the global locale.
std::string format_number(double v);

using Matrix = std::vector<std::vector<double>>;
using Cell = std::variant<std::monostate, double, std::uint64_t, std::string, Matrix>;

struct Document {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Document& doc);
void write_json(std::ostream& out, const Document& doc);

struct RunConfig {
  std::string command;
  std::string out;  // empty: standard output
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string config;  // path of a key = value file
  std::vector<std::string> sets;  // key=value overrides applied after the file
};

std::vector<std::string> command_names();
std::vector<ParamSpec> command_schema(const std::string& command);

/// Runs one command on already-resolved parameters.
Document run_command(const std::string& command, const Params& params, const RunConfig& rc);

/// Full invocation: parses argv, runs, writes the output. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srdp::cli
