#pragma once

// Minimal `key=value` text documents shared by the stack file, volume
// headers, configs and the analysis report. Blank lines and lines starting
// with '#' are ignored. Numbers are written in shortest round-trip form,
// independent of the C locale.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace autowindow::kv {

struct Entry {
  std::size_t line = 0;
  std::string key;
  std::string value;
};

class Document {
 public:
  // Throws ConfigParseError on a line without '=' or a duplicated key.
  static Document parse(std::string_view text);
  static Document read_file(const std::string& path);

  bool has(const std::string& key) const;
  const Entry& entry(const std::string& key) const;  // ConfigParseError(0, ...) if absent
  const std::string& get(const std::string& key) const { return entry(key).value; }
  const std::vector<Entry>& entries() const { return entries_; }

  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<long long> get_ints(const std::string& key) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

std::string format_double(double v);
std::string format_doubles(const double* v, std::size_t n);

// Throws std::invalid_argument on trailing garbage or an empty token.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);
std::vector<std::string_view> split_ws(std::string_view s);

}  // namespace autowindow::kv
