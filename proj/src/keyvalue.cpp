#include "autowindow/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "autowindow/errors.hpp"

namespace autowindow::kv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Document Document::parse(std::string_view text) {
  Document doc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParseError(line_no, "expected key=value");
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigParseError(line_no, "empty key");
    if (doc.index_.count(key) != 0) throw ConfigParseError(line_no, "duplicate key '" + key + "'");
    doc.index_.emplace(key, doc.entries_.size());
    doc.entries_.push_back({line_no, std::move(key), std::string(trim(line.substr(eq + 1)))});
  }
  return doc;
}

Document Document::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Document::has(const std::string& key) const { return index_.count(key) != 0; }

const Entry& Document::entry(const std::string& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw ConfigParseError(0, "missing key '" + key + "'");
  return entries_[it->second];
}

double Document::get_double(const std::string& key) const {
  const auto& e = entry(key);
  try {
    return parse_double(e.value);
  } catch (const std::invalid_argument&) {
    throw ConfigParseError(e.line, "'" + key + "' is not a number");
  }
}

long long Document::get_int(const std::string& key) const {
  const auto& e = entry(key);
  try {
    return parse_int(e.value);
  } catch (const std::invalid_argument&) {
    throw ConfigParseError(e.line, "'" + key + "' is not an integer");
  }
}

std::vector<double> Document::get_doubles(const std::string& key) const {
  const auto& e = entry(key);
  std::vector<double> out;
  try {
    for (auto tok : split_ws(e.value)) out.push_back(parse_double(tok));
  } catch (const std::invalid_argument&) {
    throw ConfigParseError(e.line, "'" + key + "' must be a list of numbers");
  }
  return out;
}

std::vector<long long> Document::get_ints(const std::string& key) const {
  const auto& e = entry(key);
  std::vector<long long> out;
  try {
    for (auto tok : split_ws(e.value)) out.push_back(parse_int(tok));
  } catch (const std::invalid_argument&) {
    throw ConfigParseError(e.line, "'" + key + "' must be a list of integers");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_doubles(const double* v, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

double parse_double(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  }
  return v;
}

long long parse_int(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  long long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace autowindow::kv
