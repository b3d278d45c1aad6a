#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace satjscc::keyval {

// Line-oriented key-value text shared by the environment tables, the dataset
// manifests and the experiment config:
//   [section name]
//   key = value
// '#' starts a comment, blank lines are skipped, duplicate keys are kept in
// order (environment tables use them as a record stream).

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error("parse error at line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }

  std::string get_string(std::string_view key, std::string fallback = "") const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
  }

  bool has(std::string_view key) const { return find(key) != nullptr; }
};

struct Document {
  std::vector<Section> sections;

  const Section* find(std::string_view name) const {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline Document parse(std::string_view text) {
  Document doc;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ParseError("empty section name", line_no);
      doc.sections.push_back(Section{std::string(name), line_no, {}});
      current = &doc.sections.back();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (current == nullptr) {
      doc.sections.push_back(Section{"", line_no, {}});
      current = &doc.sections.back();
    }
    current->entries.push_back(Entry{std::string(key), std::string(value), line_no});
  }
  return doc;
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

inline double to_double(const Entry& e) {
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || trim(std::string_view(end)) != "")
    throw ParseError("expected a number for '" + e.key + "', got '" + e.value + "'", e.line);
  return v;
}

inline long to_int(const Entry& e) {
  long v = 0;
  const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (res.ec != std::errc{} || trim(std::string_view(res.ptr, e.value.data() + e.value.size() - res.ptr)) != "")
    throw ParseError("expected an integer for '" + e.key + "', got '" + e.value + "'", e.line);
  return v;
}

inline bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ParseError("expected a boolean for '" + e.key + "'", e.line);
}

// Whitespace-separated list of numbers.
inline std::vector<double> to_doubles(const Entry& e) {
  std::vector<double> out;
  std::istringstream is(e.value);
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof())
    throw ParseError("expected numbers for '" + e.key + "', got '" + e.value + "'", e.line);
  return out;
}

inline std::vector<std::string> to_strings(const Entry& e) {
  std::vector<std::string> out;
  std::istringstream is(e.value);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace satjscc::keyval
