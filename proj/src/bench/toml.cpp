#include "toml.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace srba::bench {

namespace {

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  void skip_ws() {
    while (!done() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
};

TomlValue parse_value(Cursor& c, const std::string& origin, int line);

TomlValue parse_scalar(Cursor& c, const std::string& origin, int line) {
  c.skip_ws();
  if (c.done()) fail(origin, line, "missing value");

  if (c.peek() == '"') {
    ++c.pos;
    std::string out;
    while (!c.done() && c.peek() != '"') {
      char ch = c.peek();
      if (ch == '\\') {
        ++c.pos;
        if (c.done()) fail(origin, line, "dangling escape in string");
        switch (c.peek()) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: fail(origin, line, "unsupported escape in string");
        }
      }
      out.push_back(ch);
      ++c.pos;
    }
    if (c.done()) fail(origin, line, "unterminated string");
    ++c.pos;  // closing quote
    return TomlValue{out};
  }

  std::string tok;
  while (!c.done()) {
    const char ch = c.peek();
    if (ch == ',' || ch == ']' || ch == '#' || ch == ' ' || ch == '\t') break;
    tok.push_back(ch);
    ++c.pos;
  }
  if (tok.empty()) fail(origin, line, "missing value");
  if (tok == "true") return TomlValue{true};
  if (tok == "false") return TomlValue{false};
  if (tok == "inf" || tok == "+inf")
    return TomlValue{std::numeric_limits<double>::infinity()};
  if (tok == "-inf")
    return TomlValue{-std::numeric_limits<double>::infinity()};

  const bool has_float_marker = tok.find_first_of(".eE") != std::string::npos;
  try {
    std::size_t used = 0;
    if (!has_float_marker) {
      const std::int64_t v = std::stoll(tok, &used);
      if (used == tok.size()) return TomlValue{v};
    }
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return TomlValue{v};
  } catch (const std::exception&) {
    // fall through to the error below
  }
  fail(origin, line, "bad value token '" + tok + "'");
}

TomlValue parse_value(Cursor& c, const std::string& origin, int line) {
  c.skip_ws();
  if (c.done()) fail(origin, line, "missing value");
  if (c.peek() != '[') return parse_scalar(c, origin, line);

  ++c.pos;  // '['
  std::vector<TomlValue> items;
  for (;;) {
    c.skip_ws();
    if (c.done()) fail(origin, line, "unterminated array");
    if (c.peek() == ']') {
      ++c.pos;
      break;
    }
    items.push_back(parse_value(c, origin, line));
    c.skip_ws();
    if (c.done()) fail(origin, line, "unterminated array");
    if (c.peek() == ',') {
      ++c.pos;
    } else if (c.peek() != ']') {
      fail(origin, line, "expected ',' or ']' in array");
    }
  }
  return TomlValue{std::move(items)};
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// strips a trailing comment that is not inside a string
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"' && (k == 0 || s[k - 1] != '\\')) in_string = !in_string;
    if (s[k] == '#' && !in_string) return s.substr(0, k);
  }
  return s;
}

}  // namespace

bool TomlDocument::has(const std::string& table, const std::string& key) const {
  const auto it = tables.find(table);
  return it != tables.end() && it->second.count(key) > 0;
}

const TomlValue& TomlDocument::at(const std::string& table,
                                  const std::string& key) const {
  const auto it = tables.find(table);
  if (it == tables.end() || it->second.count(key) == 0) {
    throw std::runtime_error("config: missing key [" + table + "] " + key);
  }
  return it->second.at(key);
}

TomlDocument parse_toml_text(const std::string& text,
                             const std::string& origin) {
  TomlDocument doc;
  std::string current;
  doc.tables[current];

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail(origin, lineno, "bad table header '" + line + "'");
      }
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail(origin, lineno, "empty table name");
      doc.tables[current];
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, lineno, "expected 'key = value' line");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(origin, lineno, "empty key");
    const std::string rhs = trim(line.substr(eq + 1));
    Cursor c{rhs, 0};
    TomlValue value = parse_value(c, origin, lineno);
    c.skip_ws();
    if (!c.done()) fail(origin, lineno, "trailing characters after value");
    if (doc.tables[current].count(key) > 0) {
      fail(origin, lineno, "duplicate key '" + key + "'");
    }
    doc.tables[current].emplace(key, std::move(value));
  }
  return doc;
}

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml_text(buf.str(), path);
}

}  // namespace srba::bench
