#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "ibvs/config.hpp"

namespace ibvs {

namespace {

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  ConfigTree parse() {
    ConfigTree root = ConfigTree::object();
    ConfigTree* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_spaces();
        const std::vector<std::string> path = parse_key_path();
        skip_spaces();
        expect(']');
        expect_line_end();
        table = &root;
        for (const auto& k : path) {
          if (!table->contains(k)) (*table)[k] = ConfigTree::object();
          table = &(*table)[k];
          if (!table->is_object()) fail("'" + k + "' is both a value and a table");
        }
        continue;
      }
      const std::vector<std::string> path = parse_key_path();
      skip_spaces();
      expect('=');
      skip_spaces();
      ConfigTree value = parse_value();
      expect_line_end();
      ConfigTree* t = table;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!t->contains(path[i])) (*t)[path[i]] = ConfigTree::object();
        t = &(*t)[path[i]];
        if (!t->is_object()) fail("'" + path[i] + "' is not a table");
      }
      if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
      (*t)[path.back()] = std::move(value);
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  int line() const {
    int n = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) n += s_[i] == '\n';
    return n;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("TOML line " + std::to_string(line()) + ": " + msg);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_spaces() {
    while (peek() == ' ' || peek() == '\t') ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        ++pos_;
        continue;
      }
      break;
    }
  }

  /// Whitespace, newlines and comments, as allowed inside arrays.
  void skip_array_space() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void expect_line_end() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path;
    while (true) {
      skip_spaces();
      std::string key;
      if (peek() == '"') {
        key = parse_string();
      } else if (peek() == '\'') {
        key = parse_literal_string();
      } else {
        while (bare_key_char(peek())) key += s_[pos_++];
      }
      if (key.empty()) fail("expected a key");
      path.push_back(std::move(key));
      skip_spaces();
      if (peek() != '.') break;
      ++pos_;
    }
    return path;
  }

  /// 'literal' strings: no escapes.
  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '\'') return out;
      out += c;
    }
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  ConfigTree parse_value() {
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') fail("inline tables are not supported");
    std::string token;
    while (!eof() && (bare_key_char(peek()) || peek() == '.' || peek() == '+')) token += s_[pos_++];
    if (token.empty()) fail("expected a value");
    if (token == "true") return true;
    if (token == "false") return false;
    return parse_number(token);
  }

  ConfigTree parse_number(std::string token) {
    std::string clean;
    for (char ch : token) {
      if (ch != '_') clean += ch;
    }
    std::string body = clean;
    double sign = 1;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      sign = body[0] == '-' ? -1 : 1;
      body = body.substr(1);
    }
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    std::size_t used = 0;
    try {
      if (is_float) {
        const double v = std::stod(clean, &used);
        if (used == clean.size()) return v;
      } else {
        const long long v = std::stoll(clean, &used);
        if (used == clean.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + token + "'");
  }

  ConfigTree parse_array() {
    expect('[');
    ConfigTree arr = ConfigTree::array();
    while (true) {
      skip_array_space();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_array_space();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }
};

std::string toml_scalar(const ConfigTree& v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  }
  if (v.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_scalar(v[i]);
    return out + "]";
  }
  return v.dump();
}

void emit_table(const ConfigTree& table, const std::string& path, std::ostringstream& out) {
  bool wrote_header = path.empty();
  auto header = [&] {
    if (!wrote_header) {
      out << "\n[" << path << "]\n";
      wrote_header = true;
    }
  };
  for (const auto& [key, value] : table.items()) {
    if (value.is_object()) continue;
    header();
    out << key << " = " << toml_scalar(value) << '\n';
  }
  for (const auto& [key, value] : table.items()) {
    if (!value.is_object()) continue;
    emit_table(value, path.empty() ? key : path + "." + key, out);
  }
}

}  // namespace

ConfigTree parse_toml(std::string_view text) { return TomlParser(text).parse(); }

std::string to_toml(const ConfigTree& tree) {
  std::ostringstream out;
  emit_table(tree, "", out);
  return out.str();
}

}  // namespace ibvs
