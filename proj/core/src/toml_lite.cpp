#include "toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "metrotwin/error.hpp"

namespace metrotwin::detail {

namespace {

using json = nlohmann::ordered_json;

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : s_(text) {}

  json read() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = header(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::parse_error, "line " + std::to_string(line_) + ": " + what);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
      } else {
        break;
      }
    }
  }

  // whitespace, comments and newlines inside arrays
  void skip_ws_nl() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    get();
  }

  static bool bare_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-'; }

  std::string key_part() {
    skip_ws();
    if (peek() == '"' || peek() == '\'') return string_value();
    const auto start = pos_;
    while (!eof() && bare_char(peek())) ++pos_;
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      parts.push_back(key_part());
      skip_ws();
    }
    return parts;
  }

  json* descend(json* at, const std::string& key) {
    json& next = (*at)[key];
    if (next.is_null()) next = json::object();
    if (next.is_array() && !next.empty() && next.back().is_object()) return &next.back();
    if (!next.is_object()) fail("key '" + key + "' is not a table");
    return &next;
  }

  json* header(json& root) {
    ++pos_;
    const bool array = peek() == '[';
    if (array) ++pos_;
    const auto path = dotted_key();
    skip_ws();
    if (get() != ']' || (array && get() != ']')) fail("malformed table header");
    json* at = &root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) at = descend(at, path[i]);
    json& leaf = (*at)[path.back()];
    std::string joined;
    for (const auto& p : path) joined += (joined.empty() ? "" : ".") + p;
    if (array) {
      // a new element opens a fresh scope for its sub-tables
      std::erase_if(defined_, [&](const std::string& d) { return d.starts_with(joined + "."); });
      if (leaf.is_null()) leaf = json::array();
      if (!leaf.is_array()) fail("'" + path.back() + "' is not an array of tables");
      leaf.push_back(json::object());
      return &leaf.back();
    }
    if (!defined_.insert(joined).second) fail("table [" + joined + "] defined twice");
    if (leaf.is_null()) leaf = json::object();
    if (!leaf.is_object()) fail("'" + path.back() + "' is not a table");
    return &leaf;
  }

  void key_value(json& table) {
    const auto path = dotted_key();
    skip_ws();
    if (get() != '=') fail("expected '='");
    skip_ws();
    json* at = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) at = descend(at, path[i]);
    if (at->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*at)[path.back()] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array_value();
    if (c == '{') return inline_table();
    return scalar();
  }

  std::uint32_t hex_code(int digits) {
    std::uint32_t cp = 0;
    for (int i = 0; i < digits; ++i) {
      if (eof()) fail("truncated unicode escape");
      const char h = get();
      cp <<= 4;
      if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
      else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
      else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
      else fail("bad unicode escape");
    }
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid unicode scalar value");
    return cp;
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::string string_value() {
    const char quote = get();
    if (peek() == quote && pos_ + 1 < s_.size() && s_[pos_ + 1] == quote) fail("multi-line strings are not supported");
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == quote) break;
      if (quote == '"' && c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = get();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case 'u': append_utf8(out, hex_code(4)); break;
          case 'U': append_utf8(out, hex_code(8)); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  json array_value() {
    ++pos_;
    json arr = json::array();
    skip_ws_nl();
    while (peek() != ']') {
      if (eof()) fail("unterminated array");
      arr.push_back(value());
      skip_ws_nl();
      if (peek() == ',') {
        ++pos_;
        skip_ws_nl();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    ++pos_;
    return arr;
  }

  json inline_table() {
    ++pos_;
    json t = json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return t;
    }
    while (true) {
      key_value(t);
      skip_ws();
      const char c = get();
      if (c == '}') break;
      if (c != ',') fail("expected ',' or '}' in inline table");
    }
    return t;
  }

  json scalar() {
    const auto start = pos_;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' && peek() != '\n' && peek() != '\r' &&
           peek() != '#') {
      // a date-time may contain one space between date and time
      ++pos_;
    }
    std::string_view tok = s_.substr(start, pos_ - start);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (tok.size() >= 10 && std::isdigit(static_cast<unsigned char>(tok[0])) != 0 && tok[4] == '-') {
      return std::string(tok);  // date-time
    }
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    if (!clean.empty() && clean.front() == '+') clean.erase(0, 1);
    if (clean.size() > 2 && clean[0] == '0' && (clean[1] == 'x' || clean[1] == 'o' || clean[1] == 'b')) {
      const int base = clean[1] == 'x' ? 16 : clean[1] == 'o' ? 8 : 2;
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(clean.data() + 2, clean.data() + clean.size(), v, base);
      if (ec == std::errc{} && p == clean.data() + clean.size()) return v;
      fail("cannot parse value '" + std::string(tok) + "'");
    }
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
      if (ec == std::errc{} && p == clean.data() + clean.size()) return v;
    } else {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
      if (ec == std::errc{} && p == clean.data() + clean.size()) return v;
    }
    fail("cannot parse value '" + std::string(tok) + "'");
  }

  std::string_view s_;
  std::set<std::string> defined_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

nlohmann::ordered_json parse_toml(std::string_view text) { return TomlReader(text).read(); }

}  // namespace metrotwin::detail
