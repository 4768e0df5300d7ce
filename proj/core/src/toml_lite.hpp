#pragma once

#include <string_view>

#include "json.hpp"

namespace metrotwin::detail {

/// Reads the TOML subset used by scenario files into a JSON tree: tables,
/// arrays of tables, dotted keys, basic and literal strings, integers, floats,
/// booleans, arrays and inline tables. Date-times are kept as strings.
/// Multi-line strings are not supported. Throws Error(parse_error) with the
/// line number on malformed input.
nlohmann::ordered_json parse_toml(std::string_view text);

}  // namespace metrotwin::detail
