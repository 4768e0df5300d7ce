#include <gtest/gtest.h>

#include "metrotwin/error.hpp"
#include "toml_lite.hpp"

using metrotwin::detail::parse_toml;

TEST(Toml, ScalarsAndTables) {
  const auto j = parse_toml(R"(
# comment
title = "line"   # trailing
literal = 'C:\path'
escaped = "tab\there \"q\" \u00e9"
count = 1_000
neg = -42
hex = 0x1F
ratio = 6.5e-3
flag = true
start = 2025-01-15T08:00:00Z

[scenario]
name = "x"
nested.key = 3

[a.b]
c = [1, 2, 3,]
mixed = [[1, 2], ["a"]]
inline = { k = 1, s = "v" }
)");
  EXPECT_EQ(j["title"], "line");
  EXPECT_EQ(j["literal"], "C:\\path");
  EXPECT_EQ(j["escaped"], "tab\there \"q\" \xc3\xa9");
  EXPECT_EQ(j["count"], 1000);
  EXPECT_EQ(j["neg"], -42);
  EXPECT_EQ(j["hex"], 31);
  EXPECT_DOUBLE_EQ(j["ratio"].get<double>(), 6.5e-3);
  EXPECT_EQ(j["flag"], true);
  EXPECT_EQ(j["start"], "2025-01-15T08:00:00Z");
  EXPECT_EQ(j["scenario"]["nested"]["key"], 3);
  EXPECT_EQ(j["a"]["b"]["c"].size(), 3u);
  EXPECT_EQ(j["a"]["b"]["mixed"][1][0], "a");
  EXPECT_EQ(j["a"]["b"]["inline"]["s"], "v");
}

TEST(Toml, ArraysOfTables) {
  const auto j = parse_toml(R"(
[[sensors]]
id = "a"
[[sensors]]
id = "b"
[sensors.extra]
x = 1
[[sensors]]
id = "c"
)");
  ASSERT_EQ(j["sensors"].size(), 3u);
  EXPECT_EQ(j["sensors"][1]["extra"]["x"], 1);
  EXPECT_EQ(j["sensors"][2]["id"], "c");
}

TEST(Toml, IntegersStayIntegers) {
  const auto j = parse_toml("a = 3\nb = 3.0\nc = 18446744073\n");
  EXPECT_TRUE(j["a"].is_number_integer());
  EXPECT_TRUE(j["b"].is_number_float());
  EXPECT_EQ(j["c"].get<std::int64_t>(), 18446744073LL);
}

TEST(Toml, ErrorsCarryLineNumbers) {
  for (const char* bad : {"a = ", "a = \"open", "[t\nx=1", "a = 1\na = 2", "= 3", "a = [1, 2", "a = 1 2",
                          "[t]\n[t]", "a = {k = 1", "a = tru"}) {
    try {
      parse_toml(bad);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const metrotwin::Error& e) {
      EXPECT_EQ(e.code(), metrotwin::Errc::parse_error) << bad;
      EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
  }
}
