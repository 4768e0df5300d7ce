#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "metrotwin/error.hpp"
#include "metrotwin/stream_csv.hpp"

using namespace metrotwin;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "metrotwin_csv_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(300.0), "300");
  EXPECT_EQ(format_double(-2.5e-9), "-2.5e-09");
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10'000; ++i) {
    const double v = u(gen) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(StreamCsv, RoundTripIsExact) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z(293.15, 4.0);
  std::vector<Measurement> s;
  for (int i = 0; i < 500; ++i) {
    Measurement m;
    m.value = z(gen);
    m.u_random = 0.01 * (1 + i % 7);
    m.u_systematic = 0.0123456789;
    m.unit = units::kelvin();
    m.kind = QuantityKind::temperature;
    m.timestamp = from_tai_ns(1'700'000'000'000'000'000LL + 250'000'123LL * i);
    m.source_id = "TT-101";
    s.push_back(m);
  }
  const auto path = scratch("roundtrip.csv");
  write_stream_csv(path, s);
  EXPECT_EQ(check_csv_schema(path, kStreamCsvHeader), "");
  const auto back = read_stream_csv(path);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].value, s[i].value);
    EXPECT_EQ(back[i].u_random, s[i].u_random);
    EXPECT_EQ(back[i].u_systematic, s[i].u_systematic);
    EXPECT_EQ(back[i].timestamp, s[i].timestamp);
    EXPECT_EQ(back[i].unit, s[i].unit);
    EXPECT_EQ(back[i].kind, s[i].kind);
    EXPECT_EQ(back[i].source_id, s[i].source_id);
  }
  EXPECT_EQ(format_stream_csv(back), format_stream_csv(s));
}

TEST(StreamCsv, EmptyStreamHasHeaderOnly) {
  const auto text = format_stream_csv({});
  EXPECT_TRUE(parse_stream_csv(text).empty());
  EXPECT_EQ(text.substr(0, kStreamCsvHeader.size()), kStreamCsvHeader);
}

TEST(StreamCsv, MalformedInput) {
  EXPECT_THROW(parse_stream_csv("a,b,c\n"), Error);
  const std::string h(kStreamCsvHeader);
  EXPECT_THROW(parse_stream_csv(h + "\n1,x,2\n"), Error);
  EXPECT_THROW(parse_stream_csv(h + "\n1,x,abc,0,0,K,temperature,t\n"), Error);
  EXPECT_THROW(parse_stream_csv(h + "\n1,x,1,0,0,furlong,temperature,t\n"), Error);
  EXPECT_THROW(read_stream_csv("/nonexistent/x.csv"), Error);
}

TEST(TruthCsv, RoundTrip) {
  const std::vector<TruthSample> t{{from_tai_ns(5), "a", 1.25}, {from_tai_ns(10), "a", -3.0}};
  const auto path = scratch("truth.csv");
  write_truth_csv(path, t);
  EXPECT_EQ(check_csv_schema(path, kTruthCsvHeader), "");
  const auto back = read_truth_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].value, -3.0);
  EXPECT_EQ(back[1].timestamp, from_tai_ns(10));
}

TEST(CsvSchema, DetectsProblems) {
  const auto path = scratch("bad.csv");
  {
    std::ofstream out(path);
    out << kTruthCsvHeader << "\n1,a,2,x\n1,a\n";
  }
  EXPECT_NE(check_csv_schema(path, kTruthCsvHeader), "");
  EXPECT_NE(check_csv_schema(path, kStreamCsvHeader), "");
  EXPECT_NE(check_csv_schema("/nonexistent/y.csv", kTruthCsvHeader), "");
}
