#include "metrotwin/stream_csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "metrotwin/error.hpp"

namespace metrotwin {

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::parse_error, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << text;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) lines.push_back(l);
  }
  return lines;
}

}  // namespace

std::string format_stream_csv(std::span<const Measurement> stream) {
  std::string out(kStreamCsvHeader);
  out += '\n';
  for (const auto& m : stream) {
    out += std::to_string(tai_ns(m.timestamp));
    out += ',';
    out += m.source_id;
    out += ',';
    out += format_double(m.value);
    out += ',';
    out += format_double(m.u_random);
    out += ',';
    out += format_double(m.u_systematic);
    out += ',';
    out += m.unit.symbol();
    out += ',';
    out += to_string(m.kind);
    out += ',';
    out += format_rfc3339_utc(m.timestamp);
    out += '\n';
  }
  return out;
}

void write_stream_csv(const std::filesystem::path& path, std::span<const Measurement> stream) {
  spit(path, format_stream_csv(stream));
}

std::vector<Measurement> parse_stream_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kStreamCsvHeader) {
    throw Error(Errc::parse_error, "stream CSV header does not match the documented schema");
  }
  std::vector<Measurement> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    if (f.size() != 8) throw Error(Errc::parse_error, "line " + std::to_string(i + 1) + ": expected 8 fields");
    Measurement m;
    m.timestamp = from_tai_ns(parse_number<std::int64_t>(f[0], i + 1));
    m.source_id = std::string(f[1]);
    m.value = parse_number<double>(f[2], i + 1);
    m.u_random = parse_number<double>(f[3], i + 1);
    m.u_systematic = parse_number<double>(f[4], i + 1);
    auto unit = parse_unit(f[5]);
    auto kind = parse_quantity_kind(f[6]);
    if (!unit || !kind) throw Error(Errc::parse_error, "line " + std::to_string(i + 1) + ": unknown unit or kind");
    m.unit = *unit;
    m.kind = *kind;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Measurement> read_stream_csv(const std::filesystem::path& path) { return parse_stream_csv(slurp(path)); }

void write_truth_csv(const std::filesystem::path& path, std::span<const TruthSample> samples) {
  std::string out(kTruthCsvHeader);
  out += '\n';
  for (const auto& s : samples) {
    out += std::to_string(tai_ns(s.timestamp)) + ',' + s.source_id + ',' + format_double(s.value) + ',' +
           format_rfc3339_utc(s.timestamp) + '\n';
  }
  spit(path, out);
}

std::vector<TruthSample> read_truth_csv(const std::filesystem::path& path) {
  const auto text = slurp(path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kTruthCsvHeader) {
    throw Error(Errc::parse_error, "truth CSV header does not match the documented schema");
  }
  std::vector<TruthSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    if (f.size() != 4) throw Error(Errc::parse_error, "line " + std::to_string(i + 1) + ": expected 4 fields");
    out.push_back({from_tai_ns(parse_number<std::int64_t>(f[0], i + 1)), std::string(f[1]),
                   parse_number<double>(f[2], i + 1)});
  }
  return out;
}

std::string check_csv_schema(const std::filesystem::path& path, std::string_view expected) {
  std::string text;
  try {
    text = slurp(path);
  } catch (const Error& e) {
    return e.what();
  }
  const auto lines = lines_of(text);
  if (lines.empty()) return path.string() + ": empty file";
  if (lines.front() != expected) return path.string() + ": header '" + std::string(lines.front()) + "'";
  const auto columns = split(expected).size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (split(lines[i]).size() != columns) return path.string() + ": line " + std::to_string(i + 1) + " field count";
  }
  return {};
}

}  // namespace metrotwin
