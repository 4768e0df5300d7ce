#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "metrotwin/collector.hpp"
#include "metrotwin/fusion.hpp"

using namespace metrotwin;

namespace {

Measurement reading(double v, std::int64_t ns, std::string id) {
  Measurement m;
  m.value = v;
  m.u_random = 0.05;
  m.u_systematic = 0.02;
  m.unit = units::kelvin();
  m.kind = QuantityKind::temperature;
  m.timestamp = from_tai_ns(ns);
  m.source_id = std::move(id);
  return m;
}

void BM_Fuse(benchmark::State& state) {
  std::vector<Measurement> in;
  for (int i = 0; i < state.range(0); ++i) in.push_back(reading(300.0 + 0.01 * i, 0, "s" + std::to_string(i)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(virtual_sensor_fuse(in));
  }
}
BENCHMARK(BM_Fuse)->Arg(3)->Arg(10)->Arg(100);

void BM_AlignStreams(benchmark::State& state) {
  const auto n = state.range(0);
  std::vector<std::vector<Measurement>> streams(4);
  for (std::size_t s = 0; s < streams.size(); ++s) {
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t ns = k * 1'000'000'000 + static_cast<std::int64_t>(s) * 137'000'000;
      streams[s].push_back(reading(300.0 + std::sin(0.01 * static_cast<double>(k)), ns, "s" + std::to_string(s)));
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(align_streams(streams, std::chrono::seconds(1)));
  }
  state.SetItemsProcessed(state.iterations() * n * 4);
}
BENCHMARK(BM_AlignStreams)->Arg(300)->Arg(3600);

}  // namespace
