#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tgen/assignment.hpp"
#include "tgen/java_scan.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/serialize.hpp"

namespace {

std::vector<std::vector<double>> random_weights(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> w(n, std::vector<double>(n));
  for (auto& row : w) {
    for (double& x : row) x = dist(rng);
  }
  return w;
}

void BM_Assignment(benchmark::State& state) {
  const auto weights = random_weights(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tgen::coverage::max_assignment_total(weights));
  }
}
BENCHMARK(BM_Assignment)->Arg(8)->Arg(32)->Arg(128);

void BM_Digest(benchmark::State& state) {
  std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) {
    benchmark::DoNotOptimize(tgen::fnv1a_hex(payload));
  }
}
BENCHMARK(BM_Digest)->Arg(1 << 10)->Arg(1 << 16);

const char* kJavaSource = R"(package demo;

public class Sample {
  private int count;
  public Sample(int count) { this.count = count; }
  public int count() { return count; }
  public int bump(int by) {
    if (by < 0) { throw new IllegalArgumentException("negative"); }
    count += by;
    return count;
  }
}
)";

void BM_JavaScan(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(tgen::index::scan_java_file("demo/Sample.java", kJavaSource));
  }
}
BENCHMARK(BM_JavaScan);

const char* kTemplateText = R"(STEP 1: prepare the canvas
  VP canvas_size: dimensions of the page [CANDIDATES: small | large]

STEP 2: apply the paint
  VP paint_kind: paint implementation used [CANDIDATES: color | linear gradient | radial gradient | texture]
  DEP canvas_size <- STEP 1

STEP 3: draw and check the pixels
  DEP paint_kind <- STEP 2
)";

void BM_TemplateParse(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tgen::model::parse_template(kTemplateText, "demo/Canvas#setPaint(Paint)", "0"));
  }
}
BENCHMARK(BM_TemplateParse);

}  // namespace

BENCHMARK_MAIN();
