#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/config.hpp"
#include "monna/network.hpp"
#include "monna/trainer.hpp"

using namespace monna;

namespace {

std::vector<ParamVector> cloud(std::size_t count, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::vector<ParamVector> out(count, ParamVector(dim));
    for (auto& v : out) {
        for (auto& x : v) x = normal(rng);
    }
    return out;
}

std::vector<PeerVector> peers_of(const std::vector<ParamVector>& vs) {
    std::vector<PeerVector> out;
    for (std::size_t i = 1; i < vs.size(); ++i) out.push_back({i, vs[i]});
    return out;
}

// Args: n, dim. f = 3 and n - f - 1 received vectors, as in the coordination phase.
void BM_Nna(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const std::size_t f = 3;
    const auto vs = cloud(n - f, state.range(1), 1);
    const auto peers = peers_of(vs);
    for (auto _ : state) benchmark::DoNotOptimize(nna(vs[0], peers, f));
}
BENCHMARK(BM_Nna)->Args({16, 10})->Args({16, 1000})->Args({64, 100});

void BM_Cwtm(benchmark::State& state) {
    const auto vs = cloud(state.range(0) - 3, state.range(1), 2);
    for (auto _ : state) benchmark::DoNotOptimize(coordinate_trimmed_mean(vs, 3));
}
BENCHMARK(BM_Cwtm)->Args({16, 10})->Args({16, 1000})->Args({64, 100});

void BM_GeometricMedian(benchmark::State& state) {
    const auto vs = cloud(state.range(0) - 3, state.range(1), 3);
    for (auto _ : state) benchmark::DoNotOptimize(geometric_median(vs));
}
BENCHMARK(BM_GeometricMedian)->Args({16, 10})->Args({16, 1000});

void BM_SebBroadcast(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const std::size_t f = (n - 1) / 3;
    KeyedTagScheme keys(n, 4);
    const std::vector<char> faulty(n, 0);
    const std::span<const bool> mask(reinterpret_cast<const bool*>(faulty.data()), n);
    const ParamVector payload(10, 0.5);
    std::uint64_t it = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(seb_broadcast(0, MessageId{0, it++, 0}, payload, n, f, mask, keys));
    }
}
BENCHMARK(BM_SebBroadcast)->Arg(7)->Arg(16)->Arg(26);

// One full iteration (local phase, coordination with SEB, bookkeeping) of the
// n = 16, f = 3 setup, timed per iteration.
void BM_TrainingIteration(benchmark::State& state) {
    SystemConfig c = parse_config_text(
        "[system]\nn = 16\nf = 3\nT = 50\nregime = none\n"
        "[schedule]\ngamma = 0.01\nbeta = 0.9\n"
        "[attack]\nkind = sf\n"
        "[objective]\ndim = 10\nsigma = 1\nzeta = 1\n");
    c.seb = state.range(0) != 0;
    const ObjectiveSuite suite = build_suite(c);
    for (auto _ : state) benchmark::DoNotOptimize(run(c, suite, 1));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.iterations));
}
BENCHMARK(BM_TrainingIteration)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
