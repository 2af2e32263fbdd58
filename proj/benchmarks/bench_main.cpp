#include "oracles.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ore;
namespace ot = ore::testing;

namespace {

std::vector<ot::Instance> instances(std::size_t count, std::size_t max_words) {
    std::mt19937_64 rng(4242);
    ot::InstanceShape shape;
    shape.max_words = max_words;
    std::vector<ot::Instance> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(ot::random_instance(rng, shape));
    return out;
}

void BM_EntailsEmptySet(benchmark::State& state) {
    const auto pool = instances(32, 6);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& inst = pool[i++ % pool.size()];
        auto o = inst.oracle();
        benchmark::DoNotOptimize(o.check({}));
    }
}
BENCHMARK(BM_EntailsEmptySet);

void BM_EntailsToyCnn(benchmark::State& state) {
    const auto table = load_embeddings(ot::fixture("lexicon.json"));
    const Network net = load_model(ot::fixture("toy_cnn.json"));
    EntailmentOracle o(net, PerturbationSpace::build(encode({"good", "awful", "nice", "dull"}, 4, table),
                                                     PerturbationSpec::eps_ball(0.5 * static_cast<double>(state.range(0))),
                                                     table));
    for (auto _ : state) benchmark::DoNotOptimize(o.check({}));
}
BENCHMARK(BM_EntailsToyCnn)->DenseRange(1, 4);

void BM_OreHs(benchmark::State& state) {
    const auto pool = instances(16, static_cast<std::size_t>(state.range(0)));
    const bool attacks = state.range(1) != 0;
    std::size_t queries = 0, runs = 0;
    for (auto _ : state) {
        for (const auto& inst : pool) {
            auto o = inst.oracle();
            HsOptions h;
            h.use_attacks = attacks;
            queries += ore_hs(o, inst.cost, {}, h).trace.entailment_queries;
            ++runs;
        }
    }
    state.counters["queries/instance"] = static_cast<double>(queries) / static_cast<double>(runs);
}
BENCHMARK(BM_OreHs)->ArgsProduct({{4, 6, 8}, {0, 1}});

void BM_OreMsa(benchmark::State& state) {
    const auto pool = instances(16, static_cast<std::size_t>(state.range(0)));
    MsaOptions m;
    m.use_shrink = state.range(1) != 0;
    std::size_t queries = 0, runs = 0;
    for (auto _ : state) {
        for (const auto& inst : pool) {
            auto o = inst.oracle();
            queries += ore_msa(o, inst.cost, {}, m).trace.entailment_queries;
            ++runs;
        }
    }
    state.counters["queries/instance"] = static_cast<double>(queries) / static_cast<double>(runs);
}
BENCHMARK(BM_OreMsa)->ArgsProduct({{4, 6, 8}, {0, 1}});

void BM_MinimumHittingSet(benchmark::State& state) {
    std::mt19937_64 rng(7);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    HittingSetFamily f(n);
    for (std::size_t i = 0; i < 3 * n; ++i) {
        WordSet s;
        for (int k = 0; k < 3; ++k) s.insert(rng() % n);
        f.add(s);
    }
    std::vector<double> c(n);
    for (auto& v : c) v = 1.0 + static_cast<double>(rng() % 4);
    const CostFunction cost(c);
    for (auto _ : state) benchmark::DoNotOptimize(minimum_hitting_set(f, cost));
}
BENCHMARK(BM_MinimumHittingSet)->RangeMultiplier(2)->Range(8, 32);

} // namespace

BENCHMARK_MAIN();
