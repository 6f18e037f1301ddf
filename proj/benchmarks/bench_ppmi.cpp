#include <benchmark/benchmark.h>

#include "embmf/data.hpp"
#include "embmf/ppmi.hpp"
#include "embmf/synth.hpp"

using namespace embmf;

namespace {

ClickLog synth_log(int n_users, int n_items, std::int64_t n_events) {
    SynthConfig cfg;
    cfg.n_users = n_users;
    cfg.n_items = n_items;
    cfg.n_events = n_events;
    cfg.seed = 13;
    auto records = generate_interactions(cfg);
    auto ids = IdMap::from_records(records);
    return binarize_to_clicks(records, ids);
}

}  // namespace

static void BM_CountCooccurrence(benchmark::State& state) {
    auto log = synth_log(1000, 600, 40'000);
    for (auto _ : state) {
        auto stats = count_cooccurrence(log);
        benchmark::DoNotOptimize(stats.pairs.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(log.total_clicks()));
}
BENCHMARK(BM_CountCooccurrence);

static void BM_BuildPpmi(benchmark::State& state) {
    auto log = synth_log(1000, 600, 40'000);
    auto stats = count_cooccurrence(log);
    for (auto _ : state) {
        auto s = build_ppmi(stats, DenominatorMode::user_count);
        benchmark::DoNotOptimize(s.nnz);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stats.pairs.size()));
}
BENCHMARK(BM_BuildPpmi);

BENCHMARK_MAIN();
