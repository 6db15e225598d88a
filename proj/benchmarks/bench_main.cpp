#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "reactree/engine.hpp"
#include "reactree/memory.hpp"
#include "reactree/sim.hpp"
#include "reactree/suite.hpp"
#include "reactree/world_io.hpp"

namespace {

using namespace reactree;

std::filesystem::path data_path(const std::string& rel) {
    return std::filesystem::path(REACTREE_DATA_DIR) / rel;
}

void BM_SimStep(benchmark::State& state) {
    const auto world = load_world(data_path("worlds/house1.json"));
    Simulator sim(world);
    const std::vector<SkillCommand> cycle = {
        {"go to", "kitchen 1"},      {"go to", "fridge 1"}, {"open", "fridge 1"},
        {"close", "fridge 1"},       {"go to", "living room 1"},
    };
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim.step(cycle[i]));
        i = (i + 1) % cycle.size();
    }
}
BENCHMARK(BM_SimStep);

void BM_EmbedGoal(benchmark::State& state) {
    const HashedBowEmbedder embedder;
    const std::string goal = "Find the wine glass and put it inside the dishwasher.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(embedder.embed(goal));
    }
}
BENCHMARK(BM_EmbedGoal);

void BM_Retrieve(benchmark::State& state) {
    const HashedBowEmbedder embedder;
    EpisodicStore store(embedder.name(), embedder.dimension());
    std::mt19937_64 rng(1);
    const std::vector<std::string> verbs = {"find", "carry", "open", "serve", "stack"};
    const std::vector<std::string> things = {"the wine", "a plate", "the fridge",
                                             "two glasses", "the cutlery"};
    for (int i = 0; i < 200; ++i) {
        Experience e;
        const auto goal = verbs[rng() % verbs.size()] + " " + things[rng() % things.size()];
        e.trajectory = "Your task is to: " + goal + "\nAct: done";
        e.termination = static_cast<Termination>(rng() % 3);
        e.token_count = 50 + static_cast<int>(rng() % 400);
        e.embedding = embedder.embed(goal);
        store.add(std::move(e));
    }
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            retrieve(store, embedder, "serve the wine glasses", 5000, seed++));
    }
}
BENCHMARK(BM_Retrieve);

void BM_ScriptedEpisode(benchmark::State& state) {
    const auto task = load_task(data_path("tasks/serve-drinks.json"));
    const auto world = load_world(task.world_path);
    const auto transcript = std::make_shared<const Transcript>(
        Transcript::load(data_path("policies/suite5.script")));
    for (auto _ : state) {
        ScriptedPolicy policy(transcript);
        Simulator sim(world);
        Engine engine(policy, sim, {});
        benchmark::DoNotOptimize(engine.run_episode(task));
    }
}
BENCHMARK(BM_ScriptedEpisode);

}  // namespace

BENCHMARK_MAIN();
