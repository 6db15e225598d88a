#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "reactree/engine.hpp"
#include "reactree/errors.hpp"
#include "support.hpp"

using namespace reactree;
using testsupport::data_path;
using testsupport::run_script;
using testsupport::state_signature;
using testsupport::tiny_task;
using testsupport::tiny_world;

TEST_CASE("the decision budget stops episodes that never terminate") {
    const std::string spin = ">>> *\nThink: still working\n@loop\n";
    for (const int cap : {1, 5, 37}) {
        EngineConfig config;
        config.max_decisions = cap;
        const auto run = run_script(spin, tiny_task(), tiny_world(), config);
        CHECK(run.outcome.result.decisions_used == cap);
        CHECK(run.outcome.result.budget_cap == cap);
        CHECK(run.outcome.result.root_status == NodeStatus::Failure);
        CHECK_FALSE(run.outcome.result.success);
        CHECK(run.outcome.tree.agent(0).steps.size() == static_cast<std::size_t>(cap));
    }
}

TEST_CASE("an unset cap defers to the world profile") {
    const auto run = run_script(">>> *\nThink: a\n@loop\n", tiny_task(), tiny_world());
    CHECK(run.outcome.result.budget_cap == 200);
    CHECK(run.outcome.result.decisions_used == 200);
}

TEST_CASE("a terminating script finishes under the cap") {
    const auto run = run_script(">>> *\nAct: done\n", tiny_task(), tiny_world());
    CHECK(run.outcome.result.decisions_used == 1);
    CHECK(run.outcome.result.root_status == NodeStatus::Success);
    CHECK_FALSE(run.outcome.result.success);
    CHECK(run.outcome.result.ssr == 0.0);
}

TEST_CASE("a full task run satisfies its goal") {
    const std::string script =
        ">>> *\n"
        "Act: go to kitchen table 1\n"
        "Act: pick up apple 1\n"
        "Act: go to fridge 1\n"
        "Act: open fridge 1\n"
        "Act: put down apple 1\n"
        "Act: done\n";
    const auto run = run_script(script, tiny_task(), tiny_world());
    CHECK(run.outcome.result.root_status == NodeStatus::Success);
    CHECK(run.outcome.result.success);
    CHECK(run.outcome.result.ssr == 1.0);
    CHECK(run.outcome.result.decisions_used == 6);
}

TEST_CASE("children created after budget exhaustion fail without deciding") {
    const std::string script =
        ">>> *\nExpand: {'control_flow': 'parallel', 'conditions': 'a, b, c'}\n";
    EngineConfig config;
    config.max_decisions = 1;
    const auto run = run_script(script, tiny_task(), tiny_world(), config);

    CHECK(run.outcome.result.decisions_used == 1);
    CHECK(run.requests == 1);
    CHECK(run.outcome.tree.size() == 5);
    CHECK(run.outcome.tree.agent_count() == 4);
    for (const NodeId child : {2, 3, 4}) {
        CHECK(run.outcome.tree.agent(child).executed);
        CHECK(run.outcome.tree.agent(child).steps.empty());
        CHECK(run.outcome.tree.agent(child).status == NodeStatus::Failure);
        CHECK_FALSE(run.outcome.tree.agent(child).initial_observation.empty());
    }
    CHECK(run.outcome.result.root_status == NodeStatus::Failure);
}

TEST_CASE("the depth limit turns expansions into declared failures") {
    SUBCASE("at a child") {
        const std::string script =
            ">>> Put the apple in the fridge.\n"
            "Expand: {'control_flow': 'sequence', 'conditions': 'sub a'}\n"
            ">>> sub a\n"
            "Expand: {'control_flow': 'sequence', 'conditions': 'sub b'}\n";
        EngineConfig config;
        config.max_depth = 1;
        const auto run = run_script(script, tiny_task(), tiny_world(), config);
        CHECK(run.outcome.tree.size() == 3);
        const auto& child = run.outcome.tree.agent(2);
        REQUIRE(child.steps.size() == 1);
        CHECK(child.steps[0].action_line == "Act: failure");
        CHECK(child.status == NodeStatus::Failure);
        CHECK(run.outcome.result.root_status == NodeStatus::Failure);
        CHECK(run.outcome.result.decisions_used == 2);
    }
    SUBCASE("at the root") {
        EngineConfig config;
        config.max_depth = 0;
        const auto run = run_script(
            ">>> *\nExpand: {'control_flow': 'sequence', 'conditions': 'a'}\n", tiny_task(),
            tiny_world(), config);
        CHECK(run.outcome.tree.size() == 1);
        REQUIRE(run.outcome.tree.agent(0).steps.size() == 1);
        CHECK(run.outcome.tree.agent(0).steps[0].action_line == "Act: failure");
        CHECK(run.outcome.result.decisions_used == 1);
    }
}

TEST_CASE("flat mode rejects expansions and keeps a single node") {
    const std::string script =
        ">>> *\n"
        "Expand: {'control_flow': 'sequence', 'conditions': 'a'}\n"
        "Act: done\n";
    EngineConfig config;
    config.mode = Mode::React;
    const auto run = run_script(script, tiny_task(), tiny_world(), config);
    CHECK(run.outcome.tree.size() == 1);
    CHECK(run.outcome.tree.agent_count() == 1);
    CHECK(run.outcome.result.decisions_used == 1);
    CHECK(run.requests == 2);
    CHECK(run.outcome.result.root_status == NodeStatus::Success);
}

TEST_CASE("recall reads working memory without touching the world") {
    const std::string with_recall =
        ">>> *\n"
        "Act: recall location of juice\n"
        "Act: go to fridge 1\n"
        "Act: open fridge 1\n"
        "Act: recall location of juice\n"
        "Act: done\n";
    const std::string without_recall =
        ">>> *\n"
        "Act: go to fridge 1\n"
        "Act: open fridge 1\n"
        "Act: done\n";
    const auto a = run_script(with_recall, tiny_task(), tiny_world());
    const auto b = run_script(without_recall, tiny_task(), tiny_world());

    const auto& steps = a.outcome.tree.agent(0).steps;
    REQUIRE(steps.size() == 5);
    CHECK(steps[0].observation == "You have not seen juice before.");
    CHECK(steps[3].observation == "You saw juice 1 near fridge 1 in kitchen 1.");
    CHECK(state_signature(a.final_state) == state_signature(b.final_state));
}

TEST_CASE("disabling working memory removes the recall skill") {
    const std::string script =
        ">>> *\n"
        "Act: go to fridge 1\n"
        "Act: open fridge 1\n"
        "Act: recall location of juice\n"
        "Act: done\n";
    auto transcript = std::make_shared<const Transcript>(Transcript::parse(script));
    ScriptedPolicy policy(transcript);
    Simulator sim(tiny_world());
    EngineConfig config;
    config.working_memory = false;
    Engine engine(policy, sim, config);
    const auto outcome = engine.run_episode(tiny_task());

    CHECK(engine.working_memory().empty());
    const auto& steps = outcome.tree.agent(0).steps;
    REQUIRE(steps.size() == 3);
    CHECK(steps[2].action_line == "Act: done");
    CHECK(engine.requests() == 4);
    CHECK(outcome.result.decisions_used == 3);
}

TEST_CASE("working memory is shared across sibling nodes") {
    const std::string script =
        ">>> Put the apple in the fridge.\n"
        "Act: go to pantry 1\n"
        "Expand: {'control_flow': 'sequence', 'conditions': 'scout the fridge, report the juice'}\n"
        ">>> scout the fridge\n"
        "Act: go to kitchen 1\n"
        "Act: go to fridge 1\n"
        "Act: open fridge 1\n"
        "Act: done\n"
        ">>> report the juice\n"
        "Act: recall location of juice\n"
        "Act: done\n";
    const auto run = run_script(script, tiny_task(), tiny_world());

    REQUIRE(run.outcome.tree.size() == 4);
    const auto& scout = run.outcome.tree.agent(2);
    const auto& report = run.outcome.tree.agent(3);
    CHECK(scout.initial_observation.find("middle of a pantry (1)") != std::string::npos);
    CHECK(report.initial_observation.find("middle of a kitchen (1)") != std::string::npos);
    REQUIRE(report.steps.size() == 2);
    CHECK(report.steps[0].observation == "You saw juice 1 near fridge 1 in kitchen 1.");
    CHECK(run.outcome.result.root_status == NodeStatus::Success);
    CHECK(run.outcome.result.decisions_used == 8);
}

TEST_CASE("engine configuration is validated up front") {
    const auto transcript =
        std::make_shared<const Transcript>(Transcript::parse(">>> *\nAct: done\n"));
    ScriptedPolicy policy(transcript);
    Simulator sim(tiny_world());

    EngineConfig bad;
    bad.max_decisions = -1;
    CHECK_THROWS_AS(Engine(policy, sim, bad), ConfigError);
    bad = EngineConfig{};
    bad.max_depth = -1;
    CHECK_THROWS_AS(Engine(policy, sim, bad), ConfigError);
    bad = EngineConfig{};
    bad.retrieval_budget = -1;
    CHECK_THROWS_AS(Engine(policy, sim, bad), ConfigError);

    Engine engine(policy, sim, EngineConfig{});
    const HashedBowEmbedder embedder;
    EpisodicStore store(embedder.name(), embedder.dimension());
    CHECK_THROWS_AS(engine.attach_memory(&store, nullptr), ConfigError);
    CHECK_THROWS_AS(engine.attach_memory(nullptr, &embedder), ConfigError);
    EpisodicStore mismatched("someone-else", embedder.dimension());
    CHECK_THROWS_AS(engine.attach_memory(&mismatched, &embedder), ConfigError);
    engine.attach_memory(&store, &embedder);
    engine.attach_memory(nullptr, nullptr);
}

TEST_CASE("requests count every policy query including re-prompts") {
    const std::string script =
        ">>> *\n"
        "nonsense\n"
        "also nonsense\n"
        "Act: done\n";
    const auto run = run_script(script, tiny_task(), tiny_world());
    CHECK(run.requests == 3);
    CHECK(run.outcome.result.decisions_used == 1);
    CHECK(run.outcome.result.root_status == NodeStatus::Success);
}

TEST_CASE("the scripted reference episode reproduces its known shape") {
    const auto task = load_task(data_path("tasks/serve-drinks.json"));
    const auto world = load_world(task.world_path);
    const auto script = testsupport::read_file(data_path("policies/suite5.script"));

    const auto run = run_script(script, task, world);
    CHECK(run.outcome.result.success);
    CHECK(run.outcome.result.root_status == NodeStatus::Success);
    CHECK(run.outcome.result.decisions_used == 83);
    CHECK(run.outcome.result.tokens.max_input == 1134);
    CHECK(run.outcome.tree.size() == 14);
    CHECK(run.outcome.tree.agent_count() == 10);
    CHECK(run.outcome.tree.flow_count() == 4);
}
