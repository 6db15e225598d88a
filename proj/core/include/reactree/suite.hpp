#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reactree/engine.hpp"
#include "reactree/memory.hpp"
#include "reactree/metrics.hpp"
#include "reactree/policy.hpp"
#include "reactree/remote_policy.hpp"
#include "reactree/world_io.hpp"

namespace reactree {

// How each episode gets its policy. Scripted episodes share one parsed
// transcript; remote episodes each open their own connection.
struct PolicySpec {
    enum class Kind { Scripted, Remote };
    Kind kind = Kind::Scripted;
    std::shared_ptr<const Transcript> transcript;
    RemoteConfig remote;

    static PolicySpec scripted(std::shared_ptr<const Transcript> transcript);
    static PolicySpec remote_endpoint(RemoteConfig config);
};

struct SuiteConfig {
    EngineConfig engine;  // engine.seed is the suite base seed
    int jobs = 1;
    std::filesystem::path trace_dir;  // empty: no trace files written
    const EpisodicStore* store = nullptr;
    const EmbeddingProvider* embedder = nullptr;
    std::map<std::string, std::string> tags;
};

// Per-episode seed, a pure function of the base seed and task id, so results
// do not depend on scheduling or the number of worker threads.
std::uint64_t derive_seed(std::uint64_t base, const std::string& task_id);

// Runs one task end to end with a fresh simulator and policy instance,
// writing its trace when a directory is configured.
RunOutcome run_task(const TaskSpec& task, const PolicySpec& policy, const SuiteConfig& config);

// Runs every task, with up to config.jobs worker threads. Results are
// reported in manifest order regardless of scheduling.
SuiteReport run_suite(const std::vector<TaskSpec>& tasks, const PolicySpec& policy,
                      const SuiteConfig& config);

// Parses a seed trajectory file into experiences. Records are separated by
// lines of "---"; each starts with "@termination: <success|failure|expand>"
// followed by the trajectory, whose first line must be the goal line
// ("Your task is to: ..."). The goal text is what gets embedded.
std::vector<Experience> load_seed_trajectories(const std::filesystem::path& file,
                                               const EmbeddingProvider& provider);

struct BootstrapStats {
    int episodes = 0;
    int successes = 0;
    int harvested = 0;
};

// Runs the tasks serially in order, harvesting each goal-satisfying episode
// into the store as it finishes, so later episodes retrieve from earlier
// ones. Serial on purpose: a growing store ties results to episode order.
BootstrapStats bootstrap_store(const std::vector<TaskSpec>& tasks, const PolicySpec& policy,
                               const SuiteConfig& config, EpisodicStore& store,
                               const EmbeddingProvider& provider);

}  // namespace reactree
