#pragma once

#include <filesystem>
#include <vector>

#include "reactree/sim.hpp"

namespace reactree {

struct TaskSpec {
    std::string id;
    std::string type;  // category label used in per-type report breakdowns
    std::filesystem::path world_path;
    std::string instruction;
    GoalCondition goal;
};

// Loads and validates a world file. Throws WorldLoadError with the offending
// file and entity named.
WorldState load_world(const std::filesystem::path& file);

// Loads one task file and checks its goal vocabulary against the world it
// references.
TaskSpec load_task(const std::filesystem::path& file);

// Loads a manifest: {"tasks": [<path or inline task object>, ...]}.
// Relative paths resolve against the manifest's directory.
std::vector<TaskSpec> load_manifest(const std::filesystem::path& file);

}  // namespace reactree
