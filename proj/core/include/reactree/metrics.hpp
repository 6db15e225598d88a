#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reactree/types.hpp"

namespace reactree {

// Prompt and completion accounting over one episode's decisions. Deviations
// are population standard deviations.
struct TokenStats {
    int decisions = 0;
    int max_input = 0;
    double mean_input = 0.0;
    double sd_input = 0.0;
    double mean_output = 0.0;
    double sd_output = 0.0;
};

TokenStats compute_token_stats(std::span<const int> inputs, std::span<const int> outputs);

nlohmann::json token_stats_to_json(const TokenStats& stats);
TokenStats token_stats_from_json(const nlohmann::json& doc);

struct EpisodeResult {
    std::string task_id;
    std::string task_type;
    Mode mode = Mode::ReAcTree;
    std::uint64_t seed = 0;
    bool success = false;   // goal fully satisfied at episode end
    double ssr = 0.0;       // satisfied goal fraction in [0, 1]
    int decisions_used = 0;
    int budget_cap = 0;
    NodeStatus root_status = NodeStatus::Running;
    TokenStats tokens;
    double wall_ms = 0.0;  // console convenience only, never serialized
};

struct TypeBreakdown {
    int tasks = 0;
    int successes = 0;
    double gsr = 0.0;
    double ssr = 0.0;
};

// Suite-level aggregation. gsr is the percentage of fully successful tasks;
// ssr is the macro average of per-task goal fractions, as a percentage. Both
// are rounded to two decimals.
struct SuiteReport {
    std::vector<EpisodeResult> episodes;
    double gsr = 0.0;
    double ssr = 0.0;
    std::map<std::string, TypeBreakdown> by_type;
    std::map<std::string, std::string> tags;
};

double round2(double value);

SuiteReport summarize(std::vector<EpisodeResult> episodes,
                      std::map<std::string, std::string> tags = {});

nlohmann::json report_to_json(const SuiteReport& report);
SuiteReport report_from_json(const nlohmann::json& doc);

void save_report(const SuiteReport& report, const std::filesystem::path& file);
SuiteReport load_report(const std::filesystem::path& file);

}  // namespace reactree
