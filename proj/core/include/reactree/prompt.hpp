#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reactree/memory.hpp"
#include "reactree/tree.hpp"
#include "reactree/types.hpp"

namespace reactree {

// Per-episode prompt settings derived from mode, world profile, memory
// switches, and the allowed control flows.
struct PromptOptions {
    Mode mode = Mode::ReAcTree;
    bool working_memory = true;
    std::string profile = "household";
    std::vector<ControlFlowType> allowed_flows = {
        ControlFlowType::Sequence, ControlFlowType::Fallback, ControlFlowType::Parallel};
};

// Which sibling context an agent node inherits from its parent expansion.
struct Lineage {
    std::string parent_goal;
    ControlFlowType flow = ControlFlowType::Sequence;
    std::vector<std::string> siblings;
};

struct PromptBundle {
    std::string system_text;
    std::vector<std::string> examples;       // retrieved trajectories, best first
    std::string lineage_preamble;            // empty for the root node
    std::string goal_line;                   // "Your task is to: <subgoal>"
    std::vector<std::string> context_lines;  // observation and action lines so far
    std::string target_label;                // "Target_domain:" or "Target domain:"
    bool blank_before_source = true;
};

// Assembles the full prompt for one decision request. Examples are inserted
// into the Source domain section in the order given.
PromptBundle build_prompt(const AgentNode& node, std::span<const Experience* const> examples,
                          const std::optional<Lineage>& lineage, const PromptOptions& options);

// The user-role message: Source domain, Target domain, lineage, trajectory.
std::string render_user_text(const PromptBundle& bundle);

// System text plus user text, used for token accounting.
std::string render_full_text(const PromptBundle& bundle);

// "a", "a, and b", "a, b, and c"
std::string oxford_join(std::span<const std::string> items);

// "in sequence", "using a fallback strategy", "in parallel"
std::string_view flow_phrase(ControlFlowType flow);

std::string lineage_preamble_text(const Lineage& lineage);

}  // namespace reactree
