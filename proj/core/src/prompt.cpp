#include "reactree/prompt.hpp"

#include "reactree/decision.hpp"
#include "reactree/tokens.hpp"

namespace reactree {

namespace {

std::string action_list(const PromptOptions& options) {
    const auto grammar = options.profile == "extended"
                             ? SkillGrammar::extended(options.working_memory)
                             : SkillGrammar::household(options.working_memory);
    std::string out = "[";
    const auto actions = grammar.prompt_actions();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out += ", ";
        out += actions[i];
    }
    out += "]";
    return out;
}

std::string flow_clause(ControlFlowType flow, const std::string& profile) {
    const bool extended = profile == "extended";
    switch (flow) {
        case ControlFlowType::Sequence:
            return extended ? "\"sequence\" (achieve subgoals sequentially. If any subgoal "
                              "fails, the sequence is interrupted)"
                            : "\"sequence\" (achieve subgoals sequentially; if any subgoal "
                              "fails, the sequence is interrupted)";
        case ControlFlowType::Fallback:
            return extended ? "\"fallback\" (Attempt subgoals in order until one succeeds. If "
                              "a subgoal is successful, the remaining subgoals are not attempted)"
                            : "\"fallback\" (attempt subgoals in order until one succeeds; if "
                              "a subgoal is successful, the remaining subgoals are not attempted)";
        case ControlFlowType::Parallel:
            return "\"parallel\" (achieve subgoals in parallel; this enables tasks to continue "
                   "independently, even if one subgoal fails)";
    }
    return "";
}

std::string flow_clauses(const PromptOptions& options) {
    std::vector<std::string> clauses;
    for (const auto flow : {ControlFlowType::Sequence, ControlFlowType::Fallback,
                            ControlFlowType::Parallel}) {
        for (const auto allowed : options.allowed_flows) {
            if (allowed == flow) {
                clauses.push_back(flow_clause(flow, options.profile));
                break;
            }
        }
    }
    std::string out;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (i) {
            if (clauses.size() == 2) {
                out += " or ";
            } else {
                out += i + 1 == clauses.size() ? ", or " : ", ";
            }
        }
        out += clauses[i];
    }
    return out;
}

std::string system_text(const PromptOptions& options) {
    std::string out;
    if (options.mode == Mode::ReAcTree) {
        out += "You are an advanced robot with ability to think, act, and expand behavior tree "
               "nodes in decision-making process. You can perform one of the following tasks:\n";
    } else {
        out += "You are an advanced robot with ability to think and act. You can perform one of "
               "the following tasks:\n";
    }
    out += "1. Think: Use reasoning to satisfy the current goal condition.\n";
    out += "2. Act: Execute a specific action to accomplish the current goal condition. You "
           "should use one of actions of this list: " +
           action_list(options);
    if (options.mode == Mode::ReAcTree) {
        out += "\n3. Expand: Decompose the current goal condition into more detailed subgoals. "
               "When expanding, generate appropriate control flow and subgoals. Control flow "
               "can be " +
               flow_clauses(options) + ".";
    }
    return out;
}

}  // namespace

std::string oxford_join(std::span<const std::string> items) {
    if (items.empty()) return "";
    if (items.size() == 1) return items[0];
    std::string out;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
        out += items[i];
        out += ", ";
    }
    out += "and ";
    out += items.back();
    return out;
}

std::string_view flow_phrase(ControlFlowType flow) {
    switch (flow) {
        case ControlFlowType::Sequence: return "in sequence";
        case ControlFlowType::Fallback: return "using a fallback strategy";
        case ControlFlowType::Parallel: return "in parallel";
    }
    return "in sequence";
}

std::string lineage_preamble_text(const Lineage& lineage) {
    std::string out = "Your primary goal is to: " + lineage.parent_goal + "\n";
    out += "To achieve this, you should perform your sibling tasks ";
    out += flow_phrase(lineage.flow);
    out += ". At this level, your sibling tasks are: ";
    out += oxford_join(lineage.siblings);
    out += ".";
    return out;
}

PromptBundle build_prompt(const AgentNode& node, std::span<const Experience* const> examples,
                          const std::optional<Lineage>& lineage, const PromptOptions& options) {
    PromptBundle bundle;
    bundle.system_text = system_text(options);
    bundle.examples.reserve(examples.size());
    for (const auto* e : examples) bundle.examples.push_back(e->trajectory);
    if (lineage) bundle.lineage_preamble = lineage_preamble_text(*lineage);
    bundle.goal_line = "Your task is to: " + node.subgoal;
    if (!node.initial_observation.empty()) {
        bundle.context_lines.push_back(node.initial_observation);
    }
    for (const auto& step : node.steps) {
        bundle.context_lines.push_back(step.action_line);
        if (!step.observation.empty()) bundle.context_lines.push_back(step.observation);
    }
    bundle.target_label = options.profile == "extended" ? "Target domain:" : "Target_domain:";
    bundle.blank_before_source =
        options.mode == Mode::ReAcTree || options.profile == "extended";
    return bundle;
}

std::string render_user_text(const PromptBundle& bundle) {
    std::string out = "Source domain:\n";
    for (std::size_t i = 0; i < bundle.examples.size(); ++i) {
        if (i) out += "\n\n";
        out += bundle.examples[i];
    }
    if (!bundle.examples.empty()) out += '\n';
    out += '\n';
    out += bundle.target_label;
    out += '\n';
    if (!bundle.lineage_preamble.empty()) {
        out += bundle.lineage_preamble;
        out += '\n';
    }
    out += bundle.goal_line;
    out += '\n';
    for (const auto& line : bundle.context_lines) {
        out += line;
        out += '\n';
    }
    return out;
}

std::string render_full_text(const PromptBundle& bundle) {
    std::string out = bundle.system_text;
    out += '\n';
    if (bundle.blank_before_source) out += '\n';
    out += render_user_text(bundle);
    return out;
}

}  // namespace reactree
