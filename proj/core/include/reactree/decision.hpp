#pragma once

#include <string>
#include <variant>
#include <vector>

#include "reactree/types.hpp"

namespace reactree {

// The skill vocabulary exposed to the policy. Environment verbs keep a
// canonical order; "recall location of" is a memory skill resolved by the
// agent itself, and done / failure terminate the node.
struct SkillGrammar {
    std::vector<std::string> action_verbs;
    bool recall = true;

    static SkillGrammar household(bool with_recall = true);
    static SkillGrammar extended(bool with_recall = true);

    // Full action list as shown in prompts: verbs, recall, done, failure.
    std::vector<std::string> prompt_actions() const;
};

inline constexpr const char* kRecallVerb = "recall location of";

struct ThinkDecision {
    std::string text;
    bool operator==(const ThinkDecision&) const = default;
};

struct ActDecision {
    std::string command;  // verb plus arguments, e.g. "go to kitchen 1"
    bool operator==(const ActDecision&) const = default;
};

struct ExpandDecision {
    ControlFlowType flow;
    std::vector<std::string> subgoals;
    bool operator==(const ExpandDecision&) const = default;
};

struct DoneDecision {
    bool operator==(const DoneDecision&) const = default;
};

struct DeclareFailureDecision {
    bool operator==(const DeclareFailureDecision&) const = default;
};

using AgentDecision = std::variant<ThinkDecision, ActDecision, ExpandDecision,
                                   DoneDecision, DeclareFailureDecision>;

struct ParseRejection {
    std::string reason;
};

using ParseOutcome = std::variant<AgentDecision, ParseRejection>;

// Parses one raw policy line. Expansion lines are rejected outright when
// expand_allowed is false (flat mode, depth cap, already-expanded node).
ParseOutcome parse_decision(std::string_view raw, const SkillGrammar& grammar,
                            bool expand_allowed);

// Canonical single-line form; parse_decision(render_decision(d)) == d.
std::string render_decision(const AgentDecision& decision);

// Splits an environment command into its verb and argument, using longest
// verb match against the grammar. Returns false when no verb matches.
bool split_command(std::string_view command, const SkillGrammar& grammar,
                   std::string& verb, std::string& argument);

}  // namespace reactree
