#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reactree/decision.hpp"
#include "reactree/prompt.hpp"

namespace reactree {

// Identifies one decision request. request_index counts every query made for
// the node, including re-prompts after rejected lines, so scripted policies
// can play malformed lines followed by corrections.
struct PolicyQuery {
    NodeId node = 0;
    std::string subgoal;
    int request_index = 0;
};

// A source of raw decision lines. Implementations hold no per-episode state;
// scripted lookups are pure functions of (subgoal, request_index).
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string next_line(const PromptBundle& prompt, const PolicyQuery& query) = 0;
};

// Transcript file: sections start with ">>> <subgoal>" (">>> *" declares the
// fallback section used for subgoals without one). Lines are played in
// request order; a trailing "@loop" directive repeats the section forever.
// '#' lines and blank lines are ignored. Requests beyond a section without
// @loop raise ScriptError: fixtures must be total.
class Transcript {
public:
    static Transcript parse(const std::string& text, const std::string& origin = "<memory>");
    static Transcript load(const std::filesystem::path& file);

    const std::string& lookup(const std::string& subgoal, int request_index) const;

private:
    struct Section {
        std::vector<std::string> lines;
        bool loop = false;
    };
    std::map<std::string, Section> sections_;
    std::string origin_;
};

class ScriptedPolicy final : public Policy {
public:
    explicit ScriptedPolicy(std::shared_ptr<const Transcript> transcript)
        : transcript_(std::move(transcript)) {}

    std::string next_line(const PromptBundle&, const PolicyQuery& query) override {
        return transcript_->lookup(query.subgoal, query.request_index);
    }

private:
    std::shared_ptr<const Transcript> transcript_;
};

struct DecideResult {
    AgentDecision decision;
    std::string line;       // canonical rendered form of the decision
    int attempts = 1;       // policy queries consumed
    int input_tokens = 0;   // final attempt's prompt size
    int output_tokens = 0;  // final attempt's raw line size
    std::string note;       // set when rejection or transport forced a failure
};

inline constexpr int kParseRetries = 2;

// Requests one decision. Malformed or disallowed lines are re-prompted with
// the rejection appended as an Error line, up to kParseRetries extra tries;
// persistent rejection and exhausted transports both yield DeclareFailure.
DecideResult decide(Policy& policy, const PromptBundle& prompt, const SkillGrammar& grammar,
                    bool expand_allowed, const std::vector<ControlFlowType>& allowed_flows,
                    const PolicyQuery& query);

}  // namespace reactree
