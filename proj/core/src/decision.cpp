#include "reactree/decision.hpp"

#include <algorithm>
#include <cctype>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool consume_prefix(std::string_view& s, std::string_view prefix) {
    if (s.substr(0, prefix.size()) != prefix) return false;
    s.remove_prefix(prefix.size());
    return true;
}

struct PayloadField {
    std::string key;
    std::string value;
};

// Scans a one-line dict payload such as {'control_flow': 'sequence',
// 'conditions': 'a, b'}. Accepts single or double quotes per string.
bool scan_payload(std::string_view body, std::vector<PayloadField>& out, std::string& err) {
    body = trim(body);
    if (body.size() < 2 || body.front() != '{' || body.back() != '}') {
        err = "expansion payload must be a braced dict";
        return false;
    }
    body = trim(body.substr(1, body.size() - 2));
    auto read_string = [&](std::string_view& s, std::string& value) {
        s = trim(s);
        if (s.empty() || (s.front() != '\'' && s.front() != '"')) return false;
        const char quote = s.front();
        s.remove_prefix(1);
        const auto end = s.find(quote);
        if (end == std::string_view::npos) return false;
        value.assign(s.substr(0, end));
        s.remove_prefix(end + 1);
        return true;
    };
    while (!body.empty()) {
        PayloadField field;
        if (!read_string(body, field.key)) {
            err = "expansion payload has a malformed key";
            return false;
        }
        body = trim(body);
        if (body.empty() || body.front() != ':') {
            err = "expansion payload is missing ':' after key '" + field.key + "'";
            return false;
        }
        body.remove_prefix(1);
        if (!read_string(body, field.value)) {
            err = "expansion payload has a malformed value for key '" + field.key + "'";
            return false;
        }
        out.push_back(std::move(field));
        body = trim(body);
        if (body.empty()) break;
        if (body.front() != ',') {
            err = "expansion payload has trailing characters";
            return false;
        }
        body.remove_prefix(1);
        body = trim(body);
        if (body.empty()) {
            err = "expansion payload ends with a dangling comma";
            return false;
        }
    }
    return true;
}

std::vector<std::string> split_conditions(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = trim(text.substr(start, comma == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : comma - start));
        if (!piece.empty()) parts.emplace_back(piece);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

}  // namespace

std::string_view to_string(NodeStatus s) {
    switch (s) {
        case NodeStatus::Running: return "Running";
        case NodeStatus::Success: return "Success";
        case NodeStatus::Failure: return "Failure";
    }
    return "Running";
}

std::string_view to_string(ControlFlowType f) {
    switch (f) {
        case ControlFlowType::Sequence: return "sequence";
        case ControlFlowType::Fallback: return "fallback";
        case ControlFlowType::Parallel: return "parallel";
    }
    return "sequence";
}

std::string_view to_string(Mode m) {
    return m == Mode::ReAcTree ? "reactree" : "react";
}

ControlFlowType flow_from_string(std::string_view name) {
    if (name == "sequence") return ControlFlowType::Sequence;
    if (name == "fallback") return ControlFlowType::Fallback;
    if (name == "parallel") return ControlFlowType::Parallel;
    throw ConfigError("unknown control flow '" + std::string(name) + "'");
}

Mode mode_from_string(std::string_view name) {
    if (name == "reactree") return Mode::ReAcTree;
    if (name == "react") return Mode::React;
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

NodeStatus status_from_string(std::string_view name) {
    if (name == "Running") return NodeStatus::Running;
    if (name == "Success") return NodeStatus::Success;
    if (name == "Failure") return NodeStatus::Failure;
    throw ConfigError("unknown node status '" + std::string(name) + "'");
}

SkillGrammar SkillGrammar::household(bool with_recall) {
    SkillGrammar g;
    g.action_verbs = {"go to", "pick up", "put down", "open", "close", "turn on"};
    g.recall = with_recall;
    return g;
}

SkillGrammar SkillGrammar::extended(bool with_recall) {
    SkillGrammar g;
    g.action_verbs = {"go to", "pick up", "put down", "slice",
                      "open",  "close",   "turn on",  "turn off"};
    g.recall = with_recall;
    return g;
}

std::vector<std::string> SkillGrammar::prompt_actions() const {
    std::vector<std::string> actions = action_verbs;
    if (recall) actions.emplace_back(kRecallVerb);
    actions.emplace_back("done");
    actions.emplace_back("failure");
    return actions;
}

bool split_command(std::string_view command, const SkillGrammar& grammar,
                   std::string& verb, std::string& argument) {
    std::string_view best;
    auto consider = [&](std::string_view candidate) {
        if (candidate.size() <= best.size()) return;
        if (command == candidate || (command.size() > candidate.size() &&
                                     command.substr(0, candidate.size()) == candidate &&
                                     command[candidate.size()] == ' ')) {
            best = candidate;
        }
    };
    for (const auto& v : grammar.action_verbs) consider(v);
    if (grammar.recall) consider(kRecallVerb);
    if (best.empty()) return false;
    verb.assign(best);
    argument.assign(trim(command.substr(best.size())));
    return true;
}

ParseOutcome parse_decision(std::string_view raw, const SkillGrammar& grammar,
                            bool expand_allowed) {
    const std::string_view line = trim(raw);
    std::string_view rest = line;
    if (consume_prefix(rest, "Think:")) {
        const auto text = trim(rest);
        if (text.empty()) return ParseRejection{"empty thought"};
        return AgentDecision{ThinkDecision{std::string(text)}};
    }
    rest = line;
    if (consume_prefix(rest, "Act:")) {
        const auto command = trim(rest);
        if (command == "done") return AgentDecision{DoneDecision{}};
        if (command == "failure") return AgentDecision{DeclareFailureDecision{}};
        std::string verb, argument;
        if (!split_command(command, grammar, verb, argument)) {
            return ParseRejection{"unknown action verb in '" + std::string(command) + "'"};
        }
        if (argument.empty()) {
            return ParseRejection{"action '" + verb + "' is missing a target"};
        }
        return AgentDecision{ActDecision{std::string(command)}};
    }
    rest = line;
    if (consume_prefix(rest, "Expand:")) {
        if (!expand_allowed) return ParseRejection{"expansion is not available here"};
        std::vector<PayloadField> fields;
        std::string err;
        if (!scan_payload(rest, fields, err)) return ParseRejection{err};
        const std::string* flow_text = nullptr;
        const std::string* conditions_text = nullptr;
        for (const auto& f : fields) {
            if (f.key == "control_flow" && !flow_text) {
                flow_text = &f.value;
            } else if (f.key == "conditions" && !conditions_text) {
                conditions_text = &f.value;
            } else {
                return ParseRejection{"unexpected expansion key '" + f.key + "'"};
            }
        }
        if (!flow_text || !conditions_text) {
            return ParseRejection{"expansion payload needs control_flow and conditions"};
        }
        ControlFlowType flow;
        if (*flow_text == "sequence") {
            flow = ControlFlowType::Sequence;
        } else if (*flow_text == "fallback") {
            flow = ControlFlowType::Fallback;
        } else if (*flow_text == "parallel") {
            flow = ControlFlowType::Parallel;
        } else {
            return ParseRejection{"unknown control flow '" + *flow_text + "'"};
        }
        auto subgoals = split_conditions(*conditions_text);
        if (subgoals.empty()) return ParseRejection{"expansion has no subgoals"};
        return AgentDecision{ExpandDecision{flow, std::move(subgoals)}};
    }
    return ParseRejection{"unrecognized decision '" + std::string(line) + "'"};
}

std::string render_decision(const AgentDecision& decision) {
    struct Renderer {
        std::string operator()(const ThinkDecision& d) const { return "Think: " + d.text; }
        std::string operator()(const ActDecision& d) const { return "Act: " + d.command; }
        std::string operator()(const DoneDecision&) const { return "Act: done"; }
        std::string operator()(const DeclareFailureDecision&) const { return "Act: failure"; }
        std::string operator()(const ExpandDecision& d) const {
            std::string joined;
            for (std::size_t i = 0; i < d.subgoals.size(); ++i) {
                if (i) joined += ", ";
                joined += d.subgoals[i];
            }
            return "Expand: {'control_flow': '" + std::string(to_string(d.flow)) +
                   "', 'conditions': '" + joined + "'}";
        }
    };
    return std::visit(Renderer{}, decision);
}

}  // namespace reactree
