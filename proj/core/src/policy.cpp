#include "reactree/policy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "reactree/errors.hpp"
#include "reactree/tokens.hpp"

namespace reactree {

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Transcript Transcript::parse(const std::string& text, const std::string& origin) {
    Transcript t;
    t.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    Section* current = nullptr;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (blank(line) || line.front() == '#') continue;
        if (line.rfind(">>> ", 0) == 0) {
            const std::string subgoal = line.substr(4);
            if (subgoal.empty()) throw ScriptError(origin + ": empty section header");
            const auto [it, inserted] = t.sections_.try_emplace(subgoal);
            if (!inserted) throw ScriptError(origin + ": duplicate section '" + subgoal + "'");
            current = &it->second;
            continue;
        }
        if (!current) throw ScriptError(origin + ": line before first section: " + line);
        if (line == "@loop") {
            if (current->loop) throw ScriptError(origin + ": duplicate @loop");
            current->loop = true;
            continue;
        }
        if (current->loop) throw ScriptError(origin + ": lines after @loop");
        current->lines.push_back(line);
    }
    for (const auto& [subgoal, section] : t.sections_) {
        if (section.lines.empty()) {
            throw ScriptError(origin + ": section '" + subgoal + "' has no lines");
        }
    }
    if (t.sections_.empty()) throw ScriptError(origin + ": transcript has no sections");
    return t;
}

Transcript Transcript::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScriptError("cannot open transcript '" + file.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), file.string());
}

const std::string& Transcript::lookup(const std::string& subgoal, int request_index) const {
    auto it = sections_.find(subgoal);
    if (it == sections_.end()) it = sections_.find("*");
    if (it == sections_.end()) {
        throw ScriptError(origin_ + ": no scripted lines for subgoal '" + subgoal + "'");
    }
    const auto& section = it->second;
    const auto count = section.lines.size();
    if (request_index < 0) throw ScriptError(origin_ + ": negative request index");
    auto index = static_cast<std::size_t>(request_index);
    if (index >= count) {
        if (!section.loop) {
            throw ScriptError(origin_ + ": transcript for '" + it->first + "' exhausted after " +
                              std::to_string(count) + " lines");
        }
        index %= count;
    }
    return section.lines[index];
}

DecideResult decide(Policy& policy, const PromptBundle& prompt, const SkillGrammar& grammar,
                    bool expand_allowed, const std::vector<ControlFlowType>& allowed_flows,
                    const PolicyQuery& query) {
    PromptBundle working = prompt;
    DecideResult result;
    std::string last_rejection;
    for (int attempt = 0; attempt <= kParseRetries; ++attempt) {
        result.attempts = attempt + 1;
        result.input_tokens = estimate_tokens(render_full_text(working));
        PolicyQuery q = query;
        q.request_index = query.request_index + attempt;
        std::string raw;
        try {
            raw = policy.next_line(working, q);
        } catch (const TransportError& e) {
            result.decision = DeclareFailureDecision{};
            result.line = render_decision(result.decision);
            result.output_tokens = 0;
            result.note = std::string("transport failure: ") + e.what();
            return result;
        }
        result.output_tokens = estimate_tokens(raw);
        auto outcome = parse_decision(raw, grammar, expand_allowed);
        if (const auto* rejection = std::get_if<ParseRejection>(&outcome)) {
            last_rejection = rejection->reason;
        } else {
            auto decision = std::get<AgentDecision>(std::move(outcome));
            const auto* expansion = std::get_if<ExpandDecision>(&decision);
            if (expansion != nullptr &&
                std::find(allowed_flows.begin(), allowed_flows.end(), expansion->flow) ==
                    allowed_flows.end()) {
                last_rejection = "control flow '" + std::string(to_string(expansion->flow)) +
                                 "' is not available";
            } else {
                result.decision = std::move(decision);
                result.line = render_decision(result.decision);
                return result;
            }
        }
        working.context_lines.push_back("Error: " + last_rejection);
    }
    result.decision = DeclareFailureDecision{};
    result.line = render_decision(result.decision);
    result.note = "rejected after " + std::to_string(kParseRetries + 1) + " attempts: " +
                  last_rejection;
    return result;
}

}  // namespace reactree
