#include "reactree/trace.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

using nlohmann::json;

AgentNode& require_agent(Tree& tree, NodeId id, const std::string& at) {
    if (id >= tree.size() || !tree.is_agent(id)) {
        throw TraceError(at + ": unknown agent node " + std::to_string(id));
    }
    return tree.agent(id);
}

ControlFlowNode& require_flow(Tree& tree, NodeId id, const std::string& at) {
    if (id >= tree.size() || tree.is_agent(id)) {
        throw TraceError(at + ": unknown control flow node " + std::to_string(id));
    }
    return tree.flow(id);
}

void check(bool ok, const std::string& at, const std::string& what) {
    if (!ok) throw TraceError(at + ": " + what);
}

void replay_node_created(Tree& tree, const json& payload, const std::string& at) {
    const auto id = payload.at("id").get<NodeId>();
    const std::string kind = payload.at("kind").get<std::string>();
    if (kind == "agent") {
        if (payload.at("parent").is_null()) {
            check(tree.empty(), at, "second root node");
            check(id == 0, at, "root node id is not 0");
            tree.make_root(payload.at("subgoal").get<std::string>());
            return;
        }
        const AgentNode& node = require_agent(tree, id, at);
        check(node.subgoal == payload.at("subgoal").get<std::string>(), at,
              "agent subgoal does not match its expansion");
        check(node.agent_ordinal == payload.at("ordinal").get<int>(), at,
              "agent ordinal does not match creation order");
        check(node.depth == payload.at("depth").get<int>(), at, "agent depth mismatch");
        check(node.parent_flow && *node.parent_flow == payload.at("parent").get<NodeId>(), at,
              "agent parent mismatch");
    } else if (kind == "flow") {
        const ControlFlowNode& node = require_flow(tree, id, at);
        check(to_string(node.flow) == payload.at("flow").get<std::string>(), at,
              "flow type does not match its expansion");
        check(node.parent_agent == payload.at("parent").get<NodeId>(), at,
              "flow parent mismatch");
    } else {
        throw TraceError(at + ": unknown node kind '" + kind + "'");
    }
}

void replay_decision(Tree& tree, const json& payload, const std::string& at) {
    AgentNode& node = require_agent(tree, payload.at("node").get<NodeId>(), at);
    const std::string kind = payload.at("kind").get<std::string>();
    const std::string line = payload.at("line").get<std::string>();
    check(kind == "think" || kind == "act" || kind == "expand" || kind == "done" ||
              kind == "declare_failure",
          at, "unknown decision kind '" + kind + "'");
    check(!node.child_flow, at, "decision on an already expanded node");
    node.executed = true;
    if (kind != "expand") node.steps.push_back({line, ""});
}

void replay_observation(Tree& tree, const json& payload, const std::string& at) {
    AgentNode& node = require_agent(tree, payload.at("node").get<NodeId>(), at);
    const std::string text = payload.at("text").get<std::string>();
    payload.at("error").get<bool>();
    if (payload.at("initial").get<bool>()) {
        check(node.initial_observation.empty(), at, "duplicate initial observation");
        node.initial_observation = text;
        node.executed = true;
        return;
    }
    check(!node.steps.empty(), at, "observation without a preceding action");
    check(node.steps.back().observation.empty(), at, "observation attached twice");
    node.steps.back().observation = text;
}

void replay_expansion(Tree& tree, const json& payload, const std::string& at) {
    const auto parent = payload.at("node").get<NodeId>();
    require_agent(tree, parent, at);
    const auto flow = flow_from_string(payload.at("flow").get<std::string>());
    const auto subgoals = payload.at("subgoals").get<std::vector<std::string>>();
    check(!subgoals.empty(), at, "expansion without subgoals");
    NodeId flow_id = 0;
    try {
        flow_id = tree.expand(parent, flow, subgoals);
    } catch (const std::logic_error& e) {
        throw TraceError(at + ": " + e.what());
    }
    check(flow_id == payload.at("flow_node").get<NodeId>(), at,
          "flow node id does not match creation order");
    check(tree.flow(flow_id).children == payload.at("children").get<std::vector<NodeId>>(), at,
          "child ids do not match creation order");
}

void replay_node_result(Tree& tree, const json& payload, const std::string& at) {
    const auto id = payload.at("node").get<NodeId>();
    const auto status = status_from_string(payload.at("status").get<std::string>());
    check(status != NodeStatus::Running, at, "node-result with Running status");
    if (id < tree.size() && tree.is_agent(id)) {
        AgentNode& node = tree.agent(id);
        check(node.status == NodeStatus::Running, at, "node finished twice");
        node.status = status;
        node.executed = true;
    } else {
        ControlFlowNode& node = require_flow(tree, id, at);
        check(node.status == NodeStatus::Running, at, "node finished twice");
        node.status = status;
    }
}

}  // namespace

void EpisodeTrace::emit(std::string kind, nlohmann::json payload, const DecisionBudget& budget) {
    TraceEvent event;
    event.seq = events_.size();
    event.kind = std::move(kind);
    event.budget_used = budget.used;
    event.budget_cap = budget.cap;
    event.payload = std::move(payload);
    events_.push_back(std::move(event));
}

std::string EpisodeTrace::to_jsonl() const {
    std::string out;
    for (const auto& event : events_) {
        const json line = {{"budget_cap", event.budget_cap},
                           {"budget_used", event.budget_used},
                           {"kind", event.kind},
                           {"payload", event.payload},
                           {"seq", event.seq}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

EpisodeTrace EpisodeTrace::from_jsonl(const std::string& text) {
    EpisodeTrace trace;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json parsed;
        try {
            parsed = json::parse(line);
            TraceEvent event;
            event.seq = parsed.at("seq").get<std::uint64_t>();
            event.kind = parsed.at("kind").get<std::string>();
            event.budget_used = parsed.at("budget_used").get<int>();
            event.budget_cap = parsed.at("budget_cap").get<int>();
            event.payload = parsed.at("payload");
            trace.events_.push_back(std::move(event));
        } catch (const json::exception& e) {
            throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return trace;
}

void EpisodeTrace::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw TraceError("cannot write trace file '" + file.string() + "'");
    out << to_jsonl();
    if (!out) throw TraceError("failed writing trace file '" + file.string() + "'");
}

EpisodeTrace EpisodeTrace::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TraceError("cannot read trace file '" + file.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_jsonl(buffer.str());
}

ReplayResult replay(const EpisodeTrace& trace) {
    const auto& events = trace.events();
    if (events.empty()) throw TraceError("trace replay: empty trace");

    ReplayResult out;
    int prev_used = 0;
    const int cap = events.front().budget_cap;
    bool closed = false;

    for (std::size_t i = 0; i < events.size(); ++i) {
        const TraceEvent& event = events[i];
        const std::string at = "trace replay: event " + std::to_string(i);
        check(event.seq == i, at, "sequence numbers are not contiguous");
        check(event.budget_cap == cap, at, "budget cap changed mid-episode");
        check(event.budget_used >= prev_used, at, "budget went backwards");
        check(event.budget_used <= cap, at, "budget exceeds its cap");
        check(!closed, at, "events after episode-result");
        prev_used = event.budget_used;

        try {
            if (event.kind == "node-created") {
                replay_node_created(out.tree, event.payload, at);
            } else if (event.kind == "decision") {
                replay_decision(out.tree, event.payload, at);
            } else if (event.kind == "observation") {
                replay_observation(out.tree, event.payload, at);
            } else if (event.kind == "expansion") {
                replay_expansion(out.tree, event.payload, at);
            } else if (event.kind == "node-result") {
                replay_node_result(out.tree, event.payload, at);
            } else if (event.kind == "episode-result") {
                out.episode = event.payload;
                closed = true;
            } else {
                throw TraceError(at + ": unknown event kind '" + event.kind + "'");
            }
        } catch (const json::exception& e) {
            throw TraceError(at + ": malformed payload: " + e.what());
        }
    }

    check(closed, "trace replay", "missing episode-result event");
    check(!out.tree.empty(), "trace replay", "no nodes created");
    return out;
}

}  // namespace reactree
