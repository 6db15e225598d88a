#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reactree/types.hpp"

namespace reactree {

// One observation/action step of an agent node's context. The action line is
// the rendered decision; the observation is what it produced (empty for
// thoughts and terminal lines).
struct ContextStep {
    std::string action_line;
    std::string observation;
};

struct AgentNode {
    NodeId id = 0;
    int agent_ordinal = 0;  // creation rank among agent nodes only
    int depth = 0;          // expansions above this node; root is 0
    std::string subgoal;
    std::string initial_observation;
    std::vector<ContextStep> steps;
    NodeStatus status = NodeStatus::Running;
    std::optional<NodeId> parent_flow;
    std::optional<NodeId> child_flow;
    bool executed = false;

    // Goal line, initial observation, then each step. This is the node's
    // trajectory exactly as it appears in prompts and stored experiences.
    std::string trajectory_text() const;
};

struct ControlFlowNode {
    NodeId id = 0;
    ControlFlowType flow = ControlFlowType::Sequence;
    NodeId parent_agent = 0;
    std::vector<NodeId> children;
    NodeStatus status = NodeStatus::Running;
};

// Arena for one episode's tree. Ids are assigned in creation order across
// both node kinds; agent nodes additionally carry a display ordinal counting
// agent nodes alone.
class Tree {
public:
    NodeId make_root(std::string goal);

    // Creates the control-flow child of parent plus one agent node per
    // subgoal, all eagerly, left to right. Returns the flow node id.
    // The parent must be an unexpanded agent node.
    NodeId expand(NodeId parent, ControlFlowType flow, std::span<const std::string> subgoals);

    bool is_agent(NodeId id) const;
    AgentNode& agent(NodeId id);
    const AgentNode& agent(NodeId id) const;
    ControlFlowNode& flow(NodeId id);
    const ControlFlowNode& flow(NodeId id) const;

    NodeId root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t agent_count() const { return agent_count_; }
    std::size_t flow_count() const { return nodes_.size() - agent_count_; }
    bool empty() const { return nodes_.empty(); }

    // Agent node ids in creation order.
    std::vector<NodeId> agent_ids() const;

private:
    std::vector<std::variant<AgentNode, ControlFlowNode>> nodes_;
    std::size_t agent_count_ = 0;
};

// Episode-wide decision budget shared by every node.
struct DecisionBudget {
    int used = 0;
    int cap = 200;

    bool exhausted() const { return used >= cap; }
};

// Majority vote over parallel children; ties fail.
NodeStatus aggregate_parallel(std::span<const NodeStatus> child_statuses);

}  // namespace reactree
