#include "reactree/tree.hpp"

#include <cassert>
#include <stdexcept>

namespace reactree {

std::string AgentNode::trajectory_text() const {
    std::string text = "Your task is to: " + subgoal;
    if (!initial_observation.empty()) {
        text += '\n';
        text += initial_observation;
    }
    for (const auto& step : steps) {
        text += '\n';
        text += step.action_line;
        if (!step.observation.empty()) {
            text += '\n';
            text += step.observation;
        }
    }
    return text;
}

NodeId Tree::make_root(std::string goal) {
    if (!nodes_.empty()) throw std::logic_error("tree already has a root");
    AgentNode node;
    node.id = 0;
    node.agent_ordinal = 0;
    node.subgoal = std::move(goal);
    nodes_.emplace_back(std::move(node));
    agent_count_ = 1;
    return 0;
}

NodeId Tree::expand(NodeId parent, ControlFlowType flow, std::span<const std::string> subgoals) {
    if (subgoals.empty()) throw std::logic_error("expansion needs at least one subgoal");
    AgentNode& parent_node = agent(parent);
    if (parent_node.child_flow) throw std::logic_error("agent node already expanded");

    ControlFlowNode flow_node;
    flow_node.id = static_cast<NodeId>(nodes_.size());
    flow_node.flow = flow;
    flow_node.parent_agent = parent;
    const NodeId flow_id = flow_node.id;
    nodes_.emplace_back(std::move(flow_node));

    std::vector<NodeId> children;
    children.reserve(subgoals.size());
    for (const auto& subgoal : subgoals) {
        AgentNode child;
        child.id = static_cast<NodeId>(nodes_.size());
        child.agent_ordinal = static_cast<int>(agent_count_++);
        child.depth = agent(parent).depth + 1;
        child.subgoal = subgoal;
        child.parent_flow = flow_id;
        children.push_back(child.id);
        nodes_.emplace_back(std::move(child));
    }
    this->flow(flow_id).children = std::move(children);
    agent(parent).child_flow = flow_id;
    return flow_id;
}

bool Tree::is_agent(NodeId id) const {
    return std::holds_alternative<AgentNode>(nodes_.at(id));
}

AgentNode& Tree::agent(NodeId id) { return std::get<AgentNode>(nodes_.at(id)); }
const AgentNode& Tree::agent(NodeId id) const { return std::get<AgentNode>(nodes_.at(id)); }
ControlFlowNode& Tree::flow(NodeId id) { return std::get<ControlFlowNode>(nodes_.at(id)); }
const ControlFlowNode& Tree::flow(NodeId id) const {
    return std::get<ControlFlowNode>(nodes_.at(id));
}

std::vector<NodeId> Tree::agent_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(agent_count_);
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (is_agent(id)) ids.push_back(id);
    }
    return ids;
}

NodeStatus aggregate_parallel(std::span<const NodeStatus> child_statuses) {
    int successes = 0;
    int failures = 0;
    for (const auto s : child_statuses) {
        if (s == NodeStatus::Success) ++successes;
        if (s == NodeStatus::Failure) ++failures;
    }
    return successes > failures ? NodeStatus::Success : NodeStatus::Failure;
}

}  // namespace reactree
