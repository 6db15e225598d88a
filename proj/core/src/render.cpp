#include "reactree/render.hpp"

namespace reactree {

namespace {

std::string dot_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

const char* status_color(NodeStatus status) {
    switch (status) {
        case NodeStatus::Success: return "darkgreen";
        case NodeStatus::Failure: return "firebrick";
        case NodeStatus::Running: return "gray50";
    }
    return "gray50";
}

void outline_agent(const Tree& tree, NodeId id, int indent, std::string& out);

void outline_flow(const Tree& tree, NodeId id, int indent, std::string& out) {
    const ControlFlowNode& node = tree.flow(id);
    out.append(indent * 2, ' ');
    out += '<';
    out += to_string(node.flow);
    out += "> [";
    out += to_string(node.status);
    out += "]\n";
    for (const auto child : node.children) outline_agent(tree, child, indent + 1, out);
}

void outline_agent(const Tree& tree, NodeId id, int indent, std::string& out) {
    const AgentNode& node = tree.agent(id);
    out.append(indent * 2, ' ');
    out += '[';
    out += std::to_string(node.agent_ordinal);
    out += "] ";
    out += node.subgoal;
    out += " [";
    out += to_string(node.status);
    out += ']';
    if (!node.executed) out += " (not executed)";
    out += '\n';
    if (node.child_flow) outline_flow(tree, *node.child_flow, indent + 1, out);
}

}  // namespace

std::string render_outline(const Tree& tree) {
    std::string out;
    if (!tree.empty()) outline_agent(tree, tree.root(), 0, out);
    return out;
}

std::string render_dot(const Tree& tree) {
    std::string out = "digraph reactree {\n  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n";
    for (NodeId id = 0; id < tree.size(); ++id) {
        if (tree.is_agent(id)) {
            const AgentNode& node = tree.agent(id);
            out += "  n" + std::to_string(id) + " [shape=box, color=" +
                   status_color(node.status) + ", label=\"" +
                   std::to_string(node.agent_ordinal) + ": " + dot_escape(node.subgoal) + "\"];\n";
        } else {
            const ControlFlowNode& node = tree.flow(id);
            out += "  n" + std::to_string(id) + " [shape=ellipse, color=" +
                   status_color(node.status) + ", label=\"" + std::string(to_string(node.flow)) +
                   "\"];\n";
        }
    }
    for (NodeId id = 0; id < tree.size(); ++id) {
        if (tree.is_agent(id)) {
            const AgentNode& node = tree.agent(id);
            if (node.child_flow) {
                out += "  n" + std::to_string(id) + " -> n" + std::to_string(*node.child_flow) +
                       ";\n";
            }
        } else {
            for (const auto child : tree.flow(id).children) {
                out += "  n" + std::to_string(id) + " -> n" + std::to_string(child) + ";\n";
            }
        }
    }
    out += "}\n";
    return out;
}

}  // namespace reactree
