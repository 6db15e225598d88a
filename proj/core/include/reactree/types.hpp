#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace reactree {

// Nodes are numbered in creation order across the whole tree; the root is 0.
using NodeId = std::uint32_t;

enum class NodeStatus { Running, Success, Failure };

enum class ControlFlowType { Sequence, Fallback, Parallel };

// Planning mode: full tree expansion or a single flat reasoning loop.
enum class Mode { ReAcTree, React };

std::string_view to_string(NodeStatus s);
std::string_view to_string(ControlFlowType f);
std::string_view to_string(Mode m);

// Parses "sequence" / "fallback" / "parallel". Throws ConfigError otherwise.
ControlFlowType flow_from_string(std::string_view name);
Mode mode_from_string(std::string_view name);
NodeStatus status_from_string(std::string_view name);

}  // namespace reactree
