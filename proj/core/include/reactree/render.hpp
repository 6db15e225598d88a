#pragma once

#include <string>

#include "reactree/tree.hpp"

namespace reactree {

// Indented outline of a finished tree. Agent nodes print their display
// ordinal, subgoal, and status; control flow nodes print their type.
std::string render_outline(const Tree& tree);

// Graphviz DOT text: agent nodes as boxes labeled by ordinal and subgoal,
// control flow nodes as ellipses, colored by final status.
std::string render_dot(const Tree& tree);

}  // namespace reactree
