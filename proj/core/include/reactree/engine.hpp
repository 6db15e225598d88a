#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reactree/memory.hpp"
#include "reactree/metrics.hpp"
#include "reactree/policy.hpp"
#include "reactree/prompt.hpp"
#include "reactree/sim.hpp"
#include "reactree/trace.hpp"
#include "reactree/tree.hpp"
#include "reactree/world_io.hpp"

namespace reactree {

// Knobs for one episode. max_decisions of 0 defers to the world profile's
// default cap. max_depth bounds expansions: a node at that depth answers any
// further Expand with a declared failure instead of growing the tree.
struct EngineConfig {
    Mode mode = Mode::ReAcTree;
    bool working_memory = true;
    std::vector<ControlFlowType> allowed_flows = {
        ControlFlowType::Sequence, ControlFlowType::Fallback, ControlFlowType::Parallel};
    int max_depth = 8;
    int retrieval_budget = 5000;
    std::uint64_t seed = 0;
    int max_decisions = 0;
};

struct RunOutcome {
    EpisodeResult result;
    Tree tree;
};

// Drives one episode: grows the tree as the policy asks, executes skills
// against the simulator, keeps the episode-wide decision budget, and mirrors
// every step into the attached trace.
class Engine {
public:
    Engine(Policy& policy, Simulator& sim, EngineConfig config);

    // Optional episodic memory used for in-prompt examples. Pass nullptrs to
    // run without it; otherwise both must outlive the engine and the provider
    // must be the one the store was built with.
    void attach_memory(const EpisodicStore* store, const EmbeddingProvider* provider);
    void attach_trace(EpisodeTrace* trace);

    RunOutcome run_episode(const TaskSpec& task);

    // Policy queries issued during the last episode, re-prompts included.
    int requests() const { return requests_; }
    const WorkingMemory& working_memory() const { return wm_; }

private:
    NodeStatus exec_agent_node(NodeId id, const std::optional<Lineage>& lineage);
    NodeStatus exec_control_flow_node(NodeId id);
    NodeStatus finish_agent(NodeId id, NodeStatus status);
    void emit(const char* kind, nlohmann::json payload);
    void emit_created(NodeId id);
    void observe(NodeId id, const Observation& obs, bool initial);

    Policy& policy_;
    Simulator& sim_;
    EngineConfig config_;
    SkillGrammar grammar_;
    PromptOptions prompt_options_;
    const EpisodicStore* store_ = nullptr;
    const EmbeddingProvider* embedder_ = nullptr;
    EpisodeTrace* trace_ = nullptr;

    Tree tree_;
    WorkingMemory wm_;
    DecisionBudget budget_;
    std::vector<int> input_tokens_;
    std::vector<int> output_tokens_;
    int requests_ = 0;
};

}  // namespace reactree
