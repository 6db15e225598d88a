#include "reactree/engine.hpp"

#include <utility>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

using nlohmann::json;

const char* decision_kind(const AgentDecision& decision) {
    struct Visitor {
        const char* operator()(const ThinkDecision&) const { return "think"; }
        const char* operator()(const ActDecision&) const { return "act"; }
        const char* operator()(const ExpandDecision&) const { return "expand"; }
        const char* operator()(const DoneDecision&) const { return "done"; }
        const char* operator()(const DeclareFailureDecision&) const { return "declare_failure"; }
    };
    return std::visit(Visitor{}, decision);
}

}  // namespace

Engine::Engine(Policy& policy, Simulator& sim, EngineConfig config)
    : policy_(policy), sim_(sim), config_(std::move(config)) {
    if (config_.max_decisions < 0) throw ConfigError("max_decisions must not be negative");
    if (config_.max_depth < 0) throw ConfigError("max_depth must not be negative");
    if (config_.retrieval_budget < 0) throw ConfigError("retrieval_budget must not be negative");
    const std::string& profile = sim_.state().profile;
    grammar_ = profile == "extended" ? SkillGrammar::extended(config_.working_memory)
                                     : SkillGrammar::household(config_.working_memory);
    prompt_options_.mode = config_.mode;
    prompt_options_.working_memory = config_.working_memory;
    prompt_options_.profile = profile;
    prompt_options_.allowed_flows = config_.allowed_flows;
}

void Engine::attach_memory(const EpisodicStore* store, const EmbeddingProvider* provider) {
    if ((store == nullptr) != (provider == nullptr)) {
        throw ConfigError("episodic store and embedder must be attached together");
    }
    if (store && store->embedder_id() != provider->name()) {
        throw ConfigError("episodic store was built with embedder '" + store->embedder_id() +
                          "', not '" + provider->name() + "'");
    }
    store_ = store;
    embedder_ = provider;
}

void Engine::attach_trace(EpisodeTrace* trace) { trace_ = trace; }

void Engine::emit(const char* kind, json payload) {
    if (trace_) trace_->emit(kind, std::move(payload), budget_);
}

void Engine::emit_created(NodeId id) {
    if (!trace_) return;
    if (tree_.is_agent(id)) {
        const AgentNode& node = tree_.agent(id);
        json parent;
        if (node.parent_flow) parent = *node.parent_flow;
        emit("node-created", {{"id", node.id},
                              {"kind", "agent"},
                              {"subgoal", node.subgoal},
                              {"ordinal", node.agent_ordinal},
                              {"depth", node.depth},
                              {"parent", std::move(parent)}});
    } else {
        const ControlFlowNode& node = tree_.flow(id);
        emit("node-created", {{"id", node.id},
                              {"kind", "flow"},
                              {"flow", std::string(to_string(node.flow))},
                              {"parent", node.parent_agent}});
    }
}

void Engine::observe(NodeId id, const Observation& obs, bool initial) {
    emit("observation",
         {{"node", id}, {"text", obs.text}, {"error", obs.error}, {"initial", initial}});
    if (config_.working_memory) wm_.update(obs.sightings, budget_.used);
}

NodeStatus Engine::finish_agent(NodeId id, NodeStatus status) {
    tree_.agent(id).status = status;
    emit("node-result", {{"node", id}, {"status", std::string(to_string(status))}});
    return status;
}

NodeStatus Engine::exec_agent_node(NodeId id, const std::optional<Lineage>& lineage) {
    tree_.agent(id).executed = true;

    std::vector<const Experience*> examples;
    if (store_ && store_->size() > 0) {
        const auto picked = retrieve(*store_, *embedder_, tree_.agent(id).subgoal,
                                     config_.retrieval_budget, config_.seed);
        examples.reserve(picked.indices.size());
        for (const auto index : picked.indices) examples.push_back(&store_->experiences()[index]);
    }

    {
        const Observation summary = sim_.house_summary();
        tree_.agent(id).initial_observation = summary.text;
        observe(id, summary, true);
    }

    int node_requests = 0;
    while (true) {
        if (budget_.exhausted()) return finish_agent(id, NodeStatus::Failure);

        const PromptBundle bundle =
            build_prompt(tree_.agent(id), examples, lineage, prompt_options_);
        const bool expand_allowed = config_.mode == Mode::ReAcTree;
        DecideResult outcome =
            decide(policy_, bundle, grammar_, expand_allowed, config_.allowed_flows,
                   PolicyQuery{id, tree_.agent(id).subgoal, node_requests});
        node_requests += outcome.attempts;
        requests_ += outcome.attempts;
        budget_.used += 1;
        input_tokens_.push_back(outcome.input_tokens);
        output_tokens_.push_back(outcome.output_tokens);

        if (std::holds_alternative<ExpandDecision>(outcome.decision) &&
            tree_.agent(id).depth >= config_.max_depth) {
            outcome.decision = DeclareFailureDecision{};
            outcome.line = render_decision(outcome.decision);
            outcome.note = "expansion depth limit reached";
        }

        json decision_event = {{"node", id},
                               {"line", outcome.line},
                               {"kind", decision_kind(outcome.decision)},
                               {"attempts", outcome.attempts},
                               {"input_tokens", outcome.input_tokens},
                               {"output_tokens", outcome.output_tokens}};
        if (!outcome.note.empty()) decision_event["note"] = outcome.note;
        emit("decision", std::move(decision_event));

        if (std::holds_alternative<DoneDecision>(outcome.decision)) {
            tree_.agent(id).steps.push_back({outcome.line, ""});
            return finish_agent(id, NodeStatus::Success);
        }
        if (std::holds_alternative<DeclareFailureDecision>(outcome.decision)) {
            tree_.agent(id).steps.push_back({outcome.line, ""});
            return finish_agent(id, NodeStatus::Failure);
        }

        if (std::holds_alternative<ThinkDecision>(outcome.decision)) {
            tree_.agent(id).steps.push_back({outcome.line, ""});
            if (budget_.exhausted()) return finish_agent(id, NodeStatus::Failure);
            continue;
        }

        if (const auto* act = std::get_if<ActDecision>(&outcome.decision)) {
            std::string verb;
            std::string argument;
            split_command(act->command, grammar_, verb, argument);
            Observation obs;
            if (grammar_.recall && verb == kRecallVerb) {
                obs.text = wm_.recall(argument);
            } else {
                obs = sim_.step({verb, argument});
            }
            tree_.agent(id).steps.push_back({outcome.line, obs.text});
            observe(id, obs, false);
            if (budget_.exhausted()) return finish_agent(id, NodeStatus::Failure);
            continue;
        }

        const auto expansion = std::get<ExpandDecision>(outcome.decision);
        const NodeId flow_id = tree_.expand(id, expansion.flow, expansion.subgoals);
        const std::vector<NodeId> children = tree_.flow(flow_id).children;
        emit("expansion", {{"node", id},
                           {"flow_node", flow_id},
                           {"flow", std::string(to_string(expansion.flow))},
                           {"children", children},
                           {"subgoals", expansion.subgoals}});
        emit_created(flow_id);
        for (const auto child : children) emit_created(child);
        return finish_agent(id, exec_control_flow_node(flow_id));
    }
}

NodeStatus Engine::exec_control_flow_node(NodeId id) {
    const ControlFlowType flow = tree_.flow(id).flow;
    const std::vector<NodeId> children = tree_.flow(id).children;

    Lineage lineage;
    lineage.parent_goal = tree_.agent(tree_.flow(id).parent_agent).subgoal;
    lineage.flow = flow;
    lineage.siblings.reserve(children.size());
    for (const auto child : children) lineage.siblings.push_back(tree_.agent(child).subgoal);
    const std::optional<Lineage> inherited(std::move(lineage));

    NodeStatus result = NodeStatus::Failure;
    if (flow == ControlFlowType::Sequence) {
        result = NodeStatus::Success;
        for (const auto child : children) {
            if (exec_agent_node(child, inherited) == NodeStatus::Failure) {
                result = NodeStatus::Failure;
                break;
            }
        }
    } else if (flow == ControlFlowType::Fallback) {
        for (const auto child : children) {
            if (exec_agent_node(child, inherited) == NodeStatus::Success) {
                result = NodeStatus::Success;
                break;
            }
        }
    } else {
        std::vector<NodeStatus> statuses;
        statuses.reserve(children.size());
        for (const auto child : children) statuses.push_back(exec_agent_node(child, inherited));
        result = aggregate_parallel(statuses);
    }

    tree_.flow(id).status = result;
    emit("node-result", {{"node", id}, {"status", std::string(to_string(result))}});
    return result;
}

RunOutcome Engine::run_episode(const TaskSpec& task) {
    sim_.reset();
    tree_ = Tree();
    wm_ = WorkingMemory();
    budget_ = DecisionBudget{};
    budget_.cap =
        config_.max_decisions > 0 ? config_.max_decisions : sim_.state().default_decision_cap();
    input_tokens_.clear();
    output_tokens_.clear();
    requests_ = 0;

    const NodeId root = tree_.make_root(task.instruction);
    emit_created(root);
    const NodeStatus root_status = exec_agent_node(root, std::nullopt);

    const GoalEvaluation eval = sim_.evaluate_goal(task.goal);

    RunOutcome outcome;
    outcome.result.task_id = task.id;
    outcome.result.task_type = task.type;
    outcome.result.mode = config_.mode;
    outcome.result.seed = config_.seed;
    outcome.result.success = eval.success;
    outcome.result.ssr = eval.ssr;
    outcome.result.decisions_used = budget_.used;
    outcome.result.budget_cap = budget_.cap;
    outcome.result.root_status = root_status;
    outcome.result.tokens = compute_token_stats(input_tokens_, output_tokens_);

    json goal = json::array();
    for (const auto& p : eval.per_predicate) {
        goal.push_back({{"key", p.key}, {"required", p.required}, {"satisfied", p.satisfied}});
    }
    emit("episode-result", {{"task", task.id},
                            {"type", task.type},
                            {"mode", std::string(to_string(config_.mode))},
                            {"seed", config_.seed},
                            {"world", sim_.state().name},
                            {"success", eval.success},
                            {"ssr", eval.ssr},
                            {"decisions", budget_.used},
                            {"budget_cap", budget_.cap},
                            {"root_status", std::string(to_string(root_status))},
                            {"goal", std::move(goal)},
                            {"tokens", token_stats_to_json(outcome.result.tokens)}});

    outcome.tree = std::move(tree_);
    return outcome;
}

}  // namespace reactree
