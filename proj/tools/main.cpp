#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reactree/engine.hpp"
#include "reactree/errors.hpp"
#include "reactree/memory.hpp"
#include "reactree/metrics.hpp"
#include "reactree/render.hpp"
#include "reactree/suite.hpp"
#include "reactree/trace.hpp"
#include "reactree/world_io.hpp"

namespace {

using namespace reactree;

struct EngineFlags {
    std::string mode = "reactree";
    std::string wm = "on";
    std::string flows = "all";
    int max_decisions = 0;
    int retrieval_budget = 5000;
    int max_depth = 8;
    std::uint64_t seed = 0;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& flags) {
    cmd->add_option("--mode", flags.mode, "Planning mode")
        ->check(CLI::IsMember({"reactree", "react"}))
        ->capture_default_str();
    cmd->add_option("--wm", flags.wm, "Working memory switch")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    cmd->add_option("--flows", flags.flows, "Control flows the policy may request")
        ->check(CLI::IsMember({"all", "seq+fb", "seq"}))
        ->capture_default_str();
    cmd->add_option("--max-decisions", flags.max_decisions,
                    "Episode decision cap (0: world profile default)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--retrieval-budget", flags.retrieval_budget,
                    "Token budget for retrieved examples")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--max-depth", flags.max_depth, "Maximum expansion depth")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "Base seed for retrieval tie-breaking")
        ->capture_default_str();
}

EngineConfig to_engine_config(const EngineFlags& flags) {
    EngineConfig config;
    config.mode = mode_from_string(flags.mode);
    config.working_memory = flags.wm == "on";
    if (flags.flows == "seq") {
        config.allowed_flows = {ControlFlowType::Sequence};
    } else if (flags.flows == "seq+fb") {
        config.allowed_flows = {ControlFlowType::Sequence, ControlFlowType::Fallback};
    } else {
        config.allowed_flows = {ControlFlowType::Sequence, ControlFlowType::Fallback,
                                ControlFlowType::Parallel};
    }
    config.max_decisions = flags.max_decisions;
    config.retrieval_budget = flags.retrieval_budget;
    config.max_depth = flags.max_depth;
    config.seed = flags.seed;
    return config;
}

PolicySpec parse_policy(const std::string& text) {
    constexpr std::string_view kScripted = "scripted:";
    if (text.rfind(kScripted, 0) == 0) {
        const std::string file = text.substr(kScripted.size());
        if (file.empty()) {
            throw ConfigError("scripted policy needs a file: --policy scripted:<file>");
        }
        return PolicySpec::scripted(std::make_shared<Transcript>(Transcript::load(file)));
    }
    if (text == "remote") return PolicySpec::remote_endpoint(RemoteConfig::from_env());
    throw ConfigError("unknown policy '" + text + "' (use scripted:<file> or remote)");
}

std::string fixed2(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << value;
    return out.str();
}

void print_episode(const EpisodeResult& result) {
    std::cout << result.task_id << ": root " << to_string(result.root_status) << ", goal "
              << (result.success ? "satisfied" : "unsatisfied") << ", ssr " << fixed2(result.ssr)
              << ", decisions " << result.decisions_used << "/" << result.budget_cap << ", wall "
              << fixed2(result.wall_ms) << "ms\n";
    std::cout << "  tokens: max input " << result.tokens.max_input << ", mean input "
              << fixed2(result.tokens.mean_input) << " (sd " << fixed2(result.tokens.sd_input)
              << "), mean output " << fixed2(result.tokens.mean_output) << " (sd "
              << fixed2(result.tokens.sd_output) << ")\n";
}

void print_report(const SuiteReport& report) {
    for (const auto& episode : report.episodes) print_episode(episode);
    std::cout << "tasks " << report.episodes.size() << " | GSR " << fixed2(report.gsr)
              << " | SSR " << fixed2(report.ssr) << "\n";
    for (const auto& [type, bucket] : report.by_type) {
        std::cout << "  type " << type << ": tasks " << bucket.tasks << ", gsr "
                  << fixed2(bucket.gsr) << ", ssr " << fixed2(bucket.ssr) << "\n";
    }
}

struct StoreFlags {
    std::string path = "none";
};

std::unique_ptr<EpisodicStore> maybe_load_store(const StoreFlags& flags) {
    if (flags.path == "none" || flags.path.empty()) return nullptr;
    return std::make_unique<EpisodicStore>(EpisodicStore::load(flags.path));
}

int cmd_run(const std::string& task_file, const std::string& policy_text,
            const EngineFlags& flags, const StoreFlags& store_flags,
            const std::string& trace_out, bool outline) {
    const TaskSpec task = load_task(task_file);
    const PolicySpec policy = parse_policy(policy_text);
    Simulator sim(load_world(task.world_path));
    const auto agent = [&]() -> std::unique_ptr<Policy> {
        if (policy.kind == PolicySpec::Kind::Scripted) {
            return std::make_unique<ScriptedPolicy>(policy.transcript);
        }
        return std::make_unique<RemotePolicy>(policy.remote);
    }();

    EngineConfig config = to_engine_config(flags);
    config.seed = derive_seed(config.seed, task.id);
    Engine engine(*agent, sim, config);

    const HashedBowEmbedder embedder;
    const auto store = maybe_load_store(store_flags);
    if (store) engine.attach_memory(store.get(), &embedder);

    EpisodeTrace trace;
    if (!trace_out.empty()) engine.attach_trace(&trace);

    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome = engine.run_episode(task);
    outcome.result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    if (!trace_out.empty()) trace.save(trace_out);
    print_episode(outcome.result);
    std::cout << "  requests " << engine.requests() << ", nodes " << outcome.tree.size() << " ("
              << outcome.tree.agent_count() << " agents, " << outcome.tree.flow_count()
              << " flows)\n";
    if (outline) std::cout << render_outline(outcome.tree);
    return 0;
}

int cmd_suite(const std::string& manifest_file, const std::string& policy_text,
              const EngineFlags& flags, const StoreFlags& store_flags, int jobs,
              const std::string& trace_dir, const std::string& report_out,
              const std::vector<std::string>& tag_args) {
    const auto tasks = load_manifest(manifest_file);
    const PolicySpec policy = parse_policy(policy_text);

    const HashedBowEmbedder embedder;
    const auto store = maybe_load_store(store_flags);

    SuiteConfig config;
    config.engine = to_engine_config(flags);
    config.jobs = jobs;
    config.trace_dir = trace_dir;
    if (store) {
        config.store = store.get();
        config.embedder = &embedder;
    }
    config.tags["mode"] = flags.mode;
    config.tags["wm"] = flags.wm;
    config.tags["flows"] = flags.flows;
    config.tags["seed"] = std::to_string(flags.seed);
    for (const auto& tag : tag_args) {
        const auto eq = tag.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("tags must look like key=value, got '" + tag + "'");
        }
        config.tags[tag.substr(0, eq)] = tag.substr(eq + 1);
    }

    const SuiteReport report = run_suite(tasks, policy, config);
    print_report(report);
    if (!report_out.empty()) {
        save_report(report, report_out);
        std::cout << "report written to " << report_out << "\n";
    }
    return 0;
}

int cmd_bootstrap(const std::string& em_out, const std::vector<std::string>& seed_files,
                  const std::string& manifest_file, const std::string& policy_text,
                  const EngineFlags& flags, const std::string& trace_dir) {
    const HashedBowEmbedder embedder;
    EpisodicStore store(embedder.name(), embedder.dimension());

    int seeded = 0;
    for (const auto& file : seed_files) {
        for (auto& experience : load_seed_trajectories(file, embedder)) {
            store.add(std::move(experience));
            ++seeded;
        }
    }

    BootstrapStats stats;
    if (!manifest_file.empty()) {
        if (policy_text.empty()) {
            throw ConfigError("bootstrap with a manifest needs --policy");
        }
        const auto tasks = load_manifest(manifest_file);
        const PolicySpec policy = parse_policy(policy_text);
        SuiteConfig config;
        config.engine = to_engine_config(flags);
        config.trace_dir = trace_dir;
        stats = bootstrap_store(tasks, policy, config, store, embedder);
    }

    store.save(em_out);
    std::cout << "store " << em_out << ": " << store.size() << " experiences (" << seeded
              << " seeded, " << stats.harvested << " harvested from " << stats.episodes
              << " episodes, " << stats.successes << " successful)\n";
    return 0;
}

int cmd_memory_inspect(const std::string& em_path, const std::string& goal, int budget,
                       std::uint64_t seed) {
    const EpisodicStore store = EpisodicStore::load(em_path);
    std::map<Termination, int> by_termination;
    long long total_tokens = 0;
    for (const auto& experience : store.experiences()) {
        by_termination[experience.termination] += 1;
        total_tokens += experience.token_count;
    }
    std::cout << em_path << ": embedder " << store.embedder_id() << ", dimension "
              << store.dimension() << ", " << store.size() << " experiences, " << total_tokens
              << " tokens\n";
    for (const auto& [termination, count] : by_termination) {
        std::cout << "  " << to_string(termination) << ": " << count << "\n";
    }
    if (!goal.empty()) {
        const HashedBowEmbedder embedder;
        const auto picked = retrieve(store, embedder, goal, budget, seed);
        std::cout << "retrieval for \"" << goal << "\" (budget " << budget << ", seed " << seed
                  << "): " << picked.indices.size() << " experiences, " << picked.total_tokens
                  << " tokens\n";
        const auto query = embedder.embed(goal);
        for (const auto index : picked.indices) {
            const auto& experience = store.experiences()[index];
            std::cout << "  #" << index << " sim "
                      << fixed2(cosine_similarity(query, experience.embedding)) << " "
                      << to_string(experience.termination) << " " << experience.token_count
                      << " tokens | " << experience.trajectory.substr(0, 60) << "\n";
        }
    }
    return 0;
}

int cmd_replay(const std::string& trace_file, bool outline) {
    const EpisodeTrace trace = EpisodeTrace::load(trace_file);
    const ReplayResult result = replay(trace);
    std::cout << trace_file << ": " << trace.size() << " events, " << result.tree.size()
              << " nodes (" << result.tree.agent_count() << " agents, "
              << result.tree.flow_count() << " flows)\n";
    const auto& episode = result.episode;
    std::cout << "episode " << episode.at("task").get<std::string>() << ": success "
              << (episode.at("success").get<bool>() ? "true" : "false") << ", ssr "
              << fixed2(episode.at("ssr").get<double>()) << ", decisions "
              << episode.at("decisions").get<int>() << "/" << episode.at("budget_cap").get<int>()
              << "\n";
    if (outline) std::cout << render_outline(result.tree);
    return 0;
}

int cmd_render(const std::string& trace_file, const std::string& format,
               const std::string& out_file) {
    const EpisodeTrace trace = EpisodeTrace::load(trace_file);
    const ReplayResult result = replay(trace);
    const std::string text =
        format == "dot" ? render_dot(result.tree) : render_outline(result.tree);
    if (out_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + out_file + "'");
        out << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ReAcTree: goal-scoped agent trees over a household simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one task");
    std::string run_task_file;
    std::string run_policy;
    EngineFlags run_flags;
    StoreFlags run_store;
    std::string run_trace_out;
    bool run_outline = false;
    run->add_option("--task", run_task_file, "Task file")->required();
    run->add_option("--policy", run_policy, "scripted:<file> or remote")->required();
    add_engine_flags(run, run_flags);
    run->add_option("--em", run_store.path, "Episodic store to retrieve from, or 'none'")
        ->capture_default_str();
    run->add_option("--trace-out", run_trace_out, "Write the episode trace here");
    run->add_flag("--outline", run_outline, "Print the finished tree");

    auto* suite = app.add_subcommand("suite", "Run every task in a manifest");
    std::string suite_manifest;
    std::string suite_policy;
    EngineFlags suite_flags;
    StoreFlags suite_store;
    int suite_jobs = 1;
    std::string suite_trace_dir;
    std::string suite_report_out;
    std::vector<std::string> suite_tags;
    suite->add_option("--manifest", suite_manifest, "Manifest file")->required();
    suite->add_option("--policy", suite_policy, "scripted:<file> or remote")->required();
    add_engine_flags(suite, suite_flags);
    suite->add_option("--em", suite_store.path, "Episodic store to retrieve from, or 'none'")
        ->capture_default_str();
    suite->add_option("--jobs", suite_jobs, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    suite->add_option("--trace-dir", suite_trace_dir, "Write one trace file per task here");
    suite->add_option("--report-out", suite_report_out, "Write the suite report here");
    suite->add_option("--tag", suite_tags, "Extra report tag, key=value (repeatable)");

    auto* bootstrap = app.add_subcommand("bootstrap", "Build an episodic store");
    std::string boot_em_out;
    std::vector<std::string> boot_seed_files;
    std::string boot_manifest;
    std::string boot_policy;
    EngineFlags boot_flags;
    std::string boot_trace_dir;
    bootstrap->add_option("--em-out", boot_em_out, "Where to write the store")->required();
    bootstrap->add_option("--seed-file", boot_seed_files,
                          "Seed trajectory file (repeatable)");
    bootstrap->add_option("--manifest", boot_manifest, "Tasks to run and harvest");
    bootstrap->add_option("--policy", boot_policy, "scripted:<file> or remote");
    add_engine_flags(bootstrap, boot_flags);
    bootstrap->add_option("--trace-dir", boot_trace_dir, "Write one trace file per task here");

    auto* memory = app.add_subcommand("memory", "Episodic store utilities");
    memory->require_subcommand(1);
    auto* inspect = memory->add_subcommand("inspect", "Summarize a store file");
    std::string mem_path;
    std::string mem_goal;
    int mem_budget = 5000;
    std::uint64_t mem_seed = 0;
    inspect->add_option("--em", mem_path, "Store file")->required();
    inspect->add_option("--goal", mem_goal, "Preview retrieval for this goal");
    inspect->add_option("--budget", mem_budget, "Retrieval token budget")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    inspect->add_option("--seed", mem_seed, "Retrieval seed")->capture_default_str();

    auto* replay_cmd = app.add_subcommand("replay", "Validate and summarize a trace");
    std::string replay_trace;
    bool replay_outline = false;
    replay_cmd->add_option("--trace", replay_trace, "Trace file")->required();
    replay_cmd->add_flag("--outline", replay_outline, "Print the rebuilt tree");

    auto* render_cmd = app.add_subcommand("render", "Render a trace's tree");
    std::string render_trace;
    std::string render_format = "outline";
    std::string render_out;
    render_cmd->add_option("--trace", render_trace, "Trace file")->required();
    render_cmd->add_option("--format", render_format, "outline or dot")
        ->check(CLI::IsMember({"outline", "dot"}))
        ->capture_default_str();
    render_cmd->add_option("--out", render_out, "Write here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(run_task_file, run_policy, run_flags, run_store, run_trace_out,
                           run_outline);
        }
        if (suite->parsed()) {
            return cmd_suite(suite_manifest, suite_policy, suite_flags, suite_store, suite_jobs,
                             suite_trace_dir, suite_report_out, suite_tags);
        }
        if (bootstrap->parsed()) {
            return cmd_bootstrap(boot_em_out, boot_seed_files, boot_manifest, boot_policy,
                                 boot_flags, boot_trace_dir);
        }
        if (memory->parsed()) {
            return cmd_memory_inspect(mem_path, mem_goal, mem_budget, mem_seed);
        }
        if (replay_cmd->parsed()) return cmd_replay(replay_trace, replay_outline);
        if (render_cmd->parsed()) return cmd_render(render_trace, render_format, render_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
