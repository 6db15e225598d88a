#include "reactree/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "reactree/errors.hpp"
#include "reactree/tokens.hpp"

namespace reactree {

namespace {

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
    if (spec.kind == PolicySpec::Kind::Scripted) {
        if (!spec.transcript) throw ConfigError("scripted policy needs a transcript");
        return std::make_unique<ScriptedPolicy>(spec.transcript);
    }
    return std::make_unique<RemotePolicy>(spec.remote);
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

Experience parse_seed_record(const std::vector<std::string>& lines, const std::string& where,
                             const EmbeddingProvider& provider) {
    std::size_t first = 0;
    while (first < lines.size() && is_blank(lines[first])) ++first;
    std::size_t last = lines.size();
    while (last > first && is_blank(lines[last - 1])) --last;
    if (first >= last) throw StoreError(where + ": empty record");

    constexpr std::string_view kTermination = "@termination: ";
    if (lines[first].rfind(kTermination, 0) != 0) {
        throw StoreError(where + ": record must start with '@termination: <state>'");
    }
    Experience experience;
    try {
        experience.termination =
            termination_from_string(lines[first].substr(kTermination.size()));
    } catch (const StoreError& e) {
        throw StoreError(where + ": " + e.what());
    }
    ++first;
    while (first < last && is_blank(lines[first])) ++first;
    if (first >= last) throw StoreError(where + ": record has no trajectory");

    constexpr std::string_view kGoal = "Your task is to: ";
    if (lines[first].rfind(kGoal, 0) != 0) {
        throw StoreError(where + ": trajectory must start with '" + std::string(kGoal) + "'");
    }
    const std::string goal = lines[first].substr(kGoal.size());
    if (goal.empty()) throw StoreError(where + ": empty goal line");

    std::string trajectory;
    for (std::size_t i = first; i < last; ++i) {
        if (i > first) trajectory += '\n';
        trajectory += lines[i];
    }
    experience.trajectory = std::move(trajectory);
    experience.token_count = estimate_tokens(experience.trajectory);
    experience.embedding = provider.embed(goal);
    return experience;
}

}  // namespace

PolicySpec PolicySpec::scripted(std::shared_ptr<const Transcript> transcript) {
    PolicySpec spec;
    spec.kind = Kind::Scripted;
    spec.transcript = std::move(transcript);
    return spec;
}

PolicySpec PolicySpec::remote_endpoint(RemoteConfig config) {
    PolicySpec spec;
    spec.kind = Kind::Remote;
    spec.remote = std::move(config);
    return spec;
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& task_id) {
    std::uint64_t h = 14695981039346656037ULL;
    const auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(base >> (8 * i)));
    for (const char c : task_id) mix(static_cast<unsigned char>(c));
    return h;
}

RunOutcome run_task(const TaskSpec& task, const PolicySpec& policy, const SuiteConfig& config) {
    Simulator sim(load_world(task.world_path));
    const auto agent = make_policy(policy);

    EngineConfig engine_config = config.engine;
    engine_config.seed = derive_seed(config.engine.seed, task.id);
    Engine engine(*agent, sim, engine_config);
    if (config.store) engine.attach_memory(config.store, config.embedder);

    EpisodeTrace trace;
    const bool tracing = !config.trace_dir.empty();
    if (tracing) engine.attach_trace(&trace);

    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome = engine.run_episode(task);
    outcome.result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    if (tracing) {
        std::filesystem::create_directories(config.trace_dir);
        trace.save(config.trace_dir / (task.id + ".trace.jsonl"));
    }
    return outcome;
}

SuiteReport run_suite(const std::vector<TaskSpec>& tasks, const PolicySpec& policy,
                      const SuiteConfig& config) {
    if (config.jobs < 1) throw ConfigError("jobs must be at least 1");
    if (!config.trace_dir.empty()) std::filesystem::create_directories(config.trace_dir);

    std::vector<EpisodeResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto worker = [&] {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= tasks.size()) break;
            try {
                results[index] = run_task(tasks[index], policy, config).result;
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    const auto thread_count = std::min(static_cast<std::size_t>(config.jobs), tasks.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (std::size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return summarize(std::move(results), config.tags);
}

std::vector<Experience> load_seed_trajectories(const std::filesystem::path& file,
                                               const EmbeddingProvider& provider) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw StoreError("cannot read seed file '" + file.string() + "'");

    std::vector<Experience> experiences;
    std::vector<std::string> record;
    int record_no = 1;
    bool record_has_content = false;

    const auto flush = [&] {
        if (record_has_content) {
            const std::string where =
                "seed file '" + file.string() + "' record " + std::to_string(record_no);
            experiences.push_back(parse_seed_record(record, where, provider));
        }
        record.clear();
        record_has_content = false;
        ++record_no;
    };

    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(std::move(line));
        if (line == "---") {
            flush();
            continue;
        }
        if (!is_blank(line)) record_has_content = true;
        record.push_back(std::move(line));
    }
    flush();
    return experiences;
}

BootstrapStats bootstrap_store(const std::vector<TaskSpec>& tasks, const PolicySpec& policy,
                               const SuiteConfig& config, EpisodicStore& store,
                               const EmbeddingProvider& provider) {
    BootstrapStats stats;
    SuiteConfig episode_config = config;
    episode_config.store = &store;
    episode_config.embedder = &provider;
    for (const auto& task : tasks) {
        RunOutcome outcome = run_task(task, policy, episode_config);
        stats.episodes += 1;
        stats.successes += outcome.result.success ? 1 : 0;
        stats.harvested += harvest(outcome.tree, outcome.result.success, store, provider);
    }
    return stats;
}

}  // namespace reactree
