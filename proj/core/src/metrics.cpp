#include "reactree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

using nlohmann::json;

double mean_of(std::span<const int> values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (const int v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sd_of(std::span<const int> values, double mean) {
    if (values.empty()) return 0.0;
    double sum_sq = 0.0;
    for (const int v : values) {
        const double d = v - mean;
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq / static_cast<double>(values.size()));
}

json episode_to_json(const EpisodeResult& e) {
    return {{"task", e.task_id},
            {"type", e.task_type},
            {"mode", std::string(to_string(e.mode))},
            {"seed", e.seed},
            {"success", e.success},
            {"ssr", e.ssr},
            {"decisions", e.decisions_used},
            {"budget_cap", e.budget_cap},
            {"root_status", std::string(to_string(e.root_status))},
            {"tokens", token_stats_to_json(e.tokens)}};
}

EpisodeResult episode_from_json(const json& doc) {
    EpisodeResult e;
    e.task_id = doc.at("task").get<std::string>();
    e.task_type = doc.at("type").get<std::string>();
    e.mode = mode_from_string(doc.at("mode").get<std::string>());
    e.seed = doc.at("seed").get<std::uint64_t>();
    e.success = doc.at("success").get<bool>();
    e.ssr = doc.at("ssr").get<double>();
    e.decisions_used = doc.at("decisions").get<int>();
    e.budget_cap = doc.at("budget_cap").get<int>();
    e.root_status = status_from_string(doc.at("root_status").get<std::string>());
    e.tokens = token_stats_from_json(doc.at("tokens"));
    return e;
}

}  // namespace

nlohmann::json token_stats_to_json(const TokenStats& stats) {
    return {{"decisions", stats.decisions},     {"max_input", stats.max_input},
            {"mean_input", stats.mean_input},   {"sd_input", stats.sd_input},
            {"mean_output", stats.mean_output}, {"sd_output", stats.sd_output}};
}

TokenStats token_stats_from_json(const nlohmann::json& doc) {
    TokenStats stats;
    stats.decisions = doc.at("decisions").get<int>();
    stats.max_input = doc.at("max_input").get<int>();
    stats.mean_input = doc.at("mean_input").get<double>();
    stats.sd_input = doc.at("sd_input").get<double>();
    stats.mean_output = doc.at("mean_output").get<double>();
    stats.sd_output = doc.at("sd_output").get<double>();
    return stats;
}

TokenStats compute_token_stats(std::span<const int> inputs, std::span<const int> outputs) {
    TokenStats stats;
    stats.decisions = static_cast<int>(inputs.size());
    if (!inputs.empty()) stats.max_input = *std::max_element(inputs.begin(), inputs.end());
    stats.mean_input = mean_of(inputs);
    stats.sd_input = sd_of(inputs, stats.mean_input);
    stats.mean_output = mean_of(outputs);
    stats.sd_output = sd_of(outputs, stats.mean_output);
    return stats;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

SuiteReport summarize(std::vector<EpisodeResult> episodes,
                      std::map<std::string, std::string> tags) {
    SuiteReport report;
    report.episodes = std::move(episodes);
    report.tags = std::move(tags);

    int successes = 0;
    double ssr_sum = 0.0;
    for (const auto& e : report.episodes) {
        auto& bucket = report.by_type[e.task_type];
        bucket.tasks += 1;
        bucket.successes += e.success ? 1 : 0;
        bucket.ssr += e.ssr;
        successes += e.success ? 1 : 0;
        ssr_sum += e.ssr;
    }
    const auto n = static_cast<double>(report.episodes.size());
    if (!report.episodes.empty()) {
        report.gsr = round2(100.0 * successes / n);
        report.ssr = round2(100.0 * ssr_sum / n);
    }
    for (auto& [type, bucket] : report.by_type) {
        bucket.ssr = round2(100.0 * bucket.ssr / bucket.tasks);
        bucket.gsr = round2(100.0 * bucket.successes / bucket.tasks);
    }
    return report;
}

nlohmann::json report_to_json(const SuiteReport& report) {
    json episodes = json::array();
    for (const auto& e : report.episodes) episodes.push_back(episode_to_json(e));
    json by_type = json::object();
    for (const auto& [type, bucket] : report.by_type) {
        by_type[type] = {{"tasks", bucket.tasks},
                         {"successes", bucket.successes},
                         {"gsr", bucket.gsr},
                         {"ssr", bucket.ssr}};
    }
    return {{"episodes", episodes},
            {"gsr", report.gsr},
            {"ssr", report.ssr},
            {"by_type", by_type},
            {"tags", report.tags}};
}

SuiteReport report_from_json(const nlohmann::json& doc) {
    SuiteReport report;
    try {
        for (const auto& entry : doc.at("episodes")) {
            report.episodes.push_back(episode_from_json(entry));
        }
        report.gsr = doc.at("gsr").get<double>();
        report.ssr = doc.at("ssr").get<double>();
        for (const auto& [type, entry] : doc.at("by_type").items()) {
            TypeBreakdown bucket;
            bucket.tasks = entry.at("tasks").get<int>();
            bucket.successes = entry.at("successes").get<int>();
            bucket.gsr = entry.at("gsr").get<double>();
            bucket.ssr = entry.at("ssr").get<double>();
            report.by_type[type] = bucket;
        }
        report.tags = doc.at("tags").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
    return report;
}

void save_report(const SuiteReport& report, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write report file '" + file.string() + "'");
    out << report_to_json(report).dump(2) << '\n';
    if (!out) throw ConfigError("failed writing report file '" + file.string() + "'");
}

SuiteReport load_report(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read report file '" + file.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("report file '" + file.string() + "': " + e.what());
    }
    return report_from_json(doc);
}

}  // namespace reactree
