#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reactree/tree.hpp"

namespace reactree {

// One structured episode event. Kinds: node-created, decision, observation,
// expansion, node-result, episode-result. Every event snapshots the decision
// budget, so replay can audit spending without re-running anything.
struct TraceEvent {
    std::uint64_t seq = 0;
    std::string kind;
    int budget_used = 0;
    int budget_cap = 0;
    nlohmann::json payload;
};

// Ordered event log of one episode. Serialized as JSON lines with
// alphabetically ordered keys, so equal runs produce byte-equal files.
class EpisodeTrace {
public:
    void emit(std::string kind, nlohmann::json payload, const DecisionBudget& budget);

    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    std::string to_jsonl() const;
    static EpisodeTrace from_jsonl(const std::string& text);

    void save(const std::filesystem::path& file) const;
    static EpisodeTrace load(const std::filesystem::path& file);

private:
    std::vector<TraceEvent> events_;
};

struct ReplayResult {
    Tree tree;
    nlohmann::json episode;  // payload of the closing episode-result event
};

// Rebuilds the episode tree purely from the trace and validates its
// bookkeeping: contiguous sequence numbers, a constant cap, monotone budget
// within the cap, structurally consistent node events, and a single closing
// episode-result. Throws TraceError on any violation.
ReplayResult replay(const EpisodeTrace& trace);

}  // namespace reactree
