#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reactree/sim.hpp"
#include "reactree/tree.hpp"

namespace reactree {

enum class Termination { Success, Failure, Expand };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view name);

// One stored episode fragment: the full node trajectory (goal line included),
// how the node ended, its token cost, and the embedding of its goal text.
struct Experience {
    std::string trajectory;
    Termination termination = Termination::Success;
    int token_count = 0;
    std::vector<double> embedding;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Deterministic hashed bag-of-words embedding: tokens are lowercased
// alphanumeric runs, each FNV-1a hashed into one of 256 buckets, counts
// L2-normalized. Any text with at least one token maps to a nonzero vector.
class HashedBowEmbedder final : public EmbeddingProvider {
public:
    static constexpr int kDimension = 256;

    std::string name() const override { return "hashed-bow-256-v1"; }
    int dimension() const override { return kDimension; }
    std::vector<double> embed(std::string_view text) const override;
};

// Append-only collection of experiences bound to one embedder.
class EpisodicStore {
public:
    EpisodicStore(std::string embedder_id, int dimension);

    void add(Experience experience);

    const std::vector<Experience>& experiences() const { return experiences_; }
    std::size_t size() const { return experiences_.size(); }
    const std::string& embedder_id() const { return embedder_id_; }
    int dimension() const { return dimension_; }

    // JSON-lines file with a header record; see save() for the layout.
    void save(const std::filesystem::path& file) const;
    static EpisodicStore load(const std::filesystem::path& file);

private:
    std::string embedder_id_;
    int dimension_;
    std::vector<Experience> experiences_;
};

// Cosine similarity of two equal-length vectors; zero vectors compare as 0.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct RetrievalResult {
    std::vector<std::size_t> indices;  // into store.experiences(), best first
    int total_tokens = 0;
};

// Ranks the store by cosine similarity to the goal (similarities compared
// after rounding to 9 decimals) and returns the longest prefix whose token
// counts fit the budget. Tied experiences are ordered by a seeded draw that
// round-robins across termination states (success, failure, expand) and is
// uniform within each state, so no single outcome dominates a tie.
RetrievalResult retrieve(const EpisodicStore& store, const EmbeddingProvider& provider,
                         const std::string& goal, int budget_tokens, std::uint64_t seed);

// Appends one experience per executed agent node of a finished episode, in
// node creation order. Harvesting only keeps episodes whose task goal was
// satisfied; otherwise nothing is stored and 0 is returned.
int harvest(const Tree& tree, bool task_succeeded, EpisodicStore& store,
            const EmbeddingProvider& provider);

// Per-episode blackboard mapping object classes to last-seen locations.
class WorkingMemory {
public:
    void update(std::span<const Sighting> sightings, int step);

    // "You saw juice 1 near fridge 2 in kitchen 1." per instance, id order,
    // or "You have not seen wine before." for unknown classes.
    std::string recall(const std::string& object_class) const;

    bool empty() const { return by_class_.empty(); }

private:
    struct Record {
        std::string room;
        std::string receptacle;
        int step = 0;
    };
    std::map<std::string, std::map<int, Record>> by_class_;
};

}  // namespace reactree
