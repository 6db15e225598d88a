#include "reactree/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "reactree/errors.hpp"
#include "reactree/tokens.hpp"

namespace reactree {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

double round_similarity(double x) {
    return static_cast<double>(std::llround(x * 1e9)) / 1e9;
}

}  // namespace

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Success: return "success";
        case Termination::Failure: return "failure";
        case Termination::Expand: return "expand";
    }
    return "success";
}

Termination termination_from_string(std::string_view name) {
    if (name == "success") return Termination::Success;
    if (name == "failure") return Termination::Failure;
    if (name == "expand") return Termination::Expand;
    throw StoreError("unknown termination '" + std::string(name) + "'");
}

std::vector<double> HashedBowEmbedder::embed(std::string_view text) const {
    std::vector<double> v(kDimension, 0.0);
    std::uint64_t hash = kFnvOffset;
    bool in_token = false;
    double norm_sq = 0.0;
    auto flush = [&] {
        if (!in_token) return;
        auto& slot = v[hash % kDimension];
        norm_sq += 2 * slot + 1;  // (s+1)^2 - s^2
        slot += 1.0;
        hash = kFnvOffset;
        in_token = false;
    };
    for (const char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            hash ^= static_cast<std::uint64_t>(std::tolower(c));
            hash *= kFnvPrime;
            in_token = true;
        } else {
            flush();
        }
    }
    flush();
    if (norm_sq > 0.0) {
        const double norm = std::sqrt(norm_sq);
        for (auto& x : v) x /= norm;
    }
    return v;
}

EpisodicStore::EpisodicStore(std::string embedder_id, int dimension)
    : embedder_id_(std::move(embedder_id)), dimension_(dimension) {
    if (embedder_id_.empty()) throw StoreError("store needs an embedder id");
    if (dimension_ <= 0) throw StoreError("store dimension must be positive");
}

void EpisodicStore::add(Experience experience) {
    if (static_cast<int>(experience.embedding.size()) != dimension_) {
        throw StoreError("experience embedding dimension " +
                         std::to_string(experience.embedding.size()) + " does not match store " +
                         std::to_string(dimension_));
    }
    experiences_.push_back(std::move(experience));
}

void EpisodicStore::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw StoreError("cannot write store file '" + file.string() + "'");
    const json header = {{"format", "reactree-episodic-store"},
                         {"version", 1},
                         {"embedder", embedder_id_},
                         {"dimension", dimension_}};
    out << header.dump() << '\n';
    for (const auto& e : experiences_) {
        const json record = {{"trajectory", e.trajectory},
                             {"termination", std::string(to_string(e.termination))},
                             {"token_count", e.token_count},
                             {"embedding", e.embedding}};
        out << record.dump() << '\n';
    }
}

EpisodicStore EpisodicStore::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw StoreError("cannot open store file '" + file.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw StoreError("store file '" + file.string() + "' is empty");
    try {
        const json header = json::parse(line);
        if (header.value("format", "") != "reactree-episodic-store") {
            throw StoreError("store file '" + file.string() + "' has an unknown format");
        }
        if (header.value("version", 0) != 1) {
            throw StoreError("store file '" + file.string() + "' has unsupported version " +
                             std::to_string(header.value("version", 0)));
        }
        EpisodicStore store(header.at("embedder").get<std::string>(),
                            header.at("dimension").get<int>());
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const json record = json::parse(line);
            Experience e;
            e.trajectory = record.at("trajectory").get<std::string>();
            e.termination = termination_from_string(record.at("termination").get<std::string>());
            e.token_count = record.at("token_count").get<int>();
            e.embedding = record.at("embedding").get<std::vector<double>>();
            store.add(std::move(e));
        }
        return store;
    } catch (const json::exception& e) {
        throw StoreError("store file '" + file.string() + "': " + e.what());
    }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ConfigError("cosine similarity needs equal dimensions, got " +
                          std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

RetrievalResult retrieve(const EpisodicStore& store, const EmbeddingProvider& provider,
                         const std::string& goal, int budget_tokens, std::uint64_t seed) {
    if (provider.name() != store.embedder_id()) {
        throw ConfigError("store was built with embedder '" + store.embedder_id() +
                          "' but the session uses '" + provider.name() + "'");
    }
    if (budget_tokens < 0) throw ConfigError("retrieval budget must be non-negative");

    const auto goal_vec = provider.embed(goal);
    const auto& all = store.experiences();
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        ranked.emplace_back(round_similarity(cosine_similarity(goal_vec, all[i].embedding)), i);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    // Hand-rolled Fisher-Yates so the draw sequence is identical across
    // standard library implementations.
    std::mt19937_64 rng(seed);
    auto shuffle_bucket = [&rng](std::vector<std::size_t>& bucket) {
        for (std::size_t i = 0; i + 1 < bucket.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(rng() % (bucket.size() - i));
            std::swap(bucket[i], bucket[j]);
        }
    };

    std::vector<std::size_t> order;
    order.reserve(all.size());
    std::size_t group_start = 0;
    while (group_start < ranked.size()) {
        std::size_t group_end = group_start + 1;
        while (group_end < ranked.size() && ranked[group_end].first == ranked[group_start].first) {
            ++group_end;
        }
        if (group_end - group_start == 1) {
            order.push_back(ranked[group_start].second);
        } else {
            std::vector<std::size_t> buckets[3];
            for (std::size_t k = group_start; k < group_end; ++k) {
                const auto idx = ranked[k].second;
                buckets[static_cast<int>(all[idx].termination)].push_back(idx);
            }
            for (auto& bucket : buckets) shuffle_bucket(bucket);
            std::size_t cursor[3] = {0, 0, 0};
            std::size_t remaining = group_end - group_start;
            while (remaining > 0) {
                for (int s = 0; s < 3; ++s) {
                    if (cursor[s] < buckets[s].size()) {
                        order.push_back(buckets[s][cursor[s]++]);
                        --remaining;
                    }
                }
            }
        }
        group_start = group_end;
    }

    RetrievalResult result;
    for (const auto idx : order) {
        const int cost = all[idx].token_count;
        if (result.total_tokens + cost > budget_tokens) break;
        result.total_tokens += cost;
        result.indices.push_back(idx);
    }
    return result;
}

int harvest(const Tree& tree, bool task_succeeded, EpisodicStore& store,
            const EmbeddingProvider& provider) {
    if (!task_succeeded) return 0;
    if (provider.name() != store.embedder_id()) {
        throw ConfigError("store was built with embedder '" + store.embedder_id() +
                          "' but the session uses '" + provider.name() + "'");
    }
    int appended = 0;
    for (const auto id : tree.agent_ids()) {
        const auto& node = tree.agent(id);
        if (!node.executed || node.status == NodeStatus::Running) continue;
        Experience e;
        e.trajectory = node.trajectory_text();
        if (node.child_flow) {
            e.termination = Termination::Expand;
        } else {
            e.termination = node.status == NodeStatus::Success ? Termination::Success
                                                               : Termination::Failure;
        }
        e.token_count = estimate_tokens(e.trajectory);
        e.embedding = provider.embed(node.subgoal);
        store.add(std::move(e));
        ++appended;
    }
    return appended;
}

void WorkingMemory::update(std::span<const Sighting> sightings, int step) {
    for (const auto& s : sightings) {
        by_class_[s.object_class][s.object_id] = {s.room, s.receptacle, step};
    }
}

std::string WorkingMemory::recall(const std::string& object_class) const {
    const auto it = by_class_.find(object_class);
    if (it == by_class_.end() || it->second.empty()) {
        return "You have not seen " + object_class + " before.";
    }
    std::string out;
    for (const auto& [id, record] : it->second) {
        if (!out.empty()) out += ' ';
        out += "You saw " + object_class + " " + std::to_string(id);
        if (!record.receptacle.empty()) out += " near " + record.receptacle;
        out += " in " + record.room + ".";
    }
    return out;
}

}  // namespace reactree
