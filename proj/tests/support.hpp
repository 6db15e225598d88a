#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "reactree/engine.hpp"
#include "reactree/memory.hpp"
#include "reactree/policy.hpp"
#include "reactree/sim.hpp"
#include "reactree/world_io.hpp"

namespace testsupport {

using namespace reactree;

inline std::filesystem::path data_path(const std::string& rel) {
    return std::filesystem::path(REACTREE_DATA_DIR) / rel;
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::error_code ec;
        const auto base = std::filesystem::temp_directory_path(ec);
        path = base / ("reactree-test-" + std::to_string(counter.fetch_add(1)) + "-" +
                       std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Two rooms, a plain table, a closed fridge, and a switchable stove: enough
// surface for every skill except slice.
inline WorldState tiny_world() {
    WorldState w;
    w.name = "tiny";
    w.profile = "household";
    w.rooms = {{"kitchen", 1}, {"pantry", 1}};

    Receptacle table;
    table.cls = "kitchen table";
    table.id = 1;
    table.room_index = 0;
    Receptacle fridge;
    fridge.cls = "fridge";
    fridge.id = 1;
    fridge.room_index = 0;
    fridge.openable = true;
    Receptacle stove;
    stove.cls = "stove";
    stove.id = 1;
    stove.room_index = 0;
    stove.switchable = true;
    Receptacle crate;
    crate.cls = "crate";
    crate.id = 1;
    crate.room_index = 1;
    crate.openable = true;
    w.receptacles = {table, fridge, stove, crate};

    Movable apple;
    apple.cls = "apple";
    apple.id = 1;
    apple.placement = Placement::On;
    apple.where = 0;
    Movable juice;
    juice.cls = "juice";
    juice.id = 1;
    juice.placement = Placement::Inside;
    juice.where = 1;
    Movable ball;
    ball.cls = "ball";
    ball.id = 1;
    ball.placement = Placement::Floor;
    ball.where = 1;
    w.movables = {apple, juice, ball};
    w.agent_room = 0;
    return w;
}

inline TaskSpec tiny_task(const std::string& goal_key = "inside_apple_fridge") {
    TaskSpec task;
    task.id = "tiny";
    task.type = "synthetic";
    task.instruction = "Put the apple in the fridge.";
    task.goal = parse_goal({{goal_key, 1}});
    return task;
}

struct EpisodeRun {
    RunOutcome outcome;
    WorldState final_state;
    int requests = 0;
};

inline EpisodeRun run_script(const std::string& script, const TaskSpec& task,
                             const WorldState& world, EngineConfig config = {},
                             EpisodeTrace* trace = nullptr, const EpisodicStore* store = nullptr,
                             const EmbeddingProvider* embedder = nullptr) {
    auto transcript = std::make_shared<const Transcript>(Transcript::parse(script));
    ScriptedPolicy policy(transcript);
    Simulator sim(world);
    Engine engine(policy, sim, config);
    if (trace) engine.attach_trace(trace);
    if (store) engine.attach_memory(store, embedder);
    EpisodeRun run{engine.run_episode(task), sim.state(), engine.requests()};
    return run;
}

// Embedder whose vectors are dictated by the test, for exact control of
// similarities. Unknown texts embed to zero.
class VecEmbedder final : public EmbeddingProvider {
public:
    VecEmbedder(std::string name, int dim) : name_(std::move(name)), dim_(dim) {}

    std::string name() const override { return name_; }
    int dimension() const override { return dim_; }
    std::vector<double> embed(std::string_view text) const override {
        const auto it = mapping.find(std::string(text));
        if (it != mapping.end()) return it->second;
        return std::vector<double>(static_cast<std::size_t>(dim_), 0.0);
    }

    std::map<std::string, std::vector<double>> mapping;

private:
    std::string name_;
    int dim_;
};

inline std::vector<double> random_unit_vector(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v) {
            x = gauss(rng);
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

// Reference retrieval: rank by similarity rounded to 9 decimals, order tie
// groups by a seeded per-termination round-robin, then take the prefix that
// fits the budget, stopping at the first experience that does not.
inline std::vector<std::size_t> oracle_retrieve(const std::vector<Experience>& all,
                                                const std::vector<double>& goal_vec,
                                                int budget_tokens, std::uint64_t seed,
                                                int* total_tokens = nullptr) {
    auto rounded_key = [&](const Experience& e) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < goal_vec.size(); ++i) {
            dot += goal_vec[i] * e.embedding[i];
            na += goal_vec[i] * goal_vec[i];
            nb += e.embedding[i] * e.embedding[i];
        }
        const double sim = (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
        return std::llround(sim * 1e9);
    };

    std::vector<std::pair<long long, std::size_t>> ranked;
    ranked.reserve(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) ranked.emplace_back(rounded_key(all[i]), i);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order;
    std::size_t start = 0;
    while (start < ranked.size()) {
        std::size_t end = start + 1;
        while (end < ranked.size() && ranked[end].first == ranked[start].first) ++end;
        if (end - start == 1) {
            order.push_back(ranked[start].second);
        } else {
            std::vector<std::size_t> by_state[3];
            for (std::size_t k = start; k < end; ++k) {
                const auto idx = ranked[k].second;
                by_state[static_cast<int>(all[idx].termination)].push_back(idx);
            }
            for (auto& bucket : by_state) {
                for (std::size_t i = 0; i + 1 < bucket.size(); ++i) {
                    const auto j = i + static_cast<std::size_t>(rng() % (bucket.size() - i));
                    std::swap(bucket[i], bucket[j]);
                }
            }
            std::size_t cursor[3] = {0, 0, 0};
            std::size_t left = end - start;
            while (left > 0) {
                for (int s = 0; s < 3; ++s) {
                    if (cursor[s] < by_state[s].size()) {
                        order.push_back(by_state[s][cursor[s]++]);
                        --left;
                    }
                }
            }
        }
        start = end;
    }

    std::vector<std::size_t> picked;
    int used = 0;
    for (const auto idx : order) {
        if (used + all[idx].token_count > budget_tokens) break;
        used += all[idx].token_count;
        picked.push_back(idx);
    }
    if (total_tokens) *total_tokens = used;
    return picked;
}

// Randomized store with deliberate similarity ties: experiences reuse a small
// pool of cluster vectors, so whole clusters share one rounded similarity.
inline std::vector<Experience> make_random_store(std::mt19937_64& rng, int max_size, int dim,
                                                 std::vector<double>* goal_vec) {
    const int clusters = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<double>> pool;
    pool.reserve(static_cast<std::size_t>(clusters));
    for (int c = 0; c < clusters; ++c) pool.push_back(random_unit_vector(rng, dim));

    const int count = static_cast<int>(rng() % static_cast<std::uint64_t>(max_size + 1));
    std::vector<Experience> all;
    all.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Experience e;
        e.trajectory = "fixture " + std::to_string(i);
        e.termination = static_cast<Termination>(rng() % 3);
        e.token_count = 50 + static_cast<int>(rng() % 851);
        e.embedding = pool[rng() % pool.size()];
        all.push_back(std::move(e));
    }
    *goal_vec = (rng() % 2 == 0 && !pool.empty()) ? pool[rng() % pool.size()]
                                                  : random_unit_vector(rng, dim);
    return all;
}

inline std::string state_signature(const WorldState& s) {
    std::string sig = s.profile + "|room=" + std::to_string(s.agent_room);
    sig += "|near=" + (s.agent_near ? std::to_string(*s.agent_near) : std::string("-"));
    sig += "|held=" + (s.agent_held ? std::to_string(*s.agent_held) : std::string("-"));
    for (const auto& r : s.receptacles) {
        sig += "|R:" + r.name() + "@" + std::to_string(r.room_index);
        if (r.openable) sig += r.is_open ? ":open" : ":closed";
        if (r.switchable) sig += r.is_on ? ":on" : ":off";
    }
    for (const auto& m : s.movables) {
        sig += "|M:" + m.name() + ":" + std::to_string(static_cast<int>(m.placement)) + ":" +
               std::to_string(m.where);
        if (m.sliceable) sig += ":sliceable";
    }
    return sig;
}

inline bool check_world_invariants(const WorldState& s, std::string& why) {
    std::set<std::pair<std::string, int>> names;
    int held_count = 0;
    for (std::size_t i = 0; i < s.movables.size(); ++i) {
        const auto& m = s.movables[i];
        if (!names.insert({m.cls, m.id}).second) {
            why = "duplicate movable " + m.name();
            return false;
        }
        switch (m.placement) {
            case Placement::Floor:
                if (m.where < 0 || m.where >= static_cast<int>(s.rooms.size())) {
                    why = m.name() + " lies in a room out of range";
                    return false;
                }
                break;
            case Placement::On:
            case Placement::Inside:
                if (m.where < 0 || m.where >= static_cast<int>(s.receptacles.size())) {
                    why = m.name() + " sits on a receptacle out of range";
                    return false;
                }
                if (m.placement == Placement::Inside && !s.receptacles[m.where].openable) {
                    why = m.name() + " is inside a receptacle that cannot open";
                    return false;
                }
                break;
            case Placement::Hand:
                ++held_count;
                if (!s.agent_held || *s.agent_held != static_cast<int>(i)) {
                    why = m.name() + " is in hand but agent_held disagrees";
                    return false;
                }
                break;
        }
    }
    if (s.agent_held) {
        if (*s.agent_held < 0 || *s.agent_held >= static_cast<int>(s.movables.size()) ||
            s.movables[static_cast<std::size_t>(*s.agent_held)].placement != Placement::Hand) {
            why = "agent_held does not point at a held object";
            return false;
        }
        if (held_count != 1) {
            why = "hand holds more than one object";
            return false;
        }
    } else if (held_count != 0) {
        why = "held object without agent_held";
        return false;
    }
    if (s.agent_room < 0 || s.agent_room >= static_cast<int>(s.rooms.size())) {
        why = "agent room out of range";
        return false;
    }
    if (s.agent_near) {
        if (*s.agent_near < 0 || *s.agent_near >= static_cast<int>(s.receptacles.size())) {
            why = "agent_near out of range";
            return false;
        }
        if (s.receptacles[static_cast<std::size_t>(*s.agent_near)].room_index != s.agent_room) {
            why = "agent is near a receptacle outside the current room";
            return false;
        }
    }
    return true;
}

inline bool sighting_ok(const WorldState& s, const Sighting& g, std::string& why) {
    for (std::size_t i = 0; i < s.movables.size(); ++i) {
        const auto& m = s.movables[i];
        if (m.cls != g.object_class || m.id != g.object_id) continue;
        if (m.placement == Placement::Hand) {
            why = m.name() + " was reported while held";
            return false;
        }
        if (m.placement == Placement::Floor) {
            if (!g.receptacle.empty()) {
                why = m.name() + " is on the floor but was reported near a receptacle";
                return false;
            }
            if (s.rooms[static_cast<std::size_t>(m.where)].name() != g.room) {
                why = m.name() + " was reported in the wrong room";
                return false;
            }
            return true;
        }
        const auto& r = s.receptacles[static_cast<std::size_t>(m.where)];
        if (m.placement == Placement::Inside && !r.is_open) {
            why = m.name() + " was reported inside a closed " + r.name();
            return false;
        }
        if (g.receptacle != r.name()) {
            why = m.name() + " was reported near the wrong receptacle";
            return false;
        }
        if (s.rooms[static_cast<std::size_t>(r.room_index)].name() != g.room) {
            why = m.name() + " was reported in the wrong room";
            return false;
        }
        return true;
    }
    why = "sighting of unknown object " + g.object_class + " " + std::to_string(g.object_id);
    return false;
}

inline WorldState make_random_world(std::mt19937_64& rng) {
    auto pick = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    WorldState w;
    w.name = "fuzz";
    w.profile = rng() % 3 == 0 ? "extended" : "household";

    const std::vector<std::string> room_pool = {"alcove", "cellar", "den", "hall"};
    const int nrooms = pick(1, 4);
    for (int i = 0; i < nrooms; ++i) w.rooms.push_back({room_pool[static_cast<std::size_t>(i)], 1});

    const std::vector<std::string> recep_pool = {"bench",  "chest", "cooler",
                                                 "locker", "shelf", "stove"};
    std::map<std::string, int> recep_ids;
    const int nreceps = pick(2, 8);
    for (int i = 0; i < nreceps; ++i) {
        Receptacle r;
        r.cls = recep_pool[rng() % recep_pool.size()];
        r.id = ++recep_ids[r.cls];
        r.room_index = pick(0, nrooms - 1);
        r.openable = rng() % 2 == 0;
        r.is_open = r.openable && rng() % 2 == 0;
        r.switchable = rng() % 3 == 0;
        r.is_on = r.switchable && rng() % 4 == 0;
        w.receptacles.push_back(r);
    }

    const std::vector<std::string> mov_pool = {"cup", "fig", "gem", "pan", "rock", "toy"};
    std::map<std::string, int> mov_ids;
    const int nmovs = pick(3, 12);
    for (int i = 0; i < nmovs; ++i) {
        Movable m;
        m.cls = mov_pool[rng() % mov_pool.size()];
        m.id = ++mov_ids[m.cls];
        const int spot = pick(0, 2);
        if (spot == 0) {
            m.placement = Placement::Floor;
            m.where = pick(0, nrooms - 1);
        } else {
            m.where = pick(0, nreceps - 1);
            m.placement = spot == 1 && w.receptacles[static_cast<std::size_t>(m.where)].openable
                              ? Placement::Inside
                              : Placement::On;
        }
        m.sliceable = rng() % 5 == 0;
        w.movables.push_back(m);
    }
    if (w.profile == "extended" && rng() % 2 == 0) {
        Movable knife;
        knife.cls = "cutlery knife";
        knife.id = 1;
        knife.placement = Placement::Floor;
        knife.where = pick(0, nrooms - 1);
        w.movables.push_back(knife);
    }
    w.agent_room = pick(0, nrooms - 1);
    return w;
}

// One fuzz episode; returns a description of the first violated invariant.
inline std::optional<std::string> run_fuzz_episode(std::uint64_t seed, int steps) {
    std::mt19937_64 rng(seed);
    const WorldState world = make_random_world(rng);
    Simulator sim(world);
    sim.reset();

    std::string why;
    if (!check_world_invariants(sim.state(), why)) return "seed " + std::to_string(seed) +
                                                          " initial state: " + why;

    const SkillGrammar& grammar = sim.grammar();
    auto random_target = [&rng, &sim]() -> std::string {
        const WorldState& s = sim.state();
        std::vector<std::string> candidates = {"phantom 9", "gem 99", "cup", "bench", ""};
        for (const auto& room : s.rooms) candidates.push_back(room.name());
        for (const auto& r : s.receptacles) candidates.push_back(r.name());
        for (const auto& m : s.movables) candidates.push_back(m.name());
        return candidates[rng() % candidates.size()];
    };

    for (int t = 0; t < steps; ++t) {
        const std::string before = state_signature(sim.state());
        std::string verb;
        std::string argument;
        bool from_menu = false;
        const auto menu = sim.available_skills();
        if (!menu.empty() && rng() % 100 < 65) {
            const auto& command = menu[rng() % menu.size()];
            split_command(command, grammar, verb, argument);
            from_menu = true;
        } else {
            verb = grammar.action_verbs[rng() % grammar.action_verbs.size()];
            argument = random_target();
        }

        const Observation obs = sim.step({verb, argument});
        const std::string at = "seed " + std::to_string(seed) + " step " + std::to_string(t) +
                               " '" + verb + (argument.empty() ? "" : " " + argument) + "': ";
        if (obs.error) {
            if (from_menu) return at + "available skill errored: " + obs.text;
            if (obs.text.rfind("Action is not executable, since ", 0) != 0) {
                return at + "malformed error text: " + obs.text;
            }
            if (!obs.sightings.empty()) return at + "error step reported sightings";
            if (state_signature(sim.state()) != before) return at + "error step mutated the state";
        }
        if (!check_world_invariants(sim.state(), why)) return at + why;
        for (const auto& g : obs.sightings) {
            if (!sighting_ok(sim.state(), g, why)) return at + why;
        }
    }
    return std::nullopt;
}

}  // namespace testsupport
