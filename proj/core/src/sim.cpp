#include "reactree/sim.hpp"

#include <algorithm>
#include <cctype>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

// Aggregates entity names as "apple (1, 3), bowl (2)", alphabetical by
// class, ids ascending.
class ItemList {
public:
    void add(const std::string& cls, int id) { items_[cls].push_back(id); }

    bool empty() const { return items_.empty(); }

    std::string render() const {
        std::string out;
        for (const auto& [cls, ids] : items_) {
            auto sorted = ids;
            std::sort(sorted.begin(), sorted.end());
            if (!out.empty()) out += ", ";
            out += cls + " (";
            for (std::size_t i = 0; i < sorted.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(sorted[i]);
            }
            out += ")";
        }
        return out;
    }

private:
    std::map<std::string, std::vector<int>> items_;
};

void replace_all(std::string& text, const std::string& token, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

bool is_integer(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

std::string normalize_class(std::string_view cls) {
    std::string out;
    out.reserve(cls.size());
    for (const char c : cls) {
        if (c == ' ') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool parse_entity_name(std::string_view text, std::string& cls, int& id) {
    const auto space = text.rfind(' ');
    if (space == std::string_view::npos) return false;
    const auto suffix = text.substr(space + 1);
    if (!is_integer(suffix)) return false;
    cls.assign(text.substr(0, space));
    id = std::stoi(std::string(suffix));
    return !cls.empty();
}

GoalCondition parse_goal(const std::map<std::string, int>& predicates) {
    if (predicates.empty()) throw ConfigError("goal has no predicates");
    GoalCondition goal;
    for (const auto& [key, count] : predicates) {
        if (count <= 0) throw ConfigError("goal predicate '" + key + "' needs a positive count");
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= key.size()) {
            const auto sep = key.find('_', start);
            parts.push_back(key.substr(start, sep == std::string::npos ? sep : sep - start));
            if (sep == std::string::npos) break;
            start = sep + 1;
        }
        const auto& kind = parts.front();
        const bool binary = kind == "on" || kind == "inside";
        const bool unary = kind == "turnOn" || kind == "hold";
        if (!binary && !unary) throw ConfigError("unknown goal predicate kind in '" + key + "'");
        const std::size_t expected = binary ? 3 : 2;
        if (parts.size() != expected) throw ConfigError("malformed goal predicate '" + key + "'");
        for (std::size_t i = 1; i < parts.size(); ++i) {
            if (parts[i].empty()) throw ConfigError("malformed goal predicate '" + key + "'");
        }
        goal.predicates.emplace_back(key, count);
    }
    std::sort(goal.predicates.begin(), goal.predicates.end());
    return goal;
}

Simulator::Simulator(WorldState initial)
    : initial_(std::move(initial)), state_(initial_) {
    grammar_ = initial_.profile == "extended" ? SkillGrammar::extended(false)
                                              : SkillGrammar::household(false);
}

std::string Simulator::fill(const std::string& key, const std::string& fallback,
                            std::initializer_list<std::pair<std::string, std::string>> args) const {
    const auto it = state_.templates.find(key);
    std::string text = it != state_.templates.end() ? it->second : fallback;
    for (const auto& [name, value] : args) replace_all(text, "{" + name + "}", value);
    return text;
}

bool Simulator::movable_visible(const Movable& m) const {
    switch (m.placement) {
        case Placement::Hand:
            return true;
        case Placement::Floor:
            return m.where == state_.agent_room;
        case Placement::On: {
            const auto& r = state_.receptacles[m.where];
            return r.room_index == state_.agent_room;
        }
        case Placement::Inside: {
            const auto& r = state_.receptacles[m.where];
            return r.room_index == state_.agent_room && r.is_open;
        }
    }
    return false;
}

std::string Simulator::room_item_list(int room_index, std::vector<Sighting>* sightings) const {
    ItemList list;
    for (const auto& r : state_.receptacles) {
        if (r.room_index == room_index) list.add(r.cls, r.id);
    }
    const auto room_name = state_.rooms[room_index].name();
    for (const auto& m : state_.movables) {
        if (m.placement != Placement::Floor || m.where != room_index) continue;
        list.add(m.cls, m.id);
        if (sightings) sightings->push_back({m.cls, m.id, room_name, ""});
    }
    return list.empty() ? fill("empty_items", "nothing", {}) : list.render();
}

std::string Simulator::receptacle_item_list(int recep_index,
                                            std::vector<Sighting>* sightings) const {
    const auto& r = state_.receptacles[recep_index];
    ItemList list;
    list.add(r.cls, r.id);
    const auto room_name = state_.rooms[r.room_index].name();
    for (const auto& m : state_.movables) {
        const bool on_it = m.placement == Placement::On && m.where == recep_index;
        const bool in_it = m.placement == Placement::Inside && m.where == recep_index && r.is_open;
        if (!on_it && !in_it) continue;
        list.add(m.cls, m.id);
        if (sightings) sightings->push_back({m.cls, m.id, room_name, r.name()});
    }
    return list.render();
}

std::string Simulator::hold_suffix() const {
    if (!state_.agent_held) return "";
    const auto& held = state_.movables[*state_.agent_held];
    return fill("hold", " You hold {object} ({id}).",
                {{"object", held.cls}, {"id", std::to_string(held.id)}});
}

Observation Simulator::error_observation(const std::string& reason) const {
    Observation obs;
    obs.text = fill("error", "Action is not executable, since {reason}", {{"reason", reason}});
    obs.error = true;
    return obs;
}

Observation Simulator::reset() {
    state_ = initial_;
    return house_summary();
}

Observation Simulator::house_summary() const {
    Observation obs;
    ItemList rooms;
    for (const auto& room : state_.rooms) rooms.add(room.cls, room.id);
    const auto& here = state_.rooms[state_.agent_room];
    obs.text = fill("init",
                    "You are in the house, and there are {room_count} rooms: {rooms}. "
                    "You are in the middle of a {room} ({room_id}). "
                    "Looking quickly around the room, you see {items}.",
                    {{"room_count", std::to_string(state_.rooms.size())},
                     {"rooms", rooms.render()},
                     {"room", here.cls},
                     {"room_id", std::to_string(here.id)},
                     {"items", room_item_list(state_.agent_room, &obs.sightings)}});
    obs.text += hold_suffix();
    return obs;
}

namespace {

// Resolves "fridge 2" or a bare unique class name against a candidate set.
template <typename GetName>
std::optional<int> resolve(const std::string& argument, int count, GetName&& name_of) {
    std::string cls;
    int id = 0;
    if (parse_entity_name(argument, cls, id)) {
        for (int i = 0; i < count; ++i) {
            const auto [c, n] = name_of(i);
            if (c == cls && n == id) return i;
        }
        return std::nullopt;
    }
    std::optional<int> unique;
    for (int i = 0; i < count; ++i) {
        const auto [c, n] = name_of(i);
        if (c != argument) continue;
        if (unique) return std::nullopt;  // ambiguous
        unique = i;
    }
    return unique;
}

}  // namespace

Observation Simulator::do_go_to(const std::string& argument) {
    // Rooms first, then receptacles in the current room, then visible objects.
    const auto room = resolve(argument, static_cast<int>(state_.rooms.size()), [&](int i) {
        return std::pair<std::string, int>{state_.rooms[i].cls, state_.rooms[i].id};
    });
    if (room) {
        state_.agent_room = *room;
        state_.agent_near.reset();
        Observation obs;
        const auto& here = state_.rooms[*room];
        obs.text = fill("move",
                        "You move to the {room} ({room_id}). "
                        "Looking quickly around the room, you see {items}.",
                        {{"room", here.cls},
                         {"room_id", std::to_string(here.id)},
                         {"items", room_item_list(*room, &obs.sightings)}});
        obs.text += hold_suffix();
        return obs;
    }

    std::vector<int> local;
    for (int i = 0; i < static_cast<int>(state_.receptacles.size()); ++i) {
        if (state_.receptacles[i].room_index == state_.agent_room) local.push_back(i);
    }
    const auto recep = resolve(argument, static_cast<int>(local.size()), [&](int i) {
        const auto& r = state_.receptacles[local[i]];
        return std::pair<std::string, int>{r.cls, r.id};
    });
    auto arrive_at = [&](int recep_index) {
        state_.agent_near = recep_index;
        const auto& r = state_.receptacles[recep_index];
        Observation obs;
        obs.text = fill("arrive", "You arrive at the {receptacle} ({id}).",
                        {{"receptacle", r.cls}, {"id", std::to_string(r.id)}});
        if (r.openable) {
            obs.text += fill(r.is_open ? "arrive_open" : "arrive_closed",
                             r.is_open ? " The {receptacle} ({id}) is open."
                                       : " The {receptacle} ({id}) is closed.",
                             {{"receptacle", r.cls}, {"id", std::to_string(r.id)}});
        }
        obs.text += fill("see", " You see {items}",
                         {{"items", receptacle_item_list(recep_index, &obs.sightings)}});
        obs.text += hold_suffix();
        return obs;
    };
    if (recep) return arrive_at(local[*recep]);

    std::vector<int> seen;
    for (int i = 0; i < static_cast<int>(state_.movables.size()); ++i) {
        const auto& m = state_.movables[i];
        if (m.placement != Placement::Hand && movable_visible(m)) seen.push_back(i);
    }
    const auto target = resolve(argument, static_cast<int>(seen.size()), [&](int i) {
        const auto& m = state_.movables[seen[i]];
        return std::pair<std::string, int>{m.cls, m.id};
    });
    if (target) {
        const auto& m = state_.movables[seen[*target]];
        if (m.placement != Placement::Floor) return arrive_at(m.where);
        state_.agent_near.reset();
        Observation obs;
        obs.text = fill("arrive", "You arrive at the {receptacle} ({id}).",
                        {{"receptacle", m.cls}, {"id", std::to_string(m.id)}});
        ItemList list;
        list.add(m.cls, m.id);
        obs.text += fill("see", " You see {items}", {{"items", list.render()}});
        obs.sightings.push_back({m.cls, m.id, state_.rooms[state_.agent_room].name(), ""});
        obs.text += hold_suffix();
        return obs;
    }
    return error_observation("the agent cannot find " + argument);
}

Observation Simulator::do_pick_up(const std::string& argument) {
    if (state_.agent_held) return error_observation("the agent's hand is full");
    std::vector<int> seen;
    for (int i = 0; i < static_cast<int>(state_.movables.size()); ++i) {
        const auto& m = state_.movables[i];
        if (m.placement != Placement::Hand && movable_visible(m)) seen.push_back(i);
    }
    const auto target = resolve(argument, static_cast<int>(seen.size()), [&](int i) {
        const auto& m = state_.movables[seen[i]];
        return std::pair<std::string, int>{m.cls, m.id};
    });
    if (!target) return error_observation("the agent cannot find " + argument);
    auto& m = state_.movables[seen[*target]];
    if (m.placement != Placement::Floor) {
        const auto& r = state_.receptacles[m.where];
        if (!state_.agent_near || *state_.agent_near != m.where) {
            return error_observation("the agent is not close to the " + r.cls + " (" +
                                     std::to_string(r.id) + ")");
        }
    }
    m.placement = Placement::Hand;
    m.where = 0;
    state_.agent_held = seen[*target];
    Observation obs;
    obs.text = fill("pick_up", "You pick up {object}. You hold {object} ({id}).",
                    {{"object", m.cls}, {"id", std::to_string(m.id)}});
    return obs;
}

Observation Simulator::do_put_down(const std::string& argument) {
    if (!state_.agent_held) return error_observation("the agent holds nothing");
    auto& held = state_.movables[*state_.agent_held];
    std::string cls;
    int id = 0;
    if (parse_entity_name(argument, cls, id)) {
        if (cls != held.cls || id != held.id) {
            return error_observation("the agent is not holding " + argument);
        }
    } else if (argument != held.cls) {
        return error_observation("the agent is not holding " + argument);
    }
    if (!state_.agent_near) return error_observation("the agent is not close to any receptacle");
    const int recep_index = *state_.agent_near;
    const auto& r = state_.receptacles[recep_index];
    if (r.openable && !r.is_open) {
        return error_observation("the " + r.cls + " (" + std::to_string(r.id) + ") is closed");
    }
    held.placement = r.openable ? Placement::Inside : Placement::On;
    held.where = recep_index;
    state_.agent_held.reset();
    Observation obs;
    obs.text = fill(r.openable ? "put_down_in" : "put_down_on",
                    r.openable ? "You put down {object} in {receptacle}."
                               : "You put down {object} on {receptacle}.",
                    {{"object", held.cls}, {"receptacle", r.cls}});
    obs.sightings.push_back(
        {held.cls, held.id, state_.rooms[r.room_index].name(), r.name()});
    return obs;
}

Observation Simulator::do_open(const std::string& argument, bool open) {
    std::vector<int> local;
    for (int i = 0; i < static_cast<int>(state_.receptacles.size()); ++i) {
        if (state_.receptacles[i].room_index == state_.agent_room) local.push_back(i);
    }
    const auto found = resolve(argument, static_cast<int>(local.size()), [&](int i) {
        const auto& r = state_.receptacles[local[i]];
        return std::pair<std::string, int>{r.cls, r.id};
    });
    if (!found) return error_observation("the agent cannot find " + argument);
    const int recep_index = local[*found];
    auto& r = state_.receptacles[recep_index];
    const std::string label = r.cls + " (" + std::to_string(r.id) + ")";
    if (!state_.agent_near || *state_.agent_near != recep_index) {
        return error_observation("the agent is not close to the " + label);
    }
    if (!r.openable) {
        return error_observation("the " + label + (open ? " cannot be opened" : " cannot be closed"));
    }
    if (open == r.is_open) {
        return error_observation("the " + label + (open ? " is already open" : " is already closed"));
    }
    r.is_open = open;
    Observation obs;
    if (open) {
        obs.text = fill("open", "You open {receptacle}. You see {items}",
                        {{"receptacle", r.cls},
                         {"items", receptacle_item_list(recep_index, &obs.sightings)}});
    } else {
        obs.text = fill("close", "You close {receptacle}.", {{"receptacle", r.cls}});
    }
    obs.text += hold_suffix();
    return obs;
}

Observation Simulator::do_turn(const std::string& argument, bool on) {
    std::vector<int> local;
    for (int i = 0; i < static_cast<int>(state_.receptacles.size()); ++i) {
        if (state_.receptacles[i].room_index == state_.agent_room) local.push_back(i);
    }
    const auto found = resolve(argument, static_cast<int>(local.size()), [&](int i) {
        const auto& r = state_.receptacles[local[i]];
        return std::pair<std::string, int>{r.cls, r.id};
    });
    if (!found) return error_observation("the agent cannot find " + argument);
    const int recep_index = local[*found];
    auto& r = state_.receptacles[recep_index];
    const std::string label = r.cls + " (" + std::to_string(r.id) + ")";
    if (!state_.agent_near || *state_.agent_near != recep_index) {
        return error_observation("the agent is not close to the " + label);
    }
    if (!r.switchable) {
        return error_observation("the " + label +
                                 (on ? " cannot be turned on" : " cannot be turned off"));
    }
    if (on == r.is_on) {
        return error_observation("the " + label +
                                 (on ? " is already turned on" : " is already turned off"));
    }
    if (on && state_.turn_on_requires_closed && r.openable && r.is_open) {
        return error_observation("the " + label + " is open");
    }
    r.is_on = on;
    Observation obs;
    obs.text = on ? fill("turn_on", "You turn on {receptacle}.", {{"receptacle", r.cls}})
                  : fill("turn_off", "You turn off {receptacle}.", {{"receptacle", r.cls}});
    obs.text += hold_suffix();
    return obs;
}

Observation Simulator::do_slice(const std::string& argument) {
    const bool holds_knife =
        state_.agent_held &&
        normalize_class(state_.movables[*state_.agent_held].cls).find("knife") != std::string::npos;
    if (!holds_knife) return error_observation("the agent does not hold a knife");
    std::vector<int> seen;
    for (int i = 0; i < static_cast<int>(state_.movables.size()); ++i) {
        const auto& m = state_.movables[i];
        if (m.placement != Placement::Hand && movable_visible(m)) seen.push_back(i);
    }
    const auto target = resolve(argument, static_cast<int>(seen.size()), [&](int i) {
        const auto& m = state_.movables[seen[i]];
        return std::pair<std::string, int>{m.cls, m.id};
    });
    if (!target) return error_observation("the agent cannot find " + argument);
    const int index = seen[*target];
    const Movable victim = state_.movables[index];
    const std::string label = victim.cls + " (" + std::to_string(victim.id) + ")";
    if (victim.placement != Placement::Floor) {
        const auto& r = state_.receptacles[victim.where];
        if (!state_.agent_near || *state_.agent_near != victim.where) {
            return error_observation("the agent is not close to the " + r.cls + " (" +
                                     std::to_string(r.id) + ")");
        }
    }
    if (!victim.sliceable) return error_observation("the " + label + " cannot be sliced");

    int next_id = 0;
    for (const auto& m : state_.movables) {
        if (m.cls == victim.cls) next_id = std::max(next_id, m.id);
    }
    Observation obs;
    ItemList pieces;
    const std::string room_name = state_.rooms[state_.agent_room].name();
    const std::string recep_name =
        victim.placement == Placement::Floor ? "" : state_.receptacles[victim.where].name();
    for (int piece = 0; piece < std::max(1, state_.slice_pieces); ++piece) {
        Movable shard = victim;
        shard.id = ++next_id;
        shard.sliceable = false;
        if (piece == 0) {
            state_.movables[index] = shard;
        } else {
            state_.movables.push_back(shard);
        }
        pieces.add(shard.cls, shard.id);
        obs.sightings.push_back({shard.cls, shard.id, room_name, recep_name});
    }
    obs.text = fill("slice", "You slice {object} ({id}). You see {items}",
                    {{"object", victim.cls},
                     {"id", std::to_string(victim.id)},
                     {"items", pieces.render()}});
    obs.text += hold_suffix();
    return obs;
}

Observation Simulator::step(const SkillCommand& command) {
    const auto& verbs = grammar_.action_verbs;
    if (std::find(verbs.begin(), verbs.end(), command.verb) == verbs.end()) {
        throw std::invalid_argument("verb '" + command.verb + "' is not an environment skill");
    }
    if (command.verb == "go to") return do_go_to(command.argument);
    if (command.verb == "pick up") return do_pick_up(command.argument);
    if (command.verb == "put down") return do_put_down(command.argument);
    if (command.verb == "open") return do_open(command.argument, true);
    if (command.verb == "close") return do_open(command.argument, false);
    if (command.verb == "turn on") return do_turn(command.argument, true);
    if (command.verb == "turn off") return do_turn(command.argument, false);
    return do_slice(command.argument);
}

GoalEvaluation Simulator::evaluate_goal(const GoalCondition& goal) const {
    if (goal.predicates.empty()) throw ConfigError("cannot evaluate an empty goal");
    GoalEvaluation eval;
    for (const auto& [key, required] : goal.predicates) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= key.size()) {
            const auto sep = key.find('_', start);
            parts.push_back(key.substr(start, sep == std::string::npos ? sep : sep - start));
            if (sep == std::string::npos) break;
            start = sep + 1;
        }
        int found = 0;
        if (parts[0] == "on" || parts[0] == "inside") {
            const auto want = parts[0] == "on" ? Placement::On : Placement::Inside;
            for (const auto& m : state_.movables) {
                if (m.placement != want || normalize_class(m.cls) != parts[1]) continue;
                if (normalize_class(state_.receptacles[m.where].cls) == parts[2]) ++found;
            }
        } else if (parts[0] == "turnOn") {
            for (const auto& r : state_.receptacles) {
                if (normalize_class(r.cls) != parts[1] || !r.is_on) continue;
                if (state_.turn_on_requires_closed && r.openable && r.is_open) continue;
                ++found;
            }
        } else if (parts[0] == "hold") {
            if (state_.agent_held &&
                normalize_class(state_.movables[*state_.agent_held].cls) == parts[1]) {
                found = 1;
            }
        } else {
            throw ConfigError("unknown goal predicate kind in '" + key + "'");
        }
        const int satisfied = std::min(found, required);
        eval.per_predicate.push_back({key, required, satisfied});
        eval.total_units += required;
        eval.satisfied_units += satisfied;
    }
    eval.success = eval.satisfied_units == eval.total_units;
    eval.ssr = static_cast<double>(eval.satisfied_units) / eval.total_units;
    return eval;
}

std::vector<std::string> Simulator::available_skills() const {
    std::vector<std::string> skills;
    auto sorted_names = [](std::vector<std::pair<std::string, int>> names) {
        std::sort(names.begin(), names.end());
        return names;
    };

    std::vector<int> local;
    for (int i = 0; i < static_cast<int>(state_.receptacles.size()); ++i) {
        if (state_.receptacles[i].room_index == state_.agent_room) local.push_back(i);
    }
    std::vector<int> seen;
    for (int i = 0; i < static_cast<int>(state_.movables.size()); ++i) {
        const auto& m = state_.movables[i];
        if (m.placement != Placement::Hand && movable_visible(m)) seen.push_back(i);
    }
    const bool holds_knife =
        state_.agent_held &&
        normalize_class(state_.movables[*state_.agent_held].cls).find("knife") != std::string::npos;
    auto reachable = [&](const Movable& m) {
        return m.placement == Placement::Floor ||
               (state_.agent_near && *state_.agent_near == m.where);
    };

    for (const auto& verb : grammar_.action_verbs) {
        if (verb == "go to") {
            std::vector<std::pair<std::string, int>> names;
            for (const auto& room : state_.rooms) names.emplace_back(room.cls, room.id);
            for (const auto& [cls, id] : sorted_names(std::move(names))) {
                skills.push_back("go to " + cls + " " + std::to_string(id));
            }
            names.clear();
            for (const int i : local) {
                names.emplace_back(state_.receptacles[i].cls, state_.receptacles[i].id);
            }
            for (const auto& [cls, id] : sorted_names(std::move(names))) {
                skills.push_back("go to " + cls + " " + std::to_string(id));
            }
            names.clear();
            for (const int i : seen) names.emplace_back(state_.movables[i].cls, state_.movables[i].id);
            for (const auto& [cls, id] : sorted_names(std::move(names))) {
                skills.push_back("go to " + cls + " " + std::to_string(id));
            }
        } else if (verb == "pick up") {
            if (state_.agent_held) continue;
            std::vector<std::pair<std::string, int>> names;
            for (const int i : seen) {
                if (reachable(state_.movables[i])) {
                    names.emplace_back(state_.movables[i].cls, state_.movables[i].id);
                }
            }
            for (const auto& [cls, id] : sorted_names(std::move(names))) {
                skills.push_back("pick up " + cls + " " + std::to_string(id));
            }
        } else if (verb == "put down") {
            if (!state_.agent_held || !state_.agent_near) continue;
            const auto& r = state_.receptacles[*state_.agent_near];
            if (r.openable && !r.is_open) continue;
            skills.push_back("put down " + state_.movables[*state_.agent_held].name());
        } else if (verb == "open" || verb == "close") {
            if (!state_.agent_near) continue;
            const auto& r = state_.receptacles[*state_.agent_near];
            if (!r.openable || r.is_open != (verb == "close")) continue;
            skills.push_back(verb + " " + r.name());
        } else if (verb == "turn on" || verb == "turn off") {
            if (!state_.agent_near) continue;
            const auto& r = state_.receptacles[*state_.agent_near];
            if (!r.switchable || r.is_on != (verb == "turn off")) continue;
            if (verb == "turn on" && state_.turn_on_requires_closed && r.openable && r.is_open) {
                continue;
            }
            skills.push_back(verb + " " + r.name());
        } else if (verb == "slice") {
            if (!holds_knife) continue;
            std::vector<std::pair<std::string, int>> names;
            for (const int i : seen) {
                const auto& m = state_.movables[i];
                if (m.sliceable && reachable(m)) names.emplace_back(m.cls, m.id);
            }
            for (const auto& [cls, id] : sorted_names(std::move(names))) {
                skills.push_back("slice " + cls + " " + std::to_string(id));
            }
        }
    }
    return skills;
}

}  // namespace reactree
