#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reactree/decision.hpp"

namespace reactree {

// One movable object sighting extracted from an observation, used to feed
// working memory. The receptacle is empty for objects lying on the floor.
struct Sighting {
    std::string object_class;
    int object_id = 0;
    std::string room;        // "kitchen 1"
    std::string receptacle;  // "fridge 2" or empty
};

struct Observation {
    std::string text;
    bool error = false;
    std::vector<Sighting> sightings;
};

// Parsed environment command: a grammar verb plus its argument.
struct SkillCommand {
    std::string verb;
    std::string argument;
};

struct Room {
    std::string cls;
    int id = 1;

    std::string name() const { return cls + " " + std::to_string(id); }
};

struct Receptacle {
    std::string cls;
    int id = 1;
    int room_index = 0;
    bool openable = false;
    bool is_open = false;
    bool switchable = false;
    bool is_on = false;

    std::string name() const { return cls + " " + std::to_string(id); }
};

enum class Placement { Floor, On, Inside, Hand };

struct Movable {
    std::string cls;
    int id = 1;
    Placement placement = Placement::Floor;
    int where = 0;  // room index for Floor, receptacle index for On/Inside
    bool sliceable = false;

    std::string name() const { return cls + " " + std::to_string(id); }
};

// Full environment state. Instances of a class are numbered house-wide and
// (class, id) pairs are unique per entity kind.
struct WorldState {
    std::string name;
    std::string profile = "household";  // selects grammar and budget default
    std::vector<Room> rooms;
    std::vector<Receptacle> receptacles;
    std::vector<Movable> movables;
    int agent_room = 0;
    std::optional<int> agent_near;  // receptacle index
    std::optional<int> agent_held;  // movable index
    bool turn_on_requires_closed = true;
    int slice_pieces = 2;
    std::map<std::string, std::string> templates;  // overrides for phrasing

    int default_decision_cap() const { return profile == "extended" ? 100 : 200; }
};

// Predicate keys use space-stripped class names: on_<obj>_<recept>,
// inside_<obj>_<recept>, turnOn_<recept>, hold_<obj>.
struct GoalCondition {
    std::vector<std::pair<std::string, int>> predicates;  // key -> required count
};

struct PredicateResult {
    std::string key;
    int required = 0;
    int satisfied = 0;
};

struct GoalEvaluation {
    bool success = false;
    double ssr = 0.0;
    int satisfied_units = 0;
    int total_units = 0;
    std::vector<PredicateResult> per_predicate;
};

// Partially observable household world. Contents of closed receptacles are
// never named by observations or sightings until opened.
class Simulator {
public:
    explicit Simulator(WorldState initial);

    // Restores the initial state and returns the house summary.
    Observation reset();

    // House summary at the current state, as issued to a starting node.
    // Read-only: does not advance or mutate anything.
    Observation house_summary() const;

    // Applies one environment command. Inapplicable commands return an
    // error-flagged observation and leave the state unchanged.
    Observation step(const SkillCommand& command);

    GoalEvaluation evaluate_goal(const GoalCondition& goal) const;

    // Commands that would currently step without an error, grammar order,
    // targets sorted by class then instance.
    std::vector<std::string> available_skills() const;

    const WorldState& state() const { return state_; }
    const SkillGrammar& grammar() const { return grammar_; }

private:
    WorldState initial_;
    WorldState state_;
    SkillGrammar grammar_;

    bool movable_visible(const Movable& m) const;
    std::string room_item_list(int room_index, std::vector<Sighting>* sightings) const;
    std::string receptacle_item_list(int recep_index, std::vector<Sighting>* sightings) const;
    std::string hold_suffix() const;
    Observation error_observation(const std::string& reason) const;
    std::string fill(const std::string& key, const std::string& fallback,
                     std::initializer_list<std::pair<std::string, std::string>> args) const;

    Observation do_go_to(const std::string& argument);
    Observation do_pick_up(const std::string& argument);
    Observation do_put_down(const std::string& argument);
    Observation do_open(const std::string& argument, bool open);
    Observation do_turn(const std::string& argument, bool on);
    Observation do_slice(const std::string& argument);
};

// Normalized class key used in goal predicates: lowercased, spaces removed.
std::string normalize_class(std::string_view cls);

// Splits "kitchen cabinet 7" into ("kitchen cabinet", 7). Returns false when
// no trailing instance number is present.
bool parse_entity_name(std::string_view text, std::string& cls, int& id);

// Parses a goal key-count map, validating key shapes. Predicates are kept
// sorted by key.
GoalCondition parse_goal(const std::map<std::string, int>& predicates);

}  // namespace reactree
