#include "reactree/world_io.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& file, const char* what) {
    std::ifstream in(file);
    if (!in) throw WorldLoadError(std::string(what) + " '" + file.string() + "' cannot be opened");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw WorldLoadError(std::string(what) + " '" + file.string() + "': " + e.what());
    }
}

[[noreturn]] void fail(const std::filesystem::path& file, const std::string& msg) {
    throw WorldLoadError("world file '" + file.string() + "': " + msg);
}

std::pair<std::string, int> entity(const std::filesystem::path& file, const std::string& name) {
    std::string cls;
    int id = 0;
    if (!parse_entity_name(name, cls, id)) {
        fail(file, "'" + name + "' is not of the form '<class> <instance>'");
    }
    return {cls, id};
}

}  // namespace

WorldState load_world(const std::filesystem::path& file) {
    const json doc = load_json(file, "world file");
    WorldState world;
    try {
        world.name = doc.value("name", file.stem().string());
        world.profile = doc.value("profile", "household");
        if (world.profile != "household" && world.profile != "extended") {
            fail(file, "unknown profile '" + world.profile + "'");
        }
        world.turn_on_requires_closed = doc.value("turn_on_requires_closed", true);
        world.slice_pieces = doc.value("slice_pieces", 2);
        if (world.slice_pieces < 1) fail(file, "slice_pieces must be at least 1");
        if (doc.contains("templates")) {
            for (const auto& [key, value] : doc.at("templates").items()) {
                world.templates[key] = value.get<std::string>();
            }
        }

        std::set<std::pair<std::string, int>> seen;
        for (const auto& entry : doc.at("rooms")) {
            const auto [cls, id] = entity(file, entry.get<std::string>());
            if (!seen.insert({cls, id}).second) fail(file, "duplicate room '" + cls + "'");
            world.rooms.push_back({cls, id});
        }
        if (world.rooms.empty()) fail(file, "no rooms declared");

        auto room_index = [&](const std::string& name) {
            const auto [cls, id] = entity(file, name);
            for (int i = 0; i < static_cast<int>(world.rooms.size()); ++i) {
                if (world.rooms[i].cls == cls && world.rooms[i].id == id) return i;
            }
            fail(file, "unknown room '" + name + "'");
        };

        seen.clear();
        for (const auto& entry : doc.at("receptacles")) {
            Receptacle r;
            const auto name = entry.at("name").get<std::string>();
            std::tie(r.cls, r.id) = entity(file, name);
            if (!seen.insert({r.cls, r.id}).second) {
                fail(file, "duplicate receptacle '" + name + "'");
            }
            r.room_index = room_index(entry.at("room").get<std::string>());
            r.openable = entry.value("openable", false);
            r.is_open = entry.value("open", false);
            r.switchable = entry.value("switchable", false);
            r.is_on = entry.value("on", false);
            if (r.is_open && !r.openable) fail(file, "'" + name + "' is open but not openable");
            if (r.is_on && !r.switchable) fail(file, "'" + name + "' is on but not switchable");
            world.receptacles.push_back(r);
        }

        auto receptacle_index = [&](const std::string& name) {
            const auto [cls, id] = entity(file, name);
            for (int i = 0; i < static_cast<int>(world.receptacles.size()); ++i) {
                if (world.receptacles[i].cls == cls && world.receptacles[i].id == id) return i;
            }
            fail(file, "unknown receptacle '" + name + "'");
        };

        seen.clear();
        if (doc.contains("objects")) {
            for (const auto& entry : doc.at("objects")) {
                Movable m;
                const auto name = entry.at("name").get<std::string>();
                std::tie(m.cls, m.id) = entity(file, name);
                if (!seen.insert({m.cls, m.id}).second) {
                    fail(file, "duplicate object '" + name + "'");
                }
                m.sliceable = entry.value("sliceable", false);
                const int placements = static_cast<int>(entry.contains("in")) +
                                       static_cast<int>(entry.contains("on")) +
                                       static_cast<int>(entry.contains("room"));
                if (placements != 1) {
                    fail(file, "object '" + name + "' needs exactly one of in/on/room");
                }
                if (entry.contains("in")) {
                    m.placement = Placement::Inside;
                    m.where = receptacle_index(entry.at("in").get<std::string>());
                    if (!world.receptacles[m.where].openable) {
                        fail(file, "object '" + name + "' is inside a receptacle that cannot open");
                    }
                } else if (entry.contains("on")) {
                    m.placement = Placement::On;
                    m.where = receptacle_index(entry.at("on").get<std::string>());
                } else {
                    m.placement = Placement::Floor;
                    m.where = room_index(entry.at("room").get<std::string>());
                }
                world.movables.push_back(m);
            }
        }

        world.agent_room = room_index(doc.at("agent_room").get<std::string>());
    } catch (const json::exception& e) {
        fail(file, e.what());
    }
    return world;
}

namespace {

TaskSpec task_from_json(const json& doc, const std::filesystem::path& base_dir,
                        const std::filesystem::path& origin) {
    TaskSpec task;
    try {
        task.id = doc.at("id").get<std::string>();
        task.type = doc.value("type", "untyped");
        task.instruction = doc.at("instruction").get<std::string>();
        std::filesystem::path world = doc.at("world").get<std::string>();
        task.world_path = world.is_absolute() ? world : base_dir / world;
        std::map<std::string, int> predicates;
        for (const auto& [key, value] : doc.at("goal").items()) {
            predicates[key] = value.get<int>();
        }
        task.goal = parse_goal(predicates);
    } catch (const json::exception& e) {
        throw WorldLoadError("task file '" + origin.string() + "': " + e.what());
    }
    if (task.id.empty()) throw WorldLoadError("task file '" + origin.string() + "': empty id");
    if (task.instruction.empty()) {
        throw WorldLoadError("task file '" + origin.string() + "': empty instruction");
    }

    // Goal vocabulary must name classes that exist in the referenced world.
    const WorldState world = load_world(task.world_path);
    std::set<std::string> object_classes;
    std::set<std::string> receptacle_classes;
    for (const auto& m : world.movables) object_classes.insert(normalize_class(m.cls));
    for (const auto& r : world.receptacles) receptacle_classes.insert(normalize_class(r.cls));
    for (const auto& [key, count] : task.goal.predicates) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= key.size()) {
            const auto sep = key.find('_', start);
            parts.push_back(key.substr(start, sep == std::string::npos ? sep : sep - start));
            if (sep == std::string::npos) break;
            start = sep + 1;
        }
        const bool binary = parts[0] == "on" || parts[0] == "inside";
        if (parts[0] == "hold" || binary) {
            if (!object_classes.count(parts[1])) {
                throw WorldLoadError("task '" + task.id + "': goal names unknown object class '" +
                                     parts[1] + "'");
            }
        }
        if (binary || parts[0] == "turnOn") {
            const auto& recept = binary ? parts[2] : parts[1];
            if (!receptacle_classes.count(recept)) {
                throw WorldLoadError("task '" + task.id +
                                     "': goal names unknown receptacle class '" + recept + "'");
            }
        }
    }
    return task;
}

}  // namespace

TaskSpec load_task(const std::filesystem::path& file) {
    const json doc = load_json(file, "task file");
    return task_from_json(doc, file.parent_path(), file);
}

std::vector<TaskSpec> load_manifest(const std::filesystem::path& file) {
    const json doc = load_json(file, "manifest");
    std::vector<TaskSpec> tasks;
    std::set<std::string> ids;
    try {
        for (const auto& entry : doc.at("tasks")) {
            TaskSpec task = entry.is_string()
                                ? load_task(file.parent_path() / entry.get<std::string>())
                                : task_from_json(entry, file.parent_path(), file);
            if (!ids.insert(task.id).second) {
                throw WorldLoadError("manifest '" + file.string() + "': duplicate task id '" +
                                     task.id + "'");
            }
            tasks.push_back(std::move(task));
        }
    } catch (const json::exception& e) {
        throw WorldLoadError("manifest '" + file.string() + "': " + e.what());
    }
    if (tasks.empty()) throw WorldLoadError("manifest '" + file.string() + "' lists no tasks");
    return tasks;
}

}  // namespace reactree
