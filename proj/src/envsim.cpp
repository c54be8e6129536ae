// SPDX-License-Identifier: Apache-2.0
#include "btforge/envsim.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>

namespace btforge::sim {
namespace {

const std::string* port(const ResolvedPorts& ports, const std::string& name) {
    auto it = ports.find(name);
    return it == ports.end() ? nullptr : &it->second;
}

std::optional<double> number_port(const ResolvedPorts& ports, const std::string& name) {
    const std::string* raw = port(ports, name);
    if (!raw) return std::nullopt;
    try {
        std::size_t used = 0;
        double value = std::stod(*raw, &used);
        if (used != raw->size()) return std::nullopt;
        return value;
    } catch (const std::logic_error&) {
        return std::nullopt;
    }
}

// --- navigation handlers ---------------------------------------------------

TickStatus nav_move_to(NavWorld& w, const ResolvedPorts& ports, std::string& msg) {
    const std::string* goal = port(ports, "goal");
    if (!goal) {
        msg = "missing goal";
        return TickStatus::Failure;
    }
    if (!w.waypoints.count(*goal)) {
        msg = "unknown waypoint '" + *goal + "'";
        return TickStatus::Failure;
    }
    if (w.docked) {
        msg = "cannot move while docked";
        return TickStatus::Failure;
    }
    if (w.battery <= 0.0) {
        msg = "battery depleted";
        return TickStatus::Failure;
    }
    const Edge edge{w.robot_at, *goal};
    if (auto it = w.door_edges.find(edge); it != w.door_edges.end()) {
        if (w.closed_doors.count(it->second)) {
            msg = "door '" + it->second + "' is closed";
            return TickStatus::Failure;
        }
    }
    if (auto it = w.blocked_edges.find(edge); it != w.blocked_edges.end()) {
        if (!it->second.has_value()) {
            msg = "path " + edge.first + "->" + edge.second + " is blocked";
            return TickStatus::Failure;
        }
        if (*it->second > 0) {
            --*it->second;
            msg = "path " + edge.first + "->" + edge.second + " is blocked (transient)";
            return TickStatus::Failure;
        }
    }
    w.robot_at = *goal;
    w.battery = std::max(0.0, w.battery - w.battery_drain_per_move);
    w.visit_log.push_back(*goal);
    return TickStatus::Success;
}

TickStatus nav_dock(NavWorld& w, const ResolvedPorts&, std::string& msg) {
    if (w.docked) return TickStatus::Success;
    if (w.dock_station.empty() || w.robot_at != w.dock_station) {
        msg = "no dock at '" + w.robot_at + "'";
        return TickStatus::Failure;
    }
    w.docked = true;
    return TickStatus::Success;
}

TickStatus nav_recharge(NavWorld& w, const ResolvedPorts&, std::string& msg) {
    if (!w.docked) {
        msg = "not docked";
        return TickStatus::Failure;
    }
    w.battery = 100.0;
    return TickStatus::Success;
}

TickStatus nav_open_door(NavWorld& w, const ResolvedPorts& ports, std::string& msg) {
    const std::string* door = port(ports, "door");
    if (!door) {
        msg = "missing door";
        return TickStatus::Failure;
    }
    bool known = false;
    for (const auto& [edge, name] : w.door_edges) {
        (void)edge;
        if (name == *door) known = true;
    }
    if (!known) {
        msg = "unknown door '" + *door + "'";
        return TickStatus::Failure;
    }
    w.closed_doors.erase(*door);
    return TickStatus::Success;
}

// --- manipulation handlers --------------------------------------------------

TickStatus manip_pick(ManipWorld& w, const ResolvedPorts& ports, std::string& msg) {
    const std::string* object = port(ports, "object");
    if (!object) {
        msg = "missing object";
        return TickStatus::Failure;
    }
    if (!w.object_at.count(*object)) {
        msg = "unknown object '" + *object + "'";
        return TickStatus::Failure;
    }
    if (w.gripper_holding) {
        msg = "gripper already holding '" + *w.gripper_holding + "'";
        return TickStatus::Failure;
    }
    if (w.buried(*object)) {
        msg = "'" + *object + "' has something on top of it";
        return TickStatus::Failure;
    }
    if (auto it = w.pick_faults.find(*object); it != w.pick_faults.end() && it->second > 0) {
        --it->second;
        msg = "grip on '" + *object + "' slipped";
        return TickStatus::Failure;
    }
    w.object_at[*object] = "gripper";
    w.gripper_holding = *object;
    return TickStatus::Success;
}

TickStatus manip_place(ManipWorld& w, const ResolvedPorts& ports, std::string& msg) {
    const std::string* zone = port(ports, "zone");
    if (!zone) {
        msg = "missing zone";
        return TickStatus::Failure;
    }
    if (!w.gripper_holding) {
        msg = "gripper is empty";
        return TickStatus::Failure;
    }
    if (std::find(w.zones.begin(), w.zones.end(), *zone) == w.zones.end()) {
        msg = "unknown zone '" + *zone + "'";
        return TickStatus::Failure;
    }
    w.object_at[*w.gripper_holding] = *zone;
    w.gripper_holding.reset();
    return TickStatus::Success;
}

TickStatus manip_stack(ManipWorld& w, const ResolvedPorts& ports, std::string& msg) {
    const std::string* object = port(ports, "object");
    const std::string* target = port(ports, "on");
    if (!object || !target) {
        msg = "missing object/on";
        return TickStatus::Failure;
    }
    if (!w.gripper_holding || *w.gripper_holding != *object) {
        msg = "not holding '" + *object + "'";
        return TickStatus::Failure;
    }
    auto it = w.object_at.find(*target);
    if (it == w.object_at.end()) {
        msg = "unknown object '" + *target + "'";
        return TickStatus::Failure;
    }
    if (it->second == "gripper") {
        msg = "'" + *target + "' is in the gripper";
        return TickStatus::Failure;
    }
    if (w.buried(*target)) {
        msg = "'" + *target + "' has something on top of it";
        return TickStatus::Failure;
    }
    w.object_at[*object] = "on:" + *target;
    w.gripper_holding.reset();
    return TickStatus::Success;
}

}  // namespace

std::optional<std::string> ManipWorld::resolved_zone(const std::string& object) const {
    std::string current = object;
    for (std::size_t hops = 0; hops <= object_at.size(); ++hops) {
        auto it = object_at.find(current);
        if (it == object_at.end()) return std::nullopt;
        const std::string& loc = it->second;
        if (loc == "gripper") return std::nullopt;
        if (loc.rfind("on:", 0) == 0) {
            current = loc.substr(3);
            continue;
        }
        return loc;
    }
    return std::nullopt;  // defensive: cycle
}

bool ManipWorld::buried(const std::string& object) const {
    for (const auto& [other, loc] : object_at) {
        (void)other;
        if (loc == "on:" + object) return true;
    }
    return false;
}

bool evaluate_goal(const WorldState& snapshot, const GoalPredicate& goal) {
    for (const GoalAtom& atom : goal.atoms) {
        switch (atom.kind) {
            case GoalAtom::Kind::RobotAt: {
                const auto* nav = std::get_if<NavWorld>(&snapshot);
                if (!nav || nav->robot_at != atom.a) return false;
                break;
            }
            case GoalAtom::Kind::VisitedInOrder: {
                const auto* nav = std::get_if<NavWorld>(&snapshot);
                if (!nav) return false;
                std::size_t pos = 0;
                for (const std::string& visited : nav->visit_log) {
                    if (pos < atom.sequence.size() && visited == atom.sequence[pos]) ++pos;
                }
                if (pos != atom.sequence.size()) return false;
                break;
            }
            case GoalAtom::Kind::Docked: {
                const auto* nav = std::get_if<NavWorld>(&snapshot);
                if (!nav || nav->docked != atom.flag) return false;
                break;
            }
            case GoalAtom::Kind::BatteryAtLeast: {
                const auto* nav = std::get_if<NavWorld>(&snapshot);
                if (!nav || nav->battery < atom.number) return false;
                break;
            }
            case GoalAtom::Kind::ObjectAt: {
                const auto* manip = std::get_if<ManipWorld>(&snapshot);
                if (!manip) return false;
                auto zone = manip->resolved_zone(atom.a);
                if (!zone || *zone != atom.b) return false;
                break;
            }
            case GoalAtom::Kind::ObjectOn: {
                const auto* manip = std::get_if<ManipWorld>(&snapshot);
                if (!manip) return false;
                auto it = manip->object_at.find(atom.a);
                if (it == manip->object_at.end() || it->second != "on:" + atom.b) return false;
                break;
            }
        }
    }
    return true;
}

WorldState load_world(const std::string& yaml_text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw Error(std::string("malformed world YAML: ") + e.what());
    }
    if (!doc.IsMap() || !doc["type"]) throw Error("world requires a 'type' field");
    const std::string type = doc["type"].as<std::string>();

    if (type == "nav") {
        NavWorld w;
        if (doc["waypoints"]) {
            for (const auto& entry : doc["waypoints"]) {
                Point2 p;
                if (entry.second.IsSequence() && entry.second.size() == 2) {
                    p.x = entry.second[0].as<double>();
                    p.y = entry.second[1].as<double>();
                }
                w.waypoints.emplace(entry.first.as<std::string>(), p);
            }
        }
        if (!doc["robot_at"]) throw Error("nav world requires 'robot_at'");
        w.robot_at = doc["robot_at"].as<std::string>();
        if (!w.waypoints.count(w.robot_at)) {
            throw Error("robot_at '" + w.robot_at + "' is not a waypoint");
        }
        if (doc["battery"]) w.battery = doc["battery"].as<double>();
        if (w.battery < 0.0 || w.battery > 100.0) throw Error("battery must be within [0,100]");
        if (doc["docked"]) w.docked = doc["docked"].as<bool>();
        if (doc["dock_station"]) w.dock_station = doc["dock_station"].as<std::string>();
        if (doc["battery_drain_per_move"]) {
            w.battery_drain_per_move = doc["battery_drain_per_move"].as<double>();
        }
        if (doc["blocked_edges"]) {
            for (const auto& entry : doc["blocked_edges"]) {
                Edge edge{entry["from"].as<std::string>(), entry["to"].as<std::string>()};
                std::optional<int> count;
                if (entry["fail_count"]) count = entry["fail_count"].as<int>();
                w.blocked_edges.emplace(std::move(edge), count);
            }
        }
        if (doc["doors"]) {
            for (const auto& entry : doc["doors"]) {
                Edge edge{entry["from"].as<std::string>(), entry["to"].as<std::string>()};
                std::string name = entry["name"].as<std::string>();
                bool closed = entry["closed"] ? entry["closed"].as<bool>() : true;
                w.door_edges.emplace(std::move(edge), name);
                if (closed) w.closed_doors.insert(name);
            }
        }
        return w;
    }
    if (type == "manip") {
        ManipWorld w;
        if (doc["zones"]) {
            for (const auto& z : doc["zones"]) w.zones.push_back(z.as<std::string>());
        }
        if (doc["objects"]) {
            for (const auto& entry : doc["objects"]) {
                std::string name = entry["name"].as<std::string>();
                if (entry["at"]) {
                    std::string zone = entry["at"].as<std::string>();
                    if (std::find(w.zones.begin(), w.zones.end(), zone) == w.zones.end()) {
                        throw Error("object '" + name + "' placed in unknown zone '" + zone + "'");
                    }
                    w.object_at.emplace(std::move(name), std::move(zone));
                } else if (entry["on"]) {
                    w.object_at.emplace(std::move(name), "on:" + entry["on"].as<std::string>());
                } else {
                    throw Error("object '" + name + "' needs 'at' or 'on'");
                }
            }
        }
        for (const auto& [name, loc] : w.object_at) {
            if (loc.rfind("on:", 0) == 0 && !w.object_at.count(loc.substr(3))) {
                throw Error("object '" + name + "' rests on unknown object '" + loc.substr(3) +
                            "'");
            }
            if (!w.resolved_zone(name)) {
                throw Error("on-relations involving '" + name + "' do not ground to a zone");
            }
        }
        if (doc["pick_faults"]) {
            for (const auto& entry : doc["pick_faults"]) {
                w.pick_faults.emplace(entry.first.as<std::string>(), entry.second.as<int>());
            }
        }
        return w;
    }
    throw Error("unknown world type '" + type + "'");
}

GoalPredicate load_goal(const std::string& yaml_text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw Error(std::string("malformed goal YAML: ") + e.what());
    }
    if (!doc.IsSequence()) throw Error("goal must be a list of atoms");

    GoalPredicate goal;
    for (const auto& entry : doc) {
        if (!entry.IsMap()) throw Error("goal atom must be a map");
        GoalAtom atom;
        if (entry["robot_at"]) {
            atom.kind = GoalAtom::Kind::RobotAt;
            atom.a = entry["robot_at"].as<std::string>();
        } else if (entry["visited"]) {
            atom.kind = GoalAtom::Kind::VisitedInOrder;
            for (const auto& w : entry["visited"]) atom.sequence.push_back(w.as<std::string>());
        } else if (entry["docked"]) {
            atom.kind = GoalAtom::Kind::Docked;
            atom.flag = entry["docked"].as<bool>();
        } else if (entry["battery_at_least"]) {
            atom.kind = GoalAtom::Kind::BatteryAtLeast;
            atom.number = entry["battery_at_least"].as<double>();
        } else if (entry["object_at"]) {
            atom.kind = GoalAtom::Kind::ObjectAt;
            atom.a = entry["object_at"]["object"].as<std::string>();
            atom.b = entry["object_at"]["zone"].as<std::string>();
        } else if (entry["object_on"]) {
            atom.kind = GoalAtom::Kind::ObjectOn;
            atom.a = entry["object_on"]["object"].as<std::string>();
            atom.b = entry["object_on"]["on"].as<std::string>();
        } else {
            throw Error("unknown goal atom");
        }
        goal.atoms.push_back(std::move(atom));
    }
    return goal;
}

std::string world_to_json(const WorldState& world) {
    nlohmann::ordered_json doc;
    if (const auto* nav = std::get_if<NavWorld>(&world)) {
        doc["type"] = "nav";
        doc["robot_at"] = nav->robot_at;
        doc["battery"] = nav->battery;
        doc["docked"] = nav->docked;
        doc["visit_log"] = nav->visit_log;
        nlohmann::ordered_json doors = nlohmann::ordered_json::array();
        for (const std::string& d : nav->closed_doors) doors.push_back(d);
        doc["closed_doors"] = std::move(doors);
    } else {
        const auto& manip = std::get<ManipWorld>(world);
        doc["type"] = "manip";
        doc["zones"] = manip.zones;
        doc["objects"] = nlohmann::ordered_json::object();
        for (const auto& [name, loc] : manip.object_at) doc["objects"][name] = loc;
        doc["gripper_holding"] =
            manip.gripper_holding ? nlohmann::ordered_json(*manip.gripper_holding)
                                  : nlohmann::ordered_json(nullptr);
    }
    return doc.dump(2);
}

namespace {

using NavHandler = std::function<TickStatus(NavWorld&, const ResolvedPorts&, std::string&)>;
using NavCondition =
    std::function<TickStatus(const NavWorld&, const ResolvedPorts&, std::string&)>;
using ManipHandler = std::function<TickStatus(ManipWorld&, const ResolvedPorts&, std::string&)>;
using ManipCondition =
    std::function<TickStatus(const ManipWorld&, const ResolvedPorts&, std::string&)>;

TickStatus from_bool(bool ok) { return ok ? TickStatus::Success : TickStatus::Failure; }

const std::map<std::string, NavHandler>& nav_actions() {
    static const std::map<std::string, NavHandler> handlers = {
        {"MoveTo", nav_move_to},
        {"Spin", [](NavWorld&, const ResolvedPorts&, std::string&) { return TickStatus::Success; }},
        {"Wait", [](NavWorld&, const ResolvedPorts&, std::string&) { return TickStatus::Success; }},
        {"Dock", nav_dock},
        {"Undock",
         [](NavWorld& w, const ResolvedPorts&, std::string&) {
             w.docked = false;
             return TickStatus::Success;
         }},
        {"Recharge", nav_recharge},
        {"OpenDoor", nav_open_door},
    };
    return handlers;
}

const std::map<std::string, NavCondition>& nav_conditions() {
    static const std::map<std::string, NavCondition> handlers = {
        {"BatteryCheck",
         [](const NavWorld& w, const ResolvedPorts& ports, std::string& msg) {
             auto threshold = number_port(ports, "threshold");
             if (!threshold) {
                 msg = "missing numeric threshold";
                 return TickStatus::Failure;
             }
             return from_bool(w.battery >= *threshold);
         }},
        {"IsAt",
         [](const NavWorld& w, const ResolvedPorts& ports, std::string& msg) {
             const std::string* wp = port(ports, "waypoint");
             if (!wp) {
                 msg = "missing waypoint";
                 return TickStatus::Failure;
             }
             return from_bool(w.robot_at == *wp);
         }},
        {"IsDocked",
         [](const NavWorld& w, const ResolvedPorts&, std::string&) {
             return from_bool(w.docked);
         }},
        {"IsDoorOpen",
         [](const NavWorld& w, const ResolvedPorts& ports, std::string& msg) {
             const std::string* door = port(ports, "door");
             if (!door) {
                 msg = "missing door";
                 return TickStatus::Failure;
             }
             return from_bool(!w.closed_doors.count(*door));
         }},
    };
    return handlers;
}

const std::map<std::string, ManipHandler>& manip_actions() {
    static const std::map<std::string, ManipHandler> handlers = {
        {"Pick", manip_pick},
        {"Place", manip_place},
        {"Stack", manip_stack},
    };
    return handlers;
}

const std::map<std::string, ManipCondition>& manip_conditions() {
    static const std::map<std::string, ManipCondition> handlers = {
        {"IsAt",
         [](const ManipWorld& w, const ResolvedPorts& ports, std::string& msg) {
             const std::string* object = port(ports, "object");
             const std::string* zone = port(ports, "zone");
             if (!object || !zone) {
                 msg = "missing object/zone";
                 return TickStatus::Failure;
             }
             auto resolved = w.resolved_zone(*object);
             return from_bool(resolved && *resolved == *zone);
         }},
        {"IsHolding",
         [](const ManipWorld& w, const ResolvedPorts& ports, std::string& msg) {
             const std::string* object = port(ports, "object");
             if (!object) {
                 msg = "missing object";
                 return TickStatus::Failure;
             }
             return from_bool(w.gripper_holding && *w.gripper_holding == *object);
         }},
        {"GripperEmpty",
         [](const ManipWorld& w, const ResolvedPorts&, std::string&) {
             return from_bool(!w.gripper_holding);
         }},
    };
    return handlers;
}

template <typename Map>
void collect_ids(const Map& map, std::set<std::string>& out) {
    for (const auto& [id, handler] : map) {
        (void)handler;
        out.insert(id);
    }
}

}  // namespace

const std::set<std::string>& nav_handler_ids() {
    static const std::set<std::string> ids = [] {
        std::set<std::string> out;
        collect_ids(nav_actions(), out);
        collect_ids(nav_conditions(), out);
        return out;
    }();
    return ids;
}

const std::set<std::string>& manip_handler_ids() {
    static const std::set<std::string> ids = [] {
        std::set<std::string> out;
        collect_ids(manip_actions(), out);
        collect_ids(manip_conditions(), out);
        return out;
    }();
    return ids;
}

SimEnvironment::SimEnvironment(WorldState world, const PrimitiveManifest& manifest)
    : world_(std::move(world)), initial_(world_) {
    const bool is_nav = std::holds_alternative<NavWorld>(world_);
    const std::set<std::string>& available = is_nav ? nav_handler_ids() : manip_handler_ids();
    std::string missing;
    for (const PrimitiveSpec& spec : manifest.primitives) {
        if (available.count(spec.id)) {
            bound_.insert(spec.id);
        } else {
            if (!missing.empty()) missing += ", ";
            missing += spec.id;
        }
    }
    if (!missing.empty()) {
        throw BindError("world has no handlers for: " + missing);
    }
}

bool SimEnvironment::has_handler(const std::string& leaf_id) const {
    return bound_.count(leaf_id) > 0;
}

TickStatus SimEnvironment::tick_leaf(const LeafContext& ctx, std::string& message) {
    const std::string& id = ctx.leaf.id;
    if (auto* nav = std::get_if<NavWorld>(&world_)) {
        if (auto it = nav_conditions().find(id); it != nav_conditions().end()) {
            return it->second(*nav, ctx.ports, message);
        }
        if (auto it = nav_actions().find(id); it != nav_actions().end()) {
            return it->second(*nav, ctx.ports, message);
        }
    } else {
        auto& manip = std::get<ManipWorld>(world_);
        if (auto it = manip_conditions().find(id); it != manip_conditions().end()) {
            return it->second(manip, ctx.ports, message);
        }
        if (auto it = manip_actions().find(id); it != manip_actions().end()) {
            return it->second(manip, ctx.ports, message);
        }
    }
    throw AdapterError("no world handler for leaf '" + id + "'");
}

void SimEnvironment::reset() {
    world_ = initial_;
}

}  // namespace btforge::sim
