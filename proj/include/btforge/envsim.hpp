// SPDX-License-Identifier: Apache-2.0
//
// Deterministic desk-scale navigation and manipulation worlds with goal
// predicates and scriptable fault injection. Transitions are pure functions
// of (world, leaf, ports); there is no randomness anywhere.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "btforge/executor.hpp"
#include "btforge/manifest.hpp"

namespace btforge::sim {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

using Edge = std::pair<std::string, std::string>;

struct NavWorld {
    std::map<std::string, Point2> waypoints;
    std::string robot_at;
    double battery = 100.0;
    bool docked = false;
    /// Waypoint where Dock succeeds; empty means docking is impossible.
    std::string dock_station;
    double battery_drain_per_move = 1.0;
    /// Edges that fail MoveTo. A count means "fail the first k attempts";
    /// nullopt means permanently blocked.
    std::map<Edge, std::optional<int>> blocked_edges;
    /// Doors: an edge guarded by a closed door fails MoveTo until opened.
    std::map<Edge, std::string> door_edges;
    std::set<std::string> closed_doors;
    std::vector<std::string> visit_log;

    friend bool operator==(const NavWorld&, const NavWorld&) = default;
};

struct ManipWorld {
    std::vector<std::string> zones;
    /// Object location: a zone name, "on:<object>", or "gripper".
    std::map<std::string, std::string> object_at;
    std::optional<std::string> gripper_holding;
    /// Slippery objects: Pick fails the first k attempts per object.
    std::map<std::string, int> pick_faults;

    /// Zone an object rests in, following on-chains; nullopt in gripper.
    std::optional<std::string> resolved_zone(const std::string& object) const;
    bool buried(const std::string& object) const;

    friend bool operator==(const ManipWorld&, const ManipWorld&) = default;
};

using WorldState = std::variant<NavWorld, ManipWorld>;

/// One atomic goal condition. A GoalPredicate is a conjunction of these.
struct GoalAtom {
    enum class Kind {
        RobotAt,        // robot_at == a
        VisitedInOrder, // sequence is a subsequence of the visit log
        Docked,         // docked == flag
        BatteryAtLeast, // battery >= number
        ObjectAt,       // resolved zone of a == b
        ObjectOn,       // a rests directly on b
    };
    Kind kind;
    std::string a;
    std::string b;
    double number = 0.0;
    bool flag = true;
    std::vector<std::string> sequence;

    friend bool operator==(const GoalAtom&, const GoalAtom&) = default;
};

struct GoalPredicate {
    std::vector<GoalAtom> atoms;

    friend bool operator==(const GoalPredicate&, const GoalPredicate&) = default;
};

/// True iff every atomic condition holds on the snapshot. Side-effect free.
bool evaluate_goal(const WorldState& snapshot, const GoalPredicate& goal);

/// YAML loading for worlds and goals (schemas shared with the task files).
WorldState load_world(const std::string& yaml_text);
GoalPredicate load_goal(const std::string& yaml_text);

std::string world_to_json(const WorldState& world);

/// Environment adapter over a WorldState. Binds every manifest primitive to
/// a world handler at construction; throws BindError listing unhandled ids.
class SimEnvironment : public EnvironmentAdapter {
public:
    SimEnvironment(WorldState world, const PrimitiveManifest& manifest);

    bool has_handler(const std::string& leaf_id) const override;
    TickStatus tick_leaf(const LeafContext& ctx, std::string& message) override;
    void reset() override;

    const WorldState& world() const { return world_; }
    const WorldState& initial_world() const { return initial_; }

private:
    WorldState world_;
    WorldState initial_;
    std::set<std::string> bound_;
};

/// Handler ids available for a given world type, for bind checking.
const std::set<std::string>& nav_handler_ids();
const std::set<std::string>& manip_handler_ids();

}  // namespace btforge::sim
