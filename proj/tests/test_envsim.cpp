// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "btforge/envsim.hpp"
#include "btforge/validator.hpp"

using namespace btforge;
using namespace btforge::sim;

namespace {

const char* kNavWorld = R"(
type: nav
waypoints: {hall: [0, 0], kitchen: [3, 1], dock: [1, 4]}
robot_at: hall
battery: 100
dock_station: dock
blocked_edges:
  - {from: hall, to: kitchen, fail_count: 1}
)";

PrimitiveManifest nav_manifest() {
    return load_manifest(R"(
primitives:
  - id: MoveTo
    params: [{name: goal, type: text, required: true}]
  - id: Spin
  - id: Dock
  - id: Undock
  - id: Recharge
  - id: BatteryCheck
    kind: condition
    params: [{name: threshold, type: number, required: true}]
  - id: IsAt
    kind: condition
    params: [{name: waypoint, type: text, required: true}]
)");
}

PrimitiveManifest manip_manifest() {
    return load_manifest(R"(
primitives:
  - id: Pick
    params: [{name: object, type: text, required: true}]
  - id: Place
    params: [{name: zone, type: text, required: true}]
  - id: Stack
    params:
      - {name: object, type: text, required: true}
      - {name: on, type: text, required: true}
  - id: IsAt
    kind: condition
    params:
      - {name: object, type: text, required: true}
      - {name: zone, type: text, required: true}
)");
}

const char* kManipWorld = R"(
type: manip
zones: [left, right, bin]
objects:
  - {name: cube, at: left}
  - {name: ball, on: cube}
pick_faults: {ball: 1}
)";

TickStatus tick(SimEnvironment& env, const std::string& id,
                std::map<std::string, std::string> ports = {}, NodeKind kind = NodeKind::Action) {
    BTNode leaf = kind == NodeKind::Action ? make_action(id) : make_condition(id);
    ResolvedPorts resolved(ports.begin(), ports.end());
    Blackboard bb;
    std::string message;
    return env.tick_leaf(LeafContext{leaf, resolved, bb, 1}, message);
}

}  // namespace

TEST_CASE("MoveTo moves the robot over a free edge") {
    SimEnvironment env(load_world(kNavWorld), nav_manifest());
    CHECK(tick(env, "MoveTo", {{"goal", "dock"}}) == TickStatus::Success);
    const auto& nav = std::get<NavWorld>(env.world());
    CHECK(nav.robot_at == "dock");
    CHECK(nav.battery == 99.0);
    CHECK(nav.visit_log == std::vector<std::string>{"dock"});
}

TEST_CASE("a blocked edge fails first then clears, exercising Retry") {
    SimEnvironment env(load_world(kNavWorld), nav_manifest());
    CHECK(tick(env, "MoveTo", {{"goal", "kitchen"}}) == TickStatus::Failure);
    CHECK(std::get<NavWorld>(env.world()).robot_at == "hall");
    CHECK(tick(env, "MoveTo", {{"goal", "kitchen"}}) == TickStatus::Success);
    CHECK(std::get<NavWorld>(env.world()).robot_at == "kitchen");
}

TEST_CASE("docking, recharging and conditions") {
    SimEnvironment env(load_world(kNavWorld), nav_manifest());
    CHECK(tick(env, "Dock") == TickStatus::Failure);  // not at the dock station
    CHECK(tick(env, "MoveTo", {{"goal", "dock"}}) == TickStatus::Success);
    CHECK(tick(env, "Dock") == TickStatus::Success);
    CHECK(tick(env, "MoveTo", {{"goal", "hall"}}) == TickStatus::Failure);  // docked
    CHECK(tick(env, "Recharge") == TickStatus::Success);
    CHECK(std::get<NavWorld>(env.world()).battery == 100.0);
    CHECK(tick(env, "BatteryCheck", {{"threshold", "50"}}, NodeKind::Condition) ==
          TickStatus::Success);
    CHECK(tick(env, "BatteryCheck", {{"threshold", "101"}}, NodeKind::Condition) ==
          TickStatus::Failure);
    CHECK(tick(env, "IsAt", {{"waypoint", "dock"}}, NodeKind::Condition) == TickStatus::Success);
    CHECK(tick(env, "Undock") == TickStatus::Success);
    CHECK(tick(env, "MoveTo", {{"goal", "hall"}}) == TickStatus::Success);
}

TEST_CASE("unknown waypoints and depleted batteries fail MoveTo") {
    SimEnvironment env(load_world("type: nav\nwaypoints: {a: [0,0], b: [1,1]}\n"
                                  "robot_at: a\nbattery: 1\n"),
                       nav_manifest());
    CHECK(tick(env, "MoveTo", {{"goal", "nowhere"}}) == TickStatus::Failure);
    CHECK(tick(env, "MoveTo", {{"goal", "b"}}) == TickStatus::Success);
    CHECK(std::get<NavWorld>(env.world()).battery == 0.0);
    CHECK(tick(env, "MoveTo", {{"goal", "a"}}) == TickStatus::Failure);
}

TEST_CASE("Pick fails when the gripper is full or the object is buried") {
    SimEnvironment env(load_world(kManipWorld), manip_manifest());
    CHECK(tick(env, "Pick", {{"object", "cube"}}) == TickStatus::Failure);  // ball on top
    CHECK(tick(env, "Pick", {{"object", "ball"}}) == TickStatus::Failure);  // planted fault
    CHECK(tick(env, "Pick", {{"object", "ball"}}) == TickStatus::Success);
    const auto before = std::get<ManipWorld>(env.world());
    CHECK(tick(env, "Pick", {{"object", "cube"}}) == TickStatus::Failure);  // gripper full
    CHECK(std::get<ManipWorld>(env.world()) == before);  // failures leave the world unchanged
    CHECK(tick(env, "Place", {{"zone", "bin"}}) == TickStatus::Success);
    CHECK(*std::get<ManipWorld>(env.world()).resolved_zone("ball") == "bin");
}

TEST_CASE("Stack rebuilds on-relations") {
    SimEnvironment env(load_world(kManipWorld), manip_manifest());
    REQUIRE(tick(env, "Pick", {{"object", "ball"}}) == TickStatus::Failure);
    REQUIRE(tick(env, "Pick", {{"object", "ball"}}) == TickStatus::Success);
    CHECK(tick(env, "Stack", {{"object", "ball"}, {"on", "cube"}}) == TickStatus::Success);
    const auto& manip = std::get<ManipWorld>(env.world());
    CHECK(manip.object_at.at("ball") == "on:cube");
    CHECK(*manip.resolved_zone("ball") == "left");
    CHECK(tick(env, "IsAt", {{"object", "ball"}, {"zone", "left"}}, NodeKind::Condition) ==
          TickStatus::Success);
}

TEST_CASE("goal atoms evaluate against snapshots") {
    WorldState world = load_world(kNavWorld);
    auto& nav = std::get<NavWorld>(world);
    nav.robot_at = "dock";
    nav.docked = true;
    nav.visit_log = {"kitchen", "hall", "dock"};

    CHECK(evaluate_goal(world, load_goal("- {robot_at: dock}\n- {docked: true}\n")));
    CHECK(evaluate_goal(world, load_goal("- {visited: [kitchen, dock]}\n")));
    CHECK(!evaluate_goal(world, load_goal("- {visited: [dock, kitchen]}\n")));  // order matters
    CHECK(evaluate_goal(world, load_goal("- {battery_at_least: 99}\n")));
    CHECK(!evaluate_goal(world, load_goal("- {robot_at: hall}\n")));

    WorldState manip = load_world(kManipWorld);
    CHECK(evaluate_goal(manip, load_goal("- {object_on: {object: ball, on: cube}}\n")));
    CHECK(evaluate_goal(manip, load_goal("- {object_at: {object: ball, zone: left}}\n")));
    CHECK(!evaluate_goal(manip, load_goal("- {object_at: {object: ball, zone: bin}}\n")));
}

TEST_CASE("ordered-visit goal needs the exact subsequence") {
    WorldState world = load_world("type: nav\nwaypoints: {a: [0,0], b: [0,1], c: [0,2]}\n"
                                  "robot_at: a\n");
    auto& nav = std::get<NavWorld>(world);
    nav.visit_log = {"a", "c", "b"};
    CHECK(!evaluate_goal(world, load_goal("- {visited: [a, b, c]}\n")));
    nav.visit_log = {"a", "x", "b", "y", "c"};
    CHECK(evaluate_goal(world, load_goal("- {visited: [a, b, c]}\n")));
}

TEST_CASE("reset restores the world byte-identically, faults included") {
    SimEnvironment env(load_world(kNavWorld), nav_manifest());
    REQUIRE(tick(env, "MoveTo", {{"goal", "kitchen"}}) == TickStatus::Failure);
    REQUIRE(tick(env, "MoveTo", {{"goal", "kitchen"}}) == TickStatus::Success);
    env.reset();
    CHECK(env.world() == env.initial_world());
    // The transient fault fires again after reset.
    CHECK(tick(env, "MoveTo", {{"goal", "kitchen"}}) == TickStatus::Failure);
    env.reset();
    env.reset();  // idempotent
    CHECK(env.world() == env.initial_world());
}

TEST_CASE("identical trees produce identical final snapshots") {
    PrimitiveManifest m = nav_manifest();
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Sequence>"
        "<RetryUntilSuccessful num_attempts=\"2\"><MoveTo goal=\"kitchen\"/>"
        "</RetryUntilSuccessful>"
        "<MoveTo goal=\"dock\"/><Dock/></Sequence></BehaviorTree></root>");
    auto run_once = [&] {
        SimEnvironment env(load_world(kNavWorld), m);
        execute(tree, env);
        return world_to_json(env.world());
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("bind_adapter rejects manifests with unhandled primitives") {
    PrimitiveManifest bad = load_manifest("primitives:\n  - {id: Teleport}\n  - {id: MoveTo}\n");
    CHECK_THROWS_WITH_AS(SimEnvironment(load_world(kNavWorld), bad),
                         doctest::Contains("Teleport"), BindError);
    // Manip worlds know nothing about MoveTo.
    PrimitiveManifest nav_only = load_manifest("primitives:\n  - {id: MoveTo}\n");
    CHECK_THROWS_AS(SimEnvironment(load_world(kManipWorld), nav_only), BindError);
}

TEST_CASE("world loading validates structure") {
    CHECK_THROWS_AS(load_world("type: nav\nwaypoints: {a: [0,0]}\nrobot_at: b\n"), Error);
    CHECK_THROWS_AS(load_world("type: nav\nwaypoints: {a: [0,0]}\nrobot_at: a\nbattery: 150\n"),
                    Error);
    CHECK_THROWS_AS(load_world("type: manip\nzones: [a]\nobjects: [{name: x, at: qq}]\n"),
                    Error);
    CHECK_THROWS_AS(load_world("type: warp\n"), Error);
    CHECK_THROWS_AS(load_world("type: manip\nzones: [z]\nobjects:\n"
                               "  - {name: x, on: y}\n  - {name: y, on: x}\n"),
                    Error);
    CHECK_THROWS_AS(load_goal("- {fly_to: moon}\n"), Error);
}

TEST_CASE("snapshots serialize to JSON") {
    std::string json = world_to_json(load_world(kNavWorld));
    CHECK(json.find("\"robot_at\": \"hall\"") != std::string::npos);
    std::string manip = world_to_json(load_world(kManipWorld));
    CHECK(manip.find("\"ball\": \"on:cube\"") != std::string::npos);
}
