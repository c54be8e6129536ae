// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "btforge/bench.hpp"
#include "btforge/recovery.hpp"
#include "support/scripted_env.hpp"

using namespace btforge;
using namespace btforge::testing;

namespace {

// Dock is reachable from the lounge only; the direct hall->dock edge stays
// blocked, so a tree that goes straight for the dock fails at runtime.
const char* kTaskYaml = R"(
id: recovery_fixture
category: navigation
difficulty: hard
description: Reach the dock even though the direct path is blocked.
manifest:
  primitives:
    - id: MoveTo
      params: [{name: goal, type: text, required: true}]
    - id: Spin
world:
  type: nav
  waypoints: {hall: [0, 0], lounge: [2, 0], dock: [4, 0]}
  robot_at: hall
  dock_station: dock
  blocked_edges:
    - {from: hall, to: dock}
goal:
  - {robot_at: dock}
)";

const char* kDirect =
    "<root><BehaviorTree ID=\"Main\"><Sequence>"
    "<Spin/><MoveTo goal=\"dock\"/></Sequence></BehaviorTree></root>";

const char* kDetour =
    "<root><BehaviorTree ID=\"Regen\"><Sequence>"
    "<MoveTo goal=\"lounge\"/><MoveTo goal=\"dock\"/></Sequence></BehaviorTree></root>";

const char* kHallucinated =
    "<root><BehaviorTree ID=\"Main\"><Teleport goal=\"dock\"/></BehaviorTree></root>";

TaskSpec fixture_task() { return bench::load_task(kTaskYaml); }

}  // namespace

TEST_CASE("generate_validated returns the first accepted candidate") {
    TaskSpec task = fixture_task();
    RecoveryPolicy policy;

    SUBCASE("valid on the first try") {
        ScriptedGenerator gen({kDirect});
        GenerationOutcome outcome = generate_validated(task, gen, policy);
        REQUIRE(!outcome.exhausted());
        CHECK(outcome.retries_used == 1);
        CHECK(outcome.history.size() == 1);
        CHECK(outcome.history[0].accepted());
    }

    SUBCASE("a hallucinated leaf costs one retry") {
        ScriptedGenerator gen({kHallucinated, kDirect});
        GenerationOutcome outcome = generate_validated(task, gen, policy);
        REQUIRE(!outcome.exhausted());
        CHECK(outcome.retries_used == 2);
        REQUIRE(outcome.history.size() == 2);
        CHECK(!outcome.history[0].accepted());
        CHECK(outcome.history[0].report.violations[0].code == ViolationCode::UnknownNode);
        // The retry prompt carries the violations as corrective context.
        REQUIRE(gen.prompts().size() == 2);
        CHECK(gen.prompts()[1].input.find("UnknownNode") != std::string::npos);
        CHECK(gen.prompts()[1].input.find("rejected") != std::string::npos);
    }

    SUBCASE("budget exhaustion carries the full history") {
        RecoveryPolicy tight;
        tight.max_inference_retries = 3;
        ScriptedGenerator gen({kHallucinated});
        GenerationOutcome outcome = generate_validated(task, gen, tight);
        CHECK(outcome.exhausted());
        CHECK(outcome.retries_used == 3);
        CHECK(outcome.history.size() == 3);
    }

    SUBCASE("prose without XML counts as a syntax violation") {
        ScriptedGenerator gen({"I cannot help with that.", kDirect});
        GenerationOutcome outcome = generate_validated(task, gen, policy);
        REQUIRE(!outcome.exhausted());
        CHECK(outcome.history[0].report.violations[0].code == ViolationCode::SyntaxError);
    }
}

TEST_CASE("escalate picks the depth-one subtree and bundles context") {
    TaskSpec task = fixture_task();
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Sequence>"
        "<Fallback><MoveTo goal=\"a\"/><MoveTo goal=\"b\"/></Fallback>"
        "<Spin/></Sequence></BehaviorTree></root>");

    FailureReport report;
    report.node_path = {0, 1};
    report.node_names = "Sequence/Fallback/MoveTo";
    report.failed_leaf = "MoveTo";
    report.env_message = "path a->b is blocked";
    report.blackboard_snapshot.set("speed", std::string("fast"));
    report.tick_index = 1;

    Escalation esc = escalate(report, tree, task);
    CHECK(esc.subtree_path == NodePath{0});
    CHECK(esc.context.find("path a->b is blocked") != std::string::npos);
    CHECK(esc.context.find("speed = fast") != std::string::npos);
    CHECK(esc.context.find(task.description) != std::string::npos);
    CHECK(esc.context.find("MoveTo(goal: text)") != std::string::npos);
    CHECK(esc.context.find("<Fallback>") != std::string::npos);

    SUBCASE("degenerate root is its own scope") {
        BehaviorTree single{"T", make_action("MoveTo")};
        FailureReport at_root;
        at_root.node_path = {};
        Escalation root_esc = escalate(at_root, single, task);
        CHECK(root_esc.subtree_path.empty());
    }

    SUBCASE("whole-tree scope always targets the root") {
        Escalation whole = escalate(report, tree, task, RegenScope::WholeTree);
        CHECK(whole.subtree_path.empty());
    }

    SUBCASE("stale paths raise PathError") {
        FailureReport stale;
        stale.node_path = {9, 9};
        CHECK_THROWS_AS(escalate(stale, tree, task), PathError);
    }
}

TEST_CASE("run_with_recovery splices a regenerated subtree and re-executes") {
    TaskSpec task = fixture_task();
    sim::SimEnvironment env(task.world_spec, task.manifest);
    ScriptedGenerator gen({kDirect, kDetour});
    RecoveryPolicy policy;

    PipelineOutcome outcome = run_with_recovery(task, gen, env, policy);
    CHECK(outcome.status == PipelineStatus::Succeeded);
    CHECK(outcome.regen_rounds_used == 1);
    CHECK(outcome.inference_retries_used == 1);
    REQUIRE(outcome.result.has_value());
    CHECK(outcome.result->final_status == TickStatus::Success);
    CHECK(sim::evaluate_goal(env.world(), task.goal));
    // The failed MoveTo leaf is itself a depth-one child, so only it was
    // replaced by the detour; its Spin sibling survived.
    REQUIRE(outcome.final_tree.has_value());
    CHECK(tree_stats(*outcome.final_tree).leaf_ids.at("Spin") == 1);
    CHECK(tree_stats(*outcome.final_tree).leaf_ids.at("MoveTo") == 2);
    CHECK(node_at(*outcome.final_tree, {1}).kind == NodeKind::Sequence);
}

TEST_CASE("an immediately successful run uses zero regen rounds") {
    TaskSpec task = fixture_task();
    sim::SimEnvironment env(task.world_spec, task.manifest);
    ScriptedGenerator gen({kDetour});
    PipelineOutcome outcome = run_with_recovery(task, gen, env, RecoveryPolicy{});
    CHECK(outcome.status == PipelineStatus::Succeeded);
    CHECK(outcome.regen_rounds_used == 0);
    CHECK(parse_bt(kDetour).root == outcome.final_tree->root);
}

TEST_CASE("rejected regeneration candidates are never spliced") {
    TaskSpec task = fixture_task();
    sim::SimEnvironment env(task.world_spec, task.manifest);
    ScriptedGenerator gen({kDirect, kHallucinated, kDetour});
    PipelineOutcome outcome = run_with_recovery(task, gen, env, RecoveryPolicy{});
    CHECK(outcome.status == PipelineStatus::Succeeded);
    CHECK(outcome.regen_rounds_used == 1);
    REQUIRE(outcome.history.size() == 3);
    CHECK(outcome.history[0].accepted());
    CHECK(!outcome.history[1].accepted());  // rejected, counted, not spliced
    CHECK(outcome.history[2].accepted());
    // Every leaf of the final tree is in the manifest (nothing rejected got in).
    for (const auto& [id, count] : tree_stats(*outcome.final_tree).leaf_ids) {
        (void)count;
        CHECK(task.manifest.find(id) != nullptr);
    }
}

TEST_CASE("policy 1/0 degrades to generate_validated plus execute") {
    TaskSpec task = fixture_task();
    RecoveryPolicy off = RecoveryPolicy::disabled();

    SUBCASE("runtime failure stays a failure") {
        sim::SimEnvironment env(task.world_spec, task.manifest);
        ScriptedGenerator gen({kDirect, kDetour});
        PipelineOutcome outcome = run_with_recovery(task, gen, env, off);
        CHECK(outcome.status == PipelineStatus::RegenExhausted);
        CHECK(outcome.regen_rounds_used == 0);
        CHECK(gen.requests_served() == 1);  // the detour was never requested
        CHECK(parse_bt(kDirect).root == outcome.final_tree->root);
    }

    SUBCASE("invalid first candidate exhausts generation") {
        sim::SimEnvironment env(task.world_spec, task.manifest);
        ScriptedGenerator gen({kHallucinated, kDirect});
        PipelineOutcome outcome = run_with_recovery(task, gen, env, off);
        CHECK(outcome.status == PipelineStatus::GenerationExhausted);
        CHECK(!outcome.final_tree.has_value());
    }
}

TEST_CASE("regen budget exhaustion reports RegenExhausted") {
    TaskSpec task = fixture_task();
    sim::SimEnvironment env(task.world_spec, task.manifest);
    // Every regeneration keeps producing the same failing tree.
    ScriptedGenerator gen({kDirect});
    RecoveryPolicy policy;
    policy.max_regen_rounds = 2;
    PipelineOutcome outcome = run_with_recovery(task, gen, env, policy);
    CHECK(outcome.status == PipelineStatus::RegenExhausted);
    CHECK(outcome.regen_rounds_used == 2);
    CHECK(outcome.result->final_status == TickStatus::Failure);
}

TEST_CASE("environment resets between rounds so the final tree alone wins") {
    // The first candidate drains the battery before failing; without the
    // reset the detour would start from a half-spent world.
    const char* task_yaml = R"(
id: reset_fixture
category: navigation
difficulty: medium
description: Visit the lounge and then the dock.
manifest:
  primitives:
    - id: MoveTo
      params: [{name: goal, type: text, required: true}]
world:
  type: nav
  waypoints: {hall: [0,0], lounge: [1,0], dock: [2,0]}
  robot_at: hall
  battery: 2
  blocked_edges:
    - {from: lounge, to: dock}
goal:
  - {visited: [lounge, dock]}
  - {battery_at_least: 0}
)";
    TaskSpec task = bench::load_task(task_yaml);
    sim::SimEnvironment env(task.world_spec, task.manifest);
    const char* failing =
        "<root><BehaviorTree ID=\"Main\"><Sequence>"
        "<MoveTo goal=\"lounge\"/><MoveTo goal=\"dock\"/></Sequence></BehaviorTree></root>";
    const char* fixed =
        "<root><BehaviorTree ID=\"Regen\"><Sequence>"
        "<MoveTo goal=\"lounge\"/><MoveTo goal=\"hall\"/><MoveTo goal=\"lounge\"/>"
        "</Sequence></BehaviorTree></root>";
    // The fixed tree never reaches the dock; it must fail too, proving each
    // round re-ran from the initial two-percent battery.
    ScriptedGenerator gen({failing, fixed, fixed, fixed});
    RecoveryPolicy policy;
    PipelineOutcome outcome = run_with_recovery(task, gen, env, policy);
    CHECK(outcome.status == PipelineStatus::RegenExhausted);
    const auto& nav = std::get<sim::NavWorld>(env.world());
    // Three moves needed 3 battery; only 2 existed after the reset.
    CHECK(nav.battery == 0.0);
    CHECK(nav.visit_log.size() == 2);
}
