// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "btforge/bt_model.hpp"
#include "support/tree_gen.hpp"

using namespace btforge;

namespace {

const char* kMinimal =
    "<root BTCPP_format=\"4\"><BehaviorTree ID=\"Main\">"
    "<Sequence><MoveTo goal=\"kitchen\"/></Sequence>"
    "</BehaviorTree></root>";

}  // namespace

TEST_CASE("parse_bt reads the minimal document") {
    BehaviorTree tree = parse_bt(kMinimal);
    CHECK(tree.tree_id == "Main");
    CHECK(tree.root.kind == NodeKind::Sequence);
    REQUIRE(tree.root.children.size() == 1);
    const BTNode& leaf = tree.root.children[0];
    CHECK(leaf.kind == NodeKind::Action);
    CHECK(leaf.id == "MoveTo");
    CHECK(leaf.ports.at("goal") == PortValue::literal("kitchen"));
}

TEST_CASE("parse_bt maps name attribute to the display label") {
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Spin name=\"turn around\"/></BehaviorTree></root>");
    CHECK(tree.root.name == "turn around");
    CHECK(tree.root.ports.empty());
}

TEST_CASE("parse_bt reads blackboard references") {
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><MoveTo goal=\"{target}\"/></BehaviorTree></root>");
    CHECK(tree.root.ports.at("goal") == PortValue::blackboard("target"));

    CHECK_THROWS_AS(
        parse_bt("<root><BehaviorTree ID=\"T\"><MoveTo goal=\"{bad key}\"/></BehaviorTree></root>"),
        ParseError);
}

TEST_CASE("parse_bt enforces arity invariants") {
    CHECK_THROWS_WITH_AS(
        parse_bt("<root><BehaviorTree ID=\"T\"><Inverter><A/><B/></Inverter>"
                 "</BehaviorTree></root>"),
        doctest::Contains("decorator must have exactly one child"), ParseError);
    CHECK_THROWS_AS(
        parse_bt("<root><BehaviorTree ID=\"T\"><Sequence/></BehaviorTree></root>"), ParseError);
    CHECK_THROWS_AS(
        parse_bt("<root><BehaviorTree ID=\"T\"><MoveTo><A/></MoveTo></BehaviorTree></root>"),
        ParseError);
}

TEST_CASE("parse_bt checks Parallel thresholds") {
    CHECK_THROWS_AS(parse_bt("<root><BehaviorTree ID=\"T\">"
                             "<Parallel success_count=\"3\"><A/><B/></Parallel>"
                             "</BehaviorTree></root>"),
                    ParseError);
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\">"
        "<Parallel success_count=\"-1\"><A/><B/></Parallel>"
        "</BehaviorTree></root>");
    CHECK(tree.root.success_threshold == 2);
    CHECK(tree.root.failure_threshold == 1);
}

TEST_CASE("parse_bt requires counted decorator attributes") {
    CHECK_THROWS_AS(
        parse_bt("<root><BehaviorTree ID=\"T\"><Repeat><A/></Repeat></BehaviorTree></root>"),
        ParseError);
    CHECK_THROWS_AS(parse_bt("<root><BehaviorTree ID=\"T\">"
                             "<RetryUntilSuccessful num_attempts=\"0\"><A/>"
                             "</RetryUntilSuccessful></BehaviorTree></root>"),
                    ParseError);
}

TEST_CASE("parse_bt rejects missing wrappers and unknown root children") {
    CHECK_THROWS_AS(parse_bt("<Sequence><A/></Sequence>"), ParseError);
    CHECK_THROWS_AS(parse_bt("<root></root>"), ParseError);
    CHECK_THROWS_AS(parse_bt("<root><TreeNodesModel/></root>"), ParseError);
}

TEST_CASE("parse_bt inlines SubTree references") {
    BehaviorTree tree = parse_bt(
        "<root main_tree_to_execute=\"Main\">"
        "<BehaviorTree ID=\"Main\"><Sequence><SubTree ID=\"Aux\"/><Spin/></Sequence>"
        "</BehaviorTree>"
        "<BehaviorTree ID=\"Aux\"><MoveTo goal=\"dock\"/></BehaviorTree>"
        "</root>");
    CHECK(tree.root.children[0].id == "MoveTo");
    CHECK(tree.root.children[1].id == "Spin");
}

TEST_CASE("parse_bt rejects SubTree cycles and ambiguous main trees") {
    CHECK_THROWS_WITH_AS(
        parse_bt("<root main_tree_to_execute=\"A\">"
                 "<BehaviorTree ID=\"A\"><SubTree ID=\"B\"/></BehaviorTree>"
                 "<BehaviorTree ID=\"B\"><SubTree ID=\"A\"/></BehaviorTree></root>"),
        doctest::Contains("cycle"), ParseError);
    CHECK_THROWS_AS(parse_bt("<root>"
                             "<BehaviorTree ID=\"A\"><Spin/></BehaviorTree>"
                             "<BehaviorTree ID=\"B\"><Spin/></BehaviorTree></root>"),
                    ParseError);
}

TEST_CASE("serialize_bt emits the minimal document and deterministic ports") {
    BehaviorTree tree{"Main", make_control(NodeKind::Sequence,
                                           {make_action("MoveTo",
                                                        {{"goal", PortValue::literal("kitchen")}})})};
    std::string xml = serialize_bt(tree);
    CHECK(xml.find("<root BTCPP_format=\"4\">") != std::string::npos);
    CHECK(xml.find("<MoveTo goal=\"kitchen\"/>") != std::string::npos);
    CHECK(parse_bt(xml) == tree);

    BTNode leaf = make_action("Stack", {{"object", PortValue::literal("cube")},
                                        {"on", PortValue::blackboard("target")}});
    leaf.name = "stack it";
    std::string line = serialize_bt(BehaviorTree{"T", leaf});
    CHECK(line.find("<Stack name=\"stack it\" object=\"cube\" on=\"{target}\"/>") !=
          std::string::npos);
}

TEST_CASE("round-trip holds for randomly generated trees" * doctest::test_suite("property")) {
    testing::TreeGen gen(20260811);
    for (int i = 0; i < 200; ++i) {
        BehaviorTree tree = gen.random_bt();
        BehaviorTree back = parse_bt(serialize_bt(tree));
        // The parser reclassifies nothing; leaf kinds are Action by default.
        CHECK(back == parse_bt(serialize_bt(back)));
        CHECK(tree_stats(back).node_count == tree_stats(tree).node_count);
    }
}

TEST_CASE("tree_stats counts nodes, transitions, depth and leaf ids") {
    BehaviorTree single{"T", make_action("Spin")};
    TreeStats s1 = tree_stats(single);
    CHECK(s1.node_count == 1);
    CHECK(s1.transition_count == 0);
    CHECK(s1.depth == 1);

    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Sequence>"
        "<MoveTo goal=\"a\"/><MoveTo goal=\"b\"/></Sequence></BehaviorTree></root>");
    TreeStats s2 = tree_stats(tree);
    CHECK(s2.node_count == 3);
    CHECK(s2.transition_count == 2);
    CHECK(s2.depth == 2);
    CHECK(s2.leaf_ids.at("MoveTo") == 2);
}

TEST_CASE("transition count equals node count minus one" * doctest::test_suite("property")) {
    testing::TreeGen gen(7);
    for (int i = 0; i < 100; ++i) {
        TreeStats stats = tree_stats(gen.random_bt());
        CHECK(stats.transition_count == stats.node_count - 1);
    }
}

TEST_CASE("node count matches a crude element-count of the document" *
          doctest::test_suite("property")) {
    // Independent oracle: count element open tags in the serialized text and
    // subtract the <root> and <BehaviorTree> wrappers.
    auto element_count = [](const std::string& xml) {
        std::size_t count = 0;
        for (std::size_t i = 0; i + 1 < xml.size(); ++i) {
            if (xml[i] == '<' && xml[i + 1] != '/' && xml[i + 1] != '!' && xml[i + 1] != '?') {
                ++count;
            }
        }
        return count - 2;
    };
    testing::TreeGen gen(31);
    for (int i = 0; i < 60; ++i) {
        BehaviorTree tree = gen.random_bt();
        CHECK(tree_stats(tree).node_count == element_count(serialize_bt(tree)));
    }
}

TEST_CASE("splice_subtree replaces the addressed node, value semantics") {
    BehaviorTree tree{"T", make_action("Spin")};
    BTNode replacement = make_control(NodeKind::Sequence,
                                      {make_action("A"), make_action("B")});
    BehaviorTree spliced = splice_subtree(tree, {}, replacement);
    CHECK(tree_stats(spliced).node_count == 3);
    CHECK(tree_stats(tree).node_count == 1);  // original untouched

    BehaviorTree nested = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Sequence>"
        "<Fallback><A/><B/></Fallback><C/></Sequence></BehaviorTree></root>");
    BehaviorTree swapped = splice_subtree(nested, {0, 1}, make_action("B2"));
    CHECK(node_at(swapped, {0, 1}).id == "B2");
    CHECK(node_at(swapped, {0, 0}).id == "A");  // sibling subtree preserved
    CHECK(node_at(nested, {0, 1}).id == "B");

    CHECK_THROWS_AS(splice_subtree(tree, {5}, replacement), PathError);
}

TEST_CASE("describe_path renders a readable stack trace") {
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Sequence>"
        "<Fallback><MoveTo goal=\"a\"/><Spin/></Fallback></Sequence></BehaviorTree></root>");
    CHECK(describe_path(tree, {0, 0}) == "Sequence/Fallback/MoveTo");
}
