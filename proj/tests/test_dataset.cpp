// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "btforge/dataset.hpp"
#include "btforge/validator.hpp"

using namespace btforge;
using namespace btforge::data;

namespace {

std::string seed_tree(int index) {
    return "<root><BehaviorTree ID=\"Seed" + std::to_string(index) + "\"><Sequence>"
           "<MoveTo goal=\"wp" + std::to_string(index) + "\"/>"
           "<Spin/></Sequence></BehaviorTree></root>";
}

std::vector<std::pair<std::string, std::string>> make_seeds(int valid, int malformed,
                                                            int duplicated = 0) {
    std::vector<std::pair<std::string, std::string>> seeds;
    for (int i = 0; i < valid; ++i) {
        seeds.emplace_back("seed" + std::to_string(i) + ".xml", seed_tree(i));
    }
    for (int i = 0; i < malformed; ++i) {
        seeds.emplace_back("bad" + std::to_string(i) + ".xml",
                           "<root><BehaviorTree><Sequence><A/>");
    }
    for (int i = 0; i < duplicated; ++i) {
        seeds.emplace_back("dup" + std::to_string(i) + ".xml", seed_tree(i));
    }
    return seeds;
}

}  // namespace

TEST_CASE("cleanse keeps parsing trees and logs the rest") {
    CleanseResult result = cleanse(make_seeds(5, 3, 2));
    CHECK(result.trees.size() == 5);
    CHECK(result.rejects.size() == 5);
    int parse_rejects = 0;
    int dup_rejects = 0;
    for (const RejectEntry& entry : result.rejects) {
        if (entry.reason.find("duplicate") != std::string::npos) {
            ++dup_rejects;
        } else {
            ++parse_rejects;
        }
    }
    CHECK(parse_rejects == 3);
    CHECK(dup_rejects == 2);

    CHECK(cleanse({}).trees.empty());
}

TEST_CASE("variant candidates must keep the leaf multiset") {
    BehaviorTree source = parse_bt(seed_tree(1));
    CurationConfig cfg;
    cfg.variants_per_tree = 1;

    SUBCASE("a leaf rename is dropped") {
        std::string renamed = seed_tree(1);
        renamed.replace(renamed.find("MoveTo"), 6, "GoHome");
        ScriptedGenerator gen({renamed});
        VariantResult result = generate_variants({source}, gen, cfg);
        CHECK(result.variants.empty());
        REQUIRE(result.dropped.size() == 1);
        CHECK(result.dropped[0].reason == "execution nodes changed");
    }

    SUBCASE("an identical tree is dropped as duplicate") {
        ScriptedGenerator gen({seed_tree(1)});
        VariantResult result = generate_variants({source}, gen, cfg);
        CHECK(result.variants.empty());
        REQUIRE(result.dropped.size() == 1);
        CHECK(result.dropped[0].reason == "duplicate canonical form");
    }

    SUBCASE("a control-flow swap with identical leaves is accepted") {
        std::string swapped = seed_tree(1);
        swapped.replace(swapped.find("<Sequence>"), 10, "<Fallback>");
        swapped.replace(swapped.find("</Sequence>"), 11, "</Fallback>");
        ScriptedGenerator gen({swapped});
        VariantResult result = generate_variants({source}, gen, cfg);
        REQUIRE(result.variants.size() == 1);
        CHECK(result.variants[0].root.kind == NodeKind::Fallback);
        CHECK(tree_stats(result.variants[0]).leaf_ids == tree_stats(source).leaf_ids);
    }

    SUBCASE("non-XML output is dropped, not fatal") {
        ScriptedGenerator gen({"sorry, no tree today"});
        VariantResult result = generate_variants({source}, gen, cfg);
        CHECK(result.variants.empty());
        CHECK(result.dropped.size() == 1);
    }
}

TEST_CASE("the mock curation generator drives the full pipeline") {
    MockCurationGenerator gen;
    CurationConfig cfg;
    CurationResult result = curate(make_seeds(20, 4), gen, cfg);

    CHECK(result.stats.seed_count == 24);
    CHECK(result.stats.cleansed_count == 20);
    REQUIRE(result.stats.round_counts.size() == 2);
    CHECK(result.stats.round_counts[0] == 60);   // 20 trees x 3 variants
    CHECK(result.stats.round_counts[1] == 180);  // 60 x 3
    CHECK(result.records.size() == 240);

    // Every record validates against the action list computed from its own
    // output tree, and its leaves match a seed's.
    for (const DatasetRecord& record : result.records) {
        BehaviorTree tree = parse_bt(record.output);
        PrimitiveManifest manifest = manifest_from_tree(tree);
        auto [report, validated] = validate(record.output, manifest);
        CHECK(report.accepted());
        CHECK(record.input.find(action_list_from_tree(tree)) != std::string::npos);
        CHECK(!record.instruction.empty());
    }

    CHECK(result.train.size() + result.test.size() == result.records.size());
    CHECK(result.test.size() == 12);  // llround(240 * 0.05)
}

TEST_CASE("mock variants always preserve leaves across rounds") {
    MockCurationGenerator gen;
    CurationConfig cfg;
    std::vector<BehaviorTree> sources;
    for (int i = 0; i < 6; ++i) sources.push_back(parse_bt(seed_tree(i)));
    VariantResult round1 = generate_variants(sources, gen, cfg);
    CHECK(round1.dropped.empty());
    CHECK(round1.variants.size() == 18);
    for (std::size_t i = 0; i < round1.variants.size(); ++i) {
        CHECK(tree_stats(round1.variants[i]).leaf_ids ==
              tree_stats(sources[i / 3]).leaf_ids);
    }
}

TEST_CASE("corpus stats report means, maxima and the token proxy") {
    auto record_for = [](const std::string& xml) {
        DatasetRecord record;
        record.instruction = "do it";
        record.input = "task words here";
        record.output = xml;
        return record;
    };
    std::vector<DatasetRecord> records = {
        record_for(seed_tree(0)),  // 3 nodes
        record_for("<root><BehaviorTree ID=\"T\"><Sequence><A/><B/><C/><D/>"
                   "</Sequence></BehaviorTree></root>"),  // 5 nodes
    };
    CorpusStats stats = corpus_stats(records);
    CHECK(stats.record_count == 2);
    CHECK(stats.mean_nodes == doctest::Approx(4.0));
    CHECK(stats.mean_transitions == doctest::Approx(3.0));
    CHECK(stats.max_nodes == 5);
    CHECK(stats.max_transitions == 4);
    CHECK(stats.token_proxy_total > 10);
    CHECK(stats.to_json().find("\"mean_nodes\": \"4.00\"") != std::string::npos);
}

TEST_CASE("the split is exact, deterministic and disjoint") {
    std::vector<DatasetRecord> records;
    for (int i = 0; i < 100; ++i) {
        DatasetRecord record;
        record.instruction = "i";
        record.input = "in" + std::to_string(i);
        record.output = seed_tree(i);
        records.push_back(std::move(record));
    }
    auto [train, test] = split_records(records, 0.05, 42);
    CHECK(train.size() == 95);
    CHECK(test.size() == 5);

    auto [train2, test2] = split_records(records, 0.05, 42);
    for (std::size_t i = 0; i < test.size(); ++i) CHECK(test[i].input == test2[i].input);

    std::set<std::string> train_inputs;
    for (const DatasetRecord& r : train) train_inputs.insert(r.input);
    for (const DatasetRecord& r : test) CHECK(!train_inputs.count(r.input));

    CHECK_THROWS_AS(split_records(records, 0.0, 1), Error);
    CHECK_THROWS_AS(split_records(records, 1.0, 1), Error);
}

TEST_CASE("records serialize to one JSON object per line") {
    DatasetRecord record{"inst", "in\nput", "<root/>"};
    std::string line = record.to_jsonl_line();
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.find("\"instruction\":\"inst\"") != std::string::npos);
}

TEST_CASE("manifest_from_tree marks stable ports required") {
    BehaviorTree tree = parse_bt(
        "<root><BehaviorTree ID=\"T\"><Sequence>"
        "<MoveTo goal=\"a\" speed=\"1\"/><MoveTo goal=\"b\"/><Spin/>"
        "</Sequence></BehaviorTree></root>");
    PrimitiveManifest manifest = manifest_from_tree(tree);
    const PrimitiveSpec* move = manifest.find("MoveTo");
    REQUIRE(move != nullptr);
    CHECK(move->param("goal")->required);     // present on every occurrence
    CHECK(!move->param("speed")->required);   // only on one
    CHECK(manifest.find("Spin")->params.empty());

    PrimitiveManifest restricted = manifest_from_tree(tree, true);
    CHECK(restricted.control_allowed("Sequence"));
    CHECK(!restricted.control_allowed("Parallel"));
}
