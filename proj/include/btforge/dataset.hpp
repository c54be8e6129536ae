// SPDX-License-Identifier: Apache-2.0
//
// Four-stage data curation: cleanse seed trees, generate leaf-preserving
// structural variants (two rounds), then pair every tree with a description
// and a locally computed action list to form instruction/input/output
// records.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "btforge/bt_model.hpp"
#include "btforge/generator.hpp"
#include "btforge/manifest.hpp"

namespace btforge::data {

struct DatasetRecord {
    std::string instruction;
    std::string input;
    std::string output;  // BT XML, always parseable

    std::string to_jsonl_line() const;
};

struct CurationConfig {
    int variants_per_tree = 3;
    int rounds = 2;
    double top_p = 0.99;
    int max_description_words = 200;
    bool dedup = true;
    double split_test_fraction = 0.05;
    std::uint32_t split_seed = 42;
};

struct RejectEntry {
    std::string source;
    std::string reason;
};

struct CleanseResult {
    std::vector<BehaviorTree> trees;
    std::vector<RejectEntry> rejects;
};

/// Keeps the trees that parse, deduplicated by canonical serialization.
/// Rejects are data, not errors; this never throws on bad inputs.
CleanseResult cleanse(const std::vector<std::pair<std::string, std::string>>& named_xml);

CleanseResult cleanse_files(const std::vector<std::string>& paths);

struct VariantResult {
    std::vector<BehaviorTree> variants;
    std::vector<RejectEntry> dropped;
};

/// Asks the generator for cfg.variants_per_tree restructured variants per
/// tree. A candidate is kept only if it parses, its leaf-id multiset equals
/// the source's, and its canonical form is new; `seen` carries the canonical
/// forms across rounds.
VariantResult generate_variants(const std::vector<BehaviorTree>& trees, Generator& gen,
                                const CurationConfig& cfg, std::set<std::string>& seen);

VariantResult generate_variants(const std::vector<BehaviorTree>& trees, Generator& gen,
                                const CurationConfig& cfg);

struct CorpusStats {
    std::size_t seed_count = 0;
    std::size_t cleansed_count = 0;
    std::vector<std::size_t> round_counts;
    std::size_t record_count = 0;
    double mean_nodes = 0.0;
    double mean_transitions = 0.0;
    std::size_t max_nodes = 0;
    std::size_t max_transitions = 0;
    /// Whitespace-token count across all record fields; a proxy, reported as
    /// such because the downstream tokenizer is not fixed here.
    std::size_t token_proxy_total = 0;

    std::string to_json() const;
};

struct CurationResult {
    std::vector<DatasetRecord> records;
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> test;
    CorpusStats stats;
    std::vector<RejectEntry> rejects;
};

/// The full pipeline over named seed documents. Throws Error only when the
/// final record set would be empty.
CurationResult curate(const std::vector<std::pair<std::string, std::string>>& seeds,
                      Generator& gen, const CurationConfig& cfg);

/// Stats over already-built records (means rendered to two decimals by the
/// JSON emitter; exact doubles kept here).
CorpusStats corpus_stats(const std::vector<DatasetRecord>& records);

/// Deterministic shuffle split; test gets llround(n * fraction) records.
/// Both halves preserve the original record order.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split_records(
    const std::vector<DatasetRecord>& records, double test_fraction, std::uint32_t seed);

/// Action list rendered from a tree's own leaves (never trusted from a
/// generator): one "id(port, ...)" line per distinct leaf id.
std::string action_list_from_tree(const BehaviorTree& tree);

/// Synthesizes the manifest a tree implies: every leaf id becomes a
/// primitive whose params are the union of observed ports (ports present on
/// every occurrence are required). With restrict_controls, only control
/// tags appearing in the tree are allowed.
PrimitiveManifest manifest_from_tree(const BehaviorTree& tree, bool restrict_controls = false);

/// Canonical form used for deduplication: serialization under a fixed id.
std::string canonical_form(const BTNode& root);

PromptRecord variant_prompt(const BehaviorTree& source, const CurationConfig& cfg);
PromptRecord description_prompt(const BehaviorTree& tree, const CurationConfig& cfg);

/// Deterministic offline generator driving the whole pipeline without a
/// model: variant requests get a rotating structural transform of the
/// embedded tree, description requests get a templated summary.
class MockCurationGenerator : public Generator {
public:
    GenerationResponse generate(const PromptRecord& prompt) override;

private:
    std::size_t variant_counter_ = 0;
};

}  // namespace btforge::data
