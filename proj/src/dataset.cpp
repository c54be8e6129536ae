// SPDX-License-Identifier: Apache-2.0
#include "btforge/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "btforge/validator.hpp"

namespace btforge::data {
namespace {

constexpr const char* kVariantMarker = "Rewrite the behavior tree";
constexpr const char* kDescriptionMarker = "Describe the robot task";

std::size_t whitespace_tokens(const std::string& text) {
    std::istringstream stream(text);
    std::string token;
    std::size_t count = 0;
    while (stream >> token) ++count;
    return count;
}

std::string truncate_words(const std::string& text, int max_words) {
    std::istringstream stream(text);
    std::string token;
    std::string out;
    int count = 0;
    while (stream >> token && count < max_words) {
        if (count) out += " ";
        out += token;
        ++count;
    }
    return out;
}

void collect_leaves(const BTNode& node, std::vector<const BTNode*>& out) {
    if (is_leaf(node.kind)) out.push_back(&node);
    for (const BTNode& child : node.children) collect_leaves(child, out);
}

void collect_control_tags(const BTNode& node, std::set<std::string>& out) {
    if (!is_leaf(node.kind)) out.insert(std::string(control_tag(node.kind)));
    for (const BTNode& child : node.children) collect_control_tags(child, out);
}

}  // namespace

std::string DatasetRecord::to_jsonl_line() const {
    nlohmann::ordered_json doc;
    doc["instruction"] = instruction;
    doc["input"] = input;
    doc["output"] = output;
    return doc.dump();
}

std::string canonical_form(const BTNode& root) {
    return serialize_bt(BehaviorTree{"Canonical", root});
}

CleanseResult cleanse(const std::vector<std::pair<std::string, std::string>>& named_xml) {
    CleanseResult result;
    std::set<std::string> seen;
    for (const auto& [name, xml] : named_xml) {
        try {
            BehaviorTree tree = parse_bt(xml);
            if (!seen.insert(canonical_form(tree.root)).second) {
                result.rejects.push_back({name, "duplicate canonical form"});
                continue;
            }
            result.trees.push_back(std::move(tree));
        } catch (const ParseError& e) {
            result.rejects.push_back({name, e.what()});
        }
    }
    return result;
}

CleanseResult cleanse_files(const std::vector<std::string>& paths) {
    std::vector<std::pair<std::string, std::string>> inputs;
    for (const std::string& path : paths) {
        std::ifstream in(path);
        if (!in) {
            inputs.emplace_back(path, "");  // unreadable files fail the parse
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        inputs.emplace_back(path, buf.str());
    }
    return cleanse(inputs);
}

PromptRecord variant_prompt(const BehaviorTree& source, const CurationConfig& cfg) {
    PromptRecord prompt;
    prompt.instruction =
        "You restructure behavior trees. Keep every execution node (each leaf "
        "with its id and ports) exactly as given; only the control-flow "
        "structure may change. Answer with one XML document.";
    prompt.input = std::string(kVariantMarker) + " below into a structurally different " +
                   "tree with the same leaves (top_p=" + std::to_string(cfg.top_p) + ").\n" +
                   serialize_bt(source);
    return prompt;
}

PromptRecord description_prompt(const BehaviorTree& tree, const CurationConfig& cfg) {
    PromptRecord prompt;
    prompt.instruction =
        "You write concise natural-language task descriptions for robot "
        "behavior trees.";
    prompt.input = std::string(kDescriptionMarker) + " performed by this tree in fewer than " +
                   std::to_string(cfg.max_description_words) + " words.\n" + serialize_bt(tree);
    return prompt;
}

VariantResult generate_variants(const std::vector<BehaviorTree>& trees, Generator& gen,
                                const CurationConfig& cfg, std::set<std::string>& seen) {
    VariantResult result;
    for (std::size_t index = 0; index < trees.size(); ++index) {
        const BehaviorTree& source = trees[index];
        const auto source_leaves = tree_stats(source).leaf_ids;
        const std::string source_name = "tree#" + std::to_string(index);
        PromptRecord prompt = variant_prompt(source, cfg);

        for (int i = 0; i < cfg.variants_per_tree; ++i) {
            GenerationResponse response = gen.generate(prompt);
            std::string xml;
            try {
                xml = extract_xml(response.raw_text);
            } catch (const ExtractError& e) {
                result.dropped.push_back({source_name, e.what()});
                continue;
            }
            BehaviorTree candidate;
            try {
                candidate = parse_bt(xml);
            } catch (const ParseError& e) {
                result.dropped.push_back({source_name, e.what()});
                continue;
            }
            if (tree_stats(candidate).leaf_ids != source_leaves) {
                result.dropped.push_back({source_name, "execution nodes changed"});
                continue;
            }
            std::string canonical = canonical_form(candidate.root);
            if (cfg.dedup && !seen.insert(canonical).second) {
                result.dropped.push_back({source_name, "duplicate canonical form"});
                continue;
            }
            result.variants.push_back(std::move(candidate));
        }
    }
    return result;
}

VariantResult generate_variants(const std::vector<BehaviorTree>& trees, Generator& gen,
                                const CurationConfig& cfg) {
    std::set<std::string> seen;
    for (const BehaviorTree& tree : trees) seen.insert(canonical_form(tree.root));
    return generate_variants(trees, gen, cfg, seen);
}

std::string action_list_from_tree(const BehaviorTree& tree) {
    std::vector<const BTNode*> leaves;
    collect_leaves(tree.root, leaves);

    // id -> union of port names, in first-seen order of ids.
    std::vector<std::string> order;
    std::map<std::string, std::set<std::string>> ports;
    for (const BTNode* leaf : leaves) {
        if (!ports.count(leaf->id)) order.push_back(leaf->id);
        auto& names = ports[leaf->id];
        for (const auto& [name, value] : leaf->ports) {
            (void)value;
            names.insert(name);
        }
    }

    std::string out;
    for (const std::string& id : order) {
        out += id;
        out += "(";
        bool first = true;
        for (const std::string& name : ports[id]) {
            if (!first) out += ", ";
            out += name;
            first = false;
        }
        out += ")\n";
    }
    return out;
}

PrimitiveManifest manifest_from_tree(const BehaviorTree& tree, bool restrict_controls) {
    std::vector<const BTNode*> leaves;
    collect_leaves(tree.root, leaves);

    std::vector<std::string> order;
    std::map<std::string, std::set<std::string>> port_union;
    std::map<std::string, std::set<std::string>> port_intersection;
    for (const BTNode* leaf : leaves) {
        std::set<std::string> names;
        for (const auto& [name, value] : leaf->ports) {
            (void)value;
            names.insert(name);
        }
        if (!port_union.count(leaf->id)) {
            order.push_back(leaf->id);
            port_union[leaf->id] = names;
            port_intersection[leaf->id] = names;
        } else {
            port_union[leaf->id].insert(names.begin(), names.end());
            std::set<std::string> kept;
            for (const std::string& name : port_intersection[leaf->id]) {
                if (names.count(name)) kept.insert(name);
            }
            port_intersection[leaf->id] = std::move(kept);
        }
    }

    PrimitiveManifest manifest;
    for (const std::string& id : order) {
        PrimitiveSpec spec;
        spec.id = id;
        spec.kind = NodeKind::Action;
        for (const std::string& name : port_union[id]) {
            ParamSpec param;
            param.name = name;
            param.kind = ValueKind::Text;
            param.required = port_intersection[id].count(name) > 0;
            spec.params.push_back(std::move(param));
        }
        manifest.primitives.push_back(std::move(spec));
    }

    if (restrict_controls) {
        std::set<std::string> used;
        collect_control_tags(tree.root, used);
        manifest.allowed_control_nodes = std::move(used);
    } else {
        for (const std::string& tag : all_control_tags()) {
            manifest.allowed_control_nodes.insert(tag);
        }
    }
    return manifest;
}

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records) {
    CorpusStats stats;
    stats.record_count = records.size();
    if (records.empty()) return stats;

    std::size_t node_sum = 0;
    std::size_t transition_sum = 0;
    for (const DatasetRecord& record : records) {
        TreeStats ts = tree_stats(parse_bt(record.output));
        node_sum += ts.node_count;
        transition_sum += ts.transition_count;
        stats.max_nodes = std::max(stats.max_nodes, ts.node_count);
        stats.max_transitions = std::max(stats.max_transitions, ts.transition_count);
        stats.token_proxy_total += whitespace_tokens(record.instruction) +
                                   whitespace_tokens(record.input) +
                                   whitespace_tokens(record.output);
    }
    stats.mean_nodes = static_cast<double>(node_sum) / records.size();
    stats.mean_transitions = static_cast<double>(transition_sum) / records.size();
    return stats;
}

std::string CorpusStats::to_json() const {
    auto two_decimals = [](double v) {
        std::ostringstream out;
        out.setf(std::ios::fixed);
        out.precision(2);
        out << v;
        return out.str();
    };
    nlohmann::ordered_json doc;
    doc["seed_count"] = seed_count;
    doc["cleansed_count"] = cleansed_count;
    doc["round_counts"] = round_counts;
    doc["record_count"] = record_count;
    doc["mean_nodes"] = two_decimals(mean_nodes);
    doc["mean_transitions"] = two_decimals(mean_transitions);
    doc["max_nodes"] = max_nodes;
    doc["max_transitions"] = max_transitions;
    doc["token_proxy_total"] = token_proxy_total;
    return doc.dump(2);
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split_records(
    const std::vector<DatasetRecord>& records, double test_fraction, std::uint32_t seed) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw Error("split fraction must be in (0,1)");
    }
    std::vector<std::size_t> indices(records.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937 rng(seed);
    std::shuffle(indices.begin(), indices.end(), rng);

    const auto test_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(records.size()) * test_fraction));
    std::set<std::size_t> test_set(indices.begin(),
                                   indices.begin() + static_cast<std::ptrdiff_t>(test_count));

    std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (test_set.count(i) ? out.second : out.first).push_back(records[i]);
    }
    return out;
}

CurationResult curate(const std::vector<std::pair<std::string, std::string>>& seeds,
                      Generator& gen, const CurationConfig& cfg) {
    CurationResult result;
    result.stats.seed_count = seeds.size();

    CleanseResult cleansed = cleanse(seeds);
    result.stats.cleansed_count = cleansed.trees.size();
    result.rejects = std::move(cleansed.rejects);

    std::set<std::string> seen;
    for (const BehaviorTree& tree : cleansed.trees) seen.insert(canonical_form(tree.root));

    std::vector<BehaviorTree> merged;
    std::vector<BehaviorTree>* round_input = &cleansed.trees;
    std::vector<BehaviorTree> previous_round;
    for (int round = 0; round < cfg.rounds; ++round) {
        VariantResult variants = generate_variants(*round_input, gen, cfg, seen);
        result.stats.round_counts.push_back(variants.variants.size());
        for (RejectEntry& entry : variants.dropped) result.rejects.push_back(std::move(entry));
        previous_round = std::move(variants.variants);
        for (const BehaviorTree& tree : previous_round) merged.push_back(tree);
        round_input = &previous_round;
        if (previous_round.empty()) break;
    }
    if (merged.empty()) throw Error("curation produced no records");

    for (const BehaviorTree& tree : merged) {
        GenerationResponse described = gen.generate(description_prompt(tree, cfg));
        std::string description = truncate_words(described.raw_text,
                                                 cfg.max_description_words);
        if (description.empty()) {
            result.rejects.push_back({"record", "empty description"});
            continue;
        }
        PromptRecord shaped = build_prompt(description, action_list_from_tree(tree),
                                           GeneratorConfig{});
        DatasetRecord record;
        record.instruction = std::move(shaped.instruction);
        record.input = std::move(shaped.input);
        record.output = serialize_bt(tree);
        result.records.push_back(std::move(record));
    }
    if (result.records.empty()) throw Error("curation produced no records");

    CorpusStats stats = corpus_stats(result.records);
    stats.seed_count = result.stats.seed_count;
    stats.cleansed_count = result.stats.cleansed_count;
    stats.round_counts = result.stats.round_counts;
    result.stats = std::move(stats);

    auto [train, test] = split_records(result.records, cfg.split_test_fraction, cfg.split_seed);
    result.train = std::move(train);
    result.test = std::move(test);
    return result;
}

GenerationResponse MockCurationGenerator::generate(const PromptRecord& prompt) {
    if (prompt.input.find(kVariantMarker) != std::string::npos) {
        BehaviorTree source = parse_bt(extract_xml(prompt.input));
        BTNode root = source.root;
        switch (variant_counter_++ % 3) {
            case 0:
                root = make_decorator(NodeKind::RetryUntilSuccessful, std::move(root), 2);
                break;
            case 1:
                // One-directional so a transform can never reproduce an
                // earlier canonical form.
                if (root.kind == NodeKind::Sequence) {
                    root.kind = NodeKind::Fallback;
                } else {
                    root = make_control(NodeKind::Sequence, {std::move(root)});
                }
                break;
            default:
                root = make_decorator(NodeKind::Repeat, std::move(root), 1);
                break;
        }
        return {serialize_bt(BehaviorTree{source.tree_id, std::move(root)}), 0.0};
    }

    if (prompt.input.find(kDescriptionMarker) != std::string::npos) {
        BehaviorTree tree = parse_bt(extract_xml(prompt.input));
        TreeStats stats = tree_stats(tree);
        std::string description = "Carry out a routine of " +
                                  std::to_string(stats.node_count) + " steps using";
        std::size_t listed = 0;
        for (const auto& [id, count] : stats.leaf_ids) {
            if (listed == 8) {
                description += " and " +
                               std::to_string(stats.leaf_ids.size() - listed) + " more";
                break;
            }
            description += (listed ? ", " : " ") + id +
                           (count > 1 ? " (x" + std::to_string(count) + ")" : "");
            ++listed;
        }
        description += ".";
        return {description, 0.0};
    }

    throw Error("mock curation generator got an unrecognized prompt");
}

}  // namespace btforge::data
