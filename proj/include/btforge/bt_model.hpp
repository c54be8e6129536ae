// SPDX-License-Identifier: Apache-2.0
//
// Typed behavior-tree model plus XML parse/serialize for a BehaviorTree.CPP
// compatible dialect. Values are immutable after construction and safe to
// share across threads; every operation here is a pure function.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "btforge/errors.hpp"

namespace btforge {

enum class NodeKind {
    Sequence,
    Fallback,
    ReactiveFallback,
    Parallel,
    Inverter,
    RetryUntilSuccessful,
    Repeat,
    Timeout,
    ForceSuccess,
    ForceFailure,
    Action,
    Condition,
};

constexpr bool is_leaf(NodeKind k) {
    return k == NodeKind::Action || k == NodeKind::Condition;
}

constexpr bool is_decorator(NodeKind k) {
    switch (k) {
        case NodeKind::Inverter:
        case NodeKind::RetryUntilSuccessful:
        case NodeKind::Repeat:
        case NodeKind::Timeout:
        case NodeKind::ForceSuccess:
        case NodeKind::ForceFailure:
            return true;
        default:
            return false;
    }
}

constexpr bool is_composite(NodeKind k) {
    switch (k) {
        case NodeKind::Sequence:
        case NodeKind::Fallback:
        case NodeKind::ReactiveFallback:
        case NodeKind::Parallel:
            return true;
        default:
            return false;
    }
}

/// Element tag for a control-flow kind ("Sequence", "Inverter", ...).
/// Leaves have no fixed tag; their tag is the primitive id.
std::string_view control_tag(NodeKind k);

/// Resolves a tag against the control-node vocabulary. Unknown tags are not
/// an error here; they become Action leaves at parse time.
std::optional<NodeKind> control_kind_from_tag(std::string_view tag);

/// The ordered list of every control tag in the dialect.
const std::vector<std::string>& all_control_tags();

/// A port binding: either a literal string or a `{key}` blackboard reference.
class PortValue {
public:
    PortValue() = default;

    static PortValue literal(std::string text);
    /// Throws Error when the key is empty or contains braces/whitespace.
    static PortValue blackboard(std::string key);

    bool is_blackboard() const noexcept { return is_ref_; }
    /// Literal text, or the key for blackboard references.
    const std::string& text() const noexcept { return value_; }

    /// Textual attribute form: literals verbatim, references as "{key}".
    std::string to_attribute() const;
    /// Inverse of to_attribute. A value of the exact shape "{key}" becomes a
    /// reference; anything else is a literal. Throws Error on bad key grammar.
    static PortValue from_attribute(const std::string& raw);

    static bool valid_key(std::string_view key);

    friend bool operator==(const PortValue&, const PortValue&) = default;
    friend bool operator<(const PortValue& a, const PortValue& b) {
        return std::tie(a.is_ref_, a.value_) < std::tie(b.is_ref_, b.value_);
    }

private:
    bool is_ref_ = false;
    std::string value_;
};

using PortMap = std::map<std::string, PortValue>;

struct BTNode {
    NodeKind kind = NodeKind::Action;
    /// Primitive id for Action/Condition leaves; empty otherwise.
    std::string id;
    /// Optional display label (the `name` attribute).
    std::string name;
    /// Parallel thresholds; meaningful only when kind == Parallel.
    int success_threshold = 0;
    int failure_threshold = 0;
    /// Counted-decorator budget: num_attempts, num_cycles or max_ticks.
    int limit = 0;
    PortMap ports;
    std::vector<BTNode> children;

    friend bool operator==(const BTNode&, const BTNode&) = default;
};

BTNode make_action(std::string id, PortMap ports = {});
BTNode make_condition(std::string id, PortMap ports = {});
BTNode make_control(NodeKind kind, std::vector<BTNode> children);
BTNode make_decorator(NodeKind kind, BTNode child, int limit = 0);

struct BehaviorTree {
    std::string tree_id;
    BTNode root;

    friend bool operator==(const BehaviorTree&, const BehaviorTree&) = default;
};

struct TreeStats {
    std::size_t node_count = 0;
    std::size_t transition_count = 0;  // parent->child edges
    std::size_t depth = 0;
    std::map<std::string, int> leaf_ids;  // primitive id -> multiplicity

    friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

/// Index path from the root; empty addresses the root itself.
using NodePath = std::vector<std::size_t>;

std::string path_to_string(const NodePath& path);

/// Parses a BT XML document. Multi-tree documents have their <SubTree>
/// references inlined; `main_tree_to_execute` selects the result when more
/// than one tree is defined. Throws ParseError.
BehaviorTree parse_bt(std::string_view xml_text);

/// Deterministic serialization: name attribute first, structural attributes
/// next, ports alphabetically. parse_bt(serialize_bt(t)) == t structurally.
std::string serialize_bt(const BehaviorTree& tree);

TreeStats tree_stats(const BehaviorTree& tree);
TreeStats tree_stats(const BTNode& root);

/// Returns a copy of `tree` with the node at `path` replaced by
/// `replacement`. The input tree is left untouched. Throws PathError.
BehaviorTree splice_subtree(const BehaviorTree& tree, const NodePath& path,
                            const BTNode& replacement);

/// Resolves a path to a node. Throws PathError when it does not resolve.
const BTNode& node_at(const BehaviorTree& tree, const NodePath& path);

/// Root-to-node display names along a path, e.g. "Sequence/Fallback/MoveTo".
std::string describe_path(const BehaviorTree& tree, const NodePath& path);

}  // namespace btforge
