// SPDX-License-Identifier: Apache-2.0
#include "btforge/bt_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "btforge/xml.hpp"

namespace btforge {
namespace {

struct TagEntry {
    NodeKind kind;
    const char* tag;
};

constexpr TagEntry kControlTags[] = {
    {NodeKind::Sequence, "Sequence"},
    {NodeKind::Fallback, "Fallback"},
    {NodeKind::ReactiveFallback, "ReactiveFallback"},
    {NodeKind::Parallel, "Parallel"},
    {NodeKind::Inverter, "Inverter"},
    {NodeKind::RetryUntilSuccessful, "RetryUntilSuccessful"},
    {NodeKind::Repeat, "Repeat"},
    {NodeKind::Timeout, "Timeout"},
    {NodeKind::ForceSuccess, "ForceSuccess"},
    {NodeKind::ForceFailure, "ForceFailure"},
};

int parse_count_attr(const xml::Element& elem, const char* attr_name) {
    const std::string* raw = elem.attr(attr_name);
    if (!raw) {
        throw ParseError(elem.tag + " requires attribute '" + attr_name + "'", elem.line,
                         elem.column);
    }
    try {
        std::size_t used = 0;
        int value = std::stoi(*raw, &used);
        if (used != raw->size()) throw std::invalid_argument("trailing");
        return value;
    } catch (const std::logic_error&) {
        throw ParseError("attribute '" + std::string(attr_name) + "' must be an integer, got '" +
                             *raw + "'",
                         elem.line, elem.column);
    }
}

bool is_structural_attr(NodeKind kind, std::string_view name) {
    switch (kind) {
        case NodeKind::Parallel:
            return name == "success_count" || name == "failure_count";
        case NodeKind::RetryUntilSuccessful:
            return name == "num_attempts";
        case NodeKind::Repeat:
            return name == "num_cycles";
        case NodeKind::Timeout:
            return name == "max_ticks";
        default:
            return false;
    }
}

class TreeBuilder {
public:
    explicit TreeBuilder(const xml::Element& root_elem) : root_elem_(root_elem) {}

    BehaviorTree build() {
        if (root_elem_.tag != "root") {
            throw ParseError("document element must be <root>, got <" + root_elem_.tag + ">",
                             root_elem_.line, root_elem_.column);
        }
        for (const xml::Element& child : root_elem_.children) {
            if (child.tag != "BehaviorTree") {
                throw ParseError("unknown element <" + child.tag + "> under <root>", child.line,
                                 child.column);
            }
            const std::string* id = child.attr("ID");
            std::string tree_id = id ? *id : "MainTree";
            if (trees_.count(tree_id)) {
                throw ParseError("duplicate BehaviorTree ID '" + tree_id + "'", child.line,
                                 child.column);
            }
            trees_.emplace(tree_id, &child);
        }
        if (trees_.empty()) {
            throw ParseError("missing <BehaviorTree> element", root_elem_.line,
                             root_elem_.column);
        }

        std::string main_id;
        if (const std::string* main = root_elem_.attr("main_tree_to_execute")) {
            main_id = *main;
            if (!trees_.count(main_id)) {
                throw ParseError("main_tree_to_execute references unknown tree '" + main_id + "'",
                                 root_elem_.line, root_elem_.column);
            }
        } else if (trees_.size() == 1) {
            main_id = trees_.begin()->first;
        } else {
            throw ParseError("multiple trees defined but no main_tree_to_execute",
                             root_elem_.line, root_elem_.column);
        }
        return BehaviorTree{main_id, build_tree(main_id, root_elem_)};
    }

private:
    const xml::Element& root_elem_;
    std::map<std::string, const xml::Element*> trees_;
    std::set<std::string> in_progress_;

    BTNode build_tree(const std::string& tree_id, const xml::Element& ref_site) {
        auto it = trees_.find(tree_id);
        if (it == trees_.end()) {
            throw ParseError("SubTree references unknown tree '" + tree_id + "'", ref_site.line,
                             ref_site.column);
        }
        if (!in_progress_.insert(tree_id).second) {
            throw ParseError("SubTree cycle through '" + tree_id + "'", ref_site.line,
                             ref_site.column);
        }
        const xml::Element& elem = *it->second;
        if (elem.children.size() != 1) {
            throw ParseError("BehaviorTree '" + tree_id + "' must have exactly one child node",
                             elem.line, elem.column);
        }
        BTNode node = build_node(elem.children[0]);
        in_progress_.erase(tree_id);
        return node;
    }

    BTNode build_node(const xml::Element& elem) {
        if (elem.tag == "SubTree") {
            const std::string* id = elem.attr("ID");
            if (!id) throw ParseError("SubTree requires an ID attribute", elem.line, elem.column);
            for (const auto& [name, _] : elem.attributes) {
                if (name != "ID" && name != "name") {
                    throw ParseError("SubTree port remapping is not supported (attribute '" +
                                         name + "')",
                                     elem.line, elem.column);
                }
            }
            if (!elem.children.empty()) {
                throw ParseError("SubTree cannot have children", elem.line, elem.column);
            }
            return build_tree(*id, elem);
        }

        BTNode node;
        if (auto kind = control_kind_from_tag(elem.tag)) {
            node.kind = *kind;
        } else {
            // Unknown tags are leaves; whether the id is legal is the
            // validator's concern, not the parser's.
            node.kind = NodeKind::Action;
            node.id = elem.tag;
        }

        for (const auto& [name, value] : elem.attributes) {
            if (name == "name") {
                node.name = value;
                continue;
            }
            if (is_structural_attr(node.kind, name)) continue;
            try {
                node.ports.emplace(name, PortValue::from_attribute(value));
            } catch (const Error& e) {
                throw ParseError(std::string(e.what()) + " (port '" + name + "')", elem.line,
                                 elem.column);
            }
        }

        for (const xml::Element& child : elem.children) {
            node.children.push_back(build_node(child));
        }

        check_arity(node, elem);
        return node;
    }

    void check_arity(BTNode& node, const xml::Element& elem) {
        const std::size_t n = node.children.size();
        if (is_leaf(node.kind)) {
            if (n != 0) {
                throw ParseError("leaf node '" + node.id + "' cannot have children", elem.line,
                                 elem.column);
            }
            return;
        }
        if (is_decorator(node.kind)) {
            if (n != 1) {
                throw ParseError("decorator must have exactly one child, <" + elem.tag +
                                     "> has " + std::to_string(n),
                                 elem.line, elem.column);
            }
            if (node.kind == NodeKind::RetryUntilSuccessful) {
                node.limit = parse_count_attr(elem, "num_attempts");
            } else if (node.kind == NodeKind::Repeat) {
                node.limit = parse_count_attr(elem, "num_cycles");
            } else if (node.kind == NodeKind::Timeout) {
                node.limit = parse_count_attr(elem, "max_ticks");
            }
            if ((node.kind == NodeKind::RetryUntilSuccessful || node.kind == NodeKind::Repeat ||
                 node.kind == NodeKind::Timeout) &&
                node.limit < 1) {
                throw ParseError("<" + elem.tag + "> count must be >= 1", elem.line, elem.column);
            }
            return;
        }
        // Composite.
        if (n == 0) {
            throw ParseError("control node <" + elem.tag + "> must have at least one child",
                             elem.line, elem.column);
        }
        if (node.kind == NodeKind::Parallel) {
            const int count = static_cast<int>(n);
            int st = elem.attr("success_count") ? parse_count_attr(elem, "success_count") : count;
            int ft = elem.attr("failure_count") ? parse_count_attr(elem, "failure_count") : 1;
            if (st == -1) st = count;
            if (ft == -1) ft = count;
            if (st < 1 || st > count) {
                throw ParseError("Parallel success_count " + std::to_string(st) +
                                     " out of range [1," + std::to_string(count) + "]",
                                 elem.line, elem.column);
            }
            if (ft < 1 || ft > count) {
                throw ParseError("Parallel failure_count " + std::to_string(ft) +
                                     " out of range [1," + std::to_string(count) + "]",
                                 elem.line, elem.column);
            }
            node.success_threshold = st;
            node.failure_threshold = ft;
        }
    }
};

xml::Element node_to_element(const BTNode& node) {
    xml::Element elem;
    elem.tag = is_leaf(node.kind) ? node.id : std::string(control_tag(node.kind));
    if (!node.name.empty()) elem.attributes.emplace_back("name", node.name);
    switch (node.kind) {
        case NodeKind::Parallel:
            elem.attributes.emplace_back("success_count",
                                         std::to_string(node.success_threshold));
            elem.attributes.emplace_back("failure_count",
                                         std::to_string(node.failure_threshold));
            break;
        case NodeKind::RetryUntilSuccessful:
            elem.attributes.emplace_back("num_attempts", std::to_string(node.limit));
            break;
        case NodeKind::Repeat:
            elem.attributes.emplace_back("num_cycles", std::to_string(node.limit));
            break;
        case NodeKind::Timeout:
            elem.attributes.emplace_back("max_ticks", std::to_string(node.limit));
            break;
        default:
            break;
    }
    for (const auto& [name, value] : node.ports) {
        elem.attributes.emplace_back(name, value.to_attribute());
    }
    for (const BTNode& child : node.children) {
        elem.children.push_back(node_to_element(child));
    }
    return elem;
}

void collect_stats(const BTNode& node, std::size_t level, TreeStats& stats) {
    ++stats.node_count;
    stats.depth = std::max(stats.depth, level);
    if (is_leaf(node.kind)) {
        ++stats.leaf_ids[node.id];
    }
    for (const BTNode& child : node.children) {
        ++stats.transition_count;
        collect_stats(child, level + 1, stats);
    }
}

}  // namespace

std::string_view control_tag(NodeKind k) {
    for (const TagEntry& entry : kControlTags) {
        if (entry.kind == k) return entry.tag;
    }
    return {};
}

std::optional<NodeKind> control_kind_from_tag(std::string_view tag) {
    for (const TagEntry& entry : kControlTags) {
        if (entry.tag == tag) return entry.kind;
    }
    return std::nullopt;
}

const std::vector<std::string>& all_control_tags() {
    static const std::vector<std::string> tags = [] {
        std::vector<std::string> out;
        for (const TagEntry& entry : kControlTags) out.emplace_back(entry.tag);
        return out;
    }();
    return tags;
}

PortValue PortValue::literal(std::string text) {
    PortValue v;
    v.is_ref_ = false;
    v.value_ = std::move(text);
    return v;
}

PortValue PortValue::blackboard(std::string key) {
    if (!valid_key(key)) {
        throw Error("invalid blackboard key '" + key + "'");
    }
    PortValue v;
    v.is_ref_ = true;
    v.value_ = std::move(key);
    return v;
}

bool PortValue::valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (c == '{' || c == '}' || std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::string PortValue::to_attribute() const {
    if (is_ref_) return "{" + value_ + "}";
    return value_;
}

PortValue PortValue::from_attribute(const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '{' && raw.back() == '}') {
        return blackboard(raw.substr(1, raw.size() - 2));
    }
    return literal(raw);
}

BTNode make_action(std::string id, PortMap ports) {
    BTNode node;
    node.kind = NodeKind::Action;
    node.id = std::move(id);
    node.ports = std::move(ports);
    return node;
}

BTNode make_condition(std::string id, PortMap ports) {
    BTNode node = make_action(std::move(id), std::move(ports));
    node.kind = NodeKind::Condition;
    return node;
}

BTNode make_control(NodeKind kind, std::vector<BTNode> children) {
    BTNode node;
    node.kind = kind;
    node.children = std::move(children);
    if (kind == NodeKind::Parallel) {
        node.success_threshold = static_cast<int>(node.children.size());
        node.failure_threshold = 1;
    }
    return node;
}

BTNode make_decorator(NodeKind kind, BTNode child, int limit) {
    BTNode node;
    node.kind = kind;
    node.limit = limit;
    node.children.push_back(std::move(child));
    return node;
}

std::string path_to_string(const NodePath& path) {
    std::string out = "[";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(path[i]);
    }
    return out + "]";
}

BehaviorTree parse_bt(std::string_view xml_text) {
    xml::Element doc = xml::parse_document(xml_text);
    return TreeBuilder(doc).build();
}

std::string serialize_bt(const BehaviorTree& tree) {
    xml::Element root;
    root.tag = "root";
    root.attributes.emplace_back("BTCPP_format", "4");
    xml::Element bt;
    bt.tag = "BehaviorTree";
    bt.attributes.emplace_back("ID", tree.tree_id);
    bt.children.push_back(node_to_element(tree.root));
    root.children.push_back(std::move(bt));
    return xml::write_document(root);
}

TreeStats tree_stats(const BTNode& root) {
    TreeStats stats;
    collect_stats(root, 1, stats);
    return stats;
}

TreeStats tree_stats(const BehaviorTree& tree) {
    return tree_stats(tree.root);
}

namespace {
BTNode* walk_path(BTNode& node, const NodePath& path) {
    BTNode* current = &node;
    for (std::size_t index : path) {
        if (index >= current->children.size()) return nullptr;
        current = &current->children[index];
    }
    return current;
}
}  // namespace

BehaviorTree splice_subtree(const BehaviorTree& tree, const NodePath& path,
                            const BTNode& replacement) {
    BehaviorTree out = tree;
    BTNode* target = walk_path(out.root, path);
    if (!target) {
        throw PathError("path " + path_to_string(path) + " does not resolve in tree '" +
                        tree.tree_id + "'");
    }
    *target = replacement;
    return out;
}

const BTNode& node_at(const BehaviorTree& tree, const NodePath& path) {
    const BTNode* current = &tree.root;
    for (std::size_t index : path) {
        if (index >= current->children.size()) {
            throw PathError("path " + path_to_string(path) + " does not resolve in tree '" +
                            tree.tree_id + "'");
        }
        current = &current->children[index];
    }
    return *current;
}

std::string describe_path(const BehaviorTree& tree, const NodePath& path) {
    const BTNode* current = &tree.root;
    std::string out;
    auto append = [&out](const BTNode& node) {
        if (!out.empty()) out += "/";
        if (is_leaf(node.kind)) {
            out += node.id;
        } else {
            out += control_tag(node.kind);
        }
        if (!node.name.empty()) out += "(" + node.name + ")";
    };
    append(*current);
    for (std::size_t index : path) {
        if (index >= current->children.size()) {
            throw PathError("path " + path_to_string(path) + " does not resolve in tree '" +
                            tree.tree_id + "'");
        }
        current = &current->children[index];
        append(*current);
    }
    return out;
}

}  // namespace btforge
