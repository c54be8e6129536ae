// SPDX-License-Identifier: Apache-2.0
#include "btforge/validator.hpp"

#include <nlohmann/json.hpp>

#include <cctype>

#include "btforge/xml.hpp"

namespace btforge {
namespace {

bool parses_as_number(const std::string& text) {
    if (text.empty()) return false;
    std::size_t used = 0;
    try {
        (void)std::stod(text, &used);
    } catch (const std::logic_error&) {
        return false;
    }
    return used == text.size();
}

class TreeChecker {
public:
    TreeChecker(const PrimitiveManifest& manifest, std::vector<Violation>& out)
        : manifest_(manifest), out_(out) {}

    void check(BTNode& node, NodePath& path) {
        if (is_leaf(node.kind)) {
            check_leaf(node, path);
        } else {
            std::string tag(control_tag(node.kind));
            if (!manifest_.control_allowed(tag)) {
                add(ViolationCode::ForbiddenControlNode, path,
                    "control node '" + tag + "' is not allowed by the manifest");
            }
        }
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            path.push_back(i);
            check(node.children[i], path);
            path.pop_back();
        }
    }

private:
    const PrimitiveManifest& manifest_;
    std::vector<Violation>& out_;

    void add(ViolationCode code, const NodePath& path, std::string message) {
        out_.push_back(Violation{code, path, std::move(message)});
    }

    void check_leaf(BTNode& node, const NodePath& path) {
        const PrimitiveSpec* spec = manifest_.find(node.id);
        if (!spec) {
            add(ViolationCode::UnknownNode, path,
                "leaf '" + node.id + "' is not in the primitive manifest");
            return;
        }
        // The parser marks every unknown tag as Action; align the node with
        // the manifest's classification so conditions execute as conditions.
        node.kind = spec->kind;

        for (const auto& [name, value] : node.ports) {
            const ParamSpec* param = spec->param(name);
            if (!param) {
                add(ViolationCode::UnknownParam, path,
                    "leaf '" + node.id + "' has no param '" + name + "'");
                continue;
            }
            if (value.is_blackboard()) continue;  // a reference satisfies any kind
            switch (param->kind) {
                case ValueKind::Number:
                    if (!parses_as_number(value.text())) {
                        add(ViolationCode::BadParamKind, path,
                            "param '" + name + "' of '" + node.id + "' expects a number, got '" +
                                value.text() + "'");
                    }
                    break;
                case ValueKind::Enum: {
                    bool found = false;
                    for (const std::string& v : param->enum_values) {
                        if (v == value.text()) {
                            found = true;
                            break;
                        }
                    }
                    if (!found) {
                        add(ViolationCode::BadParamKind, path,
                            "param '" + name + "' of '" + node.id + "' must be one of its enum values, got '" +
                                value.text() + "'");
                    }
                    break;
                }
                case ValueKind::Text:
                case ValueKind::BlackboardAny:
                    break;
            }
        }
        for (const ParamSpec& param : spec->params) {
            if (param.required && !node.ports.count(param.name)) {
                add(ViolationCode::MissingParam, path,
                    "leaf '" + node.id + "' is missing required param '" + param.name + "'");
            }
        }
    }
};

}  // namespace

std::string_view violation_code_name(ViolationCode code) {
    switch (code) {
        case ViolationCode::SyntaxError: return "SyntaxError";
        case ViolationCode::UnknownNode: return "UnknownNode";
        case ViolationCode::UnknownParam: return "UnknownParam";
        case ViolationCode::MissingParam: return "MissingParam";
        case ViolationCode::BadParamKind: return "BadParamKind";
        case ViolationCode::ForbiddenControlNode: return "ForbiddenControlNode";
    }
    return "SyntaxError";
}

std::string ValidationReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["verdict"] = verdict();
    doc["violations"] = nlohmann::ordered_json::array();
    for (const Violation& v : violations) {
        nlohmann::ordered_json entry;
        entry["code"] = std::string(violation_code_name(v.code));
        entry["node_path"] = v.node_path;
        entry["message"] = v.message;
        doc["violations"].push_back(std::move(entry));
    }
    return doc.dump(2);
}

ValidationReport validate_tree(BehaviorTree& tree, const PrimitiveManifest& manifest) {
    ValidationReport report;
    NodePath path;
    TreeChecker(manifest, report.violations).check(tree.root, path);
    return report;
}

std::pair<ValidationReport, std::optional<BehaviorTree>> validate(
    std::string_view xml_text, const PrimitiveManifest& manifest) {
    BehaviorTree tree;
    try {
        tree = parse_bt(xml_text);
    } catch (const ParseError& e) {
        ValidationReport report;
        report.violations.push_back(Violation{ViolationCode::SyntaxError, {}, e.what()});
        return {std::move(report), std::nullopt};
    }
    ValidationReport report = validate_tree(tree, manifest);
    if (report.accepted()) {
        return {std::move(report), std::move(tree)};
    }
    return {std::move(report), std::nullopt};
}

bool action_coherent(std::string_view xml_text, const PrimitiveManifest& manifest) {
    BehaviorTree tree;
    try {
        tree = parse_bt(xml_text);
    } catch (const ParseError&) {
        return false;
    }
    for (const auto& [id, count] : tree_stats(tree).leaf_ids) {
        (void)count;
        if (!manifest.find(id)) return false;
    }
    return true;
}

bool xml_syntax_ok(std::string_view xml_text) {
    try {
        (void)parse_bt(xml_text);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

std::string extract_xml(const std::string& raw_model_output) {
    const std::string& text = raw_model_output;
    std::size_t search_from = 0;
    for (;;) {
        std::size_t start = text.find("<root", search_from);
        if (start == std::string::npos) break;
        // Must be a real tag boundary, not e.g. "<rooted".
        const std::size_t after = start + 5;
        if (after < text.size()) {
            char c = text[after];
            if (c != '>' && c != '/' && !std::isspace(static_cast<unsigned char>(c))) {
                search_from = start + 1;
                continue;
            }
        }
        std::size_t close_from = start;
        for (;;) {
            std::size_t close = text.find("</root", close_from);
            if (close == std::string::npos) break;
            std::size_t end = text.find('>', close);
            if (end == std::string::npos) break;
            std::string candidate = text.substr(start, end - start + 1);
            if (xml::is_well_formed(candidate)) return candidate;
            close_from = close + 1;
        }
        // Also handle a self-closing "<root .../>" span.
        std::size_t self_close = text.find("/>", start);
        if (self_close != std::string::npos) {
            std::string candidate = text.substr(start, self_close - start + 2);
            if (xml::is_well_formed(candidate)) return candidate;
        }
        search_from = start + 1;
    }
    throw ExtractError("no well-formed <root> document found in model output");
}

}  // namespace btforge
