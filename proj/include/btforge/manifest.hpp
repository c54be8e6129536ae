// SPDX-License-Identifier: Apache-2.0
//
// The closed action/condition vocabulary, loaded from YAML. A manifest is
// immutable after load and shareable across threads.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "btforge/bt_model.hpp"
#include "btforge/errors.hpp"

namespace btforge {

enum class ValueKind { Text, Number, Enum, BlackboardAny };

std::string_view value_kind_name(ValueKind kind);

struct ParamSpec {
    std::string name;
    ValueKind kind = ValueKind::Text;
    bool required = false;
    std::vector<std::string> enum_values;  // populated when kind == Enum

    friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct PrimitiveSpec {
    std::string id;
    NodeKind kind = NodeKind::Action;  // Action or Condition
    std::vector<ParamSpec> params;
    std::string description;

    const ParamSpec* param(std::string_view name) const;

    friend bool operator==(const PrimitiveSpec&, const PrimitiveSpec&) = default;
};

struct PrimitiveManifest {
    std::vector<PrimitiveSpec> primitives;
    std::set<std::string> allowed_control_nodes;

    const PrimitiveSpec* find(std::string_view id) const;
    bool control_allowed(std::string_view tag) const {
        return allowed_control_nodes.count(std::string(tag)) > 0;
    }

    friend bool operator==(const PrimitiveManifest&, const PrimitiveManifest&) = default;
};

/// Parses a YAML manifest. Throws ManifestError on duplicate ids, unknown
/// value kinds, an empty primitive list, or malformed YAML.
PrimitiveManifest load_manifest(const std::string& yaml_text);

PrimitiveManifest load_manifest_file(const std::string& path);

/// Canonical YAML form; load_manifest(save_manifest(m)) == m.
std::string save_manifest(const PrimitiveManifest& m);

/// One line per primitive, "id(param: kind, ...) - description", in manifest
/// order. Byte-identical across runs for the same manifest.
std::string render_action_list(const PrimitiveManifest& m);

}  // namespace btforge
