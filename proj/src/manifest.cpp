// SPDX-License-Identifier: Apache-2.0
#include "btforge/manifest.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace btforge {
namespace {

ValueKind value_kind_from_name(const std::string& name) {
    if (name == "text") return ValueKind::Text;
    if (name == "number") return ValueKind::Number;
    if (name == "enum") return ValueKind::Enum;
    if (name == "blackboard-any") return ValueKind::BlackboardAny;
    throw ManifestError("unknown value kind '" + name + "'");
}

ParamSpec parse_param(const YAML::Node& node) {
    if (!node.IsMap()) throw ManifestError("param entry must be a map");
    ParamSpec spec;
    if (!node["name"]) throw ManifestError("param missing 'name'");
    spec.name = node["name"].as<std::string>();
    if (spec.name.empty()) throw ManifestError("param name must be non-empty");
    spec.kind = node["type"] ? value_kind_from_name(node["type"].as<std::string>())
                             : ValueKind::Text;
    spec.required = node["required"] ? node["required"].as<bool>() : false;
    if (spec.kind == ValueKind::Enum) {
        if (!node["values"] || !node["values"].IsSequence() || node["values"].size() == 0) {
            throw ManifestError("enum param '" + spec.name + "' requires a non-empty 'values' list");
        }
        for (const auto& v : node["values"]) {
            spec.enum_values.push_back(v.as<std::string>());
        }
    }
    return spec;
}

PrimitiveSpec parse_primitive(const YAML::Node& node) {
    if (!node.IsMap()) throw ManifestError("primitive entry must be a map");
    PrimitiveSpec spec;
    if (!node["id"]) throw ManifestError("primitive missing 'id'");
    spec.id = node["id"].as<std::string>();
    if (spec.id.empty()) throw ManifestError("primitive id must be non-empty");

    std::string kind = node["kind"] ? node["kind"].as<std::string>() : "action";
    if (kind == "action") {
        spec.kind = NodeKind::Action;
    } else if (kind == "condition") {
        spec.kind = NodeKind::Condition;
    } else {
        throw ManifestError("primitive '" + spec.id + "' has unknown kind '" + kind + "'");
    }

    if (node["description"]) spec.description = node["description"].as<std::string>();
    if (node["params"]) {
        if (!node["params"].IsSequence()) {
            throw ManifestError("primitive '" + spec.id + "' params must be a list");
        }
        for (const auto& p : node["params"]) {
            ParamSpec param = parse_param(p);
            if (spec.param(param.name)) {
                throw ManifestError("duplicate param '" + param.name + "' in primitive '" +
                                    spec.id + "'");
            }
            spec.params.push_back(std::move(param));
        }
    }
    return spec;
}

}  // namespace

std::string_view value_kind_name(ValueKind kind) {
    switch (kind) {
        case ValueKind::Text: return "text";
        case ValueKind::Number: return "number";
        case ValueKind::Enum: return "enum";
        case ValueKind::BlackboardAny: return "blackboard-any";
    }
    return "text";
}

const ParamSpec* PrimitiveSpec::param(std::string_view name) const {
    for (const ParamSpec& p : params) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const PrimitiveSpec* PrimitiveManifest::find(std::string_view id) const {
    for (const PrimitiveSpec& p : primitives) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

PrimitiveManifest load_manifest(const std::string& yaml_text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ManifestError(std::string("malformed YAML: ") + e.what());
    }
    if (!doc.IsMap() || !doc["primitives"]) {
        throw ManifestError("manifest requires a top-level 'primitives' list");
    }

    PrimitiveManifest manifest;
    for (const auto& entry : doc["primitives"]) {
        PrimitiveSpec spec = parse_primitive(entry);
        if (manifest.find(spec.id)) {
            throw ManifestError("duplicate primitive id '" + spec.id + "'");
        }
        manifest.primitives.push_back(std::move(spec));
    }
    if (manifest.primitives.empty()) {
        throw ManifestError("manifest defines no primitives");
    }

    if (doc["control_nodes"]) {
        for (const auto& entry : doc["control_nodes"]) {
            std::string tag = entry.as<std::string>();
            if (!control_kind_from_tag(tag)) {
                throw ManifestError("unknown control node tag '" + tag + "'");
            }
            manifest.allowed_control_nodes.insert(std::move(tag));
        }
    } else {
        for (const std::string& tag : all_control_tags()) {
            manifest.allowed_control_nodes.insert(tag);
        }
    }
    return manifest;
}

PrimitiveManifest load_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_manifest(buf.str());
}

std::string save_manifest(const PrimitiveManifest& m) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "primitives" << YAML::Value << YAML::BeginSeq;
    for (const PrimitiveSpec& spec : m.primitives) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << spec.id;
        out << YAML::Key << "kind" << YAML::Value
            << (spec.kind == NodeKind::Condition ? "condition" : "action");
        if (!spec.params.empty()) {
            out << YAML::Key << "params" << YAML::Value << YAML::BeginSeq;
            for (const ParamSpec& p : spec.params) {
                out << YAML::BeginMap;
                out << YAML::Key << "name" << YAML::Value << p.name;
                out << YAML::Key << "type" << YAML::Value << std::string(value_kind_name(p.kind));
                out << YAML::Key << "required" << YAML::Value << p.required;
                if (p.kind == ValueKind::Enum) {
                    out << YAML::Key << "values" << YAML::Value << YAML::BeginSeq;
                    for (const std::string& v : p.enum_values) out << v;
                    out << YAML::EndSeq;
                }
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
        }
        if (!spec.description.empty()) {
            out << YAML::Key << "description" << YAML::Value << spec.description;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "control_nodes" << YAML::Value << YAML::BeginSeq;
    for (const std::string& tag : m.allowed_control_nodes) out << tag;
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string render_action_list(const PrimitiveManifest& m) {
    std::string out;
    for (const PrimitiveSpec& spec : m.primitives) {
        out += spec.id;
        out += "(";
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            const ParamSpec& p = spec.params[i];
            if (i) out += ", ";
            out += p.name;
            if (!p.required) out += "?";
            out += ": ";
            if (p.kind == ValueKind::Enum) {
                out += "enum(";
                for (std::size_t j = 0; j < p.enum_values.size(); ++j) {
                    if (j) out += "|";
                    out += p.enum_values[j];
                }
                out += ")";
            } else {
                out += value_kind_name(p.kind);
            }
        }
        out += ")";
        if (spec.kind == NodeKind::Condition) out += " [condition]";
        if (!spec.description.empty()) {
            out += " - ";
            out += spec.description;
        }
        out += "\n";
    }
    return out;
}

}  // namespace btforge
