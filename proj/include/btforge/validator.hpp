// SPDX-License-Identifier: Apache-2.0
//
// Inference-time validation: rejects malformed or out-of-vocabulary trees
// before anything reaches an executor. Total functions, no exceptions escape.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "btforge/bt_model.hpp"
#include "btforge/manifest.hpp"

namespace btforge {

enum class ViolationCode {
    SyntaxError,
    UnknownNode,
    UnknownParam,
    MissingParam,
    BadParamKind,
    ForbiddenControlNode,
};

std::string_view violation_code_name(ViolationCode code);

struct Violation {
    ViolationCode code;
    NodePath node_path;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool accepted() const noexcept { return violations.empty(); }
    std::string verdict() const { return accepted() ? "Accept" : "Reject"; }

    /// Deterministic JSON rendering for CLI output.
    std::string to_json() const;

    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Parses and checks a candidate document against the closed vocabulary.
/// On Accept the returned tree is execution-ready: leaves are reclassified
/// to the manifest's Action/Condition kinds. On Reject the tree is absent.
std::pair<ValidationReport, std::optional<BehaviorTree>> validate(
    std::string_view xml_text, const PrimitiveManifest& manifest);

/// Checks an already-parsed tree; used when the XML step was done elsewhere.
ValidationReport validate_tree(BehaviorTree& tree, const PrimitiveManifest& manifest);

/// The Action Coherency predicate: the candidate parses and every leaf id is
/// in the manifest. Port and control-node checks are deliberately excluded.
bool action_coherent(std::string_view xml_text, const PrimitiveManifest& manifest);

/// The XML Syntax predicate: the candidate parses as a dialect document.
bool xml_syntax_ok(std::string_view xml_text);

/// Returns the first substring spanning a well-formed <root ...> document,
/// stripping code fences and surrounding prose. Throws ExtractError.
std::string extract_xml(const std::string& raw_model_output);

}  // namespace btforge
