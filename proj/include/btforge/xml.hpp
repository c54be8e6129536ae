// SPDX-License-Identifier: Apache-2.0
//
// Minimal XML reader/writer covering the element-and-attribute subset used by
// BehaviorTree.CPP documents: prolog, comments, nested elements, quoted
// attributes, character entities. No text content, namespaces or DTDs.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btforge/errors.hpp"

namespace btforge::xml {

struct Element {
    std::string tag;
    // Attributes in document order; duplicate names are a parse error.
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    std::size_t line = 0;
    std::size_t column = 0;

    const std::string* attr(std::string_view name) const;
};

/// Parses a full document and returns its single top-level element.
/// Throws ParseError with position on malformed input.
Element parse_document(std::string_view text);

/// Scans the text and reports whether it is a well-formed document per the
/// subset above. Never throws.
bool is_well_formed(std::string_view text);

/// Serializes an element tree with two-space indentation. Attribute values
/// are entity-escaped so the output always re-parses.
std::string write_document(const Element& root);

std::string escape_attribute(std::string_view value);

}  // namespace btforge::xml
