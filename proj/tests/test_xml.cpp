// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "btforge/xml.hpp"

using namespace btforge;

TEST_CASE("xml parses nested elements with attributes") {
    auto doc = xml::parse_document(
        "<?xml version=\"1.0\"?>\n"
        "<!-- a tree -->\n"
        "<root BTCPP_format=\"4\">\n"
        "  <BehaviorTree ID=\"Main\">\n"
        "    <Sequence><MoveTo goal=\"kitchen\"/></Sequence>\n"
        "  </BehaviorTree>\n"
        "</root>");
    CHECK(doc.tag == "root");
    REQUIRE(doc.children.size() == 1);
    CHECK(*doc.children[0].attr("ID") == "Main");
    CHECK(doc.children[0].children[0].children[0].tag == "MoveTo");
}

TEST_CASE("xml decodes entities in attribute values") {
    auto doc = xml::parse_document("<root v=\"a &lt;b&gt; &amp; &quot;c&quot; &#65;\"/>");
    CHECK(*doc.attr("v") == "a <b> & \"c\" A");
}

TEST_CASE("xml reports positions on errors") {
    try {
        xml::parse_document("<root>\n  <Seq></Wrong>\n</root>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("mismatched") != std::string::npos);
    }
}

TEST_CASE("xml rejects malformed documents") {
    CHECK(!xml::is_well_formed("<root><a></root>"));
    CHECK(!xml::is_well_formed("<root>"));
    CHECK(!xml::is_well_formed("plain text"));
    CHECK(!xml::is_well_formed("<root><a/><a/>"));
    CHECK(!xml::is_well_formed("<root a=\"1\" a=\"2\"/>"));
    CHECK(!xml::is_well_formed("<root>stray text</root>"));
    CHECK(!xml::is_well_formed(""));
    CHECK(xml::is_well_formed("<root/>"));
}

TEST_CASE("xml write/parse round-trips attribute escaping") {
    xml::Element elem;
    elem.tag = "root";
    elem.attributes.emplace_back("v", "quote\" amp& lt< gt> apos'");
    std::string text = xml::write_document(elem);
    auto back = xml::parse_document(text);
    CHECK(*back.attr("v") == "quote\" amp& lt< gt> apos'");
}
