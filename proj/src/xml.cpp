// SPDX-License-Identifier: Apache-2.0
#include "btforge/xml.hpp"

#include <cctype>
#include <sstream>

namespace btforge::xml {
namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    Element parse() {
        skip_bom();
        skip_misc();
        if (eof()) fail("empty document");
        Element root = parse_element();
        skip_misc();
        if (!eof()) fail("trailing content after document element");
        return root;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;

    [[noreturn]] void fail(const std::string& reason) const {
        throw ParseError(reason, line_, col_);
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    bool starts_with(std::string_view s) const {
        return text_.compare(pos_, s.size(), s) == 0;
    }

    void expect(char c, const char* what) {
        if (eof() || peek() != c) fail(std::string("expected ") + what);
        advance();
    }

    void skip_bom() {
        if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    // Whitespace, comments, the XML declaration and DOCTYPE between elements.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_comment();
            } else if (starts_with("<?")) {
                skip_until("?>", "unterminated processing instruction");
            } else if (starts_with("<!DOCTYPE")) {
                skip_until(">", "unterminated DOCTYPE");
            } else {
                return;
            }
        }
    }

    void skip_comment() {
        advance();  // <
        advance();  // !
        advance();  // -
        advance();  // -
        while (!eof()) {
            if (starts_with("-->")) {
                advance();
                advance();
                advance();
                return;
            }
            advance();
        }
        fail("unterminated comment");
    }

    void skip_until(std::string_view terminator, const char* err) {
        while (!eof()) {
            if (starts_with(terminator)) {
                for (std::size_t i = 0; i < terminator.size(); ++i) advance();
                return;
            }
            advance();
        }
        fail(err);
    }

    std::string parse_name(const char* what) {
        if (eof() || !is_name_start(peek())) fail(std::string("expected ") + what);
        std::string name;
        while (!eof() && is_name_char(peek())) name.push_back(advance());
        return name;
    }

    std::string parse_attr_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        char quote = advance();
        std::string value;
        for (;;) {
            if (eof()) fail("unterminated attribute value");
            char c = peek();
            if (c == quote) {
                advance();
                return value;
            }
            if (c == '<') fail("'<' not allowed in attribute value");
            if (c == '&') {
                value += parse_entity();
            } else {
                value.push_back(advance());
            }
        }
    }

    std::string parse_entity() {
        advance();  // &
        std::string name;
        while (!eof() && peek() != ';') {
            name.push_back(advance());
            if (name.size() > 8) fail("malformed entity reference");
        }
        expect(';', "';' after entity");
        if (name == "lt") return "<";
        if (name == "gt") return ">";
        if (name == "amp") return "&";
        if (name == "quot") return "\"";
        if (name == "apos") return "'";
        if (!name.empty() && name[0] == '#') {
            int base = 10;
            std::string digits = name.substr(1);
            if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
                base = 16;
                digits = digits.substr(1);
            }
            try {
                unsigned long code = std::stoul(digits, nullptr, base);
                if (code == 0 || code > 0x10FFFF) fail("character reference out of range");
                return encode_utf8(static_cast<char32_t>(code));
            } catch (const std::logic_error&) {
                fail("malformed character reference");
            }
        }
        fail("unknown entity '&" + name + ";'");
    }

    static std::string encode_utf8(char32_t cp) {
        std::string out;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        return out;
    }

    Element parse_element() {
        std::size_t elem_line = line_;
        std::size_t elem_col = col_;
        expect('<', "'<'");
        Element elem;
        elem.line = elem_line;
        elem.column = elem_col;
        elem.tag = parse_name("element name");

        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated element '" + elem.tag + "'");
            if (peek() == '/') {
                advance();
                expect('>', "'>' after '/'");
                return elem;  // self-closing
            }
            if (peek() == '>') {
                advance();
                parse_children(elem);
                return elem;
            }
            std::string name = parse_name("attribute name");
            for (const auto& [existing, _] : elem.attributes) {
                if (existing == name) fail("duplicate attribute '" + name + "'");
            }
            skip_ws();
            expect('=', "'=' after attribute name");
            skip_ws();
            elem.attributes.emplace_back(std::move(name), parse_attr_value());
        }
    }

    void parse_children(Element& elem) {
        for (;;) {
            skip_ws();
            if (eof()) fail("missing closing tag for '" + elem.tag + "'");
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            if (starts_with("</")) {
                advance();
                advance();
                std::string close = parse_name("closing tag name");
                if (close != elem.tag) {
                    fail("mismatched closing tag '" + close + "', expected '" + elem.tag + "'");
                }
                skip_ws();
                expect('>', "'>' in closing tag");
                return;
            }
            if (peek() == '<') {
                elem.children.push_back(parse_element());
                continue;
            }
            fail("unexpected text content inside '" + elem.tag + "'");
        }
    }
};

void write_element(const Element& elem, std::string& out, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out.push_back('<');
    out += elem.tag;
    for (const auto& [name, value] : elem.attributes) {
        out.push_back(' ');
        out += name;
        out += "=\"";
        out += escape_attribute(value);
        out.push_back('"');
    }
    if (elem.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const Element& child : elem.children) {
        write_element(child, out, depth + 1);
    }
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</";
    out += elem.tag;
    out += ">\n";
}

}  // namespace

const std::string* Element::attr(std::string_view name) const {
    for (const auto& [key, value] : attributes) {
        if (key == name) return &value;
    }
    return nullptr;
}

Element parse_document(std::string_view text) {
    return Scanner(text).parse();
}

bool is_well_formed(std::string_view text) {
    try {
        parse_document(text);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

std::string write_document(const Element& root) {
    std::string out;
    write_element(root, out, 0);
    return out;
}

std::string escape_attribute(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace btforge::xml
