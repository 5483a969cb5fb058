#pragma once

// Regular expressions over edge-label identifiers.  Grammar:
//   alt  = cat ('|' cat)*
//   cat  = post+
//   post = atom ('*' | '+' | '?')*
//   atom = label | 'eps' | '(' alt ')'
// Labels are identifiers ([A-Za-z_][A-Za-z0-9_]*); 'eps' is the empty word.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rpq/graph.hpp"

namespace rpq {

struct RegexSyntaxError : std::runtime_error {
    std::size_t position;  // byte offset into the pattern
    RegexSyntaxError(std::size_t pos, const std::string& reason)
        : std::runtime_error("regex position " + std::to_string(pos) + ": " + reason), position(pos) {}
};

struct RegexAst {
    enum class Kind { Atom, Epsilon, Concat, Alt, Star, Plus, Opt };

    Kind kind = Kind::Epsilon;
    std::string label;               // Atom only
    std::vector<RegexAst> children;  // Concat/Alt: >=2, Star/Plus/Opt: exactly 1
};

namespace detail {

class RegexParser {
  public:
    explicit RegexParser(std::string_view text) : text_(text) {}

    RegexAst parse() {
        RegexAst ast = parse_alt();
        skip_ws();
        if (pos_ != text_.size()) throw RegexSyntaxError(pos_, "unexpected character");
        return ast;
    }

  private:
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool at_atom_start() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        char c = text_[pos_];
        return c == '(' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    }

    RegexAst parse_alt() {
        RegexAst first = parse_cat();
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '|') return first;
        RegexAst alt{RegexAst::Kind::Alt, {}, {}};
        alt.children.push_back(std::move(first));
        while (pos_ < text_.size() && text_[pos_] == '|') {
            ++pos_;
            alt.children.push_back(parse_cat());
            skip_ws();
        }
        return alt;
    }

    RegexAst parse_cat() {
        if (!at_atom_start()) throw RegexSyntaxError(pos_, "expected label, 'eps' or '('");
        RegexAst first = parse_post();
        if (!at_atom_start()) return first;
        RegexAst cat{RegexAst::Kind::Concat, {}, {}};
        cat.children.push_back(std::move(first));
        while (at_atom_start()) cat.children.push_back(parse_post());
        return cat;
    }

    RegexAst parse_post() {
        RegexAst node = parse_atom();
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            RegexAst::Kind k;
            if (c == '*') k = RegexAst::Kind::Star;
            else if (c == '+') k = RegexAst::Kind::Plus;
            else if (c == '?') k = RegexAst::Kind::Opt;
            else break;
            ++pos_;
            RegexAst wrap{k, {}, {}};
            wrap.children.push_back(std::move(node));
            node = std::move(wrap);
        }
        return node;
    }

    RegexAst parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw RegexSyntaxError(pos_, "unexpected end of pattern");
        if (text_[pos_] == '(') {
            std::size_t open = pos_++;
            RegexAst inner = parse_alt();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') throw RegexSyntaxError(open, "unclosed '('");
            ++pos_;
            return inner;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            bool ident = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
            if (!ident) break;
            ++pos_;
        }
        std::string_view word = text_.substr(start, pos_ - start);
        if (word.empty()) throw RegexSyntaxError(start, "expected label, 'eps' or '('");
        if (!is_identifier(word)) throw RegexSyntaxError(start, "invalid label '" + std::string(word) + "'");
        if (word == "eps") return RegexAst{RegexAst::Kind::Epsilon, {}, {}};
        RegexAst atom{RegexAst::Kind::Atom, std::string(word), {}};
        return atom;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline RegexAst parse_regex(std::string_view text) {
    return detail::RegexParser(text).parse();
}

}  // namespace rpq
