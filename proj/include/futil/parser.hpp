// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "futil/ir.hpp"
#include "futil/resolve.hpp"

namespace futil {

struct SourceSpan {
    std::string file;
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

struct ParseError {
    SourceSpan span;
    std::string message;

    std::string format() const {
        return span.file + ":" + std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message;
    }
};

namespace detail {

enum class Tok : std::uint8_t {
    Ident,
    Number,     // bare decimal literal
    Sized,      // W'dV style literal
    String,
    Punct,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    std::uint64_t value = 0;
    std::uint32_t width = 0;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

    std::variant<std::vector<Token>, ParseError> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            SourceSpan sp = here();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, {}, 0, 0, sp});
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t b = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                out.push_back({Tok::Ident, std::string(src_.substr(b, pos_ - b)), 0, 0, close(sp)});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                auto n = number();
                if (!n) return error(sp, "integer literal out of range");
                if (pos_ < src_.size() && src_[pos_] == '\'') {
                    advance();
                    if (pos_ >= src_.size()) return error(sp, "malformed sized literal");
                    char base = src_[pos_];
                    int radix = base == 'd' ? 10 : base == 'b' ? 2 : base == 'h' ? 16 : 0;
                    if (radix == 0) return error(sp, "unknown literal base '" + std::string(1, base) + "'");
                    advance();
                    auto v = number(radix);
                    if (!v) return error(sp, "malformed sized literal");
                    if (*n == 0 || *n > 64) return error(sp, "literal width must be in 1..64");
                    out.push_back({Tok::Sized, {}, *v, static_cast<std::uint32_t>(*n), close(sp)});
                } else {
                    out.push_back({Tok::Number, {}, *n, 0, close(sp)});
                }
            } else if (c == '"') {
                advance();
                std::size_t b = pos_;
                while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') advance();
                if (pos_ >= src_.size() || src_[pos_] != '"') return error(sp, "unterminated string");
                std::string s(src_.substr(b, pos_ - b));
                advance();
                out.push_back({Tok::String, std::move(s), 0, 0, close(sp)});
            } else {
                static constexpr std::string_view two[] = {"->", "&&", "||", "==", "!=", "<=", ">="};
                std::string p;
                for (auto t : two)
                    if (src_.substr(pos_, 2) == t) p = t;
                if (p.empty()) {
                    static constexpr std::string_view one = "{}()[]<>=;,.?!&|:";
                    if (one.find(c) == std::string_view::npos)
                        return error(sp, std::string("unexpected character '") + c + "'");
                    p = std::string(1, c);
                }
                for (std::size_t i = 0; i < p.size(); ++i) advance();
                // single & and | are accepted as synonyms of && and ||
                if (p == "&") p = "&&";
                if (p == "|") p = "||";
                out.push_back({Tok::Punct, std::move(p), 0, 0, close(sp)});
            }
        }
    }

private:
    std::string_view src_;
    std::string file_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;

    SourceSpan here() const { return {file_, pos_, pos_, line_, col_}; }
    SourceSpan close(SourceSpan s) const {
        s.end = pos_;
        return s;
    }
    ParseError error(SourceSpan s, std::string msg) const { return {close(s), std::move(msg)}; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (src_.substr(pos_, 2) == "//") {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (src_.substr(pos_, 2) == "/*") {
                advance();
                advance();
                while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
                if (pos_ < src_.size()) {
                    advance();
                    advance();
                }
            } else {
                break;
            }
        }
    }

    std::optional<std::uint64_t> number(int radix = 10) {
        std::size_t b = pos_;
        while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
            char c = src_[pos_];
            if (radix == 10 && !std::isdigit(static_cast<unsigned char>(c))) break;
            if (radix == 2 && c != '0' && c != '1') break;
            advance();
        }
        if (b == pos_) return std::nullopt;
        std::uint64_t v = 0;
        auto sv = src_.substr(b, pos_ - b);
        auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v, radix);
        if (ec != std::errc{}) return std::nullopt;
        return v;
    }
};

struct ParseFailure {
    ParseError error;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program program() {
        Program prog;
        while (!at_end()) {
            if (is_ident("extern")) {
                prog.externs.push_back(extern_block());
            } else if (is_ident("component")) {
                prog.components.push_back(component());
            } else {
                fail("expected 'component' or 'extern'");
            }
        }
        return prog;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_punct(std::string_view p, std::size_t k = 0) const {
        return peek(k).kind == Tok::Punct && peek(k).text == p;
    }
    bool is_ident(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }

    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + describe(t) + "'";
        throw ParseFailure{{t.span, msg + ", found " + got}};
    }
    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Tok::Number: return std::to_string(t.value);
            case Tok::Sized: return std::to_string(t.width) + "'d" + std::to_string(t.value);
            case Tok::String: return "\"" + t.text + "\"";
            default: return t.text;
        }
    }

    void expect(std::string_view p) {
        if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
        ++i_;
    }
    bool accept(std::string_view p) {
        if (is_punct(p)) {
            ++i_;
            return true;
        }
        return false;
    }
    std::string ident() {
        if (peek().kind != Tok::Ident) fail("expected identifier");
        return toks_[i_++].text;
    }
    void keyword(std::string_view kw) {
        if (!is_ident(kw)) fail("expected '" + std::string(kw) + "'");
        ++i_;
    }
    std::uint64_t integer() {
        if (peek().kind != Tok::Number) fail("expected integer");
        return toks_[i_++].value;
    }

    Attributes attrs() {
        Attributes out;
        if (!accept("<")) return out;
        do {
            if (peek().kind != Tok::String) fail("expected attribute name string");
            std::string key = toks_[i_++].text;
            expect("=");
            auto v = integer();
            out[key] = v;
        } while (accept(","));
        expect(">");
        return out;
    }

    std::vector<PortDef> ports() {
        std::vector<PortDef> out;
        expect("(");
        if (!is_punct(")")) {
            do {
                PortDef p;
                p.name = ident();
                expect(":");
                auto w = integer();
                if (w > 0xffffffffULL) fail("port width too large");
                p.width = static_cast<std::uint32_t>(w);
                out.push_back(std::move(p));
            } while (accept(","));
        }
        expect(")");
        return out;
    }

    Extern extern_block() {
        keyword("extern");
        if (peek().kind != Tok::String) fail("expected extern file path");
        Extern e;
        e.path = toks_[i_++].text;
        expect("{");
        while (!accept("}")) {
            keyword("component");
            Signature s;
            s.name = ident();
            s.inputs = ports();
            expect("->");
            s.outputs = ports();
            s.attributes = attrs();
            expect(";");
            e.components.push_back(std::move(s));
        }
        return e;
    }

    Component component() {
        keyword("component");
        Component c;
        c.name = ident();
        c.inputs = ports();
        expect("->");
        c.outputs = ports();
        c.attributes = attrs();
        expect("{");
        keyword("cells");
        expect("{");
        while (!accept("}")) {
            Cell cell;
            cell.name = ident();
            cell.attributes = attrs();
            expect("=");
            cell.proto.name = ident();
            expect("(");
            if (!is_punct(")")) {
                do {
                    cell.proto.params.push_back(integer());
                } while (accept(","));
            }
            expect(")");
            expect(";");
            c.cells.push_back(std::move(cell));
        }
        keyword("wires");
        expect("{");
        while (!accept("}")) {
            if (is_ident("group") && peek(1).kind == Tok::Ident) {
                ++i_;
                Group g;
                g.name = ident();
                g.attributes = attrs();
                expect("{");
                while (!accept("}")) g.assignments.push_back(assignment());
                c.groups.push_back(std::move(g));
            } else {
                c.continuous.push_back(assignment());
            }
        }
        keyword("control");
        expect("{");
        c.control = block_body();
        expect("}");
        expect("}");
        return c;
    }

    PortRef port_ref(bool in_guard) {
        const auto& t = peek();
        if (t.kind == Tok::Sized) {
            ++i_;
            return PortRef::constant(t.width, t.value);
        }
        if (t.kind == Tok::Number) {
            ++i_;
            // Unsized inside guards is boolean width; elsewhere inferred later.
            if (in_guard && !cmp_follows_or_preceded()) return PortRef::constant(1, t.value);
            return PortRef::constant(0, t.value);
        }
        std::string a = ident();
        if (accept(".")) {
            std::string b = ident();
            if (a == "this") return PortRef::this_port(std::move(b));
            return PortRef::cell(std::move(a), std::move(b));
        }
        if (accept("[")) {
            std::string h = ident();
            if (h != "go" && h != "done") fail("hole must be 'go' or 'done'");
            expect("]");
            return h == "go" ? PortRef::go(std::move(a)) : PortRef::done(std::move(a));
        }
        return PortRef::this_port(std::move(a));
    }

    bool cmp_follows_or_preceded() const {
        auto is_cmp = [&](const Token& t) {
            static constexpr std::string_view ops[] = {"==", "!=", "<", ">", "<=", ">="};
            if (t.kind != Tok::Punct) return false;
            for (auto o : ops)
                if (t.text == o) return true;
            return false;
        };
        // called after the number was consumed
        return is_cmp(peek()) || (i_ >= 2 && is_cmp(toks_[i_ - 2]));
    }

    std::optional<CmpOp> cmp_op() {
        static constexpr std::pair<std::string_view, CmpOp> ops[] = {
            {"==", CmpOp::Eq}, {"!=", CmpOp::Neq}, {"<=", CmpOp::Le},
            {">=", CmpOp::Ge}, {"<", CmpOp::Lt},   {">", CmpOp::Gt}};
        for (auto [t, op] : ops)
            if (accept(t)) return op;
        return std::nullopt;
    }

    Guard guard_or() {
        Guard g = guard_and();
        while (accept("||")) g = Guard::disj(std::move(g), guard_and());
        return g;
    }
    Guard guard_and() {
        Guard g = guard_not();
        while (accept("&&")) g = Guard::conj(std::move(g), guard_not());
        return g;
    }
    Guard guard_not() {
        if (accept("!")) return Guard::negate(guard_not());
        if (accept("(")) {
            Guard g = guard_or();
            expect(")");
            return g;
        }
        PortRef lhs = port_ref(true);
        if (auto op = cmp_op()) {
            PortRef rhs = port_ref(true);
            return Guard::compare(*op, std::move(lhs), std::move(rhs));
        }
        return Guard::port(std::move(lhs));
    }

    Assignment assignment() {
        Assignment a;
        a.dst = port_ref(false);
        if (a.dst.is_const()) fail("constant cannot be an assignment destination");
        expect("=");
        // Either `guard ? src` or plain `src`. Parse a guard and reinterpret
        // it as the source when no '?' follows.
        std::size_t save = i_;
        bool guarded = false;
        {
            int depth = 0;
            for (std::size_t k = i_; k < toks_.size(); ++k) {
                const auto& t = toks_[k];
                if (t.kind == Tok::End) break;
                if (t.kind == Tok::Punct) {
                    if (t.text == "(") ++depth;
                    if (t.text == ")") --depth;
                    if (t.text == ";" && depth == 0) break;
                    if (t.text == "?" && depth == 0) {
                        guarded = true;
                        break;
                    }
                }
            }
        }
        i_ = save;
        if (guarded) {
            a.guard = guard_or();
            expect("?");
        }
        a.src = port_ref(false);
        expect(";");
        return a;
    }

    // Sequence of statements inside braces: none -> Empty, one -> itself,
    // several -> implicit seq.
    Control block_body() {
        std::vector<Control> stmts;
        while (!is_punct("}")) {
            stmts.push_back(statement());
            accept(";");
        }
        if (stmts.empty()) return Control::empty();
        if (stmts.size() == 1) return std::move(stmts.front());
        return Control::seq(std::move(stmts));
    }

    Control braced() {
        expect("{");
        Control c = block_body();
        expect("}");
        return c;
    }

    std::vector<Control> braced_list() {
        expect("{");
        std::vector<Control> out;
        while (!is_punct("}")) {
            out.push_back(statement());
            accept(";");
        }
        expect("}");
        return out;
    }

    Control statement() {
        if (is_ident("seq") && is_punct("{", 1)) {
            ++i_;
            return Control::seq(braced_list());
        }
        if (is_ident("par") && is_punct("{", 1)) {
            ++i_;
            return Control::par(braced_list());
        }
        if (is_ident("if") && peek(1).kind == Tok::Ident && !is_punct(";", 1)) {
            ++i_;
            PortRef p = port_ref(false);
            keyword("with");
            std::string cond = ident();
            Control t = braced();
            Control f;
            if (is_ident("else")) {
                ++i_;
                f = braced();
            }
            return Control::if_(std::move(p), std::move(cond), std::move(t), std::move(f));
        }
        if (is_ident("while") && peek(1).kind == Tok::Ident && !is_punct(";", 1)) {
            ++i_;
            PortRef p = port_ref(false);
            keyword("with");
            std::string cond = ident();
            Control body = braced();
            return Control::while_(std::move(p), std::move(cond), std::move(body));
        }
        return Control::enable(ident());
    }
};

/// Gives unsized literals the width of the port they are assigned to or
/// compared against. Literals whose counterpart is unknown keep width 0 and
/// are reported by validate.
inline void infer_literal_widths(Program& prog) {
    for (auto& comp : prog.components) {
        PortTable table(prog, comp);
        auto fix_guard = [&](auto& self, Guard& g) -> void {
            if (g.kind == Guard::Kind::Cmp) {
                if (g.lhs.is_const() && g.lhs.width == 0)
                    if (auto w = table.width(g.rhs)) g.lhs.width = *w;
                if (g.rhs.is_const() && g.rhs.width == 0)
                    if (auto w = table.width(g.lhs)) g.rhs.width = *w;
            }
            for (auto& c : g.children) self(self, c);
        };
        comp.for_each_assignment_mut([&](Assignment& a) {
            if (a.src.is_const() && a.src.width == 0)
                if (auto w = table.width(a.dst)) a.src.width = *w;
            fix_guard(fix_guard, a.guard);
        });
    }
}

}  // namespace detail

/// Parses the `.fil` text format. Returns the program or the first error.
inline std::variant<Program, ParseError> parse_program(std::string_view text, std::string file = "<input>") {
    detail::Lexer lexer(text, file);
    auto toks = lexer.run();
    if (auto* e = std::get_if<ParseError>(&toks)) return *e;
    try {
        detail::Parser parser(std::move(std::get<std::vector<detail::Token>>(toks)));
        Program prog = parser.program();
        detail::infer_literal_widths(prog);
        return prog;
    } catch (const detail::ParseFailure& f) {
        return f.error;
    }
}

}  // namespace futil
