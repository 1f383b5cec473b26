// SPDX-License-Identifier: Apache-2.0
// Parser and printer: surface syntax, literal widths, error reporting.

#include <gtest/gtest.h>

#include "futil/parser.hpp"
#include "futil/printer.hpp"
#include "support/corpus.hpp"

namespace futil {
namespace {

using testing::load_fixture;
using testing::parse_or_throw;

ParseError parse_error(const std::string& text) {
    auto r = parse_program(text, "bad.fil");
    EXPECT_TRUE(std::holds_alternative<ParseError>(r));
    return std::holds_alternative<ParseError>(r) ? std::get<ParseError>(r) : ParseError{};
}

TEST(Parser, ReductionTreeShape) {
    auto p = load_fixture("reduction_tree");
    const auto& c = *p.find_component("main");
    for (const char* g : {"add0", "add1", "add2", "incr_idx", "cond"}) EXPECT_NE(c.find_group(g), nullptr) << g;
    auto body = Control::seq(
        {Control::par({Control::enable("add0"), Control::enable("add1")}), Control::enable("add2"),
         Control::enable("incr_idx")});
    EXPECT_EQ(c.control, Control::while_(PortRef::cell("le", "out"), "cond", body));
}

TEST(Parser, EmptyComponent) {
    auto p = parse_or_throw("component main() -> () { cells {} wires {} control {} }");
    ASSERT_EQ(p.components.size(), 1u);
    EXPECT_TRUE(p.components[0].control.is_empty());
    EXPECT_TRUE(p.components[0].cells.empty());
}

TEST(Parser, GroupAttributes) {
    auto p = parse_or_throw(R"(
component main() -> () {
  cells { r = std_reg(1); }
  wires {
    group foo<"latency"=1> { r.in = 1; r.write_en = 1; foo[done] = r.done; }
  }
  control { foo; }
})");
    const auto* g = p.components[0].find_group("foo");
    ASSERT_NE(g, nullptr);
    EXPECT_EQ(g->attributes, (Attributes{{"latency", 1}}));
}

TEST(Parser, BareLiteralTakesDestinationWidth) {
    auto p = parse_or_throw(R"(
component main() -> () {
  cells { x_reg = std_reg(32); }
  wires {
    group assign_one { x_reg.in = 1; x_reg.write_en = 1; assign_one[done] = x_reg.done; }
  }
  control { assign_one; }
})");
    const auto& a = p.components[0].groups[0].assignments;
    EXPECT_EQ(a[0].src, PortRef::constant(32, 1));
    EXPECT_EQ(a[1].src, PortRef::constant(1, 1));
    auto text = print_program(p);
    EXPECT_NE(text.find("x_reg.in = 32'd1;"), std::string::npos) << text;
    EXPECT_NE(text.find("assign_one[done] = x_reg.done;"), std::string::npos) << text;
}

TEST(Parser, GuardLiteralTakesPortWidth) {
    auto p = parse_or_throw(R"(
component main() -> () {
  cells { r = std_reg(4); s = std_reg(4); }
  wires {
    group g { s.in = r.out == 3 ? 4'd2; s.write_en = 1; g[done] = s.done; }
  }
  control { g; }
})");
    const auto& guard = p.components[0].groups[0].assignments[0].guard;
    ASSERT_EQ(guard.kind, Guard::Kind::Cmp);
    EXPECT_EQ(guard.rhs, PortRef::constant(4, 3));
}

TEST(Parser, IfWithoutElseGetsEmptyBranch) {
    auto p = load_fixture("if_no_else");
    const auto* c = &p.find_component("main")->control;
    while (c->kind == Control::Kind::Seq) c = &c->children.back();
    ASSERT_EQ(c->kind, Control::Kind::If);
    EXPECT_TRUE(c->children[1].is_empty());
}

TEST(Parser, ExternBlock) {
    auto p = load_fixture("extern/sqrt_extern");
    ASSERT_EQ(p.externs.size(), 1u);
    ASSERT_FALSE(p.externs[0].components.empty());
    EXPECT_NE(p.find_extern(p.externs[0].components[0].name), nullptr);
}

TEST(Parser, SyntaxErrorCarriesPosition) {
    auto e = parse_error("component main() -> () {\n  cells { r = std_reg(32) }\n}");
    EXPECT_EQ(e.span.file, "bad.fil");
    EXPECT_EQ(e.span.line, 2u);
    EXPECT_LE(e.span.start, e.span.end);
    EXPECT_FALSE(e.message.empty());
}

TEST(Parser, RejectsGarbage) {
    for (const char* text : {"component", "component main() -> () { cells {} wires {} }",
                             "component main() -> () { cells {} wires { x.in = ; } control {} }",
                             "component main() -> () { cells {} wires {} control { seq { a; } }",
                             "component main() -> () { cells {} wires {} control {} } @"})
        EXPECT_TRUE(std::holds_alternative<ParseError>(parse_program(text))) << text;
}

TEST(Parser, UnknownPrimitiveIsDeferred) {
    auto r = parse_program("component main() -> () { cells { x = no_such_cell(3); } wires {} control {} }");
    EXPECT_TRUE(std::holds_alternative<Program>(r));
}

TEST(Printer, CanonicalTextIsAFixedPoint) {
    for (const auto& path : testing::fixture_paths()) {
        auto p = parse_or_throw(testing::read_text(path), path.string());
        auto once = print_program(p);
        EXPECT_EQ(print_program(parse_or_throw(once)), once) << path;
    }
}

}  // namespace
}  // namespace futil
