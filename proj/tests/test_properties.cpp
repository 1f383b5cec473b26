// SPDX-License-Identifier: Apache-2.0
// Whole-corpus properties: round trip, pass validity, semantic agreement.

#include <gtest/gtest.h>

#include <random>

#include "futil/interp.hpp"
#include "futil/parser.hpp"
#include "futil/pipeline.hpp"
#include "futil/printer.hpp"
#include "futil/validate.hpp"
#include "support/corpus.hpp"

namespace futil {
namespace {

using testing::corpus;
using testing::Sample;

const std::vector<Sample>& samples() {
    static const auto all = corpus(200);
    return all;
}

TEST(Properties, CorpusSize) {
    std::size_t hand = 0;
    for (const auto& s : samples()) hand += s.name.rfind("random", 0) != 0;
    EXPECT_GE(hand, 30u);
    EXPECT_EQ(samples().size() - hand, 200u);
}

TEST(Properties, RandomProgramsAreBounded) {
    for (const auto& s : samples()) {
        if (s.name.rfind("random", 0) != 0) continue;
        const auto& c = s.program.components.at(0);
        EXPECT_LE(c.cells.size(), 8u) << s.name;
        EXPECT_LE(c.groups.size(), 6u) << s.name;
        std::function<int(const Control&)> depth = [&](const Control& k) {
            int d = 0;
            for (const auto& ch : k.children) d = std::max(d, depth(ch));
            return d + (k.kind == Control::Kind::Enable || k.is_empty() ? 0 : 1);
        };
        EXPECT_LE(depth(c.control), 4) << s.name;
        EXPECT_TRUE(validate(s.program).empty()) << s.name;
    }
}

TEST(Properties, RoundTrip) {
    for (const auto& s : samples()) {
        auto text = print_program(s.program);
        auto back = parse_program(text);
        ASSERT_TRUE(std::holds_alternative<Program>(back)) << s.name << ": " << std::get<ParseError>(back).format();
        EXPECT_EQ(std::get<Program>(back), s.program) << s.name << "\n" << text;
    }
}

TEST(Properties, ParserIsTotal) {
    std::mt19937_64 rng(9);
    const std::string alphabet = "{}();=?!&|<>[]'\"., \n abcdefgo0123456789";
    for (const auto& path : testing::fixture_paths()) {
        auto text = testing::read_text(path);
        for (int trial = 0; trial < 40; ++trial) {
            auto t = text;
            for (int k = 0; k < 3; ++k) {
                auto at = std::uniform_int_distribution<std::size_t>(0, t.size() - 1)(rng);
                switch (rng() % 3) {
                    case 0: t.erase(at, 1 + rng() % 8); break;
                    case 1: t.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
                    default: t[at] = alphabet[rng() % alphabet.size()];
                }
            }
            auto r = parse_program(t);
            if (auto* e = std::get_if<ParseError>(&r)) {
                EXPECT_FALSE(e->message.empty());
                EXPECT_LE(e->span.start, e->span.end);
            }
        }
    }
}

TEST(Properties, EveryPassKeepsProgramsValid) {
    for (const auto& s : samples()) {
        PipelineOptions o;
        o.after_pass = [&](const std::string& pass, const Program& p) {
            auto ds = validate(p);
            EXPECT_TRUE(ds.empty()) << s.name << " after " << pass << ": " << ds[0].format();
        };
        EXPECT_TRUE(run_pipeline(s.program, o).ok()) << s.name;
    }
}

TEST(Properties, PipelineIsDeterministic) {
    for (const auto& s : samples()) {
        auto a = run_pipeline(s.program);
        auto b = run_pipeline(s.program);
        EXPECT_EQ(a.program, b.program) << s.name;
        EXPECT_EQ(print_program(a.program), print_program(b.program)) << s.name;
    }
}

TEST(Properties, InterpreterIsDeterministic) {
    for (const auto& s : samples()) {
        auto img = testing::random_image(s.program, 1);
        auto a = interpret_control(s.program, img);
        auto b = interpret_control(s.program, img);
        EXPECT_EQ(a.cycles, b.cycles) << s.name;
        EXPECT_EQ(a.memories, b.memories) << s.name;
        EXPECT_EQ(a.registers, b.registers) << s.name;
    }
}

TEST(Properties, ControlAndStructuralAgree) {
    std::size_t i = 0;
    for (const auto& s : samples()) {
        auto img = testing::random_image(s.program, 100 + i++);
        EXPECT_EQ(testing::differential(s.program, img).mismatch, "") << s.name;
    }
}

TEST(Properties, AgreeOnAllRegistersWithoutRegisterSharing) {
    PipelineOptions o;
    o.disabled = {"register-share"};
    std::size_t i = 0;
    for (const auto& s : samples()) {
        auto img = testing::random_image(s.program, 500 + i++);
        EXPECT_EQ(testing::differential(s.program, img, o).mismatch, "") << s.name;
    }
}

TEST(Properties, EachOptimizationPreservesResults) {
    for (const char* pass : {"resource-share", "register-share", "infer-latency"}) {
        PipelineOptions o;
        o.disabled = {pass};
        std::size_t i = 0;
        for (const auto& s : samples()) {
            auto img = testing::random_image(s.program, 900 + i++);
            EXPECT_EQ(testing::differential(s.program, img, o).mismatch, "") << s.name << " without " << pass;
        }
    }
}

TEST(Properties, StaticNeverSlowerAndAgrees) {
    PipelineOptions dyn;
    dyn.disabled = {"compile-static"};
    std::size_t i = 0, fired = 0;
    for (const auto& s : samples()) {
        auto img = testing::random_image(s.program, 1300 + i++);
        auto on = run_pipeline(s.program);
        auto off = run_pipeline(s.program, dyn);
        auto a = interpret_structural(on.program, img);
        auto b = interpret_structural(off.program, img);
        auto regs = testing::user_registers(s.program);
        for (const auto& r : testing::shared_registers(on)) regs.erase(r);
        EXPECT_EQ(testing::compare_runs(b, a, regs), "") << s.name;
        EXPECT_LE(a.cycles, b.cycles) << s.name;
        if (testing::static_fired(s.program, img)) {
            ++fired;
            EXPECT_LT(a.cycles, b.cycles) << s.name;
        }
    }
    EXPECT_GT(fired, 0u);
}

}  // namespace
}  // namespace futil
