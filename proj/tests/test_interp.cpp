// SPDX-License-Identifier: Apache-2.0
// Cycle-accurate interpreter in control and structural modes.

#include <gtest/gtest.h>

#include <numeric>

#include "futil/interp.hpp"
#include "futil/pipeline.hpp"
#include "support/corpus.hpp"

namespace futil {
namespace {

using testing::load_fixture;
using testing::parse_or_throw;

Program lowered(const Program& p, std::set<std::string> disabled = {}) {
    PipelineOptions o;
    o.disabled = std::move(disabled);
    auto r = run_pipeline(p, o);
    EXPECT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : r.diagnostics[0].format());
    return r.program;
}

MemImage reduction_image() {
    MemImage img;
    for (int m = 0; m < 4; ++m) {
        MemData d{32, {}};
        for (int i = 0; i < 4; ++i) d.data.push_back(4 * m + i + 1);
        img["m" + std::to_string(m)] = d;
    }
    return img;
}

TEST(Interp, SeqTwoRegisters) {
    auto p = load_fixture("seq_two_registers");
    for (const auto& r : {interpret_control(p), interpret_structural(lowered(p, {"register-share"}))}) {
        EXPECT_EQ(r.registers.at("r0"), 1u);
        EXPECT_EQ(r.registers.at("r1"), 1u);
    }
}

TEST(Interp, ReductionTreeBothModes) {
    auto p = load_fixture("reduction_tree");
    auto img = reduction_image();
    std::vector<std::uint64_t> expect(4, 0);
    for (const auto& [name, m] : img)
        for (std::size_t i = 0; i < 4; ++i) expect[i] += m.data[i];
    for (const auto& r : {interpret_control(p, img), interpret_structural(lowered(p), img),
                          interpret_structural(lowered(p, {"compile-static"}), img)}) {
        EXPECT_EQ(r.memories.at("out").data, expect);
        EXPECT_EQ(std::accumulate(expect.begin(), expect.end(), std::uint64_t{0}), 136u);
    }
}

TEST(Interp, GroupTiming) {
    // One register write: active in cycle 0, done observed in cycle 1.
    auto p = load_fixture("seq_two_registers");
    EXPECT_EQ(measure_group(p, "one"), 1u);
    EXPECT_EQ(measure_group(load_fixture("static_seq"), "two"), 2u);
    EXPECT_EQ(measure_group(load_fixture("mult_seq"), "mul"), 4u);
}

TEST(Interp, DynamicSeqHandshake) {
    // Control mode: each enable costs its latency plus the done cycle.
    auto p = load_fixture("seq_two_registers");
    EXPECT_EQ(interpret_control(p).cycles, 4u);
    // seq FSM: one extra cycle per child transition plus the final done.
    auto s = interpret_structural(lowered(p, {"compile-static", "infer-latency"}));
    EXPECT_EQ(s.cycles, 5u);
}

TEST(Interp, StaticSeqFinishesAtThree) {
    auto p = load_fixture("static_seq");
    auto r = interpret_structural(lowered(p, {"register-share"}));
    EXPECT_EQ(r.cycles, 4u);  // done observed at offset 3
    EXPECT_EQ(r.registers.at("u"), 9u);
}

TEST(Interp, LoopsAndBranches) {
    for (const char* name : {"while_counter", "while_zero_trip", "if_else", "if_no_else", "nested_while",
                             "if_in_while", "while_in_if"}) {
        auto p = load_fixture(name);
        auto img = testing::random_image(p, 11);
        auto d = testing::differential(p, img);
        EXPECT_EQ(d.mismatch, "") << name;
    }
}

TEST(Interp, SubcomponentTwice) {
    auto p = load_fixture("subcomponent_twice");
    for (const auto& r : {interpret_control(p), interpret_structural(lowered(p))})
        EXPECT_EQ(r.memories.at("out").data, (std::vector<std::uint64_t>{10, 10}));
}

TEST(Interp, InferredComponentLatency) {
    auto p = load_fixture("infer_component");
    EXPECT_EQ(interpret_control(p).registers.at("res"), 3u);
    EXPECT_EQ(interpret_structural(lowered(p)).registers.at("res"), 3u);
}

TEST(Interp, ConflictingDriversAreRuntimeErrors) {
    auto p = parse_or_throw(R"(
component main() -> () {
  cells { r = std_reg(8); }
  wires {
    group g { r.in = 8'd1; r.in = 8'd2; r.write_en = 1'd1; g[done] = r.done; }
  }
  control { g; }
})");
    EXPECT_THROW(interpret_control(p), InterpError);
    p.components[0].groups[0].assignments[1].src = PortRef::constant(8, 1);
    EXPECT_EQ(interpret_control(p).registers.at("r"), 1u);
}

TEST(Interp, MemoryBoundsAndImages) {
    auto p = parse_or_throw(R"(
component main() -> () {
  cells { m = std_mem_d1(8, 2, 2); }
  wires {
    group w { m.addr0 = 2'd3; m.write_data = 8'd1; m.write_en = 1'd1; w[done] = m.done; }
  }
  control { w; }
})");
    EXPECT_THROW(interpret_control(p), InterpError);
    EXPECT_THROW(interpret_control(p, {{"nope", {8, {0, 0}}}}), InterpError);
    EXPECT_THROW(interpret_control(p, {{"m", {16, {0, 0}}}}), InterpError);
    EXPECT_THROW(interpret_control(p, {{"m", {8, {0}}}}), InterpError);
    EXPECT_THROW(interpret_control(p, {{"m", {8, {256, 0}}}}), InterpError);
}

TEST(Interp, CycleLimit) {
    // The condition is a constant 1, so the loop never exits.
    auto forever = parse_or_throw(R"(
component main() -> () {
  cells { t = std_reg(1); one = std_const(1, 1); }
  wires {
    group cond { cond[done] = 1'd1; }
    group spin { t.in = 1'd1; t.write_en = 1'd1; spin[done] = t.done; }
  }
  control { while one.out with cond { spin; } }
})");
    EXPECT_THROW(interpret_control(forever, {}, {100}), InterpError);
    EXPECT_THROW(interpret_structural(lowered(forever), {}, {100}), InterpError);
}

TEST(Interp, RejectsExternsAndUnloweredStructural) {
    auto ext = load_fixture("extern/sqrt_extern");
    EXPECT_THROW(interpret_control(ext), InterpError);
    EXPECT_THROW(interpret_structural(load_fixture("seq_two_registers")), InterpError);
}

TEST(Interp, UnreadPortsAreZero) {
    auto p = parse_or_throw(R"(
component main() -> () {
  cells { m = std_mem_d1(8, 2, 1); r = std_reg(8); }
  wires {
    group g { r.in = m.read_data; r.write_en = 1'd1; g[done] = r.done; }
  }
  control { g; }
})");
    EXPECT_EQ(interpret_control(p, {{"m", {8, {7, 9}}}}).registers.at("r"), 7u);
}

TEST(Interp, JsonImageRoundTrip) {
    auto img = reduction_image();
    EXPECT_EQ(mem_from_json(mem_to_json(img)), img);
    EXPECT_THROW(mem_from_json(nlohmann::json::array()), InterpError);
    auto r = interpret_control(load_fixture("reduction_tree"), img).to_json();
    EXPECT_EQ(r["memories"]["out"]["data"], nlohmann::json({28, 32, 36, 40}));
}

TEST(Interp, SystolicProduct) {
    auto p = load_fixture("systolic_2x2");
    MemImage img{{"a0", {32, {1, 2}}}, {"a1", {32, {3, 4}}}, {"b0", {32, {5, 7}}}, {"b1", {32, {6, 8}}}};
    // Row-major product of A = [[1,2],[3,4]] and B = [[5,6],[7,8]].
    std::vector<std::uint64_t> expect;
    const int a[2][2] = {{1, 2}, {3, 4}}, b[2][2] = {{5, 6}, {7, 8}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) expect.push_back(a[i][0] * b[0][j] + a[i][1] * b[1][j]);
    auto s = interpret_structural(lowered(p), img);
    auto d = interpret_structural(lowered(p, {"compile-static"}), img);
    EXPECT_EQ(interpret_control(p, img).memories.at("out_mem").data, expect);
    EXPECT_EQ(s.memories.at("out_mem").data, expect);
    EXPECT_EQ(d.memories.at("out_mem").data, expect);
    EXPECT_LT(s.cycles, d.cycles);
}

}  // namespace
}  // namespace futil
