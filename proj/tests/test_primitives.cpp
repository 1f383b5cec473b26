// SPDX-License-Identifier: Apache-2.0
// Standard cell library: signatures and behavioral models.

#include <gtest/gtest.h>

#include <array>
#include <random>

#include "futil/primitives.hpp"

namespace futil {
namespace {

std::vector<std::uint64_t> params_for(const PrimitiveDef& d) {
    if (d.name == "std_const") return {8, 0x1ab};
    if (d.name == "std_mem_d1") return {8, 4, 2};
    return {8};
}

struct Model {
    const PrimitiveDef& def;
    std::vector<std::uint64_t> params;
    PrimState state;

    explicit Model(const std::string& name, std::vector<std::uint64_t> p = {})
        : def(*find_primitive(name)), params(p.empty() ? params_for(def) : std::move(p)) {
        if (def.init) def.init(params, state);
    }
    std::size_t n_in() const { return def.port_names(Dir::In).size(); }
    std::size_t n_out() const { return def.port_names(Dir::Out).size(); }
    std::vector<std::uint64_t> outputs(const std::vector<std::uint64_t>& in) const {
        std::vector<std::uint64_t> out(n_out());
        def.comb(params, state, in, out);
        return out;
    }
    void clock(const std::vector<std::uint64_t>& in) { def.edge(params, state, in); }
};

TEST(Library, ContainsStandardCells) {
    for (const char* n : {"std_reg", "std_add", "std_sub", "std_mult_seq", "std_lt", "std_gt", "std_eq", "std_le",
                          "std_ge", "std_neq", "std_const", "std_mem_d1", "std_mac"})
        EXPECT_NE(find_primitive(n), nullptr) << n;
    EXPECT_EQ(find_primitive("std_nope"), nullptr);
}

TEST(Library, Attributes) {
    EXPECT_EQ(find_primitive("std_reg")->static_latency(), 1u);
    EXPECT_EQ(find_primitive("std_mult_seq")->static_latency(), 4u);
    EXPECT_TRUE(find_primitive("std_add")->shareable());
    EXPECT_TRUE(find_primitive("std_lt")->shareable());
    EXPECT_FALSE(find_primitive("std_reg")->shareable());
    EXPECT_EQ(find_primitive("std_reg")->go_port, "write_en");
    EXPECT_EQ(find_primitive("std_mem_d1")->go_port, "write_en");
}

TEST(Library, GoPortsHaveDone) {
    for (const auto& d : library()) {
        if (!d.go_port) continue;
        auto sig = d.instantiate(params_for(d));
        auto find = [&](const std::string& n) {
            return std::find_if(sig.begin(), sig.end(), [&](const PortSig& p) { return p.name == n; });
        };
        ASSERT_NE(find(*d.go_port), sig.end()) << d.name;
        EXPECT_EQ(find(*d.go_port)->width, 1u) << d.name;
        ASSERT_NE(find("done"), sig.end()) << d.name;
        EXPECT_EQ(find("done")->dir, Dir::Out) << d.name;
    }
}

TEST(Library, Instantiate) {
    auto sig = find_primitive("std_mem_d1")->instantiate(std::vector<std::uint64_t>{32, 4, 3});
    ASSERT_EQ(sig.size(), 5u);
    EXPECT_EQ(sig[0].name, "addr0");
    EXPECT_EQ(sig[0].width, 3u);
    EXPECT_EQ(sig[3].width, 32u);
}

TEST(Behavior, AddWraps) {
    Model m("std_add", {8});
    EXPECT_EQ(m.outputs({200, 100})[0], 44u);
    Model s("std_sub", {8});
    EXPECT_EQ(s.outputs({1, 2})[0], 255u);
}

TEST(Behavior, RegisterCommitsNextCycle) {
    Model r("std_reg", {32});
    EXPECT_EQ(r.outputs({5, 1}), (std::vector<std::uint64_t>{0, 0}));
    r.clock({5, 1});
    EXPECT_EQ(r.outputs({0, 0}), (std::vector<std::uint64_t>{5, 1}));
    r.clock({7, 0});
    EXPECT_EQ(r.outputs({0, 0}), (std::vector<std::uint64_t>{5, 0}));
}

TEST(Behavior, MultiplierTakesFourCycles) {
    Model m("std_mult_seq", {8});
    std::vector<std::uint64_t> in{6, 7, 1};
    for (int t = 1; t <= 4; ++t) {
        m.clock(in);
        EXPECT_EQ(m.outputs(in)[1], t == 4 ? 1u : 0u) << t;
    }
    EXPECT_EQ(m.outputs(in)[0], 42u);
    m.clock({0, 0, 0});
    EXPECT_EQ(m.outputs(in)[1], 0u);
}

TEST(Behavior, MemoryReadsCombinationally) {
    Model m("std_mem_d1", {8, 4, 2});
    m.clock({2, 0x1ff, 1});
    EXPECT_EQ(m.state.mem, (std::vector<std::uint64_t>{0, 0, 0xff, 0}));
    EXPECT_EQ(m.outputs({2, 0, 0}), (std::vector<std::uint64_t>{0xff, 1}));
    EXPECT_EQ(m.outputs({1, 0, 0})[0], 0u);
}

TEST(Behavior, MacAccumulates) {
    Model m("std_mac", {16});
    m.clock({3, 4, 1});
    m.clock({0, 9, 0});
    m.clock({5, 5, 1});
    EXPECT_EQ(m.outputs({0, 0, 0}), (std::vector<std::uint64_t>{37, 1}));
}

TEST(Behavior, Comparators) {
    const std::pair<const char*, std::array<int, 3>> table[] = {
        {"std_lt", {1, 0, 0}}, {"std_le", {1, 1, 0}}, {"std_eq", {0, 1, 0}},
        {"std_neq", {1, 0, 1}}, {"std_ge", {0, 1, 1}}, {"std_gt", {0, 0, 1}}};
    for (const auto& [name, expect] : table) {
        Model m(name, {8});
        EXPECT_EQ(m.outputs({1, 2})[0], static_cast<std::uint64_t>(expect[0])) << name;
        EXPECT_EQ(m.outputs({2, 2})[0], static_cast<std::uint64_t>(expect[1])) << name;
        EXPECT_EQ(m.outputs({3, 2})[0], static_cast<std::uint64_t>(expect[2])) << name;
    }
}

TEST(Behavior, ConstMasksToWidth) {
    Model c("std_const", {8, 0x1ab});
    EXPECT_EQ(c.outputs({})[0], 0xabu);
}

// Flipping bits of one input must only change outputs it has a declared
// combinational path to.
TEST(Behavior, CombPathsCoverDependencies) {
    std::mt19937_64 rng(5);
    for (const auto& d : library()) {
        Model m(d.name);
        auto ins = d.port_names(Dir::In);
        auto outs = d.port_names(Dir::Out);
        for (int trial = 0; trial < 200; ++trial) {
            if (d.stateful && trial % 7 == 0) {
                std::vector<std::uint64_t> v(ins.size());
                for (auto& x : v) x = rng() & 3;
                m.clock(v);
            }
            std::vector<std::uint64_t> base(ins.size());
            for (auto& x : base) x = rng() & 0xff;
            if (d.name == "std_mem_d1") base[0] &= 3;
            auto b = m.outputs(base);
            for (std::size_t i = 0; i < ins.size(); ++i) {
                auto v = base;
                v[i] ^= (rng() & 0xff) | 1;
                if (d.name == "std_mem_d1") v[0] &= 3;
                auto o = m.outputs(v);
                for (std::size_t k = 0; k < outs.size(); ++k)
                    EXPECT_TRUE(o[k] == b[k] || d.has_comb_path(ins[i], outs[k])) << d.name << " " << ins[i];
            }
        }
    }
}

TEST(Behavior, Deterministic) {
    for (const auto& d : library()) {
        if (!d.stateful) continue;
        Model a(d.name), b(d.name);
        std::vector<std::uint64_t> in(d.port_names(Dir::In).size(), 1);
        for (int t = 0; t < 6; ++t) {
            a.clock(in);
            b.clock(in);
            EXPECT_EQ(a.state, b.state) << d.name;
        }
    }
}

}  // namespace
}  // namespace futil
