// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "futil/ir.hpp"

namespace futil {

enum class Dir : std::uint8_t { In, Out };

inline std::uint64_t mask(std::uint32_t width) {
    return width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
}

/// Internal state of a stateful primitive instance.
struct PrimState {
    std::uint64_t value = 0;  // register contents / accumulator / product
    std::uint64_t count = 0;  // multiplier progress
    bool done = false;
    std::vector<std::uint64_t> mem;
    bool operator==(const PrimState&) const = default;
};

struct PrimPort {
    std::string name;
    Dir dir;
    int width_param;            // index into the parameter list, or -1
    std::uint32_t fixed_width;  // used when width_param < 0
};

struct PortSig {
    std::string name;
    Dir dir;
    std::uint32_t width;
};

using Params = std::span<const std::uint64_t>;
// Input values are passed in declaration order of the input ports; outputs
// likewise.
using CombFn = void (*)(Params, const PrimState&, std::span<const std::uint64_t>, std::span<std::uint64_t>);
using EdgeFn = void (*)(Params, PrimState&, std::span<const std::uint64_t>);
using InitFn = void (*)(Params, PrimState&);

struct PrimitiveDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<PrimPort> ports;
    Attributes attributes;
    std::optional<std::string> go_port;
    std::vector<std::pair<std::string, std::string>> comb_paths;
    bool stateful = false;
    CombFn comb = nullptr;
    EdgeFn edge = nullptr;
    InitFn init = nullptr;

    std::vector<PortSig> instantiate(Params p) const {
        std::vector<PortSig> out;
        for (const auto& port : ports) {
            auto w = port.width_param >= 0 ? static_cast<std::uint32_t>(p[port.width_param]) : port.fixed_width;
            out.push_back({port.name, port.dir, w});
        }
        return out;
    }
    std::vector<std::string> port_names(Dir d) const {
        std::vector<std::string> out;
        for (const auto& port : ports)
            if (port.dir == d) out.push_back(port.name);
        return out;
    }
    std::optional<std::uint64_t> static_latency() const {
        auto it = attributes.find("static");
        if (it == attributes.end()) return std::nullopt;
        return it->second;
    }
    bool shareable() const {
        auto it = attributes.find("share");
        return it != attributes.end() && it->second == 1;
    }
    bool has_comb_path(std::string_view in, std::string_view out) const {
        for (const auto& [i, o] : comb_paths)
            if (i == in && o == out) return true;
        return false;
    }
};

namespace detail {

inline PrimPort in(std::string n, int param) { return {std::move(n), Dir::In, param, 0}; }
inline PrimPort in1(std::string n) { return {std::move(n), Dir::In, -1, 1}; }
inline PrimPort out(std::string n, int param) { return {std::move(n), Dir::Out, param, 0}; }
inline PrimPort out1(std::string n) { return {std::move(n), Dir::Out, -1, 1}; }

template <typename Op>
PrimitiveDef binary(std::string name, Op) {
    PrimitiveDef d;
    d.name = std::move(name);
    d.params = {"WIDTH"};
    d.ports = {in("left", 0), in("right", 0), out("out", 0)};
    d.attributes = {{"share", 1}};
    d.comb_paths = {{"left", "out"}, {"right", "out"}};
    d.comb = [](Params p, const PrimState&, std::span<const std::uint64_t> i, std::span<std::uint64_t> o) {
        o[0] = Op{}(i[0], i[1]) & mask(static_cast<std::uint32_t>(p[0]));
    };
    return d;
}

template <CmpOp Cmp>
PrimitiveDef comparator(std::string name) {
    PrimitiveDef d;
    d.name = std::move(name);
    d.params = {"WIDTH"};
    d.ports = {in("left", 0), in("right", 0), out1("out")};
    d.attributes = {{"share", 1}};
    d.comb_paths = {{"left", "out"}, {"right", "out"}};
    d.comb = [](Params, const PrimState&, std::span<const std::uint64_t> i, std::span<std::uint64_t> o) {
        o[0] = cmp_eval(Cmp, i[0], i[1]) ? 1 : 0;
    };
    return d;
}

struct Add {
    std::uint64_t operator()(std::uint64_t a, std::uint64_t b) const { return a + b; }
};
struct Sub {
    std::uint64_t operator()(std::uint64_t a, std::uint64_t b) const { return a - b; }
};

inline std::vector<PrimitiveDef> build_library() {
    std::vector<PrimitiveDef> lib;

    {
        PrimitiveDef d;
        d.name = "std_reg";
        d.params = {"WIDTH"};
        d.ports = {in("in", 0), in1("write_en"), out("out", 0), out1("done")};
        d.attributes = {{"static", 1}};
        d.go_port = "write_en";
        d.stateful = true;
        d.comb = [](Params, const PrimState& s, std::span<const std::uint64_t>, std::span<std::uint64_t> o) {
            o[0] = s.value;
            o[1] = s.done ? 1 : 0;
        };
        d.edge = [](Params p, PrimState& s, std::span<const std::uint64_t> i) {
            if (i[1] != 0) {
                s.value = i[0] & mask(static_cast<std::uint32_t>(p[0]));
                s.done = true;
            } else {
                s.done = false;
            }
        };
        lib.push_back(std::move(d));
    }

    lib.push_back(binary("std_add", Add{}));
    lib.push_back(binary("std_sub", Sub{}));

    {
        PrimitiveDef d;
        d.name = "std_mult_seq";
        d.params = {"WIDTH"};
        d.ports = {in("left", 0), in("right", 0), in1("go"), out("out", 0), out1("done")};
        d.attributes = {{"static", 4}, {"share", 1}};
        d.go_port = "go";
        d.stateful = true;
        d.comb = [](Params, const PrimState& s, std::span<const std::uint64_t>, std::span<std::uint64_t> o) {
            o[0] = s.value;
            o[1] = s.done ? 1 : 0;
        };
        d.edge = [](Params p, PrimState& s, std::span<const std::uint64_t> i) {
            bool finished = false;
            if (i[2] != 0) {
                if (++s.count == 4) {
                    s.value = (i[0] * i[1]) & mask(static_cast<std::uint32_t>(p[0]));
                    s.count = 0;
                    finished = true;
                }
            } else {
                s.count = 0;
            }
            s.done = finished;
        };
        lib.push_back(std::move(d));
    }

    lib.push_back(comparator<CmpOp::Lt>("std_lt"));
    lib.push_back(comparator<CmpOp::Gt>("std_gt"));
    lib.push_back(comparator<CmpOp::Eq>("std_eq"));
    lib.push_back(comparator<CmpOp::Le>("std_le"));
    lib.push_back(comparator<CmpOp::Ge>("std_ge"));
    lib.push_back(comparator<CmpOp::Neq>("std_neq"));

    {
        PrimitiveDef d;
        d.name = "std_const";
        d.params = {"WIDTH", "VALUE"};
        d.ports = {out("out", 0)};
        d.comb = [](Params p, const PrimState&, std::span<const std::uint64_t>, std::span<std::uint64_t> o) {
            o[0] = p[1] & mask(static_cast<std::uint32_t>(p[0]));
        };
        lib.push_back(std::move(d));
    }

    {
        PrimitiveDef d;
        d.name = "std_mem_d1";
        d.params = {"WIDTH", "SIZE", "IDX_SIZE"};
        d.ports = {in("addr0", 2), in("write_data", 0), in1("write_en"), out("read_data", 0), out1("done")};
        d.attributes = {{"static", 1}};
        d.go_port = "write_en";
        d.comb_paths = {{"addr0", "read_data"}};
        d.stateful = true;
        d.init = [](Params p, PrimState& s) { s.mem.assign(p[1], 0); };
        d.comb = [](Params, const PrimState& s, std::span<const std::uint64_t> i, std::span<std::uint64_t> o) {
            o[0] = i[0] < s.mem.size() ? s.mem[i[0]] : 0;
            o[1] = s.done ? 1 : 0;
        };
        d.edge = [](Params p, PrimState& s, std::span<const std::uint64_t> i) {
            if (i[2] != 0) {
                if (i[0] < s.mem.size()) s.mem[i[0]] = i[1] & mask(static_cast<std::uint32_t>(p[0]));
                s.done = true;
            } else {
                s.done = false;
            }
        };
        lib.push_back(std::move(d));
    }

    {
        PrimitiveDef d;
        d.name = "std_mac";
        d.params = {"WIDTH"};
        d.ports = {in("left", 0), in("right", 0), in1("go"), out("out", 0), out1("done")};
        d.attributes = {{"static", 1}};
        d.go_port = "go";
        d.stateful = true;
        d.comb = [](Params, const PrimState& s, std::span<const std::uint64_t>, std::span<std::uint64_t> o) {
            o[0] = s.value;
            o[1] = s.done ? 1 : 0;
        };
        d.edge = [](Params p, PrimState& s, std::span<const std::uint64_t> i) {
            if (i[2] != 0) {
                s.value = (s.value + i[0] * i[1]) & mask(static_cast<std::uint32_t>(p[0]));
                s.done = true;
            } else {
                s.done = false;
            }
        };
        lib.push_back(std::move(d));
    }

    return lib;
}

}  // namespace detail

/// The standard cell library.
inline const std::vector<PrimitiveDef>& library() {
    static const std::vector<PrimitiveDef> lib = detail::build_library();
    return lib;
}

inline const PrimitiveDef* find_primitive(std::string_view name) {
    for (const auto& d : library())
        if (d.name == name) return &d;
    return nullptr;
}

}  // namespace futil
