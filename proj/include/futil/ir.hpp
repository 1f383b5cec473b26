// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace futil {

using Attributes = std::map<std::string, std::uint64_t>;

/// A reference to a port: a cell port, a component interface port, a group
/// hole (`g[go]` / `g[done]`) or a sized constant.
struct PortRef {
    enum class Kind : std::uint8_t { Cell, This, Hole, Const };

    Kind kind = Kind::Const;
    std::string parent;  // cell or group name
    std::string port;    // port name; "go" / "done" for holes
    std::uint32_t width = 0;  // constants only
    std::uint64_t value = 0;  // constants only

    static PortRef cell(std::string cell, std::string port) {
        return {Kind::Cell, std::move(cell), std::move(port), 0, 0};
    }
    static PortRef this_port(std::string port) { return {Kind::This, {}, std::move(port), 0, 0}; }
    static PortRef go(std::string group) { return {Kind::Hole, std::move(group), "go", 0, 0}; }
    static PortRef done(std::string group) { return {Kind::Hole, std::move(group), "done", 0, 0}; }
    static PortRef constant(std::uint32_t width, std::uint64_t value) {
        return {Kind::Const, {}, {}, width, value};
    }

    bool is_const() const { return kind == Kind::Const; }
    bool is_hole() const { return kind == Kind::Hole; }
    bool is_cell() const { return kind == Kind::Cell; }
    bool is_this() const { return kind == Kind::This; }
    bool is_const_value(std::uint64_t v) const { return is_const() && value == v; }

    auto operator<=>(const PortRef&) const = default;
    bool operator==(const PortRef&) const = default;
};

enum class CmpOp : std::uint8_t { Eq, Neq, Lt, Gt, Le, Ge };

inline const char* cmp_op_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "==";
        case CmpOp::Neq: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Gt: return ">";
        case CmpOp::Le: return "<=";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

inline bool cmp_eval(CmpOp op, std::uint64_t a, std::uint64_t b) {
    switch (op) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Neq: return a != b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Gt: return a > b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Ge: return a >= b;
    }
    return false;
}

/// Boolean guard expression. And/Or are n-ary and kept flat by the
/// constructors, so structurally equal guards print identically.
struct Guard {
    enum class Kind : std::uint8_t { True, Port, Not, And, Or, Cmp };

    Kind kind = Kind::True;
    PortRef lhs;  // Port leaf or comparison left operand
    PortRef rhs;  // comparison right operand
    CmpOp op = CmpOp::Eq;
    std::vector<Guard> children;

    static Guard truth() { return {}; }
    static Guard port(PortRef p) {
        if (p.is_const() && p.width == 1 && p.value == 1) return truth();
        Guard g;
        g.kind = Kind::Port;
        g.lhs = std::move(p);
        return g;
    }
    static Guard falsity() { return port(PortRef::constant(1, 0)); }
    static Guard negate(Guard inner) {
        if (inner.is_true()) return falsity();
        if (inner.is_false()) return truth();
        Guard g;
        g.kind = Kind::Not;
        g.children.push_back(std::move(inner));
        return g;
    }
    static Guard compare(CmpOp op, PortRef a, PortRef b) {
        Guard g;
        g.kind = Kind::Cmp;
        g.op = op;
        g.lhs = std::move(a);
        g.rhs = std::move(b);
        return g;
    }
    static Guard conj(Guard a, Guard b) { return nary(Kind::And, std::move(a), std::move(b)); }
    static Guard disj(Guard a, Guard b) {
        if (a.is_true() || b.is_true()) return truth();
        if (a.is_false()) return b;
        if (b.is_false()) return a;
        return nary(Kind::Or, std::move(a), std::move(b));
    }
    template <typename... Gs>
    static Guard all(Guard first, Gs... rest) {
        ((first = conj(std::move(first), std::move(rest))), ...);
        return first;
    }

    bool is_true() const { return kind == Kind::True; }
    bool is_false() const {
        return kind == Kind::Port && lhs.is_const() && lhs.value == 0;
    }

    bool operator==(const Guard&) const = default;

    /// Calls `fn` on every port mentioned in the guard.
    template <typename Fn>
    void for_each_port(Fn&& fn) const {
        switch (kind) {
            case Kind::True: break;
            case Kind::Port: fn(lhs); break;
            case Kind::Cmp:
                fn(lhs);
                fn(rhs);
                break;
            default:
                for (const auto& c : children) c.for_each_port(fn);
        }
    }

    template <typename Fn>
    void for_each_port_mut(Fn&& fn) {
        switch (kind) {
            case Kind::True: break;
            case Kind::Port: fn(lhs); break;
            case Kind::Cmp:
                fn(lhs);
                fn(rhs);
                break;
            default:
                for (auto& c : children) c.for_each_port_mut(fn);
        }
    }

private:
    static Guard nary(Kind k, Guard a, Guard b) {
        if (k == Kind::And) {
            if (a.is_false() || b.is_false()) return falsity();
            if (a.is_true()) return b;
            if (b.is_true()) return a;
        }
        Guard g;
        g.kind = k;
        auto absorb = [&](Guard&& x) {
            if (x.kind == k) {
                for (auto& c : x.children) g.children.push_back(std::move(c));
            } else {
                g.children.push_back(std::move(x));
            }
        };
        absorb(std::move(a));
        absorb(std::move(b));
        return g;
    }
};

struct Assignment {
    PortRef dst;
    Guard guard;
    PortRef src;

    bool operator==(const Assignment&) const = default;

    template <typename Fn>
    void for_each_port(Fn&& fn) const {
        fn(dst);
        guard.for_each_port(fn);
        fn(src);
    }
    /// Ports read by this assignment (guard leaves and source).
    template <typename Fn>
    void for_each_read(Fn&& fn) const {
        guard.for_each_port(fn);
        fn(src);
    }
    template <typename Fn>
    void for_each_port_mut(Fn&& fn) {
        fn(dst);
        guard.for_each_port_mut(fn);
        fn(src);
    }
};

struct Group {
    std::string name;
    std::vector<Assignment> assignments;
    Attributes attributes;

    bool operator==(const Group&) const = default;

    std::optional<std::uint64_t> static_latency() const {
        auto it = attributes.find("static");
        if (it == attributes.end()) return std::nullopt;
        return it->second;
    }
};

struct Control {
    enum class Kind : std::uint8_t { Empty, Enable, Seq, Par, If, While };

    Kind kind = Kind::Empty;
    std::string group;  // enabled group, or the cond group of if/while
    PortRef port;       // if/while condition port
    std::vector<Control> children;  // seq/par children; if: {then, else}; while: {body}

    static Control empty() { return {}; }
    static Control enable(std::string g) { return {Kind::Enable, std::move(g), {}, {}}; }
    static Control seq(std::vector<Control> cs) { return {Kind::Seq, {}, {}, std::move(cs)}; }
    static Control par(std::vector<Control> cs) { return {Kind::Par, {}, {}, std::move(cs)}; }
    static Control if_(PortRef p, std::string cond, Control t, Control f) {
        Control c{Kind::If, std::move(cond), std::move(p), {}};
        c.children.push_back(std::move(t));
        c.children.push_back(std::move(f));
        return c;
    }
    static Control while_(PortRef p, std::string cond, Control body) {
        Control c{Kind::While, std::move(cond), std::move(p), {}};
        c.children.push_back(std::move(body));
        return c;
    }

    bool is_empty() const { return kind == Kind::Empty; }
    bool operator==(const Control&) const = default;

    /// Number of nodes other than Empty.
    std::size_t statement_count() const {
        std::size_t n = kind == Kind::Empty ? 0 : 1;
        for (const auto& c : children) n += c.statement_count();
        return n;
    }

    /// Calls `fn` with every group name the tree references (enables and
    /// cond groups), in pre-order.
    template <typename Fn>
    void for_each_group(Fn&& fn) const {
        if (kind == Kind::Enable || kind == Kind::If || kind == Kind::While) fn(group);
        for (const auto& c : children) c.for_each_group(fn);
    }
};

struct PortDef {
    std::string name;
    std::uint32_t width = 1;
    bool operator==(const PortDef&) const = default;
};

struct CellProto {
    std::string name;  // primitive or component name
    std::vector<std::uint64_t> params;
    bool operator==(const CellProto&) const = default;
    auto operator<=>(const CellProto&) const = default;
};

struct Cell {
    std::string name;
    CellProto proto;
    Attributes attributes;
    bool operator==(const Cell&) const = default;
};

struct Signature {
    std::string name;
    std::vector<PortDef> inputs;
    std::vector<PortDef> outputs;
    Attributes attributes;
    bool operator==(const Signature&) const = default;
};

struct Extern {
    std::string path;
    std::vector<Signature> components;
    bool operator==(const Extern&) const = default;
};

struct Component {
    std::string name;
    std::vector<PortDef> inputs;
    std::vector<PortDef> outputs;
    std::vector<Cell> cells;
    std::vector<Group> groups;
    std::vector<Assignment> continuous;
    Control control;
    Attributes attributes;

    bool operator==(const Component&) const = default;

    const Cell* find_cell(std::string_view n) const {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.name == n; });
        return it == cells.end() ? nullptr : &*it;
    }
    Group* find_group(std::string_view n) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.name == n; });
        return it == groups.end() ? nullptr : &*it;
    }
    const Group* find_group(std::string_view n) const {
        return const_cast<Component*>(this)->find_group(n);
    }
    const PortDef* find_port(std::string_view n) const {
        for (const auto& p : inputs)
            if (p.name == n) return &p;
        for (const auto& p : outputs)
            if (p.name == n) return &p;
        return nullptr;
    }
    bool has_input(std::string_view n) const {
        return std::any_of(inputs.begin(), inputs.end(), [&](const PortDef& p) { return p.name == n; });
    }
    bool has_output(std::string_view n) const {
        return std::any_of(outputs.begin(), outputs.end(), [&](const PortDef& p) { return p.name == n; });
    }
    Signature signature() const { return {name, inputs, outputs, attributes}; }

    template <typename Fn>
    void for_each_assignment(Fn&& fn) const {
        for (const auto& g : groups)
            for (const auto& a : g.assignments) fn(a);
        for (const auto& a : continuous) fn(a);
    }
    template <typename Fn>
    void for_each_assignment_mut(Fn&& fn) {
        for (auto& g : groups)
            for (auto& a : g.assignments) fn(a);
        for (auto& a : continuous) fn(a);
    }
};

struct Program {
    std::vector<Extern> externs;
    std::vector<Component> components;
    std::string entrypoint = "main";

    bool operator==(const Program&) const = default;

    Component* find_component(std::string_view n) {
        for (auto& c : components)
            if (c.name == n) return &c;
        return nullptr;
    }
    const Component* find_component(std::string_view n) const {
        return const_cast<Program*>(this)->find_component(n);
    }
    const Signature* find_extern(std::string_view n) const {
        for (const auto& e : externs)
            for (const auto& s : e.components)
                if (s.name == n) return &s;
        return nullptr;
    }
};

}  // namespace futil
