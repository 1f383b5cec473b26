// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "futil/ir.hpp"
#include "futil/printer.hpp"
#include "futil/resolve.hpp"

namespace futil {

enum class Severity : std::uint8_t { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string location;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
    std::string format() const {
        return std::string(severity == Severity::Error ? "error" : "warning") + ": " + location + ": " + message;
    }
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& ds) {
    return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace detail {

// A literal `port in [lo, hi]` extracted from a conjunction.
struct RangeLit {
    PortRef port;
    std::uint64_t lo;
    std::uint64_t hi;
};

inline std::optional<RangeLit> range_of(CmpOp op, const PortRef& port, std::uint64_t c, std::uint32_t width) {
    std::uint64_t top = mask(width == 0 ? 64 : width);
    switch (op) {
        case CmpOp::Eq: return RangeLit{port, c, c};
        case CmpOp::Lt:
            if (c == 0) return RangeLit{port, 1, 0};
            return RangeLit{port, 0, c - 1};
        case CmpOp::Le: return RangeLit{port, 0, c};
        case CmpOp::Gt:
            if (c >= top) return RangeLit{port, 1, 0};
            return RangeLit{port, c + 1, top};
        case CmpOp::Ge: return RangeLit{port, c, top};
        case CmpOp::Neq: return std::nullopt;
    }
    return std::nullopt;
}

inline CmpOp negate_op(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return CmpOp::Neq;
        case CmpOp::Neq: return CmpOp::Eq;
        case CmpOp::Lt: return CmpOp::Ge;
        case CmpOp::Ge: return CmpOp::Lt;
        case CmpOp::Gt: return CmpOp::Le;
        case CmpOp::Le: return CmpOp::Gt;
    }
    return op;
}

inline CmpOp flip_op(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return CmpOp::Gt;
        case CmpOp::Gt: return CmpOp::Lt;
        case CmpOp::Le: return CmpOp::Ge;
        case CmpOp::Ge: return CmpOp::Le;
        default: return op;
    }
}

inline std::optional<RangeLit> literal(const Guard& g, bool negated) {
    using K = Guard::Kind;
    if (g.kind == K::Not) return literal(g.children.front(), !negated);
    if (g.kind == K::Port && !g.lhs.is_const()) {
        std::uint64_t v = negated ? 0 : 1;
        return RangeLit{g.lhs, v, v};
    }
    if (g.kind == K::Cmp) {
        CmpOp op = negated ? negate_op(g.op) : g.op;
        if (g.rhs.is_const() && !g.lhs.is_const()) return range_of(op, g.lhs, g.rhs.value, g.rhs.width);
        if (g.lhs.is_const() && !g.rhs.is_const()) return range_of(flip_op(op), g.rhs, g.lhs.value, g.lhs.width);
    }
    return std::nullopt;
}

inline void conjuncts(const Guard& g, std::vector<RangeLit>& lits, std::vector<const Guard*>& complex) {
    if (g.kind == Guard::Kind::And) {
        for (const auto& c : g.children) conjuncts(c, lits, complex);
        return;
    }
    if (auto l = literal(g, false)) {
        lits.push_back(*l);
    } else if (!g.is_true()) {
        complex.push_back(&g);
    }
}

/// Syntactic exclusivity: literal complements, or comparisons of one port
/// against constants whose value ranges cannot intersect.
inline bool exclusive(const Guard& a, const Guard& b) {
    if (a.kind == Guard::Kind::Or)
        return std::all_of(a.children.begin(), a.children.end(), [&](const Guard& c) { return exclusive(c, b); });
    if (b.kind == Guard::Kind::Or)
        return std::all_of(b.children.begin(), b.children.end(), [&](const Guard& c) { return exclusive(a, c); });
    if (a.is_false() || b.is_false()) return true;
    std::vector<RangeLit> lits;
    std::vector<const Guard*> ca, cb;
    conjuncts(a, lits, ca);
    conjuncts(b, lits, cb);
    std::map<PortRef, std::pair<std::uint64_t, std::uint64_t>> ranges;
    for (const auto& l : lits) {
        auto [it, fresh] = ranges.try_emplace(l.port, l.lo, l.hi);
        if (!fresh) {
            it->second.first = std::max(it->second.first, l.lo);
            it->second.second = std::min(it->second.second, l.hi);
        }
        if (it->second.first > it->second.second) return true;
    }
    auto complement = [](const Guard& x, const Guard& y) {
        return x.kind == Guard::Kind::Not && x.children.front() == y;
    };
    if (complement(a, b) || complement(b, a)) return true;
    for (const auto* x : ca)
        for (const auto* y : cb)
            if (complement(*x, *y) || complement(*y, *x)) return true;
    for (const auto* c : ca)
        if (c->kind == Guard::Kind::Or && exclusive(*c, b)) return true;
    for (const auto* c : cb)
        if (c->kind == Guard::Kind::Or && exclusive(a, *c)) return true;
    return false;
}

inline void unique_drivers(const std::vector<Assignment>& assigns, const std::string& loc, Diagnostics& out) {
    std::map<PortRef, std::vector<const Assignment*>> by_dst;
    for (const auto& a : assigns) by_dst[a.dst].push_back(&a);
    for (const auto& [dst, list] : by_dst) {
        bool reported = false;
        for (std::size_t i = 0; i < list.size() && !reported; ++i)
            for (std::size_t j = i + 1; j < list.size() && !reported; ++j)
                if (!exclusive(list[i]->guard, list[j]->guard)) {
                    out.push_back({Severity::Error, loc,
                                   "port " + to_string(dst) + " has multiple drivers: `" + to_string(*list[i]) +
                                       "` and `" + to_string(*list[j]) + "`"});
                    reported = true;
                }
    }
}

}  // namespace detail

/// Reports combinational cycles through assignments and primitive
/// combinational paths. Stateful outputs break paths.
inline Diagnostics comb_cycle_check(const Program& prog, const Component& comp) {
    Diagnostics out;
    PortTable table(prog, comp);
    std::map<PortRef, std::vector<PortRef>> succ;
    std::set<PortRef> nodes;
    auto edge = [&](const PortRef& from, const PortRef& to) {
        if (from.is_const()) return;
        succ[from].push_back(to);
        nodes.insert(from);
        nodes.insert(to);
    };
    auto add_assign = [&](const Assignment& a, const Group* owner) {
        a.for_each_read([&](const PortRef& r) { edge(r, a.dst); });
        bool own_done = owner && a.dst == PortRef::done(owner->name);
        if (owner && !own_done) edge(PortRef::go(owner->name), a.dst);
    };
    for (const auto& g : comp.groups)
        for (const auto& a : g.assignments) add_assign(a, &g);
    for (const auto& a : comp.continuous) add_assign(a, nullptr);
    for (const auto& c : comp.cells) {
        const auto* sig = table.cell(c.name);
        if (!sig || !sig->primitive) continue;
        for (const auto& [i, o] : sig->primitive->comb_paths) edge(PortRef::cell(c.name, i), PortRef::cell(c.name, o));
    }
    // An enabled group is gated off by its own done.
    std::function<void(const Control&)> enables = [&](const Control& c) {
        if (c.kind == Control::Kind::Enable && comp.find_group(c.group))
            edge(PortRef::done(c.group), PortRef::go(c.group));
        for (const auto& ch : c.children) enables(ch);
    };
    enables(comp.control);

    std::map<PortRef, int> color;  // 0 white, 1 grey, 2 black
    std::vector<PortRef> stack;
    std::function<void(const PortRef&)> dfs = [&](const PortRef& n) {
        color[n] = 1;
        stack.push_back(n);
        for (const auto& m : succ[n]) {
            if (color[m] == 1) {
                auto it = std::find(stack.begin(), stack.end(), m);
                std::string path;
                for (auto p = it; p != stack.end(); ++p) path += to_string(*p) + " -> ";
                path += to_string(m);
                out.push_back({Severity::Error, comp.name, "combinational cycle: " + path});
            } else if (color[m] == 0) {
                dfs(m);
            }
        }
        stack.pop_back();
        color[n] = 2;
    };
    for (const auto& n : nodes)
        if (color[n] == 0) dfs(n);
    return out;
}

/// Structural well-formedness. Never stops at the first problem.
inline Diagnostics validate(const Program& prog) {
    Diagnostics out;
    auto err = [&](std::string loc, std::string msg) { out.push_back({Severity::Error, std::move(loc), std::move(msg)}); };

    std::set<std::string> names;
    for (const auto& e : prog.externs)
        for (const auto& s : e.components)
            if (!names.insert(s.name).second) err(s.name, "duplicate component name");
    for (const auto& c : prog.components)
        if (!names.insert(c.name).second) err(c.name, "duplicate component name");
    if (!prog.find_component(prog.entrypoint)) err(prog.entrypoint, "entrypoint component is not defined");

    // Instantiation must be acyclic.
    {
        std::map<std::string, int> state;
        std::function<void(const Component&)> visit = [&](const Component& c) {
            state[c.name] = 1;
            for (const auto& cell : c.cells) {
                const auto* sub = prog.find_component(cell.proto.name);
                if (!sub) continue;
                if (state[sub->name] == 1) {
                    err(c.name, "recursive instantiation of component '" + sub->name + "'");
                } else if (state[sub->name] == 0) {
                    visit(*sub);
                }
            }
            state[c.name] = 2;
        };
        for (const auto& c : prog.components)
            if (state[c.name] == 0) visit(c);
    }

    for (const auto& comp : prog.components) {
        const std::string& cn = comp.name;
        std::set<std::string> ports;
        for (const auto* list : {&comp.inputs, &comp.outputs})
            for (const auto& p : *list) {
                if (!ports.insert(p.name).second) err(cn, "duplicate port '" + p.name + "'");
                if (p.width == 0 || p.width > 64) err(cn, "port '" + p.name + "' width must be in 1..64");
            }
        std::set<std::string> local;
        for (const auto& c : comp.cells)
            if (!local.insert(c.name).second) err(cn, "duplicate cell '" + c.name + "'");
        std::set<std::string> group_names;
        for (const auto& g : comp.groups) {
            if (!group_names.insert(g.name).second) err(cn, "duplicate group '" + g.name + "'");
            if (local.count(g.name)) err(cn, "group '" + g.name + "' collides with a cell name");
        }

        PortTable table(prog, comp);
        for (const auto& [cell, msg] : table.errors()) err(cn + "." + cell, msg);
        for (const auto& c : comp.cells)
            if (const auto* s = table.cell(c.name))
                for (const auto& p : s->ports)
                    if (p.width == 0 || p.width > 64)
                        err(cn + "." + c.name, "port '" + p.name + "' width must be in 1..64");

        auto check_port = [&](const std::string& loc, const PortRef& p) -> std::optional<std::uint32_t> {
            if (p.is_const()) {
                if (p.width == 0) {
                    err(loc, "cannot infer width of literal " + std::to_string(p.value));
                    return std::nullopt;
                }
                if (p.width < 64 && p.value > mask(p.width))
                    err(loc, "literal " + to_string(p) + " does not fit its width");
                return p.width;
            }
            auto w = table.width(p);
            if (!w) {
                if (p.is_cell() && !comp.find_cell(p.parent)) {
                    err(loc, "undefined cell '" + p.parent + "'");
                } else if (p.is_hole() && !comp.find_group(p.parent)) {
                    err(loc, "undefined group '" + p.parent + "'");
                } else if (p.is_cell() && !table.cell(p.parent)) {
                    // prototype error already reported
                } else {
                    err(loc, "undefined port " + to_string(p));
                }
            }
            return w;
        };
        std::function<void(const std::string&, const Guard&)> check_guard = [&](const std::string& loc,
                                                                                const Guard& g) {
            using K = Guard::Kind;
            switch (g.kind) {
                case K::True: break;
                case K::Port:
                    if (auto w = check_port(loc, g.lhs); w && *w != 1)
                        err(loc, "guard port " + to_string(g.lhs) + " is " + std::to_string(*w) + " bits, expected 1");
                    break;
                case K::Cmp: {
                    auto a = check_port(loc, g.lhs);
                    auto b = check_port(loc, g.rhs);
                    if (g.lhs.is_hole() || g.rhs.is_hole()) err(loc, "holes cannot be compared");
                    if (a && b && *a != *b)
                        err(loc, "comparison `" + to_string(g) + "` has mismatched widths " + std::to_string(*a) +
                                     " and " + std::to_string(*b));
                    break;
                }
                default:
                    for (const auto& c : g.children) check_guard(loc, c);
            }
        };
        auto check_assign = [&](const std::string& loc, const Assignment& a) {
            if (a.dst.is_const()) {
                err(loc, "constant used as destination");
                return;
            }
            auto dw = check_port(loc, a.dst);
            if (dw && !table.writable(a.dst)) err(loc, "port " + to_string(a.dst) + " is not writable");
            auto sw = check_port(loc, a.src);
            if (dw && sw && *dw != *sw)
                err(loc, "width mismatch in `" + to_string(a) + "`: " + std::to_string(*dw) + " vs " +
                             std::to_string(*sw));
            check_guard(loc, a.guard);
        };
        for (const auto& g : comp.groups) {
            std::string loc = cn + "." + g.name;
            for (const auto& a : g.assignments) check_assign(loc, a);
            detail::unique_drivers(g.assignments, loc, out);
        }
        for (const auto& a : comp.continuous) check_assign(cn + ".wires", a);
        detail::unique_drivers(comp.continuous, cn + ".wires", out);

        std::set<std::string> done_checked;
        std::function<void(const Control&)> check_control = [&](const Control& c) {
            using K = Control::Kind;
            if (c.kind == K::Enable || c.kind == K::If || c.kind == K::While) {
                std::string loc = cn + ".control";
                const Group* g = comp.find_group(c.group);
                if (!g) {
                    err(loc, "undefined group '" + c.group + "'");
                } else if (done_checked.insert(g->name).second) {
                    bool drives = std::any_of(g->assignments.begin(), g->assignments.end(), [&](const Assignment& a) {
                        return a.dst == PortRef::done(g->name);
                    });
                    if (!drives) err(cn + "." + g->name, "group is enabled by control but never assigns its done hole");
                }
                if (c.kind != K::Enable) {
                    if (auto w = check_port(loc, c.port); w && *w != 1)
                        err(loc, "condition port " + to_string(c.port) + " must be 1 bit");
                }
            }
            for (const auto& ch : c.children) check_control(ch);
        };
        check_control(comp.control);

        if (table.errors().empty()) {
            auto cyc = comb_cycle_check(prog, comp);
            out.insert(out.end(), cyc.begin(), cyc.end());
        }
    }
    return out;
}

}  // namespace futil
