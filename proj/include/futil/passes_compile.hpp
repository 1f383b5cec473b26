// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "futil/ir.hpp"
#include "futil/printer.hpp"
#include "futil/resolve.hpp"

namespace futil {

/// Raised when a pass is applied to a program it cannot handle.
struct PassError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Generates names that do not collide with any cell, group or port of a
/// component. Each prefix keeps its own counter.
class NameGen {
public:
    explicit NameGen(const Component& comp) {
        for (const auto& c : comp.cells) used_.insert(c.name);
        for (const auto& g : comp.groups) used_.insert(g.name);
        for (const auto& p : comp.inputs) used_.insert(p.name);
        for (const auto& p : comp.outputs) used_.insert(p.name);
    }

    std::string fresh(const std::string& prefix) {
        auto& n = next_[prefix];
        for (;;) {
            auto candidate = prefix + std::to_string(n++);
            if (used_.insert(candidate).second) return candidate;
        }
    }

private:
    std::set<std::string> used_;
    std::map<std::string, std::uint64_t> next_;
};

/// Smallest width (at least 1) that can hold `n`.
inline std::uint32_t bits_for(std::uint64_t n) {
    std::uint32_t w = 1;
    while (w < 64 && (n >> w) != 0) ++w;
    return w;
}

/// Component indices ordered so that every instantiated component comes
/// before the components that instantiate it.
inline std::vector<std::size_t> dependency_order(const Program& prog) {
    std::vector<std::size_t> order;
    std::vector<int> state(prog.components.size(), 0);
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (state[i] != 0) return;
        state[i] = 1;
        for (const auto& cell : prog.components[i].cells)
            for (std::size_t j = 0; j < prog.components.size(); ++j)
                if (prog.components[j].name == cell.proto.name && state[j] == 0) visit(j);
        state[i] = 2;
        order.push_back(i);
    };
    for (std::size_t i = 0; i < prog.components.size(); ++i) visit(i);
    return order;
}

namespace detail {

inline Guard hole_go(const std::string& g) { return Guard::port(PortRef::go(g)); }
inline Guard hole_done(const std::string& g) { return Guard::port(PortRef::done(g)); }
inline PortRef one() { return PortRef::constant(1, 1); }
inline PortRef zero() { return PortRef::constant(1, 0); }

inline Guard cmp(CmpOp op, const PortRef& p, std::uint32_t w, std::uint64_t v) {
    return Guard::compare(op, p, PortRef::constant(w, v));
}

/// Shared scaffolding for the passes that synthesize new groups and cells.
class Synth {
public:
    explicit Synth(Component& comp) : comp_(comp), names_(comp) {}

    std::string cell(const std::string& prefix, std::string proto, std::vector<std::uint64_t> params) {
        auto name = names_.fresh(prefix);
        comp_.cells.push_back({name, {std::move(proto), std::move(params)}, {}});
        return name;
    }
    std::string reg(const std::string& prefix, std::uint32_t width) { return cell(prefix, "std_reg", {width}); }
    std::string name(const std::string& prefix) { return names_.fresh(prefix); }
    void add_group(Group g) { comp_.groups.push_back(std::move(g)); }

    /// Writes `value` into register `r` whenever `when` holds.
    static void write(Group& g, const std::string& r, std::uint32_t w, const Guard& when, std::uint64_t value) {
        g.assignments.push_back({PortRef::cell(r, "in"), when, PortRef::constant(w, value)});
        g.assignments.push_back({PortRef::cell(r, "write_en"), when, one()});
    }

protected:
    Component& comp_;
    NameGen names_;
};

class ControlCompiler : Synth {
public:
    using Synth::Synth;

    /// Returns the name of a group implementing `c`, or "" if `c` does nothing.
    std::string lower(const Control& c) {
        using K = Control::Kind;
        switch (c.kind) {
            case K::Empty: return {};
            case K::Enable: return c.group;
            case K::Seq:
            case K::Par: {
                std::vector<std::string> kids;
                for (const auto& ch : c.children)
                    if (auto n = lower(ch); !n.empty()) kids.push_back(n);
                if (kids.empty()) return {};
                if (kids.size() == 1) return kids.front();
                return c.kind == K::Seq ? seq(kids) : par(kids);
            }
            case K::If: return if_(c.port, c.group, lower(c.children[0]), lower(c.children[1]));
            case K::While: return while_(c.port, c.group, lower(c.children[0]));
        }
        return {};
    }

private:
    std::string seq(const std::vector<std::string>& kids) {
        auto n = kids.size();
        auto w = bits_for(n);
        auto fsm = reg("fsm", w);
        Group g{name("seq"), {}, {}};
        auto go = hole_go(g.name);
        auto fsm_out = PortRef::cell(fsm, "out");
        for (std::size_t i = 0; i < n; ++i) {
            auto at = cmp(CmpOp::Eq, fsm_out, w, i);
            g.assignments.push_back({PortRef::go(kids[i]), Guard::all(go, at, Guard::negate(hole_done(kids[i]))), one()});
            write(g, fsm, w, Guard::all(go, at, hole_done(kids[i])), i + 1);
        }
        auto last = cmp(CmpOp::Eq, fsm_out, w, n);
        g.assignments.push_back({PortRef::done(g.name), last, one()});
        write(g, fsm, w, last, 0);
        auto name = g.name;
        add_group(std::move(g));
        return name;
    }

    std::string par(const std::vector<std::string>& kids) {
        Group g{name("par"), {}, {}};
        auto go = hole_go(g.name);
        std::vector<std::string> pds;
        for (std::size_t i = 0; i < kids.size(); ++i) pds.push_back(reg("pd", 1));
        Guard all_done = Guard::truth();
        for (const auto& pd : pds) all_done = Guard::conj(all_done, Guard::port(PortRef::cell(pd, "out")));
        for (std::size_t i = 0; i < kids.size(); ++i) {
            auto idle = Guard::negate(Guard::port(PortRef::cell(pds[i], "out")));
            g.assignments.push_back({PortRef::go(kids[i]), Guard::all(go, idle, Guard::negate(hole_done(kids[i]))), one()});
            write(g, pds[i], 1, Guard::all(go, idle, hole_done(kids[i])), 1);
        }
        g.assignments.push_back({PortRef::done(g.name), all_done, one()});
        for (const auto& pd : pds) write(g, pd, 1, all_done, 0);
        auto name = g.name;
        add_group(std::move(g));
        return name;
    }

    /// Registers that latch a cond group's result: `cc` says a value is
    /// available, `cs` holds it.
    struct CondLatch {
        std::string cc, cs;
        Guard computed, value;
    };

    CondLatch latch(Group& g, const PortRef& port, const std::string& cond) {
        CondLatch l{reg("cc", 1), reg("cs", 1), {}, {}};
        auto go = hole_go(g.name);
        auto pending = Guard::negate(Guard::port(PortRef::cell(l.cc, "out")));
        g.assignments.push_back({PortRef::go(cond), Guard::conj(go, pending), one()});
        auto sample = Guard::all(go, pending, hole_done(cond));
        write(g, l.cc, 1, sample, 1);
        g.assignments.push_back({PortRef::cell(l.cs, "in"), sample, port});
        g.assignments.push_back({PortRef::cell(l.cs, "write_en"), sample, one()});
        l.computed = Guard::port(PortRef::cell(l.cc, "out"));
        l.value = Guard::port(PortRef::cell(l.cs, "out"));
        return l;
    }

    std::string if_(const PortRef& port, const std::string& cond, const std::string& t, const std::string& f) {
        Group g{name("if"), {}, {}};
        auto go = hole_go(g.name);
        auto l = latch(g, port, cond);
        auto branch = [&](const std::string& b, const Guard& taken) {
            if (b.empty()) return taken;
            g.assignments.push_back({PortRef::go(b), Guard::all(go, l.computed, taken, Guard::negate(hole_done(b))), one()});
            return Guard::conj(taken, hole_done(b));
        };
        auto t_done = branch(t, l.value);
        auto f_done = branch(f, Guard::negate(l.value));
        auto done = Guard::conj(l.computed, Guard::disj(t_done, f_done));
        g.assignments.push_back({PortRef::done(g.name), done, one()});
        write(g, l.cc, 1, done, 0);
        auto name = g.name;
        add_group(std::move(g));
        return name;
    }

    std::string while_(const PortRef& port, const std::string& cond, const std::string& body) {
        Group g{name("while"), {}, {}};
        auto go = hole_go(g.name);
        auto l = latch(g, port, cond);
        auto looping = Guard::all(go, l.computed, l.value);
        if (!body.empty()) {
            g.assignments.push_back({PortRef::go(body), Guard::conj(looping, Guard::negate(hole_done(body))), one()});
            write(g, l.cc, 1, Guard::conj(looping, hole_done(body)), 0);
        } else {
            write(g, l.cc, 1, looping, 0);
        }
        auto done = Guard::conj(l.computed, Guard::negate(l.value));
        g.assignments.push_back({PortRef::done(g.name), done, one()});
        write(g, l.cc, 1, done, 0);
        auto name = g.name;
        add_group(std::move(g));
        return name;
    }
};

class StaticCompiler : Synth {
public:
    using Synth::Synth;

    Control lower(const Control& c) {
        using K = Control::Kind;
        switch (c.kind) {
            case K::Empty:
            case K::Enable: return c;
            case K::While: return Control::while_(c.port, c.group, lower(c.children[0]));
            case K::Seq:
            case K::Par: {
                Control out = c;
                for (auto& ch : out.children) ch = lower(ch);
                if (!all_static(out.children)) return out;
                return c.kind == K::Seq ? seq(out.children) : par(out.children);
            }
            case K::If: {
                Control out = c;
                for (auto& ch : out.children) ch = lower(ch);
                const auto* cond = comp_.find_group(c.group);
                if (!cond || !cond->static_latency() || !all_static(out.children)) return out;
                // Padding the shorter branch can make the static form slower
                // than the handshake one, so only balanced ifs are compiled.
                auto l = *latency(out.children[0]);
                if (l == 0 || l != *latency(out.children[1]) || !overlap_safe(*cond, out)) return out;
                return if_(out, *cond->static_latency(), l);
            }
        }
        return c;
    }

private:
    std::optional<std::uint64_t> latency(const Control& c) const {
        if (c.is_empty()) return 0;
        if (c.kind != Control::Kind::Enable) return std::nullopt;
        const auto* g = comp_.find_group(c.group);
        return g ? g->static_latency() : std::nullopt;
    }
    bool all_static(const std::vector<Control>& cs) const {
        for (const auto& c : cs)
            if (!latency(c)) return false;
        return true;
    }

    /// Counter register plus incrementer running from 0 up to `total`.
    struct Counter {
        std::string fsm;
        std::uint32_t width;
        PortRef out;
    };

    Counter counter(Group& g, std::uint64_t total) {
        auto w = bits_for(total);
        Counter k{reg("fsm", w), w, {}};
        k.out = PortRef::cell(k.fsm, "out");
        auto incr = cell("incr", "std_add", {w});
        auto go = hole_go(g.name);
        auto running = Guard::conj(go, cmp(CmpOp::Lt, k.out, w, total));
        g.assignments.push_back({PortRef::cell(incr, "left"), running, k.out});
        g.assignments.push_back({PortRef::cell(incr, "right"), running, PortRef::constant(w, 1)});
        g.assignments.push_back({PortRef::cell(k.fsm, "in"), running, PortRef::cell(incr, "out")});
        g.assignments.push_back({PortRef::cell(k.fsm, "write_en"), running, one()});
        auto finished = cmp(CmpOp::Eq, k.out, w, total);
        g.assignments.push_back({PortRef::done(g.name), finished, one()});
        write(g, k.fsm, w, finished, 0);
        return k;
    }

    /// Enables `child` while the counter is in [from, from + len).
    void window(Group& g, const Counter& k, const std::string& child, std::uint64_t from, std::uint64_t len,
                Guard extra = Guard::truth()) {
        if (len == 0) return;
        auto go = hole_go(g.name);
        auto when = Guard::all(go, cmp(CmpOp::Ge, k.out, k.width, from), cmp(CmpOp::Lt, k.out, k.width, from + len),
                               std::move(extra));
        g.assignments.push_back({PortRef::go(child), when, one()});
    }

    Control finish(Group g, std::uint64_t total) {
        g.attributes["static"] = total;
        auto name = g.name;
        add_group(std::move(g));
        return Control::enable(name);
    }

    Control seq(const std::vector<Control>& kids) {
        std::uint64_t total = 0;
        for (const auto& k : kids) total += *latency(k);
        if (total == 0) return Control::empty();  // zero-latency groups never run
        Group g{name("static_seq"), {}, {}};
        auto k = counter(g, total);
        std::uint64_t offset = 0;
        for (const auto& kid : kids) {
            auto l = *latency(kid);
            if (!kid.is_empty()) window(g, k, kid.group, offset, l);
            offset += l;
        }
        return finish(std::move(g), total);
    }

    Control par(const std::vector<Control>& kids) {
        std::uint64_t total = 0;
        for (const auto& k : kids) total = std::max(total, *latency(k));
        if (total == 0) return Control::empty();
        Group g{name("static_par"), {}, {}};
        auto k = counter(g, total);
        for (const auto& kid : kids)
            if (!kid.is_empty()) window(g, k, kid.group, 0, *latency(kid));
        return finish(std::move(g), total);
    }

    /// Groups reachable from `root` through go-hole writes, `root` included.
    std::set<std::string> closure(const std::string& root) const {
        std::set<std::string> seen;
        std::vector<std::string> todo{root};
        while (!todo.empty()) {
            auto n = todo.back();
            todo.pop_back();
            if (!seen.insert(n).second) continue;
            if (const auto* g = comp_.find_group(n))
                for (const auto& a : g->assignments)
                    if (a.dst.is_hole() && a.dst.port == "go") todo.push_back(a.dst.parent);
        }
        return seen;
    }

    /// A branch may start in the cond group's last cycle only if the two
    /// share nothing but registers the cond group reads.
    bool overlap_safe(const Group& cond, const Control& c) const {
        std::set<std::string> cells, written, ports;
        for (const auto& a : cond.assignments) {
            a.for_each_port([&](const PortRef& p) {
                if (p.is_cell()) cells.insert(p.parent);
                if (p.is_this()) ports.insert(p.port);
            });
            if (a.dst.is_cell()) written.insert(a.dst.parent);
        }
        if (c.port.is_cell()) cells.insert(c.port.parent);
        std::set<std::string> branch;
        for (const auto& ch : c.children)
            if (!ch.is_empty()) branch.merge(closure(ch.group));
        for (const auto& name : branch) {
            const auto* g = comp_.find_group(name);
            if (!g) return false;
            for (const auto& a : g->assignments) {
                bool ok = true;
                a.for_each_port([&](const PortRef& p) {
                    if (p.is_this() && ports.count(p.port)) ok = false;
                    if (!p.is_cell() || !cells.count(p.parent)) return;
                    const auto* cell = comp_.find_cell(p.parent);
                    if (!cell || cell->proto.name != "std_reg" || written.count(p.parent)) ok = false;
                });
                if (!ok) return false;
            }
        }
        return true;
    }

    /// The cond group runs for fsm in [0, cond]; each branch starts at
    /// fsm == cond on the live port value, which is latched for the rest.
    Control if_(const Control& c, std::uint64_t cond, std::uint64_t len) {
        auto total = cond + len;
        Group g{name("static_if"), {}, {}};
        auto k = counter(g, total);
        auto go = hole_go(g.name);
        g.assignments.push_back({PortRef::go(c.group), Guard::conj(go, cmp(CmpOp::Le, k.out, k.width, cond)), one()});
        auto first = cmp(CmpOp::Eq, k.out, k.width, cond);
        auto live = Guard::port(c.port);
        Guard held = Guard::falsity();
        if (len > 1) {
            auto cs = reg("cs", 1);
            auto sample = Guard::conj(go, first);
            g.assignments.push_back({PortRef::cell(cs, "in"), sample, c.port});
            g.assignments.push_back({PortRef::cell(cs, "write_en"), sample, one()});
            held = Guard::port(PortRef::cell(cs, "out"));
        }
        auto rest = Guard::conj(cmp(CmpOp::Gt, k.out, k.width, cond), cmp(CmpOp::Lt, k.out, k.width, total));
        auto branch = [&](const Control& b, const Guard& now, const Guard& later) {
            if (b.is_empty()) return;
            auto when = Guard::disj(Guard::conj(first, now), len > 1 ? Guard::conj(rest, later) : Guard::falsity());
            g.assignments.push_back({PortRef::go(b.group), Guard::conj(go, std::move(when)), one()});
        };
        branch(c.children[0], live, held);
        branch(c.children[1], Guard::negate(live), Guard::negate(held));
        return finish(std::move(g), total);
    }
};

inline Guard subst_holes(const Guard& g, const std::function<Guard(const PortRef&)>& hole) {
    using K = Guard::Kind;
    switch (g.kind) {
        case K::True: return g;
        case K::Port: return g.lhs.is_hole() ? hole(g.lhs) : g;
        case K::Cmp: return g;
        case K::Not: return Guard::negate(subst_holes(g.children.front(), hole));
        case K::And:
        case K::Or: {
            Guard acc = g.kind == K::And ? Guard::truth() : Guard::falsity();
            for (const auto& c : g.children) {
                auto s = subst_holes(c, hole);
                acc = g.kind == K::And ? Guard::conj(std::move(acc), std::move(s))
                                       : Guard::disj(std::move(acc), std::move(s));
            }
            return acc;
        }
    }
    return g;
}

}  // namespace detail

/// Conjoins `g[go]` onto every assignment of group `g` except those that
/// drive `g[done]`.
inline Component go_insertion(const Program&, const Component& in) {
    Component comp = in;
    for (auto& g : comp.groups) {
        auto go = detail::hole_go(g.name);
        auto guarded = [&](const Guard& x) {
            return x == go || (x.kind == Guard::Kind::And && x.children.front() == go);
        };
        for (auto& a : g.assignments)
            if (a.dst != PortRef::done(g.name) && !guarded(a.guard)) a.guard = Guard::conj(go, std::move(a.guard));
    }
    return comp;
}

/// Replaces control subtrees whose leaves all have static latencies with
/// counter-driven groups. `while` is never compiled here.
inline Component compile_static(const Program&, const Component& in) {
    Component comp = in;
    detail::StaticCompiler sc(comp);
    auto lowered = sc.lower(in.control);
    comp.control = std::move(lowered);
    return comp;
}

/// Turns the control tree into a single group enable, building
/// handshake-driven FSM groups bottom-up.
inline Component compile_control(const Program&, const Component& in) {
    Component comp = in;
    detail::ControlCompiler cc(comp);
    auto top = cc.lower(in.control);
    comp.control = top.empty() ? Control::empty() : Control::enable(top);
    return comp;
}

/// Wires the top group to the component's go/done interface, inlines every
/// hole as the guard expression driving it and moves all remaining
/// assignments into continuous wires.
inline Component remove_groups(const Program&, const Component& in) {
    using K = Control::Kind;
    if (in.control.kind != K::Enable && in.control.kind != K::Empty)
        throw PassError("remove-groups: control of '" + in.name + "' must be a single enable or empty, found:\n" +
                        to_string(in.control));
    Component comp = in;
    if (!comp.has_input("go")) comp.inputs.push_back({"go", 1});
    if (!comp.has_output("done")) comp.outputs.push_back({"done", 1});
    auto this_go = PortRef::this_port("go");
    auto this_done = PortRef::this_port("done");
    if (comp.control.kind == K::Enable) {
        const auto& top = comp.control.group;
        comp.continuous.push_back({PortRef::go(top), Guard::truth(), this_go});
        comp.continuous.push_back({this_done, Guard::truth(), PortRef::done(top)});
    } else {
        detail::Synth s(comp);
        auto r = s.reg("done_reg", 1);
        comp.continuous.push_back({PortRef::cell(r, "in"), Guard::truth(), this_go});
        comp.continuous.push_back({PortRef::cell(r, "write_en"), Guard::truth(), detail::one()});
        comp.continuous.push_back({this_done, Guard::truth(), PortRef::cell(r, "out")});
    }

    std::map<PortRef, std::vector<const Assignment*>> writers;
    std::vector<const Assignment*> rest;
    comp.for_each_assignment([&](const Assignment& a) {
        if (a.dst.is_hole()) {
            writers[a.dst].push_back(&a);
        } else {
            rest.push_back(&a);
        }
    });

    std::map<PortRef, Guard> memo;
    std::set<PortRef> visiting;
    std::function<Guard(const PortRef&)> hole = [&](const PortRef& h) -> Guard {
        if (auto it = memo.find(h); it != memo.end()) return it->second;
        if (!visiting.insert(h).second) throw PassError("remove-groups: cyclic hole definition at " + to_string(h));
        Guard value = Guard::falsity();
        for (const auto* a : writers[h]) {
            Guard src = a->src.is_const()  ? (a->src.value ? Guard::truth() : Guard::falsity())
                        : a->src.is_hole() ? hole(a->src)
                                           : Guard::port(a->src);
            value = Guard::disj(std::move(value), Guard::conj(detail::subst_holes(a->guard, hole), std::move(src)));
        }
        visiting.erase(h);
        return memo.emplace(h, value).first->second;
    };

    std::vector<Assignment> wires;
    for (const auto* a : rest) {
        Assignment out{a->dst, detail::subst_holes(a->guard, hole), a->src};
        if (out.src.is_hole()) {
            // Undriven ports read 0, so the hole's value needs only the 1 case.
            out.guard = Guard::conj(std::move(out.guard), hole(out.src));
            out.src = detail::one();
        }
        if (!out.guard.is_false()) wires.push_back(std::move(out));
    }
    comp.groups.clear();
    comp.continuous = std::move(wires);
    comp.control = Control::empty();
    return comp;
}

}  // namespace futil
