// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "futil/ir.hpp"
#include "futil/pipeline.hpp"
#include "futil/primitives.hpp"
#include "futil/printer.hpp"
#include "futil/resolve.hpp"

namespace futil {

struct InterpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MemData {
    std::uint32_t width = 32;
    std::vector<std::uint64_t> data;
    bool operator==(const MemData&) const = default;
};

/// Initial memory contents, keyed by memory cell name in the entry component.
using MemImage = std::map<std::string, MemData>;

inline nlohmann::json mem_to_json(const std::map<std::string, MemData>& mems) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, m] : mems) j[name] = {{"width", m.width}, {"data", m.data}};
    return j;
}

inline MemImage mem_from_json(const nlohmann::json& j) {
    MemImage img;
    if (!j.is_object()) throw InterpError("memory image must be a JSON object");
    for (const auto& [name, v] : j.items()) {
        MemData m;
        m.width = v.at("width").get<std::uint32_t>();
        m.data = v.at("data").get<std::vector<std::uint64_t>>();
        img.emplace(name, std::move(m));
    }
    return img;
}

struct RunResult {
    std::uint64_t cycles = 0;
    std::map<std::string, MemData> memories;
    std::map<std::string, std::uint64_t> registers;
    /// Control-tree positions (child indices from the root) of the enables
    /// the control interpreter ran.
    std::set<std::vector<std::size_t>> enabled;

    nlohmann::json to_json() const {
        return {{"cycles", cycles}, {"memories", mem_to_json(memories)}, {"registers", registers}};
    }
};

struct InterpOptions {
    std::uint64_t cycle_limit = 1'000'000;
};

namespace detail {

struct CGuard {
    Guard::Kind kind = Guard::Kind::True;
    int a = -1, b = -1;  // slots, or -1 for the constants below
    std::uint64_t ca = 0, cb = 0;
    CmpOp op = CmpOp::Eq;
    std::vector<CGuard> kids;
};

struct Drive {
    int dst = -1;
    CGuard guard;
    int src = -1;  // -1: constant `value`
    std::uint64_t value = 0;
    int enable = -1;  // slot that must be 1 (implicit group go)
    int gate = -1;    // scheduler switch index
    std::string text;
};

struct Inst {
    std::string name;
    const PrimitiveDef* def = nullptr;
    std::vector<std::uint64_t> params;
    std::vector<int> ins, outs;
    PrimState state;
    bool top = false;
};

class Netlist {
public:
    std::vector<std::uint64_t> val;
    std::vector<std::string> names;
    std::vector<std::vector<int>> drivers;  // per slot
    std::vector<Drive> drives;
    std::vector<Inst> insts;
    std::vector<std::uint8_t> gates;

    int slot(const std::string& key) {
        auto [it, fresh] = index_.try_emplace(key, static_cast<int>(val.size()));
        if (fresh) {
            val.push_back(0);
            names.push_back(key);
            drivers.emplace_back();
        }
        return it->second;
    }
    int find(const std::string& key) const {
        auto it = index_.find(key);
        return it == index_.end() ? -1 : it->second;
    }

    void add_drive(Drive d) {
        drivers[d.dst].push_back(static_cast<int>(drives.size()));
        drives.push_back(std::move(d));
    }

    bool eval(const CGuard& g) const {
        using K = Guard::Kind;
        auto v = [&](int s, std::uint64_t c) { return s < 0 ? c : val[s]; };
        switch (g.kind) {
            case K::True: return true;
            case K::Port: return v(g.a, g.ca) != 0;
            case K::Cmp: return cmp_eval(g.op, v(g.a, g.ca), v(g.b, g.cb));
            case K::Not: return !eval(g.kids.front());
            case K::And:
                for (const auto& k : g.kids)
                    if (!eval(k)) return false;
                return true;
            case K::Or:
                for (const auto& k : g.kids)
                    if (eval(k)) return true;
                return false;
        }
        return false;
    }
    bool active(const Drive& d) const {
        if (d.gate >= 0 && gates[d.gate] == 0) return false;
        if (d.enable >= 0 && val[d.enable] == 0) return false;
        return eval(d.guard);
    }
    std::uint64_t source(const Drive& d) const { return d.src < 0 ? d.value : val[d.src]; }

    /// Iterates drivers and combinational outputs to a fixed point.
    void settle() {
        std::vector<std::uint64_t> ins, outs;
        auto limit = val.size() + insts.size() + 4;
        for (std::size_t iter = 0;; ++iter) {
            if (iter > limit) throw InterpError("combinational logic did not settle");
            bool changed = false;
            for (std::size_t s = 0; s < val.size(); ++s) {
                if (drivers[s].empty()) continue;
                std::uint64_t v = 0;
                for (int d : drivers[s])
                    if (active(drives[d])) {
                        v = source(drives[d]);
                        break;
                    }
                if (val[s] != v) {
                    val[s] = v;
                    changed = true;
                }
            }
            for (auto& inst : insts) {
                if (!inst.def->comb) continue;
                ins.resize(inst.ins.size());
                outs.assign(inst.outs.size(), 0);
                for (std::size_t i = 0; i < ins.size(); ++i) ins[i] = val[inst.ins[i]];
                inst.def->comb(inst.params, inst.state, ins, outs);
                for (std::size_t i = 0; i < outs.size(); ++i)
                    if (val[inst.outs[i]] != outs[i]) {
                        val[inst.outs[i]] = outs[i];
                        changed = true;
                    }
            }
            if (!changed) return;
        }
    }

    bool driven(int s) const {
        for (int d : drivers[s])
            if (active(drives[d])) return true;
        return false;
    }

    void check(std::uint64_t cycle) const {
        for (std::size_t s = 0; s < val.size(); ++s) {
            const Drive* first = nullptr;
            for (int d : drivers[s]) {
                if (!active(drives[d])) continue;
                if (!first) {
                    first = &drives[d];
                } else if (source(*first) != source(drives[d])) {
                    throw InterpError("cycle " + std::to_string(cycle) + ": conflicting drivers for " + names[s] +
                                      ": `" + first->text + "` and `" + drives[d].text + "`");
                }
            }
        }
        for (const auto& inst : insts) {
            if (inst.def->name != "std_mem_d1") continue;
            auto addr = val[inst.ins[0]];
            bool writing = val[inst.ins[2]] != 0;
            if (addr >= inst.state.mem.size() && (writing || driven(inst.ins[0])))
                throw InterpError("cycle " + std::to_string(cycle) + ": address " + std::to_string(addr) +
                                  " out of range for memory " + inst.name);
        }
    }

    void commit() {
        std::vector<std::uint64_t> ins;
        for (auto& inst : insts) {
            if (!inst.def->edge) continue;
            ins.resize(inst.ins.size());
            for (std::size_t i = 0; i < ins.size(); ++i) ins[i] = val[inst.ins[i]];
            inst.def->edge(inst.params, inst.state, ins);
        }
    }

private:
    std::map<std::string, int> index_;
};

/// Flattens a component and, recursively, its sub-component instances.
/// Holes only exist for the top component in control mode.
class Elaborator {
public:
    Elaborator(const Program& prog, const Program& lowered, Netlist& net)
        : prog_(prog), lowered_(lowered), net_(net) {}

    void run(const Component& comp, const std::string& prefix, bool control_mode) {
        PortTable table(control_mode || prefix.empty() ? prog_ : lowered_, comp);
        for (const auto& [cell, err] : table.errors()) throw InterpError("cell " + cell + ": " + err);
        for (const auto& cell : comp.cells) {
            const auto* sig = table.cell(cell.name);
            if (sig->external) throw InterpError("cannot simulate extern cell " + prefix + cell.name);
            if (sig->component) {
                const auto* sub = lowered_.find_component(sig->component->name);
                if (!sub || !sub->groups.empty() || !sub->control.is_empty())
                    throw InterpError("sub-component " + sig->component->name + " is not lowered");
                run(*sub, prefix + cell.name + ".", false);
                continue;
            }
            Inst inst;
            inst.name = prefix + cell.name;
            inst.def = sig->primitive;
            inst.params = cell.proto.params;
            inst.top = prefix.empty();
            for (const auto& p : sig->ports) {
                int s = net_.slot(prefix + cell.name + "." + p.name);
                (p.dir == Dir::In ? inst.ins : inst.outs).push_back(s);
            }
            if (inst.def->init) inst.def->init(inst.params, inst.state);
            net_.insts.push_back(std::move(inst));
        }
        for (const auto& g : comp.groups) {
            if (!control_mode) throw InterpError("component " + comp.name + " still has groups");
            int go = net_.slot(key(prefix, PortRef::go(g.name)));
            for (const auto& a : g.assignments) add(prefix, a, a.dst == PortRef::done(g.name) ? -1 : go);
        }
        for (const auto& a : comp.continuous) add(prefix, a, -1);
    }

    std::string key(const std::string& prefix, const PortRef& p) const {
        switch (p.kind) {
            case PortRef::Kind::Cell: return prefix + p.parent + "." + p.port;
            case PortRef::Kind::This: return prefix + p.port;
            case PortRef::Kind::Hole: return prefix + p.parent + "[" + p.port + "]";
            case PortRef::Kind::Const: break;
        }
        return {};
    }

    CGuard compile(const std::string& prefix, const Guard& g) {
        CGuard c;
        c.kind = g.kind;
        c.op = g.op;
        auto operand = [&](const PortRef& p, int& s, std::uint64_t& k) {
            if (p.is_const()) {
                k = p.value;
            } else {
                s = net_.slot(key(prefix, p));
            }
        };
        if (g.kind == Guard::Kind::Port || g.kind == Guard::Kind::Cmp) operand(g.lhs, c.a, c.ca);
        if (g.kind == Guard::Kind::Cmp) operand(g.rhs, c.b, c.cb);
        for (const auto& k : g.children) c.kids.push_back(compile(prefix, k));
        return c;
    }

private:
    void add(const std::string& prefix, const Assignment& a, int enable) {
        Drive d;
        d.dst = net_.slot(key(prefix, a.dst));
        d.guard = compile(prefix, a.guard);
        if (a.src.is_const()) {
            d.value = a.src.value;
        } else {
            d.src = net_.slot(key(prefix, a.src));
        }
        d.enable = enable;
        d.text = (prefix.empty() ? "" : prefix) + to_string(a);
        net_.add_drive(std::move(d));
    }

    const Program& prog_;
    const Program& lowered_;
    Netlist& net_;
};

inline const Component& entry(const Program& prog) {
    const auto* c = prog.find_component(prog.entrypoint);
    if (!c) throw InterpError("no entry component '" + prog.entrypoint + "'");
    return *c;
}

inline bool has_subcomponents(const Program& prog, const Component& comp) {
    for (const auto& c : comp.cells)
        if (prog.find_component(c.proto.name)) return true;
    return false;
}

inline void load_memories(Netlist& net, const MemImage& image) {
    std::map<std::string, Inst*> mems;
    for (auto& inst : net.insts)
        if (inst.top && inst.def->name == "std_mem_d1") mems[inst.name] = &inst;
    for (const auto& [name, m] : image) {
        auto it = mems.find(name);
        if (it == mems.end()) throw InterpError("memory image names unknown memory '" + name + "'");
        auto& inst = *it->second;
        if (m.width != inst.params[0])
            throw InterpError("memory " + name + ": image width " + std::to_string(m.width) + " != " +
                              std::to_string(inst.params[0]));
        if (m.data.size() != inst.state.mem.size())
            throw InterpError("memory " + name + ": image has " + std::to_string(m.data.size()) +
                              " entries, expected " + std::to_string(inst.state.mem.size()));
        for (auto v : m.data)
            if ((v & mask(m.width)) != v) throw InterpError("memory " + name + ": value does not fit width");
        inst.state.mem = m.data;
    }
}

inline RunResult collect(const Netlist& net, std::uint64_t cycles) {
    RunResult r;
    r.cycles = cycles;
    for (const auto& inst : net.insts) {
        if (!inst.top) continue;
        if (inst.def->name == "std_mem_d1")
            r.memories[inst.name] = {static_cast<std::uint32_t>(inst.params[0]), inst.state.mem};
        if (inst.def->name == "std_reg") r.registers[inst.name] = inst.state.value;
    }
    return r;
}

/// Walks the control tree, deciding each cycle which groups the program
/// must activate.
class Scheduler {
public:
    Scheduler(Netlist& net, const Component& comp) : net_(net) {
        for (const auto& g : comp.groups) {
            int go = net.slot(g.name + "[go]");
            int done = net.slot(g.name + "[done]");
            auto& s = slots_[g.name];
            s.done = done;
            s.normal = static_cast<int>(net.gates.size());
            net.gates.push_back(0);
            s.cond = static_cast<int>(net.gates.size());
            net.gates.push_back(0);
            Drive normal;
            normal.dst = go;
            normal.guard.kind = Guard::Kind::Not;
            CGuard leaf;
            leaf.kind = Guard::Kind::Port;
            leaf.a = done;
            normal.guard.kids.push_back(leaf);
            normal.value = 1;
            normal.gate = s.normal;
            normal.text = g.name + "[go] = !" + g.name + "[done] ? 1'd1  (scheduler)";
            net.add_drive(std::move(normal));
            Drive cond;
            cond.dst = go;
            cond.value = 1;
            cond.gate = s.cond;
            cond.text = g.name + "[go] = 1'd1  (scheduler)";
            net.add_drive(std::move(cond));
        }
        index(comp.control, {});
    }

    struct Exec {
        const Control* c = nullptr;
        std::size_t idx = 0;
        bool in_cond = false;
        std::vector<Exec> kids;
        std::vector<bool> finished;
    };

    std::set<std::vector<std::size_t>> enabled;

    /// Returns true when `c` completes without using any cycle.
    bool start(Exec& e, const Control& c) {
        using K = Control::Kind;
        e = Exec{};
        e.c = &c;
        switch (c.kind) {
            case K::Empty: return true;
            case K::Enable: return false;
            case K::Seq: return advance_seq(e);
            case K::Par: {
                bool all = true;
                e.kids.resize(c.children.size());
                for (std::size_t i = 0; i < c.children.size(); ++i) {
                    e.finished.push_back(start(e.kids[i], c.children[i]));
                    all = all && e.finished.back();
                }
                return all;
            }
            case K::If:
            case K::While: e.in_cond = true; return false;
        }
        return true;
    }

    void activate(const Exec& e) {
        using K = Control::Kind;
        switch (e.c->kind) {
            case K::Empty: break;
            case K::Enable:
                net_.gates[slot(e.c->group).normal] = 1;
                enabled.insert(paths_.at(e.c));
                break;
            case K::Seq: activate(e.kids.front()); break;
            case K::Par:
                for (std::size_t i = 0; i < e.kids.size(); ++i)
                    if (!e.finished[i]) activate(e.kids[i]);
                break;
            case K::If:
            case K::While:
                if (e.in_cond) {
                    net_.gates[slot(e.c->group).cond] = 1;
                } else {
                    activate(e.kids.front());
                }
                break;
        }
    }

    /// Consumes the settled values of one cycle; true when `e` completed.
    bool step(Exec& e) {
        using K = Control::Kind;
        const auto& c = *e.c;
        switch (c.kind) {
            case K::Empty: return true;
            case K::Enable: return net_.val[slot(c.group).done] != 0;
            case K::Seq:
                if (!step(e.kids.front())) return false;
                ++e.idx;
                return advance_seq(e);
            case K::Par: {
                bool all = true;
                for (std::size_t i = 0; i < e.kids.size(); ++i) {
                    if (!e.finished[i]) e.finished[i] = step(e.kids[i]);
                    all = all && e.finished[i];
                }
                return all;
            }
            case K::If: {
                if (!e.in_cond) return step(e.kids.front());
                if (net_.val[slot(c.group).done] == 0) return false;
                bool taken = port_value(c.port) != 0;
                e.in_cond = false;
                e.kids.resize(1);
                return start(e.kids.front(), c.children[taken ? 0 : 1]);
            }
            case K::While: {
                if (!e.in_cond) {
                    if (step(e.kids.front())) e.in_cond = true;
                    return false;
                }
                if (net_.val[slot(c.group).done] == 0) return false;
                if (port_value(c.port) == 0) return true;
                e.kids.resize(1);
                e.in_cond = start(e.kids.front(), c.children[0]);
                return false;
            }
        }
        return true;
    }

    void clear() { std::fill(net_.gates.begin(), net_.gates.end(), 0); }

private:
    struct Slots {
        int done = -1, normal = -1, cond = -1;
    };

    bool advance_seq(Exec& e) {
        const auto& cs = e.c->children;
        e.kids.resize(1);
        while (e.idx < cs.size()) {
            if (!start(e.kids.front(), cs[e.idx])) return false;
            ++e.idx;
        }
        return true;
    }

    const Slots& slot(const std::string& g) const {
        auto it = slots_.find(g);
        if (it == slots_.end()) throw InterpError("control references unknown group " + g);
        return it->second;
    }

    std::uint64_t port_value(const PortRef& p) {
        if (p.is_const()) return p.value;
        std::string k = p.is_cell() ? p.parent + "." + p.port : p.port;
        return net_.val[net_.slot(k)];
    }

    void index(const Control& c, std::vector<std::size_t> path) {
        paths_[&c] = path;
        for (std::size_t i = 0; i < c.children.size(); ++i) {
            path.push_back(i);
            index(c.children[i], path);
            path.pop_back();
        }
    }

    Netlist& net_;
    std::map<std::string, Slots> slots_;
    std::map<const Control*, std::vector<std::size_t>> paths_;
};

inline Program lower_callees(const Program& prog) {
    PipelineOptions opts;
    auto res = run_pipeline(prog, opts);
    if (!res.ok()) {
        std::string msg = "program does not validate:";
        for (const auto& d : res.diagnostics) msg += "\n" + d.format();
        throw InterpError(msg);
    }
    return std::move(res.program);
}

}  // namespace detail

/// Runs the entry component's control program directly, activating groups
/// as the control tree dictates. Sub-component instances are simulated
/// from their lowered form.
inline RunResult interpret_control(const Program& prog, const MemImage& image = {}, const InterpOptions& opts = {}) {
    const auto& comp = detail::entry(prog);
    Program lowered = detail::has_subcomponents(prog, comp) ? detail::lower_callees(prog) : prog;
    detail::Netlist net;
    detail::Elaborator(prog, lowered, net).run(comp, "", true);
    detail::Scheduler sched(net, comp);
    detail::load_memories(net, image);

    detail::Scheduler::Exec root;
    std::uint64_t cycle = 0;
    if (!sched.start(root, comp.control)) {
        for (bool done = false; !done;) {
            if (cycle >= opts.cycle_limit)
                throw InterpError("cycle limit of " + std::to_string(opts.cycle_limit) + " exceeded");
            sched.clear();
            sched.activate(root);
            net.settle();
            net.check(cycle);
            done = sched.step(root);
            net.commit();
            ++cycle;
        }
    }
    auto r = detail::collect(net, cycle);
    r.enabled = std::move(sched.enabled);
    return r;
}

/// Simulates a fully lowered program: holds the entry component's go high
/// until the cycle it raises done.
inline RunResult interpret_structural(const Program& prog, const MemImage& image = {},
                                      const InterpOptions& opts = {}) {
    const auto& comp = detail::entry(prog);
    if (!comp.groups.empty() || !comp.control.is_empty())
        throw InterpError("interpret_structural requires a lowered program");
    detail::Netlist net;
    detail::Elaborator(prog, prog, net).run(comp, "", false);
    // Like a parent FSM, the testbench drops go in the cycle done rises.
    int done = net.slot("done");
    detail::Drive go;
    go.dst = net.slot("go");
    go.value = 1;
    go.guard.kind = Guard::Kind::Not;
    go.guard.kids.push_back({Guard::Kind::Port, done, -1, 0, 0, CmpOp::Eq, {}});
    go.text = "go = !done ? 1'd1  (testbench)";
    net.add_drive(std::move(go));
    detail::load_memories(net, image);

    std::uint64_t cycle = 0;
    for (bool finished = false; !finished;) {
        if (cycle >= opts.cycle_limit)
            throw InterpError("cycle limit of " + std::to_string(opts.cycle_limit) + " exceeded");
        net.settle();
        net.check(cycle);
        finished = net.val[done] != 0;
        net.commit();
        ++cycle;
    }
    return detail::collect(net, cycle);
}

/// Cycles between activating `group` in the entry component and observing
/// its done signal.
inline std::uint64_t measure_group(const Program& prog, const std::string& group, const MemImage& image = {},
                                   const InterpOptions& opts = {}) {
    Program p = prog;
    auto* comp = p.find_component(p.entrypoint);
    if (!comp) throw InterpError("no entry component '" + p.entrypoint + "'");
    if (!comp->find_group(group)) throw InterpError("no group '" + group + "'");
    comp->control = Control::enable(group);
    return interpret_control(p, image, opts).cycles - 1;
}

}  // namespace futil
