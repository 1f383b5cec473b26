// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "futil/analysis.hpp"
#include "futil/ir.hpp"
#include "futil/passes_compile.hpp"
#include "futil/resolve.hpp"

namespace futil {

namespace detail {

inline std::set<std::string> cells_used(const std::vector<Assignment>& as) {
    std::set<std::string> out;
    for (const auto& a : as)
        a.for_each_port([&](const PortRef& p) {
            if (p.is_cell()) out.insert(p.parent);
        });
    return out;
}

inline void rename_cells(std::vector<Assignment>& as, const std::map<std::string, std::string>& m) {
    for (auto& a : as)
        a.for_each_port_mut([&](PortRef& p) {
            if (!p.is_cell()) return;
            if (auto it = m.find(p.parent); it != m.end()) p.parent = it->second;
        });
}

inline void rename_control_port(Control& c, const std::string& cond, const std::map<std::string, std::string>& m) {
    if ((c.kind == Control::Kind::If || c.kind == Control::Kind::While) && c.group == cond && c.port.is_cell())
        if (auto it = m.find(c.port.parent); it != m.end()) c.port.parent = it->second;
    for (auto& ch : c.children) rename_control_port(ch, cond, m);
}

/// Cells referenced by control-statement condition ports.
inline std::map<std::string, std::set<std::string>> port_cells_by_cond(const Control& c) {
    std::map<std::string, std::set<std::string>> out;
    std::function<void(const Control&)> walk = [&](const Control& n) {
        if ((n.kind == Control::Kind::If || n.kind == Control::Kind::While) && n.port.is_cell())
            out[n.group].insert(n.port.parent);
        for (const auto& ch : n.children) walk(ch);
    };
    walk(c);
    return out;
}

/// Removes cells that were referenced before a rewrite but no longer are.
inline void drop_unused(Component& comp, const std::set<std::string>& before) {
    std::set<std::string> now = cells_used(comp.continuous);
    for (const auto& g : comp.groups) merge_into(now, cells_used(g.assignments));
    std::function<void(const Control&)> walk = [&](const Control& c) {
        if (c.port.is_cell()) now.insert(c.port.parent);
        for (const auto& ch : c.children) walk(ch);
    };
    walk(comp.control);
    std::erase_if(comp.cells, [&](const Cell& c) { return before.count(c.name) && !now.count(c.name); });
}

inline std::set<std::string> all_cells_used(const Component& comp) {
    std::set<std::string> s = cells_used(comp.continuous);
    for (const auto& g : comp.groups) merge_into(s, cells_used(g.assignments));
    return s;
}

}  // namespace detail

/// Maps each group's shareable cells onto the earliest instances of the same
/// prototype that no conflicting group already uses. Cells that end up
/// unreferenced are removed.
inline Component resource_share(const Program& prog, const Component& in) {
    Component comp = in;
    PortTable table(prog, comp);
    auto conflicts = group_conflicts(comp.control);
    auto port_cells = detail::port_cells_by_cond(comp.control);

    std::set<std::string> pinned = detail::cells_used(comp.continuous);
    std::map<std::string, std::set<std::string>> users;  // cell -> groups
    for (const auto& g : comp.groups)
        for (const auto& c : detail::cells_used(g.assignments)) users[c].insert(g.name);
    for (const auto& [cell, gs] : users)
        for (const auto& a : gs)
            for (const auto& b : gs)
                if (conflicts.conflicts(a, b)) pinned.insert(cell);
    // A condition port on a cell the cond group never touches cannot follow a rename.
    for (const auto& [cond, cells] : port_cells) {
        const auto* g = comp.find_group(cond);
        auto used = g ? detail::cells_used(g->assignments) : std::set<std::string>{};
        for (const auto& c : cells)
            if (!used.count(c)) pinned.insert(c);
    }

    auto shareable = [&](const Cell& c) {
        const auto* sig = table.cell(c.name);
        return sig && sig->shareable() && !pinned.count(c.name);
    };

    std::map<std::string, std::map<std::string, std::string>> mapping;  // group -> cell -> instance
    std::map<std::string, std::set<std::string>> claimed;               // instance -> groups using it
    for (const auto& g : comp.groups) {
        auto used = detail::cells_used(g.assignments);
        auto& m = mapping[g.name];
        std::set<std::string> local;
        for (const auto& cell : comp.cells) {
            if (!used.count(cell.name) || !shareable(cell)) continue;
            for (const auto& cand : comp.cells) {
                if (cand.proto != cell.proto || !shareable(cand) || local.count(cand.name)) continue;
                bool clash = false;
                for (const auto& other : claimed[cand.name])
                    if (conflicts.conflicts(other, g.name)) clash = true;
                if (clash) continue;
                m[cell.name] = cand.name;
                local.insert(cand.name);
                claimed[cand.name].insert(g.name);
                break;
            }
            // No free instance: give up rather than introduce a conflict.
            if (!m.count(cell.name)) return in;
        }
    }

    auto before = detail::all_cells_used(comp);
    for (auto& g : comp.groups) {
        const auto& m = mapping[g.name];
        detail::rename_cells(g.assignments, m);
        detail::rename_control_port(comp.control, g.name, m);
    }
    detail::drop_unused(comp, before);
    return comp;
}

/// Register conflict graph from liveness over the pCFG.
inline ConflictGraph register_conflicts(const Component& comp, const std::set<std::string>& candidates) {
    ConflictGraph cg;
    for (const auto& c : comp.cells)
        if (candidates.count(c.name)) cg.add_node(c.name);
    auto keep = [&](const std::set<std::string>& s) {
        std::vector<std::string> v;
        for (const auto& r : s)
            if (candidates.count(r)) v.push_back(r);
        return v;
    };
    auto clique = [&](const std::set<std::string>& s) {
        auto v = keep(s);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) cg.add_edge(v[i], v[j]);
    };
    LeafSets leaf = [&](const PcfgNode& n) {
        const auto* g = comp.find_group(n.group);
        RwSets s = g ? register_rw(comp, *g) : RwSets{};
        if (n.kind == PcfgNode::Kind::Cond && n.port.is_cell() && is_register(comp, n.port.parent))
            s.may_read.insert(n.port.parent);
        return s;
    };

    std::function<void(const Pcfg&, const Liveness&, std::set<std::string>*)> visit =
        [&](const Pcfg& g, const Liveness& l, std::set<std::string>* touched) {
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                const auto& s = l.sets[k];
                clique(l.live_in[k]);
                clique(l.live_out[k]);
                clique(s.must_write);
                for (const auto& w : keep(s.may_write))
                    for (const auto& r : keep(l.live_out[k])) cg.add_edge(w, r);
                if (touched) {
                    detail::merge_into(*touched, l.live_in[k]);
                    detail::merge_into(*touched, l.live_out[k]);
                    detail::merge_into(*touched, s.may_read);
                    detail::merge_into(*touched, s.may_write);
                }
                if (g.nodes[k].kind != PcfgNode::Kind::Par) continue;
                // Threads of a par block interleave arbitrarily, so everything
                // they touch is treated as simultaneously live.
                std::set<std::string> inside = l.live_out[k];
                const auto& kids = l.children.at(k);
                for (std::size_t c = 0; c < kids.size(); ++c) visit(g.nodes[k].children[c], kids[c], &inside);
                clique(inside);
                if (touched) detail::merge_into(*touched, inside);
            }
        };
    auto pcfg = build_pcfg(comp.control);
    auto live = liveness(pcfg, leaf);
    visit(pcfg, live, nullptr);
    return cg;
}

/// Merges same-width registers whose live ranges never overlap. `renamed`,
/// when given, receives every register mapped onto another.
inline Component register_share(const Program&, const Component& in,
                                std::map<std::string, std::string>* renamed = nullptr) {
    Component comp = in;
    auto pinned = detail::cells_used(comp.continuous);
    std::set<std::string> candidates;
    std::vector<std::string> order;
    for (const auto& c : comp.cells)
        if (c.proto.name == "std_reg" && !pinned.count(c.name)) {
            candidates.insert(c.name);
            order.push_back(c.name);
        }
    auto cg = register_conflicts(comp, candidates);
    auto color = greedy_color(cg, order, [&](const std::string& a, const std::string& b) {
        return comp.find_cell(a)->proto == comp.find_cell(b)->proto;
    });
    std::map<std::string, std::string> m;
    for (const auto& [r, c] : color)
        if (r != c) m[r] = c;
    if (renamed) *renamed = m;
    if (m.empty()) return comp;

    auto before = detail::all_cells_used(comp);
    for (auto& g : comp.groups) detail::rename_cells(g.assignments, m);
    std::function<void(Control&)> walk = [&](Control& c) {
        if (c.port.is_cell())
            if (auto it = m.find(c.port.parent); it != m.end()) c.port.parent = it->second;
        for (auto& ch : c.children) walk(ch);
    };
    walk(comp.control);
    detail::drop_unused(comp, before);
    return comp;
}

/// Infers "static" for groups that start exactly one fixed-latency cell and
/// finish on its done, and for components whose control is one static
/// group. Components are processed callees first.
inline Program infer_latency(const Program& in) {
    Program prog = in;
    for (auto idx : dependency_order(prog)) {
        auto& comp = prog.components[idx];
        PortTable table(prog, comp);
        for (auto& g : comp.groups) {
            if (g.static_latency()) continue;
            auto own_go = Guard::port(PortRef::go(g.name));
            auto unguarded = [&](const Guard& x) { return x.is_true() || x == own_go; };
            std::set<std::string> started, started_always;
            const Assignment* done = nullptr;
            int done_count = 0;
            for (const auto& a : g.assignments) {
                if (a.dst == PortRef::done(g.name)) {
                    done = &a;
                    ++done_count;
                    continue;
                }
                if (!a.dst.is_cell()) continue;
                const auto* sig = table.cell(a.dst.parent);
                if (!sig || sig->go_port() != a.dst.port) continue;
                started.insert(a.dst.parent);
                if (unguarded(a.guard) && a.src.is_const_value(1)) started_always.insert(a.dst.parent);
            }
            if (started.size() != 1 || started_always.size() != 1 || done_count != 1) continue;
            const auto& cell = *started_always.begin();
            if (!unguarded(done->guard) || done->src != PortRef::cell(cell, "done")) continue;
            if (auto l = table.cell(cell)->static_latency()) g.attributes["static"] = *l;
        }
        // Only a single static enable is inferred: its group restarts in the
        // done cycle, so a static parent may hold go across back-to-back runs.
        // A compiled static counter idles one cycle on its done state.
        if (comp.attributes.count("static") || comp.control.kind != Control::Kind::Enable) continue;
        if (const auto* g = comp.find_group(comp.control.group))
            if (auto l = g->static_latency()) comp.attributes["static"] = *l;
    }
    return prog;
}

}  // namespace futil
