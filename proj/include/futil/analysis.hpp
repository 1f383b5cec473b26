// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "futil/ir.hpp"

namespace futil {

/// Undirected graph over names. Nodes keep insertion order.
class ConflictGraph {
public:
    void add_node(const std::string& n) {
        if (adj_.emplace(n, std::set<std::string>{}).second) nodes_.push_back(n);
    }
    void add_edge(const std::string& a, const std::string& b) {
        if (a == b) return;
        add_node(a);
        add_node(b);
        adj_[a].insert(b);
        adj_[b].insert(a);
    }
    bool conflicts(const std::string& a, const std::string& b) const {
        auto it = adj_.find(a);
        return it != adj_.end() && it->second.count(b) != 0;
    }
    const std::set<std::string>& neighbors(const std::string& n) const {
        static const std::set<std::string> none;
        auto it = adj_.find(n);
        return it == adj_.end() ? none : it->second;
    }
    const std::vector<std::string>& nodes() const { return nodes_; }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& [k, v] : adj_) n += v.size();
        return n / 2;
    }

private:
    std::vector<std::string> nodes_;
    std::map<std::string, std::set<std::string>> adj_;
};

/// Every group a control subtree can activate, including cond groups.
inline std::set<std::string> groups_in(const Control& c) {
    std::set<std::string> out;
    c.for_each_group([&](const std::string& g) { out.insert(g); });
    return out;
}

/// Groups in different children of a `par` may run at the same time.
inline ConflictGraph group_conflicts(const Control& control) {
    ConflictGraph g;
    control.for_each_group([&](const std::string& n) { g.add_node(n); });
    std::function<void(const Control&)> walk = [&](const Control& c) {
        if (c.kind == Control::Kind::Par) {
            std::vector<std::set<std::string>> sets;
            for (const auto& ch : c.children) sets.push_back(groups_in(ch));
            for (std::size_t i = 0; i < sets.size(); ++i)
                for (std::size_t j = i + 1; j < sets.size(); ++j)
                    for (const auto& a : sets[i])
                        for (const auto& b : sets[j]) g.add_edge(a, b);
        }
        for (const auto& ch : c.children) walk(ch);
    };
    walk(control);
    return g;
}

/// Greedy coloring where colors are node names: each node, in `order`, takes
/// the earliest node (itself at the latest) that `compatible` allows and no
/// already-colored neighbor uses.
inline std::map<std::string, std::string> greedy_color(
    const ConflictGraph& g, const std::vector<std::string>& order,
    const std::function<bool(const std::string&, const std::string&)>& compatible) {
    std::map<std::string, std::string> color;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& n = order[i];
        std::set<std::string> taken;
        for (const auto& m : g.neighbors(n))
            if (auto it = color.find(m); it != color.end()) taken.insert(it->second);
        for (std::size_t j = 0; j <= i; ++j) {
            const auto& c = order[j];
            if (j != i && (!compatible(n, c) || color.count(c) == 0 || color.at(c) != c)) continue;
            if (taken.count(c) != 0) continue;
            color[n] = c;
            break;
        }
    }
    return color;
}

/// Registers a node reads, and writes on some or on every execution.
struct RwSets {
    std::set<std::string> may_read, may_write, must_write;
    bool operator==(const RwSets&) const = default;
};

inline bool is_register(const Component& comp, const std::string& cell) {
    const auto* c = comp.find_cell(cell);
    return c && c->proto.name == "std_reg";
}

/// Register read/write sets of a group. A write is unconditional when its
/// guard is empty apart from the group's own go.
inline RwSets register_rw(const Component& comp, const Group& g) {
    RwSets s;
    auto own_go = Guard::port(PortRef::go(g.name));
    std::set<std::string> done_read;
    for (const auto& a : g.assignments) {
        a.for_each_read([&](const PortRef& p) {
            if (!p.is_cell() || !is_register(comp, p.parent)) return;
            if (p.port == "out") s.may_read.insert(p.parent);
            if (p.port == "done") done_read.insert(p.parent);
        });
        if (!a.dst.is_cell() || !is_register(comp, a.dst.parent)) continue;
        s.may_write.insert(a.dst.parent);
        bool unguarded = a.guard.is_true() || a.guard == own_go;
        if (a.dst.port == "write_en" && unguarded && a.src.is_const_value(1)) s.must_write.insert(a.dst.parent);
    }
    // Waiting on the done of a register the group itself writes does not
    // observe the previous value.
    for (const auto& r : done_read)
        if (!s.must_write.count(r)) s.may_read.insert(r);
    return s;
}

struct Pcfg;

struct PcfgNode {
    enum class Kind : std::uint8_t { Entry, Exit, Group, Cond, Merge, Par };
    Kind kind = Kind::Group;
    std::string group;        // Group and Cond nodes
    PortRef port;             // Cond nodes
    std::vector<Pcfg> children;  // Par nodes
};

/// Control flow graph whose `par` blocks are single nodes holding one
/// sub-graph per child.
struct Pcfg {
    std::vector<PcfgNode> nodes;
    std::vector<std::vector<std::size_t>> succ, pred;
    std::size_t entry = 0, exit = 1;

    std::size_t add(PcfgNode n) {
        nodes.push_back(std::move(n));
        succ.emplace_back();
        pred.emplace_back();
        return nodes.size() - 1;
    }
    void edge(std::size_t a, std::size_t b) {
        if (std::find(succ[a].begin(), succ[a].end(), b) != succ[a].end()) return;
        succ[a].push_back(b);
        pred[b].push_back(a);
    }
};

Pcfg build_pcfg(const Control& c);

namespace detail {

inline std::vector<std::size_t> attach(Pcfg& g, const Control& c, std::vector<std::size_t> preds) {
    using K = Control::Kind;
    auto link = [&](std::size_t n) {
        for (auto p : preds) g.edge(p, n);
        return std::vector<std::size_t>{n};
    };
    switch (c.kind) {
        case K::Empty: return preds;
        case K::Enable: return link(g.add({PcfgNode::Kind::Group, c.group, {}, {}}));
        case K::Seq:
            for (const auto& ch : c.children) preds = attach(g, ch, std::move(preds));
            return preds;
        case K::Par: {
            PcfgNode p{PcfgNode::Kind::Par, {}, {}, {}};
            for (const auto& ch : c.children) p.children.push_back(build_pcfg(ch));
            return link(g.add(std::move(p)));
        }
        case K::If: {
            auto cond = g.add({PcfgNode::Kind::Cond, c.group, c.port, {}});
            link(cond);
            auto t = attach(g, c.children[0], {cond});
            auto f = attach(g, c.children[1], {cond});
            auto merge = g.add({PcfgNode::Kind::Merge, {}, {}, {}});
            for (auto n : t) g.edge(n, merge);
            for (auto n : f) g.edge(n, merge);
            return {merge};
        }
        case K::While: {
            auto cond = g.add({PcfgNode::Kind::Cond, c.group, c.port, {}});
            link(cond);
            for (auto n : attach(g, c.children[0], {cond})) g.edge(n, cond);
            return {cond};
        }
    }
    return preds;
}

}  // namespace detail

inline Pcfg build_pcfg(const Control& c) {
    Pcfg g;
    g.add({PcfgNode::Kind::Entry, {}, {}, {}});
    g.add({PcfgNode::Kind::Exit, {}, {}, {}});
    for (auto n : detail::attach(g, c, {g.entry})) g.edge(n, g.exit);
    return g;
}

/// Per-node read/write sets for leaves (Group and Cond nodes).
using LeafSets = std::function<RwSets(const PcfgNode&)>;

/// Liveness solution for one graph; `children[n]` holds the solutions of
/// the sub-graphs of Par node `n`.
struct Liveness {
    std::vector<RwSets> sets;
    std::vector<std::set<std::string>> live_in, live_out;
    std::map<std::size_t, std::vector<Liveness>> children;
};

namespace detail {

inline void merge_into(std::set<std::string>& dst, const std::set<std::string>& src) {
    dst.insert(src.begin(), src.end());
}

/// Summary sets of a whole graph: union of reads and writes, and the
/// registers written on every entry-to-exit path.
inline RwSets summarize(const Pcfg& g, const LeafSets& leaf);

inline RwSets node_sets(const PcfgNode& n, const LeafSets& leaf) {
    switch (n.kind) {
        case PcfgNode::Kind::Group:
        case PcfgNode::Kind::Cond: return leaf(n);
        case PcfgNode::Kind::Par: {
            RwSets s;
            for (const auto& ch : n.children) {
                auto c = summarize(ch, leaf);
                merge_into(s.may_read, c.may_read);
                merge_into(s.may_write, c.may_write);
                merge_into(s.must_write, c.must_write);
            }
            return s;
        }
        default: return {};
    }
}

inline RwSets summarize(const Pcfg& g, const LeafSets& leaf) {
    RwSets out;
    std::vector<RwSets> sets;
    std::set<std::string> universe;
    for (const auto& n : g.nodes) {
        sets.push_back(node_sets(n, leaf));
        merge_into(out.may_read, sets.back().may_read);
        merge_into(out.may_write, sets.back().may_write);
        merge_into(universe, sets.back().must_write);
    }
    // Forward must-defined analysis, starting from "everything" except at entry.
    std::vector<std::set<std::string>> defined(g.nodes.size(), universe);
    defined[g.entry] = sets[g.entry].must_write;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t n = 0; n < g.nodes.size(); ++n) {
            if (n == g.entry) continue;
            std::set<std::string> in;
            bool first = true;
            for (auto p : g.pred[n]) {
                if (first) {
                    in = defined[p];
                    first = false;
                } else {
                    std::set<std::string> keep;
                    std::set_intersection(in.begin(), in.end(), defined[p].begin(), defined[p].end(),
                                          std::inserter(keep, keep.end()));
                    in = std::move(keep);
                }
            }
            merge_into(in, sets[n].must_write);
            if (in != defined[n]) {
                defined[n] = std::move(in);
                changed = true;
            }
        }
    }
    out.must_write = defined[g.exit];
    return out;
}

}  // namespace detail

/// Backward liveness. `exit_live` is live-out of the exit node; Par nodes
/// use the union of their children's sets, and each child is solved with
/// the Par node's live-out as its boundary.
inline Liveness liveness(const Pcfg& g, const LeafSets& leaf, const std::set<std::string>& exit_live = {}) {
    Liveness l;
    auto n_nodes = g.nodes.size();
    for (const auto& n : g.nodes) l.sets.push_back(detail::node_sets(n, leaf));
    l.live_in.assign(n_nodes, {});
    l.live_out.assign(n_nodes, {});
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = n_nodes; k-- > 0;) {
            std::set<std::string> out = k == g.exit ? exit_live : std::set<std::string>{};
            for (auto s : g.succ[k]) detail::merge_into(out, l.live_in[s]);
            std::set<std::string> in = l.sets[k].may_read;
            for (const auto& r : out)
                if (l.sets[k].must_write.count(r) == 0) in.insert(r);
            if (out != l.live_out[k] || in != l.live_in[k]) {
                l.live_out[k] = std::move(out);
                l.live_in[k] = std::move(in);
                changed = true;
            }
        }
    }
    for (std::size_t k = 0; k < n_nodes; ++k) {
        if (g.nodes[k].kind != PcfgNode::Kind::Par) continue;
        auto& kids = l.children[k];
        for (const auto& ch : g.nodes[k].children) kids.push_back(liveness(ch, leaf, l.live_out[k]));
    }
    return l;
}

}  // namespace futil
