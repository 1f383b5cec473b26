// SPDX-License-Identifier: Apache-2.0
// Random acyclic pCFGs and a path-enumeration liveness oracle.

#pragma once

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "futil/analysis.hpp"

namespace futil::testing {

// Liveness oracle: r is live out of n when some path from a successor
// reaches a read of r before any unconditional write of r.
struct Dag {
    Pcfg g;
    std::map<std::string, RwSets> sets;
};

inline Dag random_dag(std::mt19937_64& rng) {
    Dag d;
    auto n = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
    d.g.add({PcfgNode::Kind::Entry, {}, {}, {}});
    d.g.add({PcfgNode::Kind::Exit, {}, {}, {}});
    const char* regs[] = {"r0", "r1", "r2", "r3"};
    std::bernoulli_distribution coin(0.3);
    for (std::size_t i = 2; i < n; ++i) {
        auto name = "n" + std::to_string(i);
        d.g.add({PcfgNode::Kind::Group, name, {}, {}});
        RwSets s;
        for (const char* r : regs) {
            if (coin(rng)) s.may_read.insert(r);
            if (coin(rng)) {
                s.may_write.insert(r);
                if (coin(rng) || coin(rng)) s.must_write.insert(r);
            }
        }
        d.sets[name] = s;
    }
    // Topological rank: entry, internal nodes by index, exit.
    std::vector<std::size_t> order{0};
    for (std::size_t i = 2; i < n; ++i) order.push_back(i);
    order.push_back(1);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    for (std::size_t k = 1; k + 1 < order.size(); ++k) {
        d.g.edge(order[pick(0, k - 1)], order[k]);
        d.g.edge(order[k], order[pick(k + 1, order.size() - 1)]);
    }
    if (order.size() == 2) d.g.edge(0, 1);
    for (int extra = 0; extra < static_cast<int>(n); ++extra) {
        auto a = pick(0, order.size() - 2);
        auto b = pick(a + 1, order.size() - 1);
        d.g.edge(order[a], order[b]);
    }
    return d;
}

inline std::set<std::string> oracle_live_from(const Dag& d, std::size_t start) {
    std::set<std::string> live;
    for (const char* r : {"r0", "r1", "r2", "r3"}) {
        std::function<bool(std::size_t)> reaches_read = [&](std::size_t n) {
            if (d.g.nodes[n].kind == PcfgNode::Kind::Group) {
                const auto& s = d.sets.at(d.g.nodes[n].group);
                if (s.may_read.count(r)) return true;
                if (s.must_write.count(r)) return false;
            }
            for (auto m : d.g.succ[n])
                if (reaches_read(m)) return true;
            return false;
        };
        if (reaches_read(start)) live.insert(r);
    }
    return live;
}

/// Compares liveness() with the oracle on every node; empty on agreement.
inline std::string liveness_mismatch(const Dag& d) {
    auto l = liveness(d.g, [&](const PcfgNode& n) { return d.sets.at(n.group); });
    for (std::size_t n = 0; n < d.g.nodes.size(); ++n) {
        std::set<std::string> out;
        for (auto s : d.g.succ[n]) {
            auto o = oracle_live_from(d, s);
            out.insert(o.begin(), o.end());
        }
        if (l.live_out[n] != out) return "live-out of node " + std::to_string(n);
        if (l.live_in[n] != oracle_live_from(d, n)) return "live-in of node " + std::to_string(n);
    }
    return {};
}

}  // namespace futil::testing
