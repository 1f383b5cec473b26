// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "futil/ir.hpp"
#include "futil/passes_compile.hpp"
#include "futil/passes_opt.hpp"
#include "futil/validate.hpp"

namespace futil {

/// Pass names in pipeline order.
inline const std::vector<std::string>& pass_order() {
    static const std::vector<std::string> names = {"go-insertion",   "infer-latency",   "resource-share",
                                                   "register-share", "compile-static",  "compile-control",
                                                   "remove-groups"};
    return names;
}

/// Maps user-facing spellings to canonical pass names.
inline std::optional<std::string> canonical_pass(const std::string& name) {
    if (name == "static" || name == "sensitive") return "compile-static";
    for (const auto& n : pass_order())
        if (n == name) return n;
    return std::nullopt;
}

struct PipelineOptions {
    std::set<std::string> disabled;         // canonical pass names
    std::optional<std::string> stop_after;  // canonical name of the last pass to run
    std::function<void(const std::string&, const Program&)> after_pass;
};

struct PipelineResult {
    Program program;
    Diagnostics diagnostics;
    /// Per component, the registers register-share mapped onto another one.
    std::map<std::string, std::map<std::string, std::string>> renamed_registers;
    double compile_ms = 0;

    bool ok() const { return !has_errors(diagnostics); }
};

/// Validates and then lowers `input`. On validation failure the program is
/// returned unchanged with the diagnostics.
inline PipelineResult run_pipeline(const Program& input, const PipelineOptions& opts = {}) {
    auto start = std::chrono::steady_clock::now();
    PipelineResult res{input, validate(input), {}, 0};
    auto finish = [&] {
        res.compile_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return res;
    };
    if (!res.ok()) return finish();

    auto per_component = [&](auto&& fn) {
        for (auto idx : dependency_order(res.program)) {
            auto& comp = res.program.components[idx];
            comp = fn(comp);
        }
    };
    for (const auto& pass : pass_order()) {
        if (!opts.disabled.count(pass)) {
            const Program& prog = res.program;
            if (pass == "go-insertion") {
                per_component([&](const Component& c) { return go_insertion(prog, c); });
            } else if (pass == "infer-latency") {
                res.program = infer_latency(prog);
            } else if (pass == "resource-share") {
                per_component([&](const Component& c) { return resource_share(prog, c); });
            } else if (pass == "register-share") {
                per_component([&](const Component& c) {
                    std::map<std::string, std::string> m;
                    auto out = register_share(prog, c, &m);
                    if (!m.empty()) res.renamed_registers[c.name] = std::move(m);
                    return out;
                });
            } else if (pass == "compile-static") {
                per_component([&](const Component& c) { return compile_static(prog, c); });
            } else if (pass == "compile-control") {
                per_component([&](const Component& c) { return compile_control(prog, c); });
            } else if (pass == "remove-groups") {
                per_component([&](const Component& c) { return remove_groups(prog, c); });
            }
            if (opts.after_pass) opts.after_pass(pass, res.program);
        }
        if (opts.stop_after == pass) break;
    }
    return finish();
}

/// True once no component has groups or control left.
inline bool is_lowered(const Program& prog) {
    for (const auto& c : prog.components)
        if (!c.groups.empty() || !c.control.is_empty()) return false;
    return true;
}

}  // namespace futil
