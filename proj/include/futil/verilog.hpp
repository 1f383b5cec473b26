// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "futil/ir.hpp"
#include "futil/passes_compile.hpp"
#include "futil/primitives.hpp"
#include "futil/resolve.hpp"

namespace futil {

struct EmitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmitConfig {
    std::optional<std::string> top;  // defaults to the entrypoint
    bool inline_primitives = true;
};

struct VerilogOutput {
    std::string text;
    std::string primitives;                 // empty when inlined
    std::vector<std::string> extern_files;  // sources the build must add
};

/// Behavioral SystemVerilog for the standard cell library. Registers start
/// at zero through their declarations; there is no reset port.
inline const std::string& primitives_sv() {
    static const std::string text = R"(// Standard cell library.
module std_reg #(parameter WIDTH = 32) (
  input  logic [WIDTH-1:0] in,
  input  logic             write_en,
  input  logic             clk,
  output logic [WIDTH-1:0] out,
  output logic             done
);
  logic [WIDTH-1:0] value = '0;
  logic             finished = 1'b0;
  assign out = value;
  assign done = finished;
  always_ff @(posedge clk) begin
    if (write_en) begin
      value <= in;
      finished <= 1'b1;
    end else begin
      finished <= 1'b0;
    end
  end
endmodule

module std_add #(parameter WIDTH = 32) (
  input  logic [WIDTH-1:0] left,
  input  logic [WIDTH-1:0] right,
  output logic [WIDTH-1:0] out
);
  assign out = left + right;
endmodule

module std_sub #(parameter WIDTH = 32) (
  input  logic [WIDTH-1:0] left,
  input  logic [WIDTH-1:0] right,
  output logic [WIDTH-1:0] out
);
  assign out = left - right;
endmodule

module std_mult_seq #(parameter WIDTH = 32) (
  input  logic [WIDTH-1:0] left,
  input  logic [WIDTH-1:0] right,
  input  logic             go,
  input  logic             clk,
  output logic [WIDTH-1:0] out,
  output logic             done
);
  logic [WIDTH-1:0] value = '0;
  logic [2:0]       count = '0;
  logic             finished = 1'b0;
  assign out = value;
  assign done = finished;
  always_ff @(posedge clk) begin
    if (go) begin
      if (count == 3'd3) begin
        value <= left * right;
        count <= '0;
        finished <= 1'b1;
      end else begin
        count <= count + 3'd1;
        finished <= 1'b0;
      end
    end else begin
      count <= '0;
      finished <= 1'b0;
    end
  end
endmodule

module std_mac #(parameter WIDTH = 32) (
  input  logic [WIDTH-1:0] left,
  input  logic [WIDTH-1:0] right,
  input  logic             go,
  input  logic             clk,
  output logic [WIDTH-1:0] out,
  output logic             done
);
  logic [WIDTH-1:0] value = '0;
  logic             finished = 1'b0;
  assign out = value;
  assign done = finished;
  always_ff @(posedge clk) begin
    if (go) begin
      value <= value + left * right;
      finished <= 1'b1;
    end else begin
      finished <= 1'b0;
    end
  end
endmodule

`define FUTIL_COMPARATOR(NAME, OP) \
module NAME #(parameter WIDTH = 32) ( \
  input  logic [WIDTH-1:0] left, \
  input  logic [WIDTH-1:0] right, \
  output logic             out \
); \
  assign out = left OP right; \
endmodule

`FUTIL_COMPARATOR(std_lt, <)
`FUTIL_COMPARATOR(std_gt, >)
`FUTIL_COMPARATOR(std_eq, ==)
`FUTIL_COMPARATOR(std_le, <=)
`FUTIL_COMPARATOR(std_ge, >=)
`FUTIL_COMPARATOR(std_neq, !=)

module std_const #(parameter WIDTH = 32, parameter VALUE = 0) (
  output logic [WIDTH-1:0] out
);
  assign out = VALUE;
endmodule

module std_mem_d1 #(parameter WIDTH = 32, parameter SIZE = 16, parameter IDX_SIZE = 4) (
  input  logic [IDX_SIZE-1:0] addr0,
  input  logic [WIDTH-1:0]    write_data,
  input  logic                write_en,
  input  logic                clk,
  output logic [WIDTH-1:0]    read_data,
  output logic                done
);
  logic [WIDTH-1:0] mem [SIZE];
  logic             finished = 1'b0;
  initial begin
    for (int i = 0; i < SIZE; i++) mem[i] = '0;
  end
  assign read_data = addr0 < SIZE ? mem[addr0] : '0;
  assign done = finished;
  always_ff @(posedge clk) begin
    if (write_en) begin
      if (addr0 < SIZE) mem[addr0] <= write_data;
      finished <= 1'b1;
    end else begin
      finished <= 1'b0;
    end
  end
endmodule
)";
    return text;
}

namespace detail {

inline bool sv_keyword(const std::string& s) {
    static const std::set<std::string> kw = {
        "always",    "always_comb", "always_ff", "and",      "assign",     "automatic", "begin",   "bit",
        "buf",       "byte",        "case",      "casex",    "casez",      "clk",       "cmos",    "const",
        "default",   "disable",     "do",        "edge",     "else",       "end",       "endcase", "endfunction",
        "endmodule", "endtask",     "enum",      "event",    "for",        "force",     "forever", "fork",
        "function",  "generate",    "genvar",    "if",       "initial",    "inout",     "input",   "int",
        "integer",   "interface",   "join",      "localparam", "logic",    "longint",   "macromodule", "module",
        "nand",      "negedge",     "nor",       "not",      "or",         "output",    "package", "parameter",
        "posedge",   "priority",    "real",      "reg",      "repeat",     "return",    "shortint", "signed",
        "static",    "string",      "struct",    "supply0",  "supply1",    "task",      "time",    "tri",
        "type",      "typedef",     "union",     "unique",   "unsigned",   "var",       "void",    "wait",
        "while",     "wire",        "wor",       "xnor",     "xor"};
    return kw.count(s) != 0;
}

/// Module name for a component; `clk` and keywords get a suffix.
inline std::string module_name(const std::string& comp) { return sv_keyword(comp) ? comp + "_c" : comp; }

/// Interface identifiers of a component, in declaration order. Keywords
/// are suffixed so the mapping stays injective.
inline std::map<std::string, std::string> interface_names(const Component& comp) {
    std::map<std::string, std::string> out;
    std::set<std::string> used = {"clk"};
    auto take = [&](const std::string& n) {
        std::string id = sv_keyword(n) ? n + "_p" : n;
        for (int k = 0; used.count(id); ++k) id = n + "_p" + std::to_string(k);
        used.insert(id);
        out[n] = id;
    };
    for (const auto& p : comp.inputs) take(p.name);
    for (const auto& p : comp.outputs) take(p.name);
    return out;
}

class ModuleWriter {
public:
    ModuleWriter(const Program& prog, const Component& comp, std::set<std::string>& extern_files)
        : prog_(prog), comp_(comp), table_(prog, comp), externs_(extern_files) {}

    std::string emit() {
        for (const auto& [cell, err] : table_.errors()) throw EmitError("cell " + cell + ": " + err);
        auto iface = interface_names(comp_);
        for (const auto& [n, id] : iface) used_.insert(id);
        used_.insert("clk");
        for (const auto& p : comp_.inputs) ids_[key(PortRef::this_port(p.name))] = iface.at(p.name);
        for (const auto& p : comp_.outputs) ids_[key(PortRef::this_port(p.name))] = iface.at(p.name);
        for (const auto& c : comp_.cells)
            for (const auto& p : table_.cell(c.name)->ports) declare(c.name, p.name);

        std::ostringstream os;
        os << "module " << module_name(comp_.name) << " (\n";
        std::vector<std::string> ports;
        for (const auto& p : comp_.inputs) ports.push_back("input  logic " + range(p.width) + iface.at(p.name));
        ports.push_back("input  logic clk");
        for (const auto& p : comp_.outputs) ports.push_back("output logic " + range(p.width) + iface.at(p.name));
        for (std::size_t i = 0; i < ports.size(); ++i) os << "  " << ports[i] << (i + 1 < ports.size() ? ",\n" : "\n");
        os << ");\n";

        for (const auto& c : comp_.cells)
            for (const auto& p : table_.cell(c.name)->ports)
                os << "  logic " << range(p.width) << ids_.at(key(PortRef::cell(c.name, p.name))) << ";\n";

        for (const auto& c : comp_.cells) instance(os, c);
        assigns(os);
        os << "endmodule\n";
        return os.str();
    }

private:
    static std::string key(const PortRef& p) { return p.is_this() ? "." + p.port : p.parent + "." + p.port; }
    static std::string range(std::uint32_t w) { return w == 1 ? "" : "[" + std::to_string(w - 1) + ":0] "; }

    void declare(const std::string& cell, const std::string& port) {
        std::string base = cell + "_" + port;
        std::string id = base;
        for (int k = 0; used_.count(id) || sv_keyword(id); ++k) id = base + "_" + std::to_string(k);
        used_.insert(id);
        ids_[key(PortRef::cell(cell, port))] = id;
    }

    std::string ref(const PortRef& p) const {
        if (p.is_const()) return std::to_string(p.width) + "'d" + std::to_string(p.value);
        if (p.is_hole()) throw EmitError("hole " + p.parent + "[" + p.port + "] in lowered component " + comp_.name);
        auto it = ids_.find(key(p));
        if (it == ids_.end()) throw EmitError("unknown port " + to_string(p) + " in " + comp_.name);
        return it->second;
    }

    void guard(std::ostream& os, const Guard& g, int ctx) const {
        using K = Guard::Kind;
        switch (g.kind) {
            case K::True: os << "1'd1"; break;
            case K::Port: os << ref(g.lhs); break;
            case K::Cmp:
                if (ctx >= 2) os << '(';
                os << ref(g.lhs) << ' ' << cmp_op_text(g.op) << ' ' << ref(g.rhs);
                if (ctx >= 2) os << ')';
                break;
            case K::Not:
                os << '!';
                guard(os, g.children.front(), 2);
                break;
            case K::And:
            case K::Or: {
                bool is_and = g.kind == K::And;
                os << '(';
                for (std::size_t i = 0; i < g.children.size(); ++i) {
                    if (i) os << (is_and ? " && " : " || ");
                    guard(os, g.children[i], 1);
                }
                os << ')';
                break;
            }
        }
    }

    void instance(std::ostream& os, const Cell& c) {
        const auto* sig = table_.cell(c.name);
        std::vector<std::string> conns;
        std::string head;
        bool clocked = false;
        std::map<std::string, std::string> port_ids;
        if (sig->primitive) {
            head = c.proto.name;
            if (!sig->primitive->params.empty()) {
                head += " #(";
                for (std::size_t i = 0; i < c.proto.params.size(); ++i) {
                    if (i) head += ", ";
                    head += "." + sig->primitive->params[i] + "(" + std::to_string(c.proto.params[i]) + ")";
                }
                head += ")";
            }
            clocked = sig->primitive->stateful;
            for (const auto& p : sig->ports) port_ids[p.name] = p.name;
        } else if (sig->component) {
            head = module_name(sig->component->name);
            clocked = true;
            port_ids = interface_names(*sig->component);
        } else {
            head = c.proto.name;
            for (const auto& e : prog_.externs)
                for (const auto& s : e.components)
                    if (s.name == c.proto.name) externs_.insert(e.path);
            for (const auto& p : sig->ports) port_ids[p.name] = p.name;
        }
        for (const auto& p : sig->ports)
            conns.push_back("." + port_ids.at(p.name) + "(" + ids_.at(key(PortRef::cell(c.name, p.name))) + ")");
        if (clocked) conns.push_back(".clk(clk)");
        std::string inst = sv_keyword(c.name) ? c.name + "_i" : c.name;
        os << "  " << head << ' ' << inst << " (";
        for (std::size_t i = 0; i < conns.size(); ++i) os << (i ? ", " : "") << conns[i];
        os << ");\n";
    }

    void assigns(std::ostream& os) const {
        std::vector<PortRef> order;
        std::map<PortRef, std::vector<const Assignment*>> by_dst;
        for (const auto& a : comp_.continuous) {
            if (!by_dst.count(a.dst)) order.push_back(a.dst);
            by_dst[a.dst].push_back(&a);
        }
        // Every writable port gets exactly one assign, driven or not.
        std::vector<PortRef> sinks;
        for (const auto& p : comp_.outputs) sinks.push_back(PortRef::this_port(p.name));
        for (const auto& c : comp_.cells)
            for (const auto& p : table_.cell(c.name)->ports)
                if (p.dir == Dir::In) sinks.push_back(PortRef::cell(c.name, p.name));
        for (const auto& s : sinks)
            if (!by_dst.count(s)) order.push_back(s);
        for (const auto& dst : order) {
            os << "  assign " << ref(dst) << " = ";
            auto it = by_dst.find(dst);
            if (it == by_dst.end()) {
                os << "'d0;\n";
                continue;
            }
            std::size_t open = 0;
            bool closed = false;
            for (const auto* a : it->second) {
                if (a->guard.is_true()) {
                    os << ref(a->src);
                    closed = true;
                    break;
                }
                guard(os, a->guard, 0);
                os << " ? " << ref(a->src) << " : ";
                if (a != it->second.back()) {
                    os << '(';
                    ++open;
                }
            }
            if (!closed) os << "'d0";
            os << std::string(open, ')') << ";\n";
        }
    }

    const Program& prog_;
    const Component& comp_;
    PortTable table_;
    std::set<std::string>& externs_;
    std::set<std::string> used_;
    std::map<std::string, std::string> ids_;
};

}  // namespace detail

/// Emits one module per component. Requires every component to be lowered.
inline VerilogOutput emit_verilog(const Program& prog, const EmitConfig& cfg = {}) {
    auto top = cfg.top.value_or(prog.entrypoint);
    if (!prog.find_component(top)) throw EmitError("top component '" + top + "' not found");
    for (const auto& c : prog.components)
        if (!c.groups.empty() || !c.control.is_empty())
            throw EmitError("component '" + c.name + "' is not lowered; run the full pipeline first");

    VerilogOutput out;
    std::set<std::string> externs;
    std::ostringstream os;
    os << "// Generated; top module: " << detail::module_name(top) << "\n";
    if (cfg.inline_primitives) {
        os << '\n' << primitives_sv();
    } else {
        out.primitives = primitives_sv();
    }
    for (auto idx : dependency_order(prog)) {
        os << '\n' << detail::ModuleWriter(prog, prog.components[idx], externs).emit();
    }
    out.extern_files.assign(externs.begin(), externs.end());
    if (!out.extern_files.empty()) {
        std::ostringstream head;
        head << "// Extern sources:";
        for (const auto& f : out.extern_files) head << ' ' << f;
        head << '\n';
        out.text = head.str() + os.str();
    } else {
        out.text = os.str();
    }
    return out;
}

namespace detail {

inline std::vector<std::string> identifiers(const std::string& s) {
    std::vector<std::string> out;
    auto word = [&](std::size_t i) { return std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'; };
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] == '\'' || std::isdigit(static_cast<unsigned char>(s[i]))) {  // literal
            ++i;
            while (i < s.size() && word(i)) ++i;
        } else if (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_') {
            std::size_t j = i;
            while (j < s.size() && word(j)) ++j;
            out.push_back(s.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace detail

/// Checks the generated modules (the bundled library is skipped): every
/// identifier used is declared exactly once, every identifier is assigned
/// at most once and no hole syntax survives.
inline std::vector<std::string> lint_verilog(const std::string& text) {
    using detail::identifiers;
    std::vector<std::string> errors;
    std::istringstream in(text);
    std::string line, module;
    std::map<std::string, int> declared;
    std::set<std::string> assigned, modules;
    enum class State { Outside, Library, Header, Body } state = State::Outside;
    auto use = [&](const std::string& id) {
        if (!declared.count(id)) errors.push_back(module + ": undeclared identifier '" + id + "'");
    };
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(' ');
        std::string body = first == std::string::npos ? "" : line.substr(first);
        if (state == State::Outside) {
            if (body.rfind("module ", 0) != 0) continue;
            module = identifiers(body).at(1);
            if (body.find("#(") != std::string::npos || module.rfind("std_", 0) == 0) {
                state = State::Library;
                continue;
            }
            if (!modules.insert(module).second) errors.push_back("module '" + module + "' emitted twice");
            declared.clear();
            assigned.clear();
            state = State::Header;
            continue;
        }
        if (body.rfind("endmodule", 0) == 0) {
            if (state == State::Body)
                for (const auto& [id, n] : declared)
                    if (n > 1) errors.push_back(module + ": '" + id + "' declared " + std::to_string(n) + " times");
            state = State::Outside;
            continue;
        }
        if (state == State::Library) continue;
        if (body.find("[go]") != std::string::npos || body.find("[done]") != std::string::npos)
            errors.push_back(module + ": hole residue: " + body);
        if (state == State::Header) {
            if (body.rfind(");", 0) == 0) {
                state = State::Body;
            } else if (auto ids = identifiers(body); !ids.empty()) {
                ++declared[ids.back()];
            }
            continue;
        }
        auto ids = identifiers(body);
        if (ids.empty()) continue;
        if (ids[0] == "logic") {
            ++declared[ids.back()];
        } else if (ids[0] == "assign") {
            if (ids.size() < 2) {
                errors.push_back(module + ": malformed assign: " + body);
                continue;
            }
            if (!assigned.insert(ids[1]).second) errors.push_back(module + ": '" + ids[1] + "' assigned twice");
            for (std::size_t i = 1; i < ids.size(); ++i) use(ids[i]);
        } else {
            // Instance: signals appear inside `.port(signal)` connections.
            auto at = body.find(" (.");
            auto conns = at == std::string::npos ? std::string{} : body.substr(at);
            for (std::size_t p = conns.find('.'); p != std::string::npos; p = conns.find('.', p + 1)) {
                auto open = conns.find('(', p);
                auto close = conns.find(')', open);
                if (open == std::string::npos || close == std::string::npos) break;
                for (const auto& id : identifiers(conns.substr(open + 1, close - open - 1))) use(id);
            }
        }
    }
    return errors;
}

}  // namespace futil
