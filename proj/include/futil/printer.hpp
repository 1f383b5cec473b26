// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sstream>
#include <string>

#include "futil/ir.hpp"

namespace futil {

inline std::string to_string(const PortRef& p) {
    switch (p.kind) {
        case PortRef::Kind::Cell: return p.parent + "." + p.port;
        case PortRef::Kind::This: return p.port;
        case PortRef::Kind::Hole: return p.parent + "[" + p.port + "]";
        case PortRef::Kind::Const:
            // Width 0 only occurs for literals whose width could not be inferred.
            if (p.width == 0) return std::to_string(p.value);
            return std::to_string(p.width) + "'d" + std::to_string(p.value);
    }
    return {};
}

inline std::string to_string(const Guard& g);

namespace detail {

inline void print_guard(std::ostream& os, const Guard& g, int ctx) {
    // ctx: 0 = top/or operand, 1 = and operand, 2 = not operand
    using K = Guard::Kind;
    switch (g.kind) {
        case K::True: os << "1'd1"; break;
        case K::Port: os << to_string(g.lhs); break;
        case K::Cmp:
            if (ctx >= 2) os << '(';
            os << to_string(g.lhs) << ' ' << cmp_op_text(g.op) << ' ' << to_string(g.rhs);
            if (ctx >= 2) os << ')';
            break;
        case K::Not:
            os << '!';
            print_guard(os, g.children.front(), 2);
            break;
        case K::And:
        case K::Or: {
            bool is_and = g.kind == K::And;
            bool paren = is_and ? ctx >= 2 : ctx >= 1;
            if (paren) os << '(';
            for (std::size_t i = 0; i < g.children.size(); ++i) {
                if (i) os << (is_and ? " && " : " || ");
                print_guard(os, g.children[i], is_and ? 1 : 0);
            }
            if (paren) os << ')';
            break;
        }
    }
}

inline void print_attrs(std::ostream& os, const Attributes& attrs) {
    if (attrs.empty()) return;
    os << '<';
    bool first = true;
    for (const auto& [k, v] : attrs) {
        if (!first) os << ", ";
        first = false;
        os << '"' << k << "\"=" << v;
    }
    os << '>';
}

inline void print_ports(std::ostream& os, const std::vector<PortDef>& ports) {
    os << '(';
    for (std::size_t i = 0; i < ports.size(); ++i) {
        if (i) os << ", ";
        os << ports[i].name << ": " << ports[i].width;
    }
    os << ')';
}

inline void indent(std::ostream& os, int n) {
    for (int i = 0; i < n; ++i) os << "  ";
}

inline void print_assignment(std::ostream& os, const Assignment& a, int depth) {
    indent(os, depth);
    os << to_string(a.dst) << " = ";
    if (!a.guard.is_true()) {
        print_guard(os, a.guard, 0);
        os << " ? ";
    }
    os << to_string(a.src) << ";\n";
}

inline void print_block(std::ostream& os, const Control& c, int depth);

inline void print_control(std::ostream& os, const Control& c, int depth) {
    using K = Control::Kind;
    switch (c.kind) {
        case K::Empty: break;
        case K::Enable:
            indent(os, depth);
            os << c.group << ";\n";
            break;
        case K::Seq:
        case K::Par:
            indent(os, depth);
            os << (c.kind == K::Seq ? "seq {\n" : "par {\n");
            for (const auto& ch : c.children) print_control(os, ch, depth + 1);
            indent(os, depth);
            os << "}\n";
            break;
        case K::If:
            indent(os, depth);
            os << "if " << to_string(c.port) << " with " << c.group << ' ';
            print_block(os, c.children[0], depth);
            if (!c.children[1].is_empty()) {
                os << " else ";
                print_block(os, c.children[1], depth);
            }
            os << '\n';
            break;
        case K::While:
            indent(os, depth);
            os << "while " << to_string(c.port) << " with " << c.group << ' ';
            print_block(os, c.children[0], depth);
            os << '\n';
            break;
    }
}

inline void print_block(std::ostream& os, const Control& c, int depth) {
    if (c.is_empty()) {
        os << "{}";
        return;
    }
    os << "{\n";
    print_control(os, c, depth + 1);
    indent(os, depth);
    os << '}';
}

}  // namespace detail

inline std::string to_string(const Guard& g) {
    std::ostringstream os;
    detail::print_guard(os, g, 0);
    return os.str();
}

inline std::string to_string(const Assignment& a) {
    std::ostringstream os;
    detail::print_assignment(os, a, 0);
    auto s = os.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

inline std::string to_string(const Control& c) {
    std::ostringstream os;
    detail::print_control(os, c, 0);
    return os.str();
}

inline void print_component(std::ostream& os, const Component& comp) {
    using namespace detail;
    os << "component " << comp.name;
    print_ports(os, comp.inputs);
    os << " -> ";
    print_ports(os, comp.outputs);
    if (!comp.attributes.empty()) {
        os << ' ';
        print_attrs(os, comp.attributes);
    }
    os << " {\n";
    indent(os, 1);
    os << "cells {\n";
    for (const auto& c : comp.cells) {
        indent(os, 2);
        os << c.name;
        print_attrs(os, c.attributes);
        os << " = " << c.proto.name << '(';
        for (std::size_t i = 0; i < c.proto.params.size(); ++i) {
            if (i) os << ", ";
            os << c.proto.params[i];
        }
        os << ");\n";
    }
    indent(os, 1);
    os << "}\n";
    indent(os, 1);
    os << "wires {\n";
    for (const auto& g : comp.groups) {
        indent(os, 2);
        os << "group " << g.name;
        print_attrs(os, g.attributes);
        os << " {\n";
        for (const auto& a : g.assignments) print_assignment(os, a, 3);
        indent(os, 2);
        os << "}\n";
    }
    for (const auto& a : comp.continuous) print_assignment(os, a, 2);
    indent(os, 1);
    os << "}\n";
    indent(os, 1);
    os << "control {\n";
    print_control(os, comp.control, 2);
    indent(os, 1);
    os << "}\n";
    os << "}\n";
}

/// Canonical text form. Literals are always printed sized.
inline std::string print_program(const Program& prog) {
    std::ostringstream os;
    for (const auto& e : prog.externs) {
        os << "extern \"" << e.path << "\" {\n";
        for (const auto& s : e.components) {
            os << "  component " << s.name;
            detail::print_ports(os, s.inputs);
            os << " -> ";
            detail::print_ports(os, s.outputs);
            if (!s.attributes.empty()) {
                os << ' ';
                detail::print_attrs(os, s.attributes);
            }
            os << ";\n";
        }
        os << "}\n";
    }
    for (std::size_t i = 0; i < prog.components.size(); ++i) {
        if (i || !prog.externs.empty()) os << '\n';
        print_component(os, prog.components[i]);
    }
    return os.str();
}

}  // namespace futil
