// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "futil/ir.hpp"
#include "futil/primitives.hpp"

namespace futil {

/// Signature a cell exposes once its prototype is resolved.
struct CellSig {
    std::vector<PortSig> ports;
    const PrimitiveDef* primitive = nullptr;
    const Component* component = nullptr;
    const Signature* external = nullptr;
    Attributes proto_attributes;

    const PortSig* find(std::string_view port) const {
        for (const auto& p : ports)
            if (p.name == port) return &p;
        return nullptr;
    }
    std::optional<std::uint64_t> static_latency() const {
        auto it = proto_attributes.find("static");
        if (it == proto_attributes.end()) return std::nullopt;
        return it->second;
    }
    /// Port that starts the cell's operation, if any.
    std::optional<std::string> go_port() const {
        if (primitive) return primitive->go_port;
        if (find("go") && find("done")) return std::string("go");
        return std::nullopt;
    }
    bool shareable() const {
        auto it = proto_attributes.find("share");
        return it != proto_attributes.end() && it->second == 1;
    }
};

/// Interface a component instance presents: declared ports plus the implicit
/// go/done calling-convention ports.
inline std::vector<PortSig> instance_ports(const Signature& sig, bool implicit_go_done) {
    std::vector<PortSig> ports;
    for (const auto& p : sig.inputs) ports.push_back({p.name, Dir::In, p.width});
    for (const auto& p : sig.outputs) ports.push_back({p.name, Dir::Out, p.width});
    if (implicit_go_done) {
        auto has = [&](std::string_view n) {
            for (const auto& p : ports)
                if (p.name == n) return true;
            return false;
        };
        if (!has("go")) ports.push_back({"go", Dir::In, 1});
        if (!has("done")) ports.push_back({"done", Dir::Out, 1});
    }
    return ports;
}

/// Resolves a cell prototype. Returns an error message on failure.
inline std::variant<CellSig, std::string> resolve_cell(const Program& prog, const Cell& cell) {
    CellSig sig;
    if (const auto* prim = find_primitive(cell.proto.name)) {
        if (cell.proto.params.size() != prim->params.size()) {
            return "primitive '" + cell.proto.name + "' expects " + std::to_string(prim->params.size()) +
                   " parameters, got " + std::to_string(cell.proto.params.size());
        }
        sig.primitive = prim;
        sig.ports = prim->instantiate(cell.proto.params);
        sig.proto_attributes = prim->attributes;
        return sig;
    }
    if (const auto* comp = prog.find_component(cell.proto.name)) {
        if (!cell.proto.params.empty()) return "component '" + cell.proto.name + "' takes no parameters";
        sig.component = comp;
        sig.ports = instance_ports(comp->signature(), true);
        sig.proto_attributes = comp->attributes;
        return sig;
    }
    if (const auto* ext = prog.find_extern(cell.proto.name)) {
        if (!cell.proto.params.empty()) return "extern '" + cell.proto.name + "' takes no parameters";
        sig.external = ext;
        sig.ports = instance_ports(*ext, false);
        sig.proto_attributes = ext->attributes;
        return sig;
    }
    return "unknown prototype '" + cell.proto.name + "'";
}

/// Width and direction lookups for the ports of one component.
class PortTable {
public:
    PortTable(const Program& prog, const Component& comp) : comp_(&comp) {
        for (const auto& c : comp.cells) {
            auto r = resolve_cell(prog, c);
            if (auto* s = std::get_if<CellSig>(&r)) {
                cells_.emplace(c.name, std::move(*s));
            } else {
                errors_.emplace_back(c.name, std::get<std::string>(r));
            }
        }
    }

    const CellSig* cell(std::string_view name) const {
        auto it = cells_.find(std::string(name));
        return it == cells_.end() ? nullptr : &it->second;
    }

    std::optional<std::uint32_t> width(const PortRef& p) const {
        switch (p.kind) {
            case PortRef::Kind::Const: return p.width;
            case PortRef::Kind::Hole:
                if (comp_->find_group(p.parent) && (p.port == "go" || p.port == "done")) return 1;
                return std::nullopt;
            case PortRef::Kind::This:
                if (const auto* d = comp_->find_port(p.port)) return d->width;
                if (p.port == "go" || p.port == "done") return 1;
                return std::nullopt;
            case PortRef::Kind::Cell:
                if (const auto* c = cell(p.parent))
                    if (const auto* ps = c->find(p.port)) return ps->width;
                return std::nullopt;
        }
        return std::nullopt;
    }

    /// True if `p` may be the destination of an assignment.
    bool writable(const PortRef& p) const {
        switch (p.kind) {
            case PortRef::Kind::Const: return false;
            case PortRef::Kind::Hole: return true;
            case PortRef::Kind::This:
                return comp_->has_output(p.port) || (p.port == "done" && !comp_->has_input("done"));
            case PortRef::Kind::Cell:
                if (const auto* c = cell(p.parent))
                    if (const auto* ps = c->find(p.port)) return ps->dir == Dir::In;
                return false;
        }
        return false;
    }

    const std::vector<std::pair<std::string, std::string>>& errors() const { return errors_; }

private:
    const Component* comp_;
    std::map<std::string, CellSig> cells_;
    std::vector<std::pair<std::string, std::string>> errors_;
};

}  // namespace futil
