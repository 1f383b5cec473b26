// SPDX-License-Identifier: Apache-2.0
// futil: parse, validate, lower and emit or interpret IL programs.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "futil/interp.hpp"
#include "futil/parser.hpp"
#include "futil/pipeline.hpp"
#include "futil/printer.hpp"
#include "futil/verilog.hpp"

namespace {

struct Config {
    std::string input;
    std::string backend = "futil";
    std::string data;
    std::vector<std::string> disable;
    std::string emit_after;
    bool stats = false;
    std::uint64_t cycle_limit = futil::InterpOptions{}.cycle_limit;
    std::string output;
};

bool read_file(const std::string& path, std::string& out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    std::ostringstream ss;
    ss << f.rdbuf();
    out = ss.str();
    return true;
}

nlohmann::json stats_of(const futil::Program& prog, double ms) {
    std::size_t cells = 0, groups = 0, stmts = 0;
    for (const auto& c : prog.components) {
        cells += c.cells.size();
        groups += c.groups.size();
        stmts += c.control.statement_count();
    }
    return {{"cells", cells}, {"groups", groups}, {"control_statements", stmts}, {"compile_ms", ms}};
}

int run(const Config& cfg) {
    std::string text;
    if (!read_file(cfg.input, text)) {
        std::cerr << "error: cannot read " << cfg.input << "\n";
        return 1;
    }
    auto parsed = futil::parse_program(text, cfg.input);
    if (auto* err = std::get_if<futil::ParseError>(&parsed)) {
        std::cerr << err->format() << "\n";
        return 1;
    }
    const auto& prog = std::get<futil::Program>(parsed);

    futil::PipelineOptions opts;
    for (const auto& name : cfg.disable) {
        auto canon = futil::canonical_pass(name);
        if (!canon) {
            std::cerr << "error: unknown pass '" << name << "'\n";
            return 1;
        }
        opts.disabled.insert(*canon);
    }
    if (!cfg.emit_after.empty()) {
        auto canon = futil::canonical_pass(cfg.emit_after);
        if (!canon) {
            std::cerr << "error: unknown pass '" << cfg.emit_after << "'\n";
            return 1;
        }
        opts.stop_after = *canon;
    }

    futil::PipelineResult res;
    try {
        res = futil::run_pipeline(prog, opts);
    } catch (const futil::PassError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    for (const auto& d : res.diagnostics) std::cerr << d.format() << "\n";
    if (!res.ok()) return 1;

    std::string out;
    try {
        if (!cfg.emit_after.empty() || cfg.backend == "futil") {
            out = futil::print_program(res.program);
        } else if (cfg.backend == "verilog") {
            out = futil::emit_verilog(res.program).text;
        } else {
            futil::MemImage image;
            if (!cfg.data.empty()) {
                std::string js;
                if (!read_file(cfg.data, js)) {
                    std::cerr << "error: cannot read " << cfg.data << "\n";
                    return 1;
                }
                image = futil::mem_from_json(nlohmann::json::parse(js));
            }
            futil::InterpOptions io{cfg.cycle_limit};
            auto r = futil::is_lowered(res.program) ? futil::interpret_structural(res.program, image, io)
                                                    : futil::interpret_control(res.program, image, io);
            out = r.to_json().dump(2) + "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (cfg.stats) std::cout << stats_of(prog, res.compile_ms).dump() << "\n";
    if (!cfg.output.empty()) {
        std::ofstream f(cfg.output, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write " << cfg.output << "\n";
            return 1;
        }
        f << out;
    } else if (!cfg.stats) {
        std::cout << out;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IL compiler: lowers control to FSMs and emits SystemVerilog"};
    app.require_subcommand(1);
    Config cfg;
    auto* compile = app.add_subcommand("compile", "Compile or interpret a program");
    compile->add_option("input", cfg.input, "Source file")->required();
    compile->add_option("-b,--backend", cfg.backend, "Output backend")
        ->check(CLI::IsMember({"verilog", "futil", "interp"}));
    compile->add_option("-d,--data", cfg.data, "Memory image (JSON) for the interp backend");
    compile->add_option("--disable", cfg.disable, "Passes to skip")->delimiter(',');
    compile->add_option("--emit-after", cfg.emit_after, "Print the program after this pass and stop");
    compile->add_flag("--stats", cfg.stats, "Print design statistics as JSON");
    compile->add_option("--cycle-limit", cfg.cycle_limit, "Interpreter cycle limit");
    compile->add_option("-o,--output", cfg.output, "Output file (default: standard output)");
    CLI11_PARSE(app, argc, argv);
    return run(cfg);
}
