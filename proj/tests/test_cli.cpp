// SPDX-License-Identifier: Apache-2.0
// Command-line driver, run as a subprocess.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "support/corpus.hpp"

namespace futil {
namespace {

namespace fs = std::filesystem;

struct Run {
    int status = -1;
    std::string out;
};

Run futil_cli(const std::string& args) {
    Run r;
    std::string cmd = std::string(FUTIL_TOOL) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (auto n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string fixture(const std::string& name) { return (testing::fixture_dir() / (name + ".fil")).string(); }

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "futil_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

TEST(Cli, StatsOnSystolicFixture) {
    auto r = futil_cli("compile " + fixture("systolic_2x2") + " --stats");
    ASSERT_EQ(r.status, 0) << r.out;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["cells"], 25);
    EXPECT_EQ(j["groups"], 20);
    EXPECT_EQ(j["control_statements"], 45);
    EXPECT_LT(j["compile_ms"].get<double>(), 1000.0);
}

TEST(Cli, StatsCountsMatchTheProgram) {
    auto p = testing::load_fixture("reduction_tree");
    auto r = futil_cli("compile " + fixture("reduction_tree") + " --stats -b verilog -o " +
                       scratch("rt.sv").string());
    ASSERT_EQ(r.status, 0) << r.out;
    auto j = nlohmann::json::parse(r.out);
    const auto& c = p.components[0];
    EXPECT_EQ(j["cells"], c.cells.size());
    EXPECT_EQ(j["groups"], c.groups.size());
    EXPECT_EQ(j["control_statements"], c.control.statement_count());
    EXPECT_NE(testing::read_text(scratch("rt.sv")).find("module main"), std::string::npos);
}

TEST(Cli, EmitAfterStage) {
    auto r = futil_cli("compile " + fixture("seq_two_registers") +
                       " --emit-after compile-control --disable register-share,static,infer-latency");
    ASSERT_EQ(r.status, 0) << r.out;
    auto input = testing::load_fixture("seq_two_registers");
    auto golden = testing::load_fixture("golden/seq_two_registers.compile-control");
    EXPECT_EQ(testing::normalized_text(input, testing::parse_or_throw(r.out)),
              testing::normalized_text(input, golden));
}

TEST(Cli, FutilBackendPrintsLoweredProgram) {
    auto r = futil_cli("compile " + fixture("if_else"));
    ASSERT_EQ(r.status, 0) << r.out;
    auto p = testing::parse_or_throw(r.out);
    EXPECT_TRUE(p.components[0].groups.empty());
}

TEST(Cli, InterpWithDataAndDisabledStatic) {
    auto data = scratch("rt.json");
    {
        std::ofstream f(data);
        f << R"({"m0": {"width": 32, "data": [1, 2, 3, 4]}, "m1": {"width": 32, "data": [5, 6, 7, 8]},
                 "m2": {"width": 32, "data": [9, 10, 11, 12]}, "m3": {"width": 32, "data": [13, 14, 15, 16]}})";
    }
    auto a = futil_cli("compile " + fixture("reduction_tree") + " -b interp -d " + data.string());
    auto b = futil_cli("compile " + fixture("reduction_tree") + " -b interp --disable static -d " + data.string());
    ASSERT_EQ(a.status, 0) << a.out;
    ASSERT_EQ(b.status, 0) << b.out;
    auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
    EXPECT_EQ(ja["memories"]["out"]["data"], nlohmann::json({28, 32, 36, 40}));
    EXPECT_EQ(ja["memories"], jb["memories"]);
}

TEST(Cli, InterpHonorsCycleLimit) {
    auto r = futil_cli("compile " + fixture("reduction_tree") + " -b interp --cycle-limit 3");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("cycle limit"), std::string::npos) << r.out;
}

TEST(Cli, Errors) {
    auto bad = scratch("bad.fil");
    {
        std::ofstream f(bad);
        f << "component main() -> () { cells { r = std_reg(32) } }";
    }
    auto r = futil_cli("compile " + bad.string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("bad.fil:1:"), std::string::npos) << r.out;

    auto invalid = scratch("invalid.fil");
    {
        std::ofstream f(invalid);
        f << "component main() -> () { cells {} wires {} control { nope; } }";
    }
    r = futil_cli("compile " + invalid.string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("error: main.control: undefined group 'nope'"), std::string::npos) << r.out;

    EXPECT_NE(futil_cli("compile " + fixture("empty") + " --disable nonsense").status, 0);
    EXPECT_NE(futil_cli("compile " + fixture("empty") + " --emit-after nonsense").status, 0);
    EXPECT_NE(futil_cli("compile " + fixture("empty") + " -b vhdl").status, 0);
    EXPECT_NE(futil_cli("compile /nonexistent.fil").status, 0);
    EXPECT_NE(futil_cli("").status, 0);
}

}  // namespace
}  // namespace futil
