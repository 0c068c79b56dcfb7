#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "csstokes/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result sh(const std::string& args) {
    const std::string cmd = std::string(CS_STOKES_EXE) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[512];
    while (std::fgets(buf, sizeof buf, p)) out += buf;
    const int status = pclose(p);
    return {WEXITSTATUS(status), out};
}

fs::path workdir() {
    const fs::path d = fs::temp_directory_path() / "csstokes_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* two_particle =
    "box_length = 6.283185307179586\ngrid_n = 8\nn_particles = 2\ndt = 0.01\nt_end = 1\n"
    "kernel.family = constant\nkernel.c = 1\nmode = pure_kinetic\ninit.particles = two_cluster:1\nseed = 1\n";

}  // namespace

TEST_CASE("run, then describe the checkpoint") {
    const fs::path d = workdir();
    write(d / "tp.cfg", two_particle);
    const Result r = sh("run " + (d / "tp.cfg").string() + " --out " + (d / "out").string());
    CHECK(r.code == 0);
    REQUIRE(fs::exists(d / "out" / "manifest.json"));

    std::ifstream in(d / "out" / "manifest.json");
    const nlohmann::json m = nlohmann::json::parse(in);
    REQUIRE(m["artifacts"].size() == 2);
    for (const auto& a : m["artifacts"]) CHECK(a["sha256"] == csstokes::sha256_file(d / "out" / a["file"].get<std::string>()));
    CHECK(m["seed"] == 1);

    const Result desc = sh("describe " + (d / "out" / "checkpoint.bin").string());
    CHECK(desc.code == 0);
    CHECK(desc.out.find("particles   2") != std::string::npos);
    CHECK(desc.out.find("grid_n      8") != std::string::npos);
    CHECK(desc.out.find("time        1\n") != std::string::npos);
    CHECK(desc.out.find("step        100") != std::string::npos);
}

TEST_CASE("check prints the invariant table") {
    const fs::path d = workdir();
    write(d / "tp.cfg", two_particle);
    const Result r = sh("check --no-scan " + (d / "tp.cfg").string());
    CHECK(r.code == 0);
    for (const char* row : {"mass", "momentum", "energy-budget", "support-bound", "picard-contraction"})
        CHECK(r.out.find(row) != std::string::npos);
}

TEST_CASE("exit codes by category") {
    const fs::path d = workdir();
    CHECK(sh("").code == 2);
    CHECK(sh("frobnicate").code == 2);
    write(d / "bad.cfg", "box_length = 1\n");
    const Result bad = sh("run " + (d / "bad.cfg").string());
    CHECK(bad.code == 3);
    CHECK(bad.out.find("missing required key") != std::string::npos);
    CHECK(sh("describe " + (d / "missing.bin").string()).code == 5);

    write(d / "stuck.cfg",
          "box_length = 6.283185307179586\ngrid_n = 8\nn_particles = 50\ndt = 0.01\nt_end = 0.05\n"
          "picard_max_iter = 1\npicard_tol = 1e-300\ninit.fluid = taylor_green\n");
    const Result stuck = sh("run " + (d / "stuck.cfg").string() + " --out " + (d / "stuck").string());
    CHECK(stuck.code == 4);
    CHECK(stuck.out.find("state dump") != std::string::npos);
    CHECK(fs::exists(d / "stuck" / "abort_dump.bin"));
}
