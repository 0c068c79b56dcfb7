// cs_stokes: run, check and inspect kinetic Cucker-Smale / Stokes simulations.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "csstokes/checks.hpp"
#include "csstokes/io.hpp"
#include "csstokes/picard.hpp"

namespace fs = std::filesystem;
using namespace csstokes;

namespace {

// Exit codes by failure category.
enum Exit : int {
    ok = 0,
    check_failed = 1,
    usage = 2,
    config = 3,
    aborted = 4,
    io = 5,
};

int cmd_run(const std::string& config_path, const fs::path& out_dir) {
    const SimConfig cfg = parse_config(config_path);
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.config_text = config_echo(cfg);
    manifest.version = version_string();
    manifest.seed = cfg.rng_seed;
    manifest.start_time = utc_timestamp();

    RunOptions opts;
    opts.checkpoint_path = (out_dir / "checkpoint.bin").string();
    opts.abort_dump_path = (out_dir / "abort_dump.bin").string();
    opts.keep_step_reports = false;

    const RunResult result = run(cfg, opts);
    const fs::path csv = out_dir / "timeseries.csv";
    write_timeseries(result.records, csv);

    manifest.end_time = utc_timestamp();
    for (const char* name : {"timeseries.csv", "checkpoint.bin"})
        manifest.artifacts.push_back({name, sha256_file(out_dir / name)});
    write_manifest(out_dir / "manifest.json", manifest);

    const DiagnosticsRecord& last = result.records.back();
    std::printf("steps %ld  t = %.6g  E = %.6e  R = %.6e  records %zu\n", result.final_state.state.step,
                last.time, last.energy(), last.support_radius, result.records.size());
    std::printf("wrote %s\n", (out_dir / "manifest.json").string().c_str());
    return ok;
}

int cmd_check(const std::string& config_path, bool refine, bool scan) {
    const SimConfig cfg = parse_config(config_path);
    CheckOptions opts;
    opts.refine = refine;
    opts.scan_dt_star = scan;
    const CheckReport report = check_config(cfg, opts);
    std::fputs(format_check_table(report.rows).c_str(), stdout);
    if (report.dt_star) {
        for (const auto& [dt, ratio] : report.dt_star->ratios) std::printf("  dt %-10.4g ratio %.3e\n", dt, ratio);
    }
    return report.all_passed() ? ok : check_failed;
}

int cmd_describe(const std::string& path) {
    RunState state;
    const CheckpointData data = read_checkpoint(path, state);
    std::printf("particles   %zu\n", data.particle_count);
    std::printf("time        %.17g\n", data.time);
    std::printf("step        %ld\n", data.step);
    std::printf("grid_n      %d\n", data.grid_n);
    std::printf("box_length  %.17g\n", data.config.box_length);
    std::printf("mode        %s\n", to_string(data.config.mode).c_str());
    std::printf("mass        %.17g\n", state.state.ensemble.total_mass());
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kinetic Cucker-Smale particles coupled to Stokes flow on a periodic box"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config_path, checkpoint_path;
    std::string out_dir = ".";
    bool no_refine = false, no_scan = false;

    auto* run_cmd = app.add_subcommand("run", "simulate and write timeseries.csv, checkpoint.bin, manifest.json");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("-o,--out", out_dir, "output directory");

    auto* check_cmd = app.add_subcommand("check", "run the invariant suite and print a pass/fail table");
    check_cmd->add_option("config", config_path, "config file")->required();
    check_cmd->add_flag("--no-refine", no_refine, "skip the dt/2 rerun");
    check_cmd->add_flag("--no-scan", no_scan, "skip the dt* scan");

    auto* describe_cmd = app.add_subcommand("describe", "summarize a checkpoint");
    describe_cmd->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*run_cmd) return cmd_run(config_path, out_dir);
        if (*check_cmd) return cmd_check(config_path, !no_refine, !no_scan);
        return cmd_describe(checkpoint_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config;
    } catch (const SimulationAbort& e) {
        std::cerr << "simulation aborted: " << e.what() << '\n';
        if (!e.dump_path().empty()) std::cerr << "state dump: " << e.dump_path() << '\n';
        return aborted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    }
}
