#include "csstokes/checks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "csstokes/init.hpp"

namespace csstokes {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace

bool CheckReport::all_passed() const {
    for (const auto& r : rows)
        if (!r.passed) return false;
    return true;
}

double max_contraction_ratio(const std::vector<StepReport>& reports) {
    double worst = 0.0;
    for (const auto& r : reports) worst = std::max(worst, r.max_contraction_ratio);
    return worst;
}

bool energy_nonincreasing(std::span<const DiagnosticsRecord> records) {
    for (std::size_t k = 1; k < records.size(); ++k)
        if (records[k].energy() > records[k - 1].energy()) return false;
    return true;
}

DtStarScan scan_dt_star(const SimConfig& config, int doublings, int steps) {
    DtStarScan scan;
    for (int level = 0; level <= doublings; ++level) {
        SimConfig c = config;
        c.dt = config.dt * std::ldexp(1.0, level);
        c.t_end = c.dt * steps;
        c.output_every = steps;
        RunOptions opts;
        opts.controls.allow_retry = false;
        double ratio = 0.0;
        try {
            ratio = max_contraction_ratio(run(c, opts).step_reports);
        } catch (const SimulationAbort&) {
            ratio = std::numeric_limits<double>::infinity();
        }
        scan.ratios.emplace_back(c.dt, ratio);
        scan.largest_tested = c.dt;
        if (ratio > thresholds::picard_contraction) {
            scan.dt_star = c.dt;
            break;
        }
    }
    return scan;
}

CheckReport check_config(const SimConfig& config, const CheckOptions& options) {
    CheckReport report;
    RunOptions opts;
    opts.spacetime_p = config.q;
    report.run = run(config, opts);
    const auto& records = report.run.records;
    const double record_dt = config.dt * config.output_every;
    auto add = [&](std::string name, bool passed, std::string detail, bool applicable = true) {
        report.rows.push_back({std::move(name), passed, applicable, std::move(detail)});
    };

    bool mass_constant = true;
    for (const auto& r : records) mass_constant = mass_constant && r.mass == records.front().mass;
    add("mass", mass_constant, "M = " + num(records.front().mass) + (mass_constant ? ", identical at every record" : ", changed"));

    const ParticleEnsemble initial = init_ensemble(config);
    const auto w0 = initial.weights();
    const auto w1 = report.run.final_state.state.ensemble.weights();
    bool weights_ok = w0.size() == w1.size();
    for (std::size_t i = 0; weights_ok && i < w0.size(); ++i) weights_ok = w0[i] == w1[i] && w1[i] >= 0.0;
    add("positivity", weights_ok, weights_ok ? "weights nonnegative and unchanged" : "weights changed");

    if (config.mode == CouplingMode::frozen_fluid) {
        add("momentum", true, "not conserved with a frozen external fluid", false);
    } else {
        const double drift = momentum_drift(records);
        add("momentum", drift <= thresholds::momentum_drift, "relative drift " + num(drift) + " (limit 1e-6)");
    }

    if (records.size() < 2) {
        add("energy-budget", true, "single record", false);
    } else if (config.mode == CouplingMode::frozen_fluid) {
        add("energy-budget", true, "no closed budget with a frozen external fluid", false);
    } else {
        const double coarse = energy_budget(records, record_dt).max_normalized;
        std::string detail = "max normalized residual " + num(coarse);
        bool ok = coarse <= thresholds::energy_residual;
        if (options.refine) {
            SimConfig fine = config;
            fine.dt = 0.5 * config.dt;
            report.refined = run(fine);
            const double refined = energy_budget(report.refined->records, 0.5 * record_dt).max_normalized;
            const double factor = refined > 0.0 ? coarse / refined : std::numeric_limits<double>::infinity();
            detail += "; dt/2 " + num(refined) + " (factor " + num(factor) + ")";
            ok = ok && factor >= thresholds::energy_refinement_factor;
        }
        add("energy-budget", ok, detail);
    }

    if (config.mode == CouplingMode::frozen_fluid && config.init_fluid != "zero") {
        add("energy-monotone", true, "a moving frozen fluid can feed the particles", false);
    } else {
        add("energy-monotone", energy_nonincreasing(records), "E(t) nonincreasing at every record");
    }

    const SupportBoundCheck support = support_bound_check(records, config.dt);
    double min_margin = std::numeric_limits<double>::infinity();
    for (double m : support.margins) min_margin = std::min(min_margin, m);
    add("support-bound", support.passed, "min margin " + num(min_margin));

    const double ratio = max_contraction_ratio(report.run.step_reports);
    std::string picard = "max F(k+1)/F(k) = " + num(ratio);
    if (options.scan_dt_star) {
        report.dt_star = scan_dt_star(config);
        picard += report.dt_star->dt_star ? "; dt* = " + num(*report.dt_star->dt_star)
                                          : "; dt* > " + num(report.dt_star->largest_tested);
    }
    add("picard-contraction", ratio <= thresholds::picard_contraction, picard);

    const MomentGrowthReport moments = moment_growth_monitor(records);
    add("moment-monitor", moments.all_finite,
        "M3(T) = " + num(moments.moment3.back()) + ", envelope C = " + num(moments.moment_envelope.constant) +
            ", int|u|_inf envelope C = " + num(moments.fluid_envelope.constant));

    if (report.run.spacetime) {
        const auto& st = *report.run.spacetime;
        const double r = st.ratio();
        add("stokes-spacetime", std::isfinite(r),
            "p = " + num(st.p) + ", LHS/RHS = " + num(r) + " (monitored, no bound asserted)");
    }
    return report;
}

std::string format_check_table(const std::vector<CheckRow>& rows) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-6s %s\n", "check", "result", "detail");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-20s %-6s ", r.name.c_str(), !r.applicable ? "n/a" : (r.passed ? "PASS" : "FAIL"));
        os << line << r.detail << "\n";
    }
    return os.str();
}

}  // namespace csstokes
