// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
// Criteria 1-6, 9 and 12 share the seeded full-coupling preset
// (N = 2000, grid 32^3, dt = 0.01, t_end = 2), run once plus a dt/2 rerun.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "csstokes/alignment.hpp"
#include "csstokes/checks.hpp"
#include "csstokes/diagnostics.hpp"
#include "csstokes/init.hpp"
#include "csstokes/io.hpp"
#include "csstokes/picard.hpp"
#include "csstokes/stokes.hpp"
#include "csstokes/transport.hpp"

using namespace csstokes;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool passed, const std::string& detail, double seconds) {
    std::printf("[%s] %2d %-28s %s (%.1f s)\n", passed ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!passed) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

class Stopwatch {
  public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

SimConfig preset() {
    SimConfig c;
    c.box_length = 2.0 * M_PI;
    c.grid_n = 32;
    c.particle_count = 2000;
    c.dt = 0.01;
    c.t_end = 2.0;
    c.rng_seed = 7;
    c.mode = CouplingMode::full_coupling;
    c.init_particles = "uniform_ball:1";
    c.init_fluid = "zero";
    return c;
}

SimConfig two_particle() {
    SimConfig c = preset();
    c.grid_n = 8;
    c.particle_count = 2;
    c.t_end = 5.0;
    c.kernel = KernelSpec{KernelFamily::constant, 1.0};
    c.mode = CouplingMode::pure_kinetic;
    c.init_particles = "two_cluster:1";
    return c;
}

SimConfig pure_drag() {
    SimConfig c = preset();
    c.grid_n = 8;
    c.particle_count = 500;
    c.t_end = 3.0;
    c.kernel = KernelSpec{KernelFamily::constant, 1e-9};
    c.mode = CouplingMode::frozen_fluid;
    c.init_particles = "uniform_ball:2";
    return c;
}

SimConfig vortex() {
    SimConfig c = preset();
    c.grid_n = 16;
    c.particle_count = 500;
    c.t_end = 1.0;
    c.init_fluid = "taylor_green:0.5";
    c.init_particles = "two_cluster:0.5";
    return c;
}

double drag_decay_error(double dt) {
    ParticleEnsemble e(10.0, {{5, 5, 5}}, {{1, 0, 0}}, {1.0});
    for (long s = 0, n = std::lround(1.0 / dt); s < n; ++s) e = step_rk2_still(e, KernelSpec{}, dt);
    return std::abs(e.velocities()[0].x - std::exp(-1.0));
}

double two_body_error(double dt) {
    TransportOptions no_drag;
    no_drag.drag = false;
    ParticleEnsemble e(10.0, {{2, 5, 5}, {7, 5, 5}}, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
    for (long s = 0, n = std::lround(1.0 / dt); s < n; ++s)
        e = step_rk2_still(e, KernelSpec{KernelFamily::constant, 1.0}, dt, no_drag);
    return std::abs(e.velocities()[0].x - e.velocities()[1].x - 2.0 * std::exp(-1.0));
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    Stopwatch clock;
    const SimConfig cfg = preset();
    const CheckReport check = check_config(cfg);
    const auto& records = check.run.records;
    const double preset_seconds = clock.lap();
    std::printf("preset run + dt/2 rerun + dt* scan: %.1f s\n", preset_seconds);

    // 1. Mass.
    {
        bool exact = true;
        for (const auto& r : records) exact = exact && r.mass == records.front().mass;
        for (const auto& r : check.refined->records) exact = exact && r.mass == records.front().mass;
        report(1, "mass conservation", exact, "M(t) == M(0) bitwise at " + std::to_string(records.size() + check.refined->records.size()) + " records", 0.0);
    }

    // 2. Positivity: weights are shared, immutable and nonnegative.
    {
        const ParticleEnsemble initial = init_ensemble(cfg);
        const ParticleEnsemble& final = check.run.final_state.state.ensemble;
        bool ok = true;
        for (std::size_t i = 0; i < initial.size(); ++i)
            ok = ok && final.weights()[i] == initial.weights()[i] && final.weights()[i] >= 0.0;
        bool rejects_negative = false;
        try {
            ParticleEnsemble(1.0, {{0, 0, 0}}, {{0, 0, 0}}, {-1e-300});
        } catch (const ConfigError&) {
            rejects_negative = true;
        }
        report(2, "positivity", ok && rejects_negative, "weights unchanged and >= 0; negative weights rejected", 0.0);
    }

    // 3. Energy budget.
    {
        const double coarse = energy_budget(records, cfg.dt).max_normalized;
        const double fine = energy_budget(check.refined->records, 0.5 * cfg.dt).max_normalized;
        const double factor = coarse / fine;
        report(3, "energy budget", coarse <= 5e-3 && factor >= 3.0,
               fmt("max residual %.3e", coarse) + fmt(", dt/2 %.3e", fine) + fmt(", factor %.2f", factor), preset_seconds);
    }

    // 4. Monotone energy across presets.
    {
        clock.lap();
        bool ok = energy_nonincreasing(records) && energy_nonincreasing(check.refined->records);
        std::string which = "preset";
        for (const auto& [name, c] : {std::pair{"two-particle", two_particle()}, {"pure-drag", pure_drag()}, {"vortex", vortex()}}) {
            const bool mono = energy_nonincreasing(run(c).records);
            ok = ok && mono;
            which += std::string(", ") + name + (mono ? "" : " (violated)");
        }
        report(4, "monotone energy", ok, which, clock.lap());
    }

    // 5. Momentum.
    {
        const double drift = momentum_drift(records);
        report(5, "momentum conservation", drift <= 1e-6, fmt("relative drift %.3e", drift), 0.0);
    }

    // 6. Support bound.
    {
        const SupportBoundCheck s = support_bound_check(records, cfg.dt);
        double margin = INFINITY;
        for (double m : s.margins) margin = std::min(margin, m);
        report(6, "support bound", s.passed, fmt("min margin %.3e", margin), 0.0);
    }

    // 7. Characteristic ODE accuracy.
    {
        clock.lap();
        const double r1 = drag_decay_error(0.01) / drag_decay_error(0.005);
        const double r2 = two_body_error(0.01) / two_body_error(0.005);
        const bool ok = drag_decay_error(0.01) <= 1e-4 && r1 >= 3.7 && r1 <= 4.3 && r2 >= 3.7 && r2 <= 4.3;
        report(7, "characteristic ODE order", ok, fmt("drag ratio %.3f", r1) + fmt(", two-body ratio %.3f", r2), clock.lap());
    }

    // 8. Stokes solver exactness.
    {
        clock.lap();
        const Grid g{16, 2.0 * M_PI};
        FluidState f = FluidState::zero(g);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) f.velocity_grid[2][g.node_index(i, j, k)] = std::sin(2.0 * M_PI * 2 * i / g.n);
        f.sync_spectral();
        const double dt = 0.01, k2 = 4.0;
        const std::size_t mode = g.mode_index(2, 0, 0);
        double decay_err = 0.0;
        for (int s = 0; s < 100; ++s) {
            const Complex before = f.velocity_spectral[2][mode];
            f = stokes_step(f, SpectralForce::zero(g), dt);
            decay_err = std::max(decay_err, std::abs(f.velocity_spectral[2][mode] / before - std::exp(-k2 * dt)));
        }
        std::mt19937_64 rng(8);
        std::normal_distribution<double> n01;
        std::uniform_int_distribution<int> m(-16, 16);
        double idem = 0.0, div = 0.0, adj = 0.0;
        for (int s = 0; s < 1000; ++s) {
            Vec3 k;
            do k = {double(m(rng)), double(m(rng)), double(m(rng))};
            while (norm2(k) == 0.0);
            ComplexVec3 a, b;
            for (int c = 0; c < 3; ++c) {
                a[c] = {n01(rng), n01(rng)};
                b[c] = {n01(rng), n01(rng)};
            }
            const ComplexVec3 pa = leray_project(k, a), pb = leray_project(k, b), ppa = leray_project(k, pa);
            double na = 0.0, nb = 0.0;
            Complex lhs{}, rhs{}, kdot{};
            for (int c = 0; c < 3; ++c) {
                na += std::norm(a[c]);
                nb += std::norm(b[c]);
                idem = std::max(idem, std::abs(ppa[c] - pa[c]) / std::sqrt(na + 1e-300));
                lhs += std::conj(pa[c]) * b[c];
                rhs += std::conj(a[c]) * pb[c];
                kdot += k[c] * pa[c];
            }
            idem = std::max(idem, 0.0);
            div = std::max(div, std::abs(kdot) / (norm(k) * std::sqrt(na)));
            adj = std::max(adj, std::abs(lhs - rhs) / std::sqrt(na * nb));
        }
        const bool ok = decay_err <= 1e-13 && idem <= 1e-13 && div <= 1e-13 && adj <= 1e-13;
        report(8, "Stokes exactness", ok,
               fmt("decay %.1e", decay_err) + fmt(", idempotence %.1e", idem) + fmt(", divergence %.1e", div) +
                   fmt(", adjointness %.1e", adj),
               clock.lap());
    }

    // 9. Picard contraction.
    {
        const double ratio = max_contraction_ratio(check.run.step_reports);
        bool any_halved = false;
        for (const auto& r : check.run.step_reports) any_halved = any_halved || r.halved;
        std::string detail = fmt("max F(k+1)/F(k) %.3e over ", ratio) + std::to_string(check.run.step_reports.size()) + " steps";
        if (check.dt_star && check.dt_star->dt_star) detail += fmt("; dt* = %.4g", *check.dt_star->dt_star);
        else if (check.dt_star) detail += fmt("; dt* > %.4g", check.dt_star->largest_tested);
        report(9, "Picard contraction", ratio <= 0.5 && !any_halved, detail, 0.0);
    }

    // 10. Oracle equivalence.
    {
        clock.lap();
        std::mt19937_64 rng(2025);
        std::uniform_int_distribution<int> count(1, 64);
        std::uniform_real_distribution<double> pos(0.0, 3.0), vel(-2.0, 2.0), w(0.1, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int n = count(rng);
            std::vector<Vec3> x(n), v(n);
            std::vector<double> m(n);
            for (int i = 0; i < n; ++i) {
                x[i] = {pos(rng), pos(rng), pos(rng)};
                v[i] = {vel(rng), vel(rng), vel(rng)};
                m[i] = w(rng) / n;
            }
            const ParticleEnsemble e(3.0, x, v, m);
            const auto fast = alignment_force(compute_fields(e, KernelSpec{}), e.velocities());
            const auto direct = alignment_force_direct(e, KernelSpec{});
            double err = 0.0, scale = 0.0;
            for (int i = 0; i < n; ++i) {
                err = std::max(err, norm(fast[i] - direct[i]));
                scale = std::max(scale, norm(direct[i]));
            }
            if (scale > 0.0) worst = std::max(worst, err / scale);
        }
        report(10, "oracle equivalence", worst <= 1e-13, fmt("max relative difference %.2e", worst), clock.lap());
    }

    // 11. Determinism.
    {
        clock.lap();
        SimConfig c = vortex();
        c.t_end = 0.5;
        const fs::path dir = fs::temp_directory_path() / "csstokes_acceptance";
        fs::create_directories(dir);
        write_timeseries(run(c).records, dir / "a.csv");
        write_timeseries(run(c).records, dir / "b.csv");
        const std::string a = read_file(dir / "a.csv"), b = read_file(dir / "b.csv");
        report(11, "determinism", !a.empty() && a == b, "two runs, " + std::to_string(a.size()) + " bytes each, identical", clock.lap());
    }

    // 12. Moment monitor.
    {
        clock.lap();
        const MomentGrowthReport coupled = moment_growth_monitor(records);
        const MomentGrowthReport drag = moment_growth_monitor(run(pure_drag()).records);
        const bool ok = coupled.all_finite && drag.all_finite && drag.moment_nonincreasing;
        report(12, "moment monitor", ok,
               fmt("preset M3(T) %.4f", coupled.moment3.back()) + fmt(", pure-drag M3 %.4f", drag.moment3.front()) +
                   fmt(" -> %.4f", drag.moment3.back()),
               clock.lap());
    }

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
