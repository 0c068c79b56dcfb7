#include "csstokes/init.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "csstokes/spectral.hpp"
#include "csstokes/stokes.hpp"

namespace csstokes {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(value)) throw ConfigError(what + ": '" + s + "' is not a finite real number");
    return value;
}

Vec3 uniform_in_ball(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (;;) {
        const Vec3 p{unit(rng), unit(rng), unit(rng)};
        if (norm2(p) <= 1.0) return radius * p;
    }
}

}  // namespace

ParticleInitSpec ParticleInitSpec::parse(const std::string& text) {
    const auto parts = split(text, ':');
    const std::string name = parts.empty() ? std::string{} : parts[0];
    ParticleInitSpec spec;
    if (name == "gaussian" || name == "maxwellian" || name == "normal")
        throw ConfigError("init.particles: '" + name +
                          "' has unbounded velocity support; only compactly supported presets are allowed");
    if (name == "at_rest") {
        if (parts.size() != 1) throw ConfigError("init.particles: at_rest takes no parameter");
        spec.preset = VelocityPreset::at_rest;
        spec.radius = 0.0;
        return spec;
    }
    if (name == "uniform_ball") spec.preset = VelocityPreset::uniform_ball;
    else if (name == "smooth_ball") spec.preset = VelocityPreset::smooth_ball;
    else if (name == "two_cluster") spec.preset = VelocityPreset::two_cluster;
    else throw ConfigError("init.particles: unknown preset '" + text + "'");
    if (parts.size() > 2) throw ConfigError("init.particles: too many parameters in '" + text + "'");
    if (parts.size() == 2) spec.radius = parse_number(parts[1], "init.particles");
    if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius))
        throw ConfigError("init.particles: velocity support radius must be finite and >= 0");
    return spec;
}

FluidInitSpec FluidInitSpec::parse(const std::string& text) {
    const auto parts = split(text, ':');
    const std::string name = parts.empty() ? std::string{} : parts[0];
    FluidInitSpec spec;
    if (name == "zero") {
        spec.preset = FluidPreset::zero;
        return spec;
    }
    if (name == "taylor_green") {
        spec.preset = FluidPreset::taylor_green;
        if (parts.size() > 2) throw ConfigError("init.fluid: taylor_green takes one amplitude");
        if (parts.size() == 2) spec.scale = parse_number(parts[1], "init.fluid");
        return spec;
    }
    if (name == "mode") {
        if (parts.size() != 3) throw ConfigError("init.fluid: expected mode:m1,m2,m3:a1,a2,a3");
        const auto ks = split(parts[1], ',');
        const auto as = split(parts[2], ',');
        if (ks.size() != 3 || as.size() != 3) throw ConfigError("init.fluid: mode needs three wavenumbers and three amplitudes");
        spec.preset = FluidPreset::single_mode;
        for (int c = 0; c < 3; ++c) {
            const double kc = parse_number(ks[c], "init.fluid wavenumber");
            if (kc != std::floor(kc))
                throw ConfigError("init.fluid: wavenumber '" + ks[c] + "' is not an integer (field would not be periodic)");
            spec.wavenumber[c] = static_cast<int>(kc);
            spec.amplitude[c] = parse_number(as[c], "init.fluid amplitude");
        }
        return spec;
    }
    throw ConfigError("init.fluid: unknown preset '" + text + "'");
}

ParticleEnsemble init_ensemble(const SimConfig& config, const ParticleInitSpec& spec) {
    const std::size_t n = static_cast<std::size_t>(config.particle_count);
    const double length = config.box_length;
    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Vec3> x(n), v(n);
    std::vector<double> m(n, config.total_mass / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.preset == VelocityPreset::two_cluster) {
            const bool first = i < (n + 1) / 2;
            const double cx = first ? 0.25 * length : 0.75 * length;
            const double spread = length / 16.0;
            x[i] = {cx + spread * (2.0 * unit(rng) - 1.0), 0.5 * length + spread * (2.0 * unit(rng) - 1.0),
                    0.5 * length + spread * (2.0 * unit(rng) - 1.0)};
            v[i] = {first ? spec.radius : -spec.radius, 0.0, 0.0};
            continue;
        }
        x[i] = {length * unit(rng), length * unit(rng), length * unit(rng)};
        switch (spec.preset) {
            case VelocityPreset::at_rest: v[i] = {}; break;
            case VelocityPreset::uniform_ball: v[i] = uniform_in_ball(rng, spec.radius); break;
            case VelocityPreset::smooth_ball:
                // density proportional to (1 - |v|^2/R^2)^2 on the ball
                for (;;) {
                    const Vec3 w = uniform_in_ball(rng, 1.0);
                    const double s = 1.0 - norm2(w);
                    if (unit(rng) <= s * s) {
                        v[i] = spec.radius * w;
                        break;
                    }
                }
                break;
            case VelocityPreset::two_cluster: break;
        }
    }
    return ParticleEnsemble(length, std::move(x), std::move(v), std::move(m));
}

ParticleEnsemble init_ensemble(const SimConfig& config) {
    return init_ensemble(config, ParticleInitSpec::parse(config.init_particles));
}

FluidState init_fluid(const SimConfig& config, const FluidInitSpec& spec) {
    const Grid grid{config.grid_n, config.box_length};
    FluidState fluid = FluidState::zero(grid);
    if (spec.preset == FluidPreset::zero) return fluid;

    const double h = grid.spacing();
    const double base = 2.0 * std::numbers::pi / grid.length;
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.n; ++k) {
                const Vec3 p{i * h, j * h, k * h};
                const std::size_t m = grid.node_index(i, j, k);
                Vec3 u;
                if (spec.preset == FluidPreset::taylor_green) {
                    const double a = base * p.x, b = base * p.y, c = base * p.z;
                    u = spec.scale * Vec3{std::sin(a) * std::cos(b) * std::cos(c),
                                          -std::cos(a) * std::sin(b) * std::cos(c), 0.0};
                } else {
                    const double phase = base * (spec.wavenumber[0] * p.x + spec.wavenumber[1] * p.y +
                                                 spec.wavenumber[2] * p.z);
                    u = std::sin(phase) * spec.amplitude;
                }
                for (int c = 0; c < 3; ++c) fluid.velocity_grid[c][m] = u[c];
            }
    fluid.sync_spectral();
    project_field(grid, fluid.velocity_spectral);
    fluid.sync_grid();
    return fluid;
}

FluidState init_fluid(const SimConfig& config) {
    if (config.mode == CouplingMode::pure_kinetic) return FluidState::zero(Grid{config.grid_n, config.box_length});
    return init_fluid(config, FluidInitSpec::parse(config.init_fluid));
}

}  // namespace csstokes
