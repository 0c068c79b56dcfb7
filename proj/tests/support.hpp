#pragma once

#include <numbers>
#include <random>
#include <vector>

#include "csstokes/model.hpp"

namespace csstokes::testing {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline SimConfig small_config(CouplingMode mode = CouplingMode::full_coupling) {
    SimConfig c;
    c.box_length = two_pi;
    c.grid_n = 8;
    c.particle_count = 64;
    c.dt = 0.01;
    c.t_end = 0.05;
    c.rng_seed = 11;
    c.mode = mode;
    return c;
}

/// Independent random ensemble: positions uniform in the box, velocity
/// components uniform in [-vmax, vmax], weights uniform in [0.5, 1.5] / n.
inline ParticleEnsemble random_ensemble(std::mt19937_64& rng, std::size_t n, double length, double vmax = 1.0) {
    std::uniform_real_distribution<double> pos(0.0, length), vel(-vmax, vmax), w(0.5, 1.5);
    std::vector<Vec3> x(n), v(n);
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = {pos(rng), pos(rng), pos(rng)};
        v[i] = {vel(rng), vel(rng), vel(rng)};
        m[i] = w(rng) / static_cast<double>(n);
    }
    return ParticleEnsemble(length, std::move(x), std::move(v), std::move(m));
}

inline RealVectorField random_field(std::mt19937_64& rng, const Grid& grid) {
    std::normal_distribution<double> g(0.0, 1.0);
    RealVectorField f = make_real_field(grid);
    for (auto& c : f)
        for (double& x : c) x = g(rng);
    return f;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace csstokes::testing
