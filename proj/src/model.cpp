#include "csstokes/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "csstokes/spectral.hpp"

namespace csstokes {

double KernelSpec::derivative(double r) const {
    if (family == KernelFamily::constant) return 0.0;
    const double d = 1.0 + r * r;
    return -2.0 * r / (d * d);
}

double KernelSpec::cutoff_for(double eps) const {
    if (family == KernelFamily::constant) return eps < c ? std::numeric_limits<double>::infinity() : 0.0;
    if (eps <= 0.0) return std::numeric_limits<double>::infinity();
    if (eps >= 1.0) return 0.0;
    return std::sqrt(1.0 / eps - 1.0);
}

KernelScan scan_kernel(const KernelSpec& kernel, double r_max, std::size_t samples) {
    KernelScan scan;
    double prev = kernel(0.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const double r = r_max * static_cast<double>(s) / static_cast<double>(samples - 1);
        const double phi = kernel(r);
        const double dphi = std::abs(kernel.derivative(r));
        if (!(phi > 0.0)) scan.positive = false;
        if (phi > prev) scan.nonincreasing = false;
        prev = phi;
        scan.max_phi = std::max(scan.max_phi, std::abs(phi));
        if (dphi > scan.max_abs_derivative) {
            scan.max_abs_derivative = dphi;
            scan.argmax_abs_derivative = r;
        }
    }
    return scan;
}

void validate_kernel(const KernelSpec& kernel) {
    if (kernel.family == KernelFamily::constant && !(kernel.c > 0.0 && kernel.c <= 1.0))
        throw ConfigError("kernel.c: constant kernel value must lie in (0, 1]");
    const KernelScan scan = scan_kernel(kernel);
    if (!scan.positive) throw ConfigError("kernel: phi must be positive");
    if (!scan.nonincreasing) throw ConfigError("kernel: phi must be nonincreasing");
    if (scan.max_phi > 1.0) throw ConfigError("kernel: max |phi| exceeds 1");
    if (scan.max_abs_derivative > 1.0) throw ConfigError("kernel: max |phi'| exceeds 1");
}

std::string to_string(CouplingMode mode) {
    switch (mode) {
        case CouplingMode::pure_kinetic: return "pure_kinetic";
        case CouplingMode::frozen_fluid: return "frozen_fluid";
        case CouplingMode::full_coupling: return "full_coupling";
    }
    return "unknown";
}

std::string to_string(KernelFamily family) {
    return family == KernelFamily::constant ? "constant" : "rational_decay";
}

double WeightSpec::omega(double x2, double v2) const {
    return std::pow(1.0 + v2, 2.0 * alpha + 1.0) * std::pow(1.0 + x2 + v2, 3.0 * gamma);
}

double WeightSpec::lambda(double v2) const { return std::pow(1.0 + v2, alpha); }

void SimConfig::validate() const {
    if (!(box_length > 0.0) || !std::isfinite(box_length)) throw ConfigError("box_length: must satisfy box_length > 0");
    if (grid_n < 4 || grid_n % 2 != 0) throw ConfigError("grid_n: must be even and >= 4");
    if (particle_count < 1) throw ConfigError("n_particles: must be >= 1");
    if (!(total_mass > 0.0)) throw ConfigError("total_mass: must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt: must satisfy dt > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end: must satisfy t_end >= 0");
    if (!(picard_tol > 0.0)) throw ConfigError("picard_tol: must satisfy picard_tol > 0");
    if (picard_max_iter < 1) throw ConfigError("picard_max_iter: must be >= 1");
    if (output_every < 1) throw ConfigError("output_every: must be >= 1");
    if (!(weights.alpha > 1.0)) throw ConfigError("weights.alpha: must satisfy alpha > 1");
    if (!(weights.gamma > 1.0)) throw ConfigError("weights.gamma: must satisfy gamma > 1");
    if (!(q > 3.0 && q <= 6.0)) throw ConfigError("q: must satisfy 3 < q <= 6");
    validate_kernel(kernel);
}

long SimConfig::total_steps() const { return std::lround(std::ceil(t_end / dt - 1e-9)); }

Vec3 Grid::wavevector(int i, int j, int k) const {
    const double base = 2.0 * std::numbers::pi / length;
    return {base * signed_mode(i), base * signed_mode(j), base * k};
}

RealVectorField make_real_field(const Grid& grid) {
    return {RealField(grid.nodes(), 0.0), RealField(grid.nodes(), 0.0), RealField(grid.nodes(), 0.0)};
}

SpectralVectorField make_spectral_field(const Grid& grid) {
    return {ComplexField(grid.modes()), ComplexField(grid.modes()), ComplexField(grid.modes())};
}

double wrap_coordinate(double x, double length) {
    if (x >= 0.0 && x < length) return x;
    double r = x - length * std::floor(x / length);
    if (r >= length || r < 0.0) r = 0.0;
    return r;
}

Vec3 wrap_position(const Vec3& p, double length) {
    return {wrap_coordinate(p.x, length), wrap_coordinate(p.y, length), wrap_coordinate(p.z, length)};
}

Vec3 minimum_image(const Vec3& a, const Vec3& b, double length) {
    Vec3 d = a - b;
    for (int c = 0; c < 3; ++c) d[c] -= length * std::nearbyint(d[c] / length);
    return d;
}

ParticleEnsemble::ParticleEnsemble(double box_length, std::vector<Vec3> positions,
                                   std::vector<Vec3> velocities, std::vector<double> weights)
    : box_length_(box_length) {
    if (!(box_length > 0.0)) throw ConfigError("ensemble: box length must be positive");
    if (positions.size() != velocities.size() || positions.size() != weights.size())
        throw ConfigError("ensemble: positions, velocities and weights differ in length");
    double mass = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("ensemble: weights must be finite and nonnegative");
        mass += w;
    }
    for (auto& p : positions) p = wrap_position(p, box_length);
    double radius = 0.0;
    for (const auto& v : velocities) radius = std::max(radius, norm(v));
    positions_ = std::move(positions);
    velocities_ = std::move(velocities);
    weights_ = std::make_shared<const std::vector<double>>(std::move(weights));
    total_mass_ = mass;
    initial_support_radius_ = radius;
}

ParticleEnsemble ParticleEnsemble::with_state(std::vector<Vec3> positions, std::vector<Vec3> velocities) const {
    if (positions.size() != size() || velocities.size() != size())
        throw std::invalid_argument("ensemble: replacement state has the wrong length");
    ParticleEnsemble out;
    out.box_length_ = box_length_;
    for (auto& p : positions) p = wrap_position(p, box_length_);
    out.positions_ = std::move(positions);
    out.velocities_ = std::move(velocities);
    out.weights_ = weights_;
    out.total_mass_ = total_mass_;
    out.initial_support_radius_ = initial_support_radius_;
    return out;
}

ParticleEnsemble ParticleEnsemble::restore(double box_length, std::vector<Vec3> positions,
                                           std::vector<Vec3> velocities, std::vector<double> weights,
                                           double initial_support_radius) {
    ParticleEnsemble out(box_length, std::move(positions), std::move(velocities), std::move(weights));
    out.initial_support_radius_ = initial_support_radius;
    return out;
}

FluidState FluidState::zero(const Grid& grid) {
    return FluidState{grid, make_real_field(grid), make_spectral_field(grid), make_real_field(grid)};
}

void FluidState::sync_grid() { velocity_grid = to_grid(grid, velocity_spectral); }

void FluidState::sync_spectral() { velocity_spectral = to_spectral(grid, velocity_grid); }

}  // namespace csstokes
