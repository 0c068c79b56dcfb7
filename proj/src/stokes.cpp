#include "csstokes/stokes.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "csstokes/spectral.hpp"

namespace csstokes {

SpectralForce SpectralForce::from_grid(const Grid& grid, const RealVectorField& force) {
    return SpectralForce{grid, to_spectral(grid, force)};
}

SpectralForce SpectralForce::zero(const Grid& grid) { return SpectralForce{grid, make_spectral_field(grid)}; }

ComplexVec3 leray_project(const Vec3& k, const ComplexVec3& g_hat) {
    const double k2 = norm2(k);
    assert(k2 > 0.0 && "leray_project: k = 0 has no projection");
    if (!(k2 > 0.0)) throw std::invalid_argument("leray_project: k must be nonzero");
    ComplexVec3 out = g_hat;
    // Second pass removes the rounding residue of the first.
    for (int pass = 0; pass < 2; ++pass) {
        const Complex kg = (k.x * out[0] + k.y * out[1] + k.z * out[2]) / k2;
        for (int c = 0; c < 3; ++c) out[c] -= k[c] * kg;
    }
    return out;
}

namespace {

// Modes with an index at n/2 pair +n/2 with -n/2 under conjugate symmetry, so
// no single wavevector projects them consistently. They are filtered out.
bool is_nyquist(const Grid& grid, int i, int j, int k) {
    return 2 * i == grid.n || 2 * j == grid.n || 2 * k == grid.n;
}

}  // namespace

void project_field(const Grid& grid, SpectralVectorField& field) {
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.half(); ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                const std::size_t m = grid.mode_index(i, j, k);
                if (is_nyquist(grid, i, j, k)) {
                    for (int c = 0; c < 3; ++c) field[c][m] = Complex{};
                    continue;
                }
                const ComplexVec3 p = leray_project(grid.wavevector(i, j, k), {field[0][m], field[1][m], field[2][m]});
                for (int c = 0; c < 3; ++c) field[c][m] = p[c];
            }
}

FluidState stokes_step(const FluidState& fluid, const SpectralForce& force, double dt) {
    if (!(fluid.grid == force.grid)) throw std::invalid_argument("stokes_step: force grid differs from fluid grid");
    if (!(dt >= 0.0)) throw std::invalid_argument("stokes_step: dt must be nonnegative");
    const Grid& grid = fluid.grid;
    FluidState out{grid, fluid.velocity_grid, fluid.velocity_spectral, {}};
    SpectralVectorField pressure = make_spectral_field(grid);

    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.half(); ++k) {
                const std::size_t m = grid.mode_index(i, j, k);
                const ComplexVec3 g{force.coefficients[0][m], force.coefficients[1][m], force.coefficients[2][m]};
                for (int c = 0; c < 3; ++c)
                    if (!std::isfinite(g[c].real()) || !std::isfinite(g[c].imag()))
                        throw SimulationAbort("stokes_step: non-finite spectral force");
                if (i == 0 && j == 0 && k == 0) {
                    for (int c = 0; c < 3; ++c) out.velocity_spectral[c][m] += dt * g[c];
                    continue;
                }
                if (is_nyquist(grid, i, j, k)) {
                    for (int c = 0; c < 3; ++c) out.velocity_spectral[c][m] = Complex{};
                    continue;
                }
                const Vec3 kv = grid.wavevector(i, j, k);
                const double k2 = norm2(kv);
                const double decay = std::exp(-k2 * dt);
                const double response = -std::expm1(-k2 * dt) / k2;
                const ComplexVec3 pg = leray_project(kv, g);
                for (int c = 0; c < 3; ++c) {
                    out.velocity_spectral[c][m] = decay * fluid.velocity_spectral[c][m] + response * pg[c];
                    pressure[c][m] = g[c] - pg[c];
                }
            }
    for (int c = 0; c < 3; ++c)
        for (const Complex& z : out.velocity_spectral[c])
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw SimulationAbort("stokes_step: non-finite spectral velocity");
    out.sync_grid();
    out.pressure_gradient_grid = to_grid(grid, pressure);
    return out;
}

namespace {

// sum over the full spectrum of weight(k) |u_k|^2, times the box volume.
template <class Weight>
double parseval_sum(const FluidState& fluid, Weight&& weight) {
    const Grid& grid = fluid.grid;
    double sum = 0.0;
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.half(); ++k) {
                const std::size_t m = grid.mode_index(i, j, k);
                const double amp = std::norm(fluid.velocity_spectral[0][m]) + std::norm(fluid.velocity_spectral[1][m]) +
                                   std::norm(fluid.velocity_spectral[2][m]);
                sum += grid.mode_multiplicity(k) * weight(norm2(grid.wavevector(i, j, k))) * amp;
            }
    return sum * grid.length * grid.length * grid.length;
}

}  // namespace

double viscous_dissipation(const FluidState& fluid) {
    return parseval_sum(fluid, [](double k2) { return k2; });
}

double spectral_energy(const FluidState& fluid) {
    return 0.5 * parseval_sum(fluid, [](double) { return 1.0; });
}

double h2_norm(const FluidState& fluid) {
    return std::sqrt(parseval_sum(fluid, [](double k2) { return (1.0 + k2) * (1.0 + k2); }));
}

RealField hessian_magnitude(const FluidState& fluid) {
    const Grid& grid = fluid.grid;
    RealField mag2(grid.nodes(), 0.0);
    ComplexField work(grid.modes());
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                for (int i = 0; i < grid.n; ++i)
                    for (int j = 0; j < grid.n; ++j)
                        for (int k = 0; k < grid.half(); ++k) {
                            const std::size_t m = grid.mode_index(i, j, k);
                            const Vec3 kv = grid.wavevector(i, j, k);
                            work[m] = -kv[a] * kv[b] * fluid.velocity_spectral[c][m];
                        }
                const RealField d = to_grid(grid, work);
                const double mult = a == b ? 1.0 : 2.0;
                for (std::size_t m = 0; m < grid.nodes(); ++m) mag2[m] += mult * d[m] * d[m];
            }
    for (double& v : mag2) v = std::sqrt(v);
    return mag2;
}

namespace {

double scalar_lp_sq(const Grid& grid, const RealField& f, double p) {
    double sum = 0.0;
    for (double v : f) sum += std::pow(std::abs(v), p);
    const double norm = std::pow(sum * grid.cell_volume(), 1.0 / p);
    return norm * norm;
}

double vector_lp_sq(const Grid& grid, const RealVectorField& f, double p) {
    const double norm = lp_norm(grid, f, p);
    return norm * norm;
}

}  // namespace

SpacetimeNormAccumulator::SpacetimeNormAccumulator(double dt, double p) : dt_(dt), p_(p) {
    if (!(dt > 0.0)) throw std::invalid_argument("spacetime norms: dt must be positive");
}

void SpacetimeNormAccumulator::push(const FluidState& state, const RealVectorField& force) {
    const Grid& grid = state.grid;
    const double hess_sq = scalar_lp_sq(grid, hessian_magnitude(state), p_);
    if (count_ == 0) {
        initial_h2_ = h2_norm(state);
    } else {
        RealVectorField ut = make_real_field(grid);
        for (int c = 0; c < 3; ++c)
            for (std::size_t m = 0; m < grid.nodes(); ++m)
                ut[c][m] = (state.velocity_grid[c][m] - previous_.velocity_grid[c][m]) / dt_;
        sum_ut_ += dt_ * vector_lp_sq(grid, ut, p_);
        sum_hessian_ += 0.5 * dt_ * (prev_hessian_sq_ + hess_sq);
        sum_pressure_ += dt_ * vector_lp_sq(grid, state.pressure_gradient_grid, p_);
        if (!force[0].empty()) sum_force_ += dt_ * vector_lp_sq(grid, force, p_);
    }
    previous_ = state;
    prev_hessian_sq_ = hess_sq;
    ++count_;
}

SpacetimeNormReport SpacetimeNormAccumulator::report() const {
    SpacetimeNormReport r;
    r.p = p_;
    r.time_derivative = std::sqrt(sum_ut_);
    r.hessian = std::sqrt(sum_hessian_);
    r.pressure_gradient = std::sqrt(sum_pressure_);
    r.initial_h2 = initial_h2_;
    r.forcing = std::sqrt(sum_force_);
    r.states = count_;
    return r;
}

SpacetimeNormReport spacetime_norm_report(const std::vector<FluidState>& states,
                                          const std::vector<RealVectorField>& forces, double dt, double p) {
    if (states.size() < 2) throw std::invalid_argument("spacetime_norm_report: needs at least 2 states");
    if (!forces.empty() && forces.size() != states.size())
        throw std::invalid_argument("spacetime_norm_report: forces and states differ in length");
    SpacetimeNormAccumulator acc(dt, p);
    const RealVectorField none{};
    for (std::size_t n = 0; n < states.size(); ++n) acc.push(states[n], forces.empty() ? none : forces[n]);
    return acc.report();
}

}  // namespace csstokes
