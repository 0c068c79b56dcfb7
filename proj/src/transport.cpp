#include "csstokes/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "csstokes/coupling.hpp"

namespace csstokes {

namespace {

std::vector<Vec3> alignment_or_zero(const AlignmentFields& fields, std::span<const Vec3> v, bool enabled) {
    if (!enabled) return std::vector<Vec3>(v.size());
    return alignment_force(fields, v);
}

Vec3 drag_term(const Vec3& u, const Vec3& v, bool enabled) { return enabled ? u - v : Vec3{}; }

}  // namespace

CharacteristicRhs rhs(const ParticleEnsemble& ensemble, std::span<const Vec3> fluid_at_particles,
                      const KernelSpec& kernel, const TransportOptions& options) {
    if (fluid_at_particles.size() != ensemble.size())
        throw std::invalid_argument("rhs: fluid samples and particles differ in length");
    const auto v = ensemble.velocities();
    CharacteristicRhs out;
    out.dx.assign(v.begin(), v.end());
    out.dv.resize(v.size());
    out.forces.resize(v.size());
    std::vector<Vec3> align;
    if (options.alignment) align = alignment_force(compute_fields(ensemble, kernel), v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        ForceSample f;
        if (options.alignment) f.alignment = align[i];
        f.drag = drag_term(fluid_at_particles[i], v[i], options.drag);
        out.forces[i] = f;
        out.dv[i] = f.alignment + f.drag;
    }
    return out;
}

HeunPredictor heun_predict(const ParticleEnsemble& ensemble, std::span<const Vec3> start_fluid,
                           const KernelSpec& kernel, double dt, const TransportOptions& options) {
    if (start_fluid.size() != ensemble.size())
        throw std::invalid_argument("heun_predict: fluid samples and particles differ in length");
    const auto x = ensemble.positions();
    const auto v = ensemble.velocities();
    const std::size_t n = ensemble.size();
    const double length = ensemble.box_length();

    HeunPredictor p;
    p.start = ensemble;
    p.dt = dt;
    p.start_fluid.assign(start_fluid.begin(), start_fluid.end());
    p.start_fields = compute_fields(ensemble, kernel);
    const std::vector<Vec3> align = alignment_or_zero(p.start_fields, v, options.alignment);
    p.start_accel.resize(n);
    p.predicted_positions.resize(n);
    p.predicted_velocities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.start_accel[i] = align[i] + drag_term(start_fluid[i], v[i], options.drag);
        p.predicted_positions[i] = wrap_position(x[i] + dt * v[i], length);
        p.predicted_velocities[i] = v[i] + dt * p.start_accel[i];
    }
    if (options.alignment) {
        const ParticleEnsemble predicted = ensemble.with_state(p.predicted_positions, p.predicted_velocities);
        p.predicted_alignment = alignment_force(compute_fields(predicted, kernel), p.predicted_velocities);
    } else {
        p.predicted_alignment.assign(n, Vec3{});
    }
    return p;
}

ParticleEnsemble heun_correct(const HeunPredictor& p, std::span<const Vec3> predicted_fluid,
                              const TransportOptions& options) {
    const std::size_t n = p.start.size();
    if (predicted_fluid.size() != n)
        throw std::invalid_argument("heun_correct: fluid samples and particles differ in length");
    const auto x = p.start.positions();
    const auto v = p.start.velocities();
    const double half = 0.5 * p.dt;
    std::vector<Vec3> xn(n), vn(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 accel2 =
            p.predicted_alignment[i] + drag_term(predicted_fluid[i], p.predicted_velocities[i], options.drag);
        xn[i] = x[i] + half * (v[i] + p.predicted_velocities[i]);
        vn[i] = v[i] + half * (p.start_accel[i] + accel2);
    }
    ParticleEnsemble out = p.start.with_state(std::move(xn), std::move(vn));
    require_finite(out, "heun_correct");
    return out;
}

namespace {

template <class Sampler>
ParticleEnsemble step_with(const ParticleEnsemble& ensemble, const KernelSpec& kernel, double dt,
                           const TransportOptions& options, Sampler&& sample) {
    if (!(dt >= 0.0)) throw std::invalid_argument("step_rk2: dt must be nonnegative");
    if (dt == 0.0) return ensemble;
    if (options.integrator == DragIntegrator::exponential_split && options.drag) {
        // Strang splitting: exact drag relaxation for dt/2, Heun alignment, drag again.
        const double relax = std::exp(-0.5 * dt);
        auto relax_drag = [&](const ParticleEnsemble& e) {
            const std::vector<Vec3> u = sample(e.positions());
            const auto v = e.velocities();
            std::vector<Vec3> vn(e.size());
            for (std::size_t i = 0; i < e.size(); ++i) vn[i] = u[i] + relax * (v[i] - u[i]);
            return e.with_state(std::vector<Vec3>(e.positions().begin(), e.positions().end()), std::move(vn));
        };
        TransportOptions inner = options;
        inner.drag = false;
        inner.integrator = DragIntegrator::heun;
        const ParticleEnsemble first = relax_drag(ensemble);
        const std::vector<Vec3> none(first.size());
        const HeunPredictor p = heun_predict(first, none, kernel, dt, inner);
        return relax_drag(heun_correct(p, none, inner));
    }
    const HeunPredictor p = heun_predict(ensemble, sample(ensemble.positions()), kernel, dt, options);
    return heun_correct(p, sample(std::span<const Vec3>(p.predicted_positions)), options);
}

}  // namespace

ParticleEnsemble step_rk2(const ParticleEnsemble& ensemble, const FluidState& fluid, const KernelSpec& kernel,
                          double dt, const TransportOptions& options) {
    if (std::abs(fluid.grid.length - ensemble.box_length()) > 1e-12 * ensemble.box_length())
        throw std::invalid_argument("step_rk2: fluid box differs from particle box");
    return step_with(ensemble, kernel, dt, options,
                     [&](std::span<const Vec3> pos) { return interpolate(fluid, pos); });
}

ParticleEnsemble step_rk2_still(const ParticleEnsemble& ensemble, const KernelSpec& kernel, double dt,
                                const TransportOptions& options) {
    return step_with(ensemble, kernel, dt, options,
                     [](std::span<const Vec3> pos) { return std::vector<Vec3>(pos.size()); });
}

double support_radius(const ParticleEnsemble& ensemble) {
    double best = 0.0;
    for (const Vec3& v : ensemble.velocities()) best = std::max(best, norm2(v));
    return std::sqrt(best);
}

void require_finite(const ParticleEnsemble& ensemble, const char* where) {
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        if (!is_finite(ensemble.positions()[i]) || !is_finite(ensemble.velocities()[i]))
            throw SimulationAbort(std::string(where) + ": non-finite particle state at index " + std::to_string(i));
}

}  // namespace csstokes
