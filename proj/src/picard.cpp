#include "csstokes/picard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csstokes/coupling.hpp"
#include "csstokes/init.hpp"
#include "csstokes/io.hpp"
#include "csstokes/spectral.hpp"

namespace csstokes {

TransportOptions transport_for(CouplingMode mode, TransportOptions base) {
    if (mode == CouplingMode::pure_kinetic) base.drag = false;
    return base;
}

namespace {

double max_b_norm(const AlignmentFields& fields) {
    double best = 0.0;
    for (const Vec3& b : fields.b) best = std::max(best, norm2(b));
    return std::sqrt(best);
}

double particle_distance(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dx = norm(minimum_image(a.positions()[i], b.positions()[i], a.box_length()));
        const double dv = norm(a.velocities()[i] - b.velocities()[i]);
        worst = std::max(worst, dx + dv);
    }
    return worst;
}

RealVectorField field_difference(const RealVectorField& a, const RealVectorField& b) {
    RealVectorField d = a;
    for (int c = 0; c < 3; ++c)
        for (std::size_t m = 0; m < d[c].size(); ++m) d[c][m] -= b[c][m];
    return d;
}

struct Attempt {
    bool converged = false;
    StepOutcome outcome;
};

Attempt attempt_step(const ParticleEnsemble& ensemble, const FluidState& fluid, const SimConfig& config, double dt,
                     const StepControls& controls) {
    const TransportOptions transport = transport_for(config.mode, controls.transport);
    const Grid& grid = fluid.grid;
    Attempt result;
    StepOutcome& out = result.outcome;

    const bool fluid_acts = config.mode != CouplingMode::pure_kinetic;
    const std::vector<Vec3> start_u = fluid_acts ? interpolate(fluid, ensemble.positions())
                                                 : std::vector<Vec3>(ensemble.size());
    const HeunPredictor predictor = heun_predict(ensemble, start_u, config.kernel, dt, transport);
    const double u_max = max_norm(fluid.velocity_grid);
    out.substeps.push_back({dt, max_b_norm(predictor.start_fields) + u_max, u_max});

    if (config.mode != CouplingMode::full_coupling) {
        // The fluid does not respond, so the first iterate is the fixed point.
        const std::vector<Vec3> pred_u = fluid_acts ? interpolate(fluid, predictor.predicted_positions)
                                                    : std::vector<Vec3>(ensemble.size());
        out.ensemble = heun_correct(predictor, pred_u, transport);
        out.fluid = fluid;
        out.force = make_real_field(grid);
        out.report.residuals.push_back({});
        out.report.iterations = 1;
        result.converged = true;
        return result;
    }

    // Stage-one force and the stage-two moments do not depend on the iterate.
    const RealVectorField start_force = coupling_force(deposit(ensemble, grid), fluid);
    const DepositedMoments predicted_moments =
        deposit(predictor.predicted_positions, predictor.predicted_velocities, ensemble.weights(), grid);

    FluidState guess = controls.warm_start ? fluid : FluidState::zero(grid);
    std::optional<ParticleEnsemble> previous_particles;
    for (int k = 1; k <= config.picard_max_iter; ++k) {
        const std::vector<Vec3> pred_u = interpolate(guess, predictor.predicted_positions);
        ParticleEnsemble particles = heun_correct(predictor, pred_u, transport);

        RealVectorField force = coupling_force(predicted_moments, guess);
        for (int c = 0; c < 3; ++c)
            for (std::size_t m = 0; m < grid.nodes(); ++m) force[c][m] = 0.5 * (start_force[c][m] + force[c][m]);
        FluidState next = stokes_step(fluid, SpectralForce::from_grid(grid, force), dt);

        PicardResidual r;
        r.fluid_part = l2_norm(grid, field_difference(next.velocity_grid, guess.velocity_grid));
        r.particle_part = previous_particles ? particle_distance(particles, *previous_particles) : 0.0;
        r.combined = r.fluid_part * r.fluid_part + r.particle_part * r.particle_part;
        const double u_norm = l2_norm(grid, next.velocity_grid);
        const double radius = support_radius(particles);
        const double scale = u_norm * u_norm + radius * radius;
        r.relative = scale > 0.0 ? r.combined / scale : r.combined;
        if (!out.report.residuals.empty()) {
            const double prev = out.report.residuals.back().combined;
            if (prev > 0.0)
                out.report.max_contraction_ratio = std::max(out.report.max_contraction_ratio, r.combined / prev);
        }
        out.report.residuals.push_back(r);
        out.report.iterations = k;

        if (r.relative <= config.picard_tol) {
            out.ensemble = std::move(particles);
            out.fluid = std::move(next);
            out.force = std::move(force);
            result.converged = true;
            return result;
        }
        previous_particles = std::move(particles);
        guess = std::move(next);
    }
    return result;
}

std::string residual_trace(const StepReport& report) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t k = 0; k < report.residuals.size(); ++k)
        os << (k ? ", " : "") << report.residuals[k].relative;
    return os.str();
}

}  // namespace

StepOutcome coupled_step(const ParticleEnsemble& ensemble, const FluidState& fluid, const SimConfig& config,
                         double dt, const StepControls& controls) {
    Attempt full = attempt_step(ensemble, fluid, config, dt, controls);
    if (full.converged) return std::move(full.outcome);
    if (!controls.allow_retry)
        throw SimulationAbort("Picard iteration did not converge; residuals: " + residual_trace(full.outcome.report));

    Attempt first = attempt_step(ensemble, fluid, config, 0.5 * dt, controls);
    if (!first.converged)
        throw SimulationAbort("Picard iteration did not converge at dt/2; residuals: " +
                              residual_trace(first.outcome.report));
    Attempt second = attempt_step(first.outcome.ensemble, first.outcome.fluid, config, 0.5 * dt, controls);
    if (!second.converged)
        throw SimulationAbort("Picard iteration did not converge at dt/2; residuals: " +
                              residual_trace(second.outcome.report));

    StepOutcome out = std::move(second.outcome);
    out.substeps.insert(out.substeps.begin(), first.outcome.substeps.begin(), first.outcome.substeps.end());
    out.report.halved = true;
    out.report.iterations += first.outcome.report.iterations;
    out.report.max_contraction_ratio =
        std::max(out.report.max_contraction_ratio, first.outcome.report.max_contraction_ratio);
    out.report.residuals.insert(out.report.residuals.begin(), first.outcome.report.residuals.begin(),
                                first.outcome.report.residuals.end());
    return out;
}

namespace {

DiagnosticsRecord record_for(const RunState& rs, const SimConfig& config, double time) {
    RecordInputs in;
    in.time = time;
    in.initial_support_radius = rs.state.ensemble.initial_support_radius();
    in.committed = rs.quadrature;
    in.pending_half_dt = rs.pending_half_dt;
    in.drag_active = config.mode != CouplingMode::pure_kinetic;
    in.picard_iters = rs.last_picard_iters;
    return make_record(rs.state.ensemble, rs.state.fluid, config.kernel, in);
}

}  // namespace

RunResult resume(const SimConfig& config, RunState start, const RunOptions& options) {
    config.validate();
    RunResult result;
    RunState& rs = start;
    const long total = config.total_steps();

    std::optional<SpacetimeNormAccumulator> spacetime;
    if (options.spacetime_p) {
        spacetime.emplace(config.dt, *options.spacetime_p);
        spacetime->push(rs.state.fluid, RealVectorField{});
    }

    result.records.push_back(record_for(rs, config, static_cast<double>(rs.state.step) * config.dt));
    while (rs.state.step < total) {
        StepOutcome outcome;
        try {
            outcome = coupled_step(rs.state.ensemble, rs.state.fluid, config, config.dt, options.controls);
        } catch (SimulationAbort& abort) {
            if (options.abort_dump_path) {
                RunState dump = rs;
                write_checkpoint(*options.abort_dump_path, config, dump);
                abort.set_dump_path(*options.abort_dump_path);
            }
            throw;
        }
        for (const SubstepSample& s : outcome.substeps) {
            rs.quadrature.support += (rs.pending_half_dt + 0.5 * s.dt) * s.support_integrand;
            rs.quadrature.u_max += (rs.pending_half_dt + 0.5 * s.dt) * s.u_max;
            rs.pending_half_dt = 0.5 * s.dt;
        }
        rs.state.ensemble = std::move(outcome.ensemble);
        rs.state.fluid = std::move(outcome.fluid);
        rs.state.step += 1;
        rs.last_picard_iters = outcome.report.iterations;
        if (spacetime) spacetime->push(rs.state.fluid, outcome.force);
        if (options.on_step) options.on_step(rs.state.step, outcome.report);
        if (options.keep_step_reports) result.step_reports.push_back(std::move(outcome.report));

        if (rs.state.step % config.output_every == 0)
            result.records.push_back(record_for(rs, config, static_cast<double>(rs.state.step) * config.dt));
        if (options.checkpoint_at_step && options.checkpoint_at_step_path && rs.state.step == *options.checkpoint_at_step)
            write_checkpoint(*options.checkpoint_at_step_path, config, rs);
    }
    if (options.checkpoint_path) write_checkpoint(*options.checkpoint_path, config, rs);
    if (spacetime && spacetime->count() >= 2) result.spacetime = spacetime->report();
    result.final_state = std::move(rs);
    return result;
}

RunResult run(const SimConfig& config, const RunOptions& options) {
    config.validate();
    RunState start;
    start.state.ensemble = init_ensemble(config);
    start.state.fluid = init_fluid(config);
    start.state.step = 0;
    return resume(config, std::move(start), options);
}

}  // namespace csstokes
