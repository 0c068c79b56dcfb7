#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "csstokes/diagnostics.hpp"
#include "csstokes/model.hpp"
#include "csstokes/stokes.hpp"
#include "csstokes/transport.hpp"

namespace csstokes {

/// Distance between successive Picard iterates. The particle part is the max
/// over particles of |dX| + |dV| (zero on the first iterate, which has no
/// predecessor); the fluid part is the L^2 norm of the velocity difference.
struct PicardResidual {
    double particle_part = 0.0;
    double fluid_part = 0.0;
    double combined = 0.0;  ///< fluid_part^2 + particle_part^2
    double relative = 0.0;  ///< combined / (|u|_2^2 + R^2)
};

struct StepReport {
    std::vector<PicardResidual> residuals;
    int iterations = 0;
    bool halved = false;
    /// max over k >= 1 of F(k+1)/F(k); 0 when fewer than two iterates.
    double max_contraction_ratio = 0.0;
};

struct CoupledState {
    ParticleEnsemble ensemble;
    FluidState fluid;
    long step = 0;
};

/// Integrand of the support-bound and |u|_inf quadratures at the start of a
/// sub-step, and the sub-step length.
struct SubstepSample {
    double dt = 0.0;
    double support_integrand = 0.0;
    double u_max = 0.0;
};

struct StepOutcome {
    ParticleEnsemble ensemble;
    FluidState fluid;
    StepReport report;
    RealVectorField force;  ///< grid force applied to the fluid (last sub-step)
    std::vector<SubstepSample> substeps;
};

struct StepControls {
    TransportOptions transport;
    /// Picard initial guess: previous converged u (warm) or zero.
    bool warm_start = true;
    /// Disable the dt/2 retry (used when measuring raw contraction).
    bool allow_retry = true;
};

/// One coupled step. Each Picard iterate takes a fluid guess u^(k-1), advances
/// the particles by Heun with u^n at the start and u^(k-1) at the predictor,
/// forms the trapezoidal coupling force from both Heun stages and integrates
/// the Stokes equations over dt. The iteration stops once the relative
/// residual drops to config.picard_tol; failing that, the step is redone as two
/// half steps, and a second failure throws SimulationAbort.
StepOutcome coupled_step(const ParticleEnsemble& ensemble, const FluidState& fluid, const SimConfig& config,
                         double dt, const StepControls& controls = {});

struct RunOptions {
    StepControls controls;
    /// Written after the final step when set.
    std::optional<std::string> checkpoint_path;
    /// Additional checkpoint after this many steps (restart tests).
    std::optional<long> checkpoint_at_step;
    std::optional<std::string> checkpoint_at_step_path;
    /// Where to dump the state on abort.
    std::optional<std::string> abort_dump_path;
    bool keep_step_reports = true;
    /// Accumulate the Stokes space-time report with this exponent.
    std::optional<double> spacetime_p;
    std::function<void(long step, const StepReport&)> on_step;
};

struct RunState {
    CoupledState state;
    /// Trapezoidal sums through the current time, minus the right-endpoint
    /// term pending_half_dt * integrand(current state).
    RunningQuadrature quadrature;
    double pending_half_dt = 0.0;
    int last_picard_iters = 0;
};

struct RunResult {
    std::vector<DiagnosticsRecord> records;
    std::vector<StepReport> step_reports;
    RunState final_state;
    std::optional<SpacetimeNormReport> spacetime;
};

RunResult run(const SimConfig& config, const RunOptions& options = {});
/// Continues from a restored state up to config.t_end.
RunResult resume(const SimConfig& config, RunState start, const RunOptions& options = {});

/// Transport switches implied by the coupling mode (pure_kinetic has no drag).
TransportOptions transport_for(CouplingMode mode, TransportOptions base = {});

}  // namespace csstokes
