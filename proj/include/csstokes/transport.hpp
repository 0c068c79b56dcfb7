#pragma once

#include <span>
#include <vector>

#include "csstokes/alignment.hpp"
#include "csstokes/model.hpp"

namespace csstokes {

enum class DragIntegrator {
    heun,             ///< drag inside the Heun stages (default)
    exponential_split ///< exact relaxation V <- u + (V - u) e^{-dt/2} around a Heun alignment step
};

/// Switches for the characteristic right-hand side. Test harnesses turn off
/// individual terms; the default is the full model.
struct TransportOptions {
    bool alignment = true;
    bool drag = true;
    DragIntegrator integrator = DragIntegrator::heun;
};

struct ForceSample {
    Vec3 alignment;
    Vec3 drag;
};

struct CharacteristicRhs {
    std::vector<Vec3> dx;
    std::vector<Vec3> dv;
    std::vector<ForceSample> forces;
};

/// dX/dt = V, dV/dt = L_i + (u_i - V_i). `fluid_at_particles` must align with
/// the particles index-wise.
CharacteristicRhs rhs(const ParticleEnsemble& ensemble, std::span<const Vec3> fluid_at_particles,
                      const KernelSpec& kernel, const TransportOptions& options = {});

/// First Heun stage: forces at the start state and the Euler predictor.
/// Everything here is independent of the fluid iterate used in stage two.
struct HeunPredictor {
    ParticleEnsemble start;
    AlignmentFields start_fields;
    std::vector<Vec3> start_fluid;
    std::vector<Vec3> start_accel;
    std::vector<Vec3> predicted_positions;  ///< wrapped
    std::vector<Vec3> predicted_velocities;
    std::vector<Vec3> predicted_alignment;
    double dt = 0.0;
};

HeunPredictor heun_predict(const ParticleEnsemble& ensemble, std::span<const Vec3> start_fluid,
                           const KernelSpec& kernel, double dt, const TransportOptions& options = {});

/// Heun corrector using fluid samples at the predicted positions.
ParticleEnsemble heun_correct(const HeunPredictor& predictor, std::span<const Vec3> predicted_fluid,
                              const TransportOptions& options = {});

/// Midpoint (Heun) update of (X, V) through a fixed fluid field. Positions are
/// re-wrapped and weights are shared with the input. dt = 0 is the identity.
ParticleEnsemble step_rk2(const ParticleEnsemble& ensemble, const FluidState& fluid, const KernelSpec& kernel,
                          double dt, const TransportOptions& options = {});

/// Same update with the fluid identically zero (no grid needed).
ParticleEnsemble step_rk2_still(const ParticleEnsemble& ensemble, const KernelSpec& kernel, double dt,
                                const TransportOptions& options = {});

/// R = max_i |V_i|.
double support_radius(const ParticleEnsemble& ensemble);

/// Throws SimulationAbort when any position or velocity is not finite.
void require_finite(const ParticleEnsemble& ensemble, const char* where);

}  // namespace csstokes
