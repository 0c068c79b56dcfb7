#pragma once

#include <span>
#include <string>
#include <vector>

#include "csstokes/alignment.hpp"
#include "csstokes/model.hpp"

namespace csstokes {

struct DiagnosticsRecord {
    double time = 0.0;
    double mass = 0.0;
    Vec3 momentum;  ///< sum m_i V_i + int u dx
    double energy_particles = 0.0;
    double energy_fluid = 0.0;
    double dissipation_viscous = 0.0;
    double dissipation_drag = 0.0;
    double dissipation_alignment = 0.0;
    double support_radius = 0.0;
    double support_bound = 0.0;
    double moment2 = 0.0;
    double moment3 = 0.0;
    double moment6 = 0.0;
    double velocity_variance = 0.0;
    int picard_iters = 0;

    // Not serialized to the time series.
    double u_max = 0.0;
    double u_max_integral = 0.0;
    double momentum_scale = 0.0;  ///< sum m_i |V_i| + int |u| dx

    double energy() const { return energy_particles + energy_fluid; }
    double dissipation() const { return dissipation_alignment + dissipation_viscous + dissipation_drag; }
};

/// Time integrals carried along a run. Both use the trapezoidal rule over
/// every step; `pending_*` is the half-weight of the latest integrand that is
/// committed once the following step starts.
struct RunningQuadrature {
    double support = 0.0;  ///< int (max_i |b_i| + |u|_inf)
    double u_max = 0.0;    ///< int |u|_inf
};

struct RecordInputs {
    double time = 0.0;
    double initial_support_radius = 0.0;
    RunningQuadrature committed;
    double pending_half_dt = 0.0;  ///< dt/2 weight given to this state's integrand
    bool drag_active = true;
    int picard_iters = 0;
};

/// All record quantities for one state. The alignment dissipation is the
/// symmetric double sum 1/2 sum_ij m_i m_j phi(d_ij) |V_i - V_j|^2.
DiagnosticsRecord make_record(const ParticleEnsemble& ensemble, const FluidState& fluid, const KernelSpec& kernel,
                              const RecordInputs& inputs);

/// 1/2 sum_ij m_i m_j phi(d_ij) |V_i - V_j|^2 by direct double sum.
double alignment_dissipation(const ParticleEnsemble& ensemble, const KernelSpec& kernel);

struct EnergyBudget {
    std::vector<double> residual;  ///< E(T) + int D - E(0)
    double max_normalized = 0.0;   ///< max |residual| / E(0)
};

/// Trapezoidal energy ledger over records at uniform spacing dt.
EnergyBudget energy_budget(std::span<const DiagnosticsRecord> records, double dt);

struct SupportBoundCheck {
    bool passed = true;
    std::vector<double> margins;  ///< bound + slack - R
};

/// R(t) <= R0 + int(|b|_inf + |u|_inf) + 10 dt (1 + bound) at every record.
SupportBoundCheck support_bound_check(std::span<const DiagnosticsRecord> records, double dt);

struct GrowthEnvelope {
    double constant = 0.0;  ///< smallest C with series(T) <= C (1 + T^p) e^{C T} at every T
    double log_slope = 0.0; ///< least-squares slope of log(series) against T
};

struct MomentGrowthReport {
    std::vector<double> moment3;
    std::vector<double> u_max_integral;
    GrowthEnvelope moment_envelope;  ///< exponent 3/2
    GrowthEnvelope fluid_envelope;   ///< exponent 7/2
    bool all_finite = true;
    bool moment_nonincreasing = true;
};

MomentGrowthReport moment_growth_monitor(std::span<const DiagnosticsRecord> records);

/// Smallest C >= 0 with value <= C (1 + T^power) e^{C T}.
double envelope_constant(double value, double time, double power);

struct WeightedNormEstimate {
    double value = 0.0;        ///< (sum_bins h^2 omega vol)^{1/2}
    double squared = 0.0;
    /// Same sum with each particle's pairing with itself removed,
    /// sum_bins (m_b^2 - sum_{i in b} m_i^2) omega / vol. Unbiased for the
    /// binned density when particles are independent samples.
    double squared_distinct_pairs = 0.0;
    int bins_per_axis = 0;
    std::size_t occupied_bins = 0;
    double mean_occupancy = 0.0;      ///< particles per occupied bin
    double expected_occupancy = 0.0;  ///< Poisson rate lambda matching mean_occupancy = lambda / (1 - e^-lambda)
    bool sparse_warning = false;      ///< expected count per occupied bin below one
    double bin_volume = 0.0;
};

/// Solves lambda / (1 - e^{-lambda}) = mean for lambda (0 when mean <= 1).
double poisson_rate_from_occupied_mean(double mean);

/// Biased 6-D histogram estimate of |f|_{L^2_omega}. Space bins tile the box
/// with x measured from its center; velocity bins tile [-R, R]^3 with R the
/// largest velocity component (1 when all particles are at rest). omega is
/// evaluated at bin centers.
WeightedNormEstimate weighted_norm_surrogate(const ParticleEnsemble& ensemble, const WeightSpec& weight,
                                             int bins_per_axis);

struct FlockingReport {
    std::vector<double> variance;
    double decay_rate = 0.0;  ///< -slope of log variance over the final half
    bool rate_defined = false;
};

FlockingReport flocking_metrics(std::span<const DiagnosticsRecord> records);

/// max_k |P(t_k) - P(0)| / scale, scale = max(|P(0)|, momentum_scale(0)).
double momentum_drift(std::span<const DiagnosticsRecord> records);

}  // namespace csstokes
