#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "csstokes/model.hpp"

namespace csstokes {

using ComplexVec3 = std::array<Complex, 3>;

/// Fourier coefficients of the coupling force on the fluid grid.
struct SpectralForce {
    Grid grid;
    SpectralVectorField coefficients;

    static SpectralForce from_grid(const Grid& grid, const RealVectorField& force);
    static SpectralForce zero(const Grid& grid);
};

/// Divergence-free part g - k (k.g)/|k|^2 of one mode. k must be nonzero.
ComplexVec3 leray_project(const Vec3& k, const ComplexVec3& g_hat);

/// Applies the projection to every nonzero mode; the mean mode is untouched
/// and modes with an index at n/2 are zeroed.
void project_field(const Grid& grid, SpectralVectorField& field);

/// One exact integrating-factor step of u_t + grad P = Lap u + g with g frozen:
/// u_k <- e^{-|k|^2 dt} u_k + (1 - e^{-|k|^2 dt})/|k|^2 P_k g_k for k != 0 and
/// u_0 <- u_0 + dt g_0. Also stores the pressure gradient (I - P_k) g_k.
/// Modes with an index at n/2 are filtered from u, g and the pressure gradient.
/// dt = 0 returns the input unchanged apart from the pressure gradient.
FluidState stokes_step(const FluidState& fluid, const SpectralForce& force, double dt);

/// int |grad u|^2 dx over the box, by Parseval.
double viscous_dissipation(const FluidState& fluid);
/// 0.5 int |u|^2 dx over the box, by Parseval.
double spectral_energy(const FluidState& fluid);
/// |u|_{H^2} = (int |(1 - Lap) u|^2)^{1/2}.
double h2_norm(const FluidState& fluid);

/// Full Hessian magnitude |grad^2 u| at every node (Frobenius over i,j,l).
RealField hessian_magnitude(const FluidState& fluid);

/// Space-time norms of the Stokes estimate. lhs_* terms are L^2-in-time of
/// L^p-in-space norms; the ratio (lhs sum)/(rhs sum) is monitored, not bounded.
struct SpacetimeNormReport {
    double p = 2.0;
    double time_derivative = 0.0;
    double hessian = 0.0;
    double pressure_gradient = 0.0;
    double initial_h2 = 0.0;
    double forcing = 0.0;
    std::size_t states = 0;

    double lhs() const { return time_derivative + hessian + pressure_gradient; }
    double rhs() const { return initial_h2 + forcing; }
    double ratio() const { return rhs() > 0.0 ? lhs() / rhs() : (lhs() > 0.0 ? INFINITY : 0.0); }
};

/// Streaming evaluation of the space-time report over uniformly spaced states.
/// u_t uses forward differences on each interval; the pressure gradient and
/// forcing attached to a state are those of the step that produced it.
class SpacetimeNormAccumulator {
  public:
    SpacetimeNormAccumulator(double dt, double p);
    /// `force` is the grid force applied in the step ending at `state`
    /// (ignored for the first state).
    void push(const FluidState& state, const RealVectorField& force);
    SpacetimeNormReport report() const;
    std::size_t count() const { return count_; }

  private:
    double dt_;
    double p_;
    std::size_t count_ = 0;
    FluidState previous_;
    double prev_hessian_sq_ = 0.0;
    double sum_ut_ = 0.0;
    double sum_hessian_ = 0.0;
    double sum_pressure_ = 0.0;
    double sum_force_ = 0.0;
    double initial_h2_ = 0.0;
};

/// Batch form over a stored history. forces[n] belongs to the step ending at
/// states[n]; forces may be empty (treated as zero). Requires >= 2 states.
SpacetimeNormReport spacetime_norm_report(const std::vector<FluidState>& states,
                                          const std::vector<RealVectorField>& forces, double dt, double p);

}  // namespace csstokes
