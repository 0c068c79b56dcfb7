#pragma once

#include <span>
#include <vector>

#include "csstokes/model.hpp"

namespace csstokes {

/// Grid moments rho = int f dv and j = int f v dv, as densities (per volume).
struct DepositedMoments {
    Grid grid;
    RealField rho;
    RealVectorField j;
};

/// Cloud-in-cell stencil of one position: 8 node indices and trilinear weights.
struct CicStencil {
    std::size_t node[8];  ///< slot 4a + 2b + c is the corner offset (a, b, c)
    double weight[8];
    double frac[3];  ///< offset of the position inside its cell, in [0, 1)
};
CicStencil cic_stencil(const Grid& grid, const Vec3& position);

/// Trilinear assignment of m_i and m_i V_i to the surrounding nodes.
DepositedMoments deposit(const ParticleEnsemble& ensemble, const Grid& grid);
DepositedMoments deposit(std::span<const Vec3> positions, std::span<const Vec3> velocities,
                         std::span<const double> weights, const Grid& grid);
/// Deposits one scalar per particle, normalized by the cell volume.
RealField deposit_scalar(std::span<const Vec3> positions, std::span<const double> values, const Grid& grid);
/// Deposits one vector per particle, normalized by the cell volume.
RealVectorField deposit_vector(std::span<const Vec3> positions, std::span<const Vec3> values, const Grid& grid);

/// Trilinear interpolation with the deposit stencil (its adjoint).
std::vector<Vec3> interpolate(const Grid& grid, const RealVectorField& field, std::span<const Vec3> positions);
std::vector<Vec3> interpolate(const FluidState& fluid, std::span<const Vec3> positions);
std::vector<double> interpolate_scalar(const Grid& grid, const RealField& field, std::span<const Vec3> positions);

/// Nodewise g = j - rho u.
RealVectorField coupling_force(const DepositedMoments& moments, const FluidState& fluid);

/// Cell-volume weighted sum of a grid vector field.
Vec3 integrate(const Grid& grid, const RealVectorField& field);

}  // namespace csstokes
