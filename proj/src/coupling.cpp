#include "csstokes/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace csstokes {

CicStencil cic_stencil(const Grid& grid, const Vec3& position) {
    const double h = grid.spacing();
    int base[3];
    double frac[3];
    for (int c = 0; c < 3; ++c) {
        const double s = position[c] / h;
        const double fl = std::floor(s);
        frac[c] = s - fl;
        base[c] = static_cast<int>(fl);
    }
    CicStencil st{};
    for (int c = 0; c < 3; ++c) st.frac[c] = frac[c];
    int slot = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                const int i = ((base[0] + a) % grid.n + grid.n) % grid.n;
                const int j = ((base[1] + b) % grid.n + grid.n) % grid.n;
                const int k = ((base[2] + c) % grid.n + grid.n) % grid.n;
                st.node[slot] = grid.node_index(i, j, k);
                st.weight[slot] = (a ? frac[0] : 1.0 - frac[0]) * (b ? frac[1] : 1.0 - frac[1]) *
                                  (c ? frac[2] : 1.0 - frac[2]);
                ++slot;
            }
    return st;
}

RealField deposit_scalar(std::span<const Vec3> positions, std::span<const double> values, const Grid& grid) {
    if (positions.size() != values.size()) throw std::invalid_argument("deposit: length mismatch");
    RealField out(grid.nodes(), 0.0);
    const double inv_volume = 1.0 / grid.cell_volume();
    for (std::size_t p = 0; p < positions.size(); ++p) {
        const CicStencil st = cic_stencil(grid, positions[p]);
        for (int s = 0; s < 8; ++s) out[st.node[s]] += st.weight[s] * values[p] * inv_volume;
    }
    return out;
}

RealVectorField deposit_vector(std::span<const Vec3> positions, std::span<const Vec3> values, const Grid& grid) {
    if (positions.size() != values.size()) throw std::invalid_argument("deposit: length mismatch");
    RealVectorField out = make_real_field(grid);
    const double inv_volume = 1.0 / grid.cell_volume();
    for (std::size_t p = 0; p < positions.size(); ++p) {
        const CicStencil st = cic_stencil(grid, positions[p]);
        for (int s = 0; s < 8; ++s) {
            const double w = st.weight[s] * inv_volume;
            for (int c = 0; c < 3; ++c) out[c][st.node[s]] += w * values[p][c];
        }
    }
    return out;
}

DepositedMoments deposit(std::span<const Vec3> positions, std::span<const Vec3> velocities,
                         std::span<const double> weights, const Grid& grid) {
    if (positions.size() != velocities.size() || positions.size() != weights.size())
        throw std::invalid_argument("deposit: length mismatch");
    std::vector<Vec3> momenta(positions.size());
    for (std::size_t p = 0; p < positions.size(); ++p) momenta[p] = weights[p] * velocities[p];
    return DepositedMoments{grid, deposit_scalar(positions, weights, grid), deposit_vector(positions, momenta, grid)};
}

DepositedMoments deposit(const ParticleEnsemble& ensemble, const Grid& grid) {
    return deposit(ensemble.positions(), ensemble.velocities(), ensemble.weights(), grid);
}

namespace {

// Trilinear value as nested lerps, so a constant field comes back exactly.
double trilinear(const CicStencil& st, const RealField& f) {
    auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
    double e[4];
    for (int ab = 0; ab < 4; ++ab) e[ab] = lerp(f[st.node[2 * ab]], f[st.node[2 * ab + 1]], st.frac[2]);
    const double d0 = lerp(e[0], e[1], st.frac[1]);
    const double d1 = lerp(e[2], e[3], st.frac[1]);
    return lerp(d0, d1, st.frac[0]);
}

}  // namespace

std::vector<Vec3> interpolate(const Grid& grid, const RealVectorField& field, std::span<const Vec3> positions) {
    std::vector<Vec3> out(positions.size());
    for (std::size_t p = 0; p < positions.size(); ++p) {
        const CicStencil st = cic_stencil(grid, positions[p]);
        out[p] = {trilinear(st, field[0]), trilinear(st, field[1]), trilinear(st, field[2])};
    }
    return out;
}

std::vector<Vec3> interpolate(const FluidState& fluid, std::span<const Vec3> positions) {
    return interpolate(fluid.grid, fluid.velocity_grid, positions);
}

std::vector<double> interpolate_scalar(const Grid& grid, const RealField& field, std::span<const Vec3> positions) {
    std::vector<double> out(positions.size());
    for (std::size_t p = 0; p < positions.size(); ++p) {
        out[p] = trilinear(cic_stencil(grid, positions[p]), field);
    }
    return out;
}

RealVectorField coupling_force(const DepositedMoments& moments, const FluidState& fluid) {
    if (!(moments.grid == fluid.grid)) throw std::invalid_argument("coupling_force: moments and fluid grids differ");
    const Grid& grid = fluid.grid;
    RealVectorField g = make_real_field(grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t m = 0; m < grid.nodes(); ++m)
            g[c][m] = moments.j[c][m] - moments.rho[m] * fluid.velocity_grid[c][m];
    return g;
}

Vec3 integrate(const Grid& grid, const RealVectorField& field) {
    Vec3 sum;
    for (std::size_t m = 0; m < grid.nodes(); ++m)
        for (int c = 0; c < 3; ++c) sum[c] += field[c][m];
    return grid.cell_volume() * sum;
}

}  // namespace csstokes
