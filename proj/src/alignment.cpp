#include "csstokes/alignment.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace csstokes {

namespace {

double min_image_r2(const Vec3& a, const Vec3& b, double length) { return norm2(minimum_image(a, b, length)); }

}  // namespace

namespace {

struct Columns {
    std::vector<double> x, y, z, vx, vy, vz;
    explicit Columns(const ParticleEnsemble& e) {
        const std::size_t n = e.size();
        for (auto* col : {&x, &y, &z, &vx, &vy, &vz}) col->resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& p = e.positions()[i];
            const Vec3& v = e.velocities()[i];
            x[i] = p.x; y[i] = p.y; z[i] = p.z;
            vx[i] = v.x; vy[i] = v.y; vz[i] = v.z;
        }
    }
};

// Positions lie in [0, L), so one conditional shift gives the minimum image.
inline double wrap_delta(double d, double length, double half) {
    const double shift = std::fabs(d) > half ? length : 0.0;
    return d - std::copysign(shift, d);
}

template <bool Rational, bool WithDissipation>
AlignmentSums pair_sums(const ParticleEnsemble& ensemble, double constant) {
    const Columns c(ensemble);
    const double* m = ensemble.weights().data();
    const std::size_t n = ensemble.size();
    const double length = ensemble.box_length();
    const double half = 0.5 * length;

    AlignmentSums out{{std::vector<double>(n, 0.0), std::vector<Vec3>(n)}, 0.0};
    double dissipation = 0.0;
    const double* __restrict px = c.x.data();
    const double* __restrict py = c.y.data();
    const double* __restrict pz = c.z.data();
    const double* __restrict pu = c.vx.data();
    const double* __restrict pv = c.vy.data();
    const double* __restrict pw = c.vz.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = px[i], yi = py[i], zi = pz[i];
        const double ui = pu[i], vi = pv[i], wi = pw[i];
        double a = 0.0, bx = 0.0, by = 0.0, bz = 0.0, di = 0.0;
#pragma omp simd reduction(+ : a, bx, by, bz, di)
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = wrap_delta(xi - px[j], length, half);
            const double dy = wrap_delta(yi - py[j], length, half);
            const double dz = wrap_delta(zi - pz[j], length, half);
            const double phi = Rational ? 1.0 / (1.0 + (dx * dx + dy * dy + dz * dz)) : constant;
            const double w = m[j] * phi;
            a += w;
            bx += w * pu[j];
            by += w * pv[j];
            bz += w * pw[j];
            if constexpr (WithDissipation) {
                const double du = ui - pu[j], dv = vi - pv[j], dw = wi - pw[j];
                di += w * (du * du + dv * dv + dw * dw);
            }
        }
        out.fields.a[i] = a;
        out.fields.b[i] = {bx, by, bz};
        dissipation += m[i] * di;
    }
    out.dissipation = 0.5 * dissipation;
    return out;
}

}  // namespace

AlignmentFields compute_fields(const ParticleEnsemble& ensemble, const KernelSpec& kernel) {
    if (kernel.family == KernelFamily::rational_decay) return pair_sums<true, false>(ensemble, 0.0).fields;
    return pair_sums<false, false>(ensemble, kernel.c).fields;
}

AlignmentSums compute_fields_and_dissipation(const ParticleEnsemble& ensemble, const KernelSpec& kernel) {
    if (kernel.family == KernelFamily::rational_decay) return pair_sums<true, true>(ensemble, 0.0);
    return pair_sums<false, true>(ensemble, kernel.c);
}

AlignmentFields compute_fields_celllist(const ParticleEnsemble& ensemble, const KernelSpec& kernel,
                                        double cutoff) {
    const double length = ensemble.box_length();
    const bool truncated = std::isfinite(cutoff);
    if (!(cutoff > 0.0)) throw std::invalid_argument("compute_fields_celllist: cutoff must be positive");
    if (truncated && cutoff > 0.5 * length)
        throw std::invalid_argument("compute_fields_celllist: cutoff exceeds half the box (minimum-image ambiguity)");

    const auto x = ensemble.positions();
    const auto v = ensemble.velocities();
    const auto m = ensemble.weights();
    const std::size_t n = ensemble.size();

    const int cells = truncated ? std::max(1, static_cast<int>(std::floor(length / cutoff))) : 1;
    const double cell_size = length / cells;
    auto cell_coord = [&](double c) { return std::min(cells - 1, static_cast<int>(c / cell_size)); };
    auto cell_of = [&](const Vec3& p) {
        return (static_cast<std::size_t>(cell_coord(p.x)) * cells + cell_coord(p.y)) * cells + cell_coord(p.z);
    };

    // Counting sort keeps particle indices ascending within each cell.
    const std::size_t ncell = static_cast<std::size_t>(cells) * cells * cells;
    std::vector<std::size_t> start(ncell + 1, 0), order(n);
    std::vector<std::size_t> owner(n);
    for (std::size_t i = 0; i < n; ++i) {
        owner[i] = cell_of(x[i]);
        ++start[owner[i] + 1];
    }
    for (std::size_t c = 0; c < ncell; ++c) start[c + 1] += start[c];
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) order[fill[owner[i]]++] = i;
    }

    const double cutoff2 = cutoff * cutoff;
    AlignmentFields out{std::vector<double>(n, 0.0), std::vector<Vec3>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ci = owner[i];
        const int cx = static_cast<int>(ci / (static_cast<std::size_t>(cells) * cells));
        const int cy = static_cast<int>((ci / cells) % cells);
        const int cz = static_cast<int>(ci % cells);
        // With fewer than three cells per axis the 27-stencil revisits cells.
        std::set<std::size_t> neighbours;
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    const int nx = (cx + dx + cells) % cells;
                    const int ny = (cy + dy + cells) % cells;
                    const int nz = (cz + dz + cells) % cells;
                    neighbours.insert((static_cast<std::size_t>(nx) * cells + ny) * cells + nz);
                }
        double a = 0.0;
        Vec3 b;
        for (std::size_t c : neighbours) {
            for (std::size_t s = start[c]; s < start[c + 1]; ++s) {
                const std::size_t j = order[s];
                const double r2 = min_image_r2(x[i], x[j], length);
                if (truncated && r2 > cutoff2) continue;
                const double w = m[j] * kernel.of_r2(r2);
                a += w;
                b += w * v[j];
            }
        }
        out.a[i] = a;
        out.b[i] = b;
    }
    return out;
}

std::vector<Vec3> alignment_force(const AlignmentFields& fields, std::span<const Vec3> velocities) {
    if (fields.a.size() != velocities.size() || fields.b.size() != velocities.size())
        throw std::invalid_argument("alignment_force: fields and velocities differ in length");
    std::vector<Vec3> out(velocities.size());
    for (std::size_t i = 0; i < velocities.size(); ++i) out[i] = fields.b[i] - fields.a[i] * velocities[i];
    return out;
}

std::vector<Vec3> alignment_force_direct(const ParticleEnsemble& ensemble, const KernelSpec& kernel) {
    const auto x = ensemble.positions();
    const auto v = ensemble.velocities();
    const auto m = ensemble.weights();
    std::vector<Vec3> out(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        Vec3 acc;
        for (std::size_t j = 0; j < ensemble.size(); ++j) {
            const double phi = kernel(norm(minimum_image(x[i], x[j], ensemble.box_length())));
            acc += (m[j] * phi) * (v[j] - v[i]);
        }
        out[i] = acc;
    }
    return out;
}

}  // namespace csstokes
