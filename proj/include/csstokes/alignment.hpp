#pragma once

#include <span>
#include <vector>

#include "csstokes/model.hpp"

namespace csstokes {

/// Kernel-weighted local mass a_i and momentum b_i at each particle.
struct AlignmentFields {
    std::vector<double> a;
    std::vector<Vec3> b;
};

/// Reference O(N^2) evaluation with minimum-image distances. The self term is
/// included; the j-loop runs in index order so results are reproducible.
AlignmentFields compute_fields(const ParticleEnsemble& ensemble, const KernelSpec& kernel);

/// Fields together with the alignment dissipation
/// 1/2 sum_ij m_i m_j phi(d_ij) |V_i - V_j|^2, accumulated in the same pass.
struct AlignmentSums {
    AlignmentFields fields;
    double dissipation = 0.0;
};
AlignmentSums compute_fields_and_dissipation(const ParticleEnsemble& ensemble, const KernelSpec& kernel);

/// Same contract with phi truncated to zero beyond `cutoff`. Requires
/// cutoff <= L/2, or cutoff = +inf (no truncation). The truncation error on
/// a_i is at most phi(cutoff) * M.
AlignmentFields compute_fields_celllist(const ParticleEnsemble& ensemble, const KernelSpec& kernel,
                                        double cutoff);

/// L_i = b_i - a_i V_i.
std::vector<Vec3> alignment_force(const AlignmentFields& fields, std::span<const Vec3> velocities);

/// Direct double sum sum_j m_j phi(d_ij) (V_j - V_i). Test oracle.
std::vector<Vec3> alignment_force_direct(const ParticleEnsemble& ensemble, const KernelSpec& kernel);

}  // namespace csstokes
