#pragma once

#include <string>

#include "csstokes/model.hpp"

namespace csstokes {

enum class VelocityPreset { at_rest, uniform_ball, smooth_ball, two_cluster };

/// Sampling recipe for the initial particle distribution. All presets have
/// compactly supported velocities.
struct ParticleInitSpec {
    VelocityPreset preset = VelocityPreset::uniform_ball;
    /// Ball radius R0 for the ball presets, cluster speed for two_cluster.
    double radius = 1.0;

    /// Parses "at_rest", "uniform_ball:R0", "smooth_ball:R0", "two_cluster:speed".
    static ParticleInitSpec parse(const std::string& text);
};

enum class FluidPreset { zero, single_mode, taylor_green };

/// Initial fluid field. single_mode is amplitude * sin(k.x) with integer
/// wavenumbers; taylor_green is the classical vortex on the first box mode.
struct FluidInitSpec {
    FluidPreset preset = FluidPreset::zero;
    int wavenumber[3] = {1, 0, 0};
    Vec3 amplitude{0.0, 1.0, 0.0};
    double scale = 1.0;

    /// Parses "zero", "taylor_green[:A]", "mode:m1,m2,m3:a1,a2,a3".
    static FluidInitSpec parse(const std::string& text);
};

ParticleEnsemble init_ensemble(const SimConfig& config, const ParticleInitSpec& spec);
ParticleEnsemble init_ensemble(const SimConfig& config);

/// Samples the preset on the grid and projects it onto divergence-free fields.
FluidState init_fluid(const SimConfig& config, const FluidInitSpec& spec);
FluidState init_fluid(const SimConfig& config);

}  // namespace csstokes
