#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csstokes/vec3.hpp"

namespace csstokes {

/// Raised for malformed configuration or initial-data descriptors.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a run must stop (non-finite state, Picard failure). Carries the
/// path of the state dump if one was written.
class SimulationAbort : public std::runtime_error {
  public:
    explicit SimulationAbort(const std::string& what, std::string dump_path = {})
        : std::runtime_error(what), dump_path_(std::move(dump_path)) {}
    const std::string& dump_path() const { return dump_path_; }
    void set_dump_path(std::string p) { dump_path_ = std::move(p); }

  private:
    std::string dump_path_;
};

enum class KernelFamily { rational_decay, constant };

/// Communication kernel phi(r). rational_decay is 1/(1+r^2); constant is c.
struct KernelSpec {
    KernelFamily family = KernelFamily::rational_decay;
    double c = 1.0;

    double operator()(double r) const { return of_r2(r * r); }
    double of_r2(double r2) const {
        return family == KernelFamily::constant ? c : 1.0 / (1.0 + r2);
    }
    double derivative(double r) const;
    /// Smallest r with phi(r) <= eps, or +inf when phi never drops that low.
    double cutoff_for(double eps) const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Dense-scan check that phi is positive, nonincreasing, and bounded with its
/// derivative by 1. Throws ConfigError otherwise.
void validate_kernel(const KernelSpec& kernel);

struct KernelScan {
    double max_phi = 0.0;
    double max_abs_derivative = 0.0;
    double argmax_abs_derivative = 0.0;
    bool positive = true;
    bool nonincreasing = true;
};
KernelScan scan_kernel(const KernelSpec& kernel, double r_max = 50.0, std::size_t samples = 500001);

enum class CouplingMode { pure_kinetic, frozen_fluid, full_coupling };

std::string to_string(CouplingMode mode);
std::string to_string(KernelFamily family);

/// Exponents of the phase-space weight (1+v^2)^(2a+1) (1+x^2+v^2)^(3g).
struct WeightSpec {
    double alpha = 1.5;
    double gamma = 1.5;

    double omega(double x2, double v2) const;
    double lambda(double v2) const;

    friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

struct SimConfig {
    double box_length = 0.0;
    int grid_n = 0;
    int particle_count = 0;
    double total_mass = 1.0;
    double dt = 0.0;
    double t_end = 0.0;
    KernelSpec kernel;
    double picard_tol = 1e-10;
    int picard_max_iter = 25;
    int output_every = 1;
    std::uint64_t rng_seed = 0;
    CouplingMode mode = CouplingMode::full_coupling;
    std::string init_particles = "uniform_ball:1";
    std::string init_fluid = "zero";
    WeightSpec weights;
    double q = 6.0;

    /// Throws ConfigError naming the first violated field.
    void validate() const;
    long total_steps() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Periodic cube of grid_n^3 collocation nodes with spacing L/n.
struct Grid {
    int n = 0;
    double length = 0.0;

    double spacing() const { return length / n; }
    double cell_volume() const { double h = spacing(); return h * h * h; }
    std::size_t nodes() const { return static_cast<std::size_t>(n) * n * n; }
    int half() const { return n / 2 + 1; }
    std::size_t modes() const { return static_cast<std::size_t>(n) * n * half(); }
    std::size_t node_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    std::size_t mode_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n + j) * half() + k;
    }
    /// Signed integer wavenumber of storage index i along a full axis.
    int signed_mode(int i) const { return i <= n / 2 ? i : i - n; }
    Vec3 wavevector(int i, int j, int k) const;
    /// Multiplicity of a half-complex mode in a full-spectrum sum.
    double mode_multiplicity(int k) const { return (k == 0 || 2 * k == n) ? 1.0 : 2.0; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

using Complex = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<Complex>;
using RealVectorField = std::array<RealField, 3>;
using SpectralVectorField = std::array<ComplexField, 3>;

RealVectorField make_real_field(const Grid& grid);
SpectralVectorField make_spectral_field(const Grid& grid);

/// Wraps one coordinate into [0, L). Idempotent.
double wrap_coordinate(double x, double length);
Vec3 wrap_position(const Vec3& p, double length);
/// Minimum-image displacement a - b on the periodic box.
Vec3 minimum_image(const Vec3& a, const Vec3& b, double length);

/// Empirical measure: positions in [0,L)^3, velocities, and fixed weights.
/// The weights are shared immutably between all ensembles derived from the
/// same initial data, so no step can modify them.
class ParticleEnsemble {
  public:
    ParticleEnsemble() = default;
    ParticleEnsemble(double box_length, std::vector<Vec3> positions, std::vector<Vec3> velocities,
                     std::vector<double> weights);

    std::size_t size() const { return positions_.size(); }
    bool empty() const { return positions_.empty(); }
    double box_length() const { return box_length_; }
    double total_mass() const { return total_mass_; }
    double initial_support_radius() const { return initial_support_radius_; }

    std::span<const Vec3> positions() const { return positions_; }
    std::span<const Vec3> velocities() const { return velocities_; }
    std::span<const double> weights() const { return *weights_; }
    const std::shared_ptr<const std::vector<double>>& shared_weights() const { return weights_; }

    /// New ensemble carrying the same weights and R0 with a replaced state.
    /// Positions are wrapped.
    ParticleEnsemble with_state(std::vector<Vec3> positions, std::vector<Vec3> velocities) const;

    /// Restores an ensemble with an explicit R0 (checkpoint reload).
    static ParticleEnsemble restore(double box_length, std::vector<Vec3> positions,
                                    std::vector<Vec3> velocities, std::vector<double> weights,
                                    double initial_support_radius);

  private:
    double box_length_ = 1.0;
    std::vector<Vec3> positions_;
    std::vector<Vec3> velocities_;
    std::shared_ptr<const std::vector<double>> weights_ = std::make_shared<const std::vector<double>>();
    double total_mass_ = 0.0;
    double initial_support_radius_ = 0.0;
};

/// Periodic fluid velocity: grid values, matching Fourier coefficients, and the
/// pressure gradient left over from the last projection.
struct FluidState {
    Grid grid;
    RealVectorField velocity_grid;
    SpectralVectorField velocity_spectral;
    RealVectorField pressure_gradient_grid;

    static FluidState zero(const Grid& grid);
    /// Recomputes velocity_grid from velocity_spectral.
    void sync_grid();
    /// Recomputes velocity_spectral from velocity_grid.
    void sync_spectral();
};

}  // namespace csstokes
