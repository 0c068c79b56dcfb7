#include "csstokes/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace csstokes {

FourierTransform::FourierTransform(int n) : n_(n) {
    const std::size_t nodes = static_cast<std::size_t>(n) * n * n;
    const std::size_t modes = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    real_buffer_ = fftw_alloc_real(nodes);
    auto* cbuf = fftw_alloc_complex(modes);
    complex_buffer_ = cbuf;
    forward_plan_ = fftw_plan_dft_r2c_3d(n, n, n, real_buffer_, cbuf, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_3d(n, n, n, cbuf, real_buffer_, FFTW_ESTIMATE);
}

FourierTransform::~FourierTransform() {
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    fftw_free(real_buffer_);
    fftw_free(complex_buffer_);
}

void FourierTransform::forward(std::span<const double> grid_values, std::span<Complex> modes) const {
    std::copy(grid_values.begin(), grid_values.end(), real_buffer_);
    fftw_execute(static_cast<fftw_plan>(forward_plan_));
    const double scale = 1.0 / (static_cast<double>(n_) * n_ * n_);
    const auto* out = static_cast<const fftw_complex*>(complex_buffer_);
    for (std::size_t m = 0; m < modes.size(); ++m) modes[m] = Complex(out[m][0] * scale, out[m][1] * scale);
}

void FourierTransform::inverse(std::span<const Complex> modes, std::span<double> grid_values) const {
    auto* buf = static_cast<fftw_complex*>(complex_buffer_);
    for (std::size_t m = 0; m < modes.size(); ++m) {
        buf[m][0] = modes[m].real();
        buf[m][1] = modes[m].imag();
    }
    // c2r overwrites its input, which is why the modes are staged in a buffer.
    fftw_execute(static_cast<fftw_plan>(inverse_plan_));
    std::copy(real_buffer_, real_buffer_ + grid_values.size(), grid_values.begin());
}

const FourierTransform& transform_for(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<FourierTransform>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FourierTransform>(n);
    return *slot;
}

ComplexField to_spectral(const Grid& grid, const RealField& field) {
    ComplexField out(grid.modes());
    transform_for(grid.n).forward(field, out);
    return out;
}

RealField to_grid(const Grid& grid, const ComplexField& field) {
    RealField out(grid.nodes());
    transform_for(grid.n).inverse(field, out);
    return out;
}

SpectralVectorField to_spectral(const Grid& grid, const RealVectorField& field) {
    return {to_spectral(grid, field[0]), to_spectral(grid, field[1]), to_spectral(grid, field[2])};
}

RealVectorField to_grid(const Grid& grid, const SpectralVectorField& field) {
    return {to_grid(grid, field[0]), to_grid(grid, field[1]), to_grid(grid, field[2])};
}

double l2_norm(const Grid& grid, const RealVectorField& field) {
    double sum = 0.0;
    for (std::size_t m = 0; m < grid.nodes(); ++m)
        sum += field[0][m] * field[0][m] + field[1][m] * field[1][m] + field[2][m] * field[2][m];
    return std::sqrt(sum * grid.cell_volume());
}

double lp_norm(const Grid& grid, const RealVectorField& field, double p) {
    double sum = 0.0;
    for (std::size_t m = 0; m < grid.nodes(); ++m) {
        const double mag2 = field[0][m] * field[0][m] + field[1][m] * field[1][m] + field[2][m] * field[2][m];
        sum += std::pow(mag2, 0.5 * p);
    }
    return std::pow(sum * grid.cell_volume(), 1.0 / p);
}

double max_norm(const RealVectorField& field) {
    double best = 0.0;
    for (std::size_t m = 0; m < field[0].size(); ++m) {
        const double mag2 = field[0][m] * field[0][m] + field[1][m] * field[1][m] + field[2][m] * field[2][m];
        best = std::max(best, mag2);
    }
    return std::sqrt(best);
}

double max_relative_divergence(const Grid& grid, const SpectralVectorField& field) {
    double worst = 0.0;
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.half(); ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                const std::size_t m = grid.mode_index(i, j, k);
                const Complex u[3] = {field[0][m], field[1][m], field[2][m]};
                const double mag = std::sqrt(std::norm(u[0]) + std::norm(u[1]) + std::norm(u[2]));
                if (mag == 0.0) continue;
                const Vec3 kv = grid.wavevector(i, j, k);
                const Complex div = kv.x * u[0] + kv.y * u[1] + kv.z * u[2];
                worst = std::max(worst, std::abs(div) / (norm(kv) * mag));
            }
    return worst;
}

}  // namespace csstokes
