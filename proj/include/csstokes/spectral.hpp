#pragma once

#include <span>

#include "csstokes/model.hpp"

namespace csstokes {

/// Real-to-complex 3-D transform on a periodic grid, normalized so that
/// u(x) = sum_k u_hat(k) exp(i k.x). Plans are built with FFTW_ESTIMATE, which
/// keeps results reproducible from run to run.
class FourierTransform {
  public:
    explicit FourierTransform(int n);
    ~FourierTransform();
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    int n() const { return n_; }
    void forward(std::span<const double> grid_values, std::span<Complex> modes) const;
    void inverse(std::span<const Complex> modes, std::span<double> grid_values) const;

  private:
    int n_;
    double* real_buffer_;
    void* complex_buffer_;
    void* forward_plan_;
    void* inverse_plan_;
};

/// Shared transform for grid size n (created on first use).
const FourierTransform& transform_for(int n);

SpectralVectorField to_spectral(const Grid& grid, const RealVectorField& field);
RealVectorField to_grid(const Grid& grid, const SpectralVectorField& field);
ComplexField to_spectral(const Grid& grid, const RealField& field);
RealField to_grid(const Grid& grid, const ComplexField& field);

/// L^2 norm of a real vector field on the box (cell-volume quadrature).
double l2_norm(const Grid& grid, const RealVectorField& field);
/// L^p norm of |field| on the box.
double lp_norm(const Grid& grid, const RealVectorField& field, double p);
/// Max over nodes of |field|.
double max_norm(const RealVectorField& field);
/// max over nonzero modes of |k . u_hat| / (|k| |u_hat|).
double max_relative_divergence(const Grid& grid, const SpectralVectorField& field);

}  // namespace csstokes
