#include "csstokes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "csstokes/coupling.hpp"
#include "csstokes/spectral.hpp"
#include "csstokes/stokes.hpp"

namespace csstokes {

DiagnosticsRecord make_record(const ParticleEnsemble& ensemble, const FluidState& fluid, const KernelSpec& kernel,
                              const RecordInputs& inputs) {
    const auto x = ensemble.positions();
    const auto v = ensemble.velocities();
    const auto m = ensemble.weights();
    const std::size_t n = ensemble.size();

    DiagnosticsRecord r;
    r.time = inputs.time;
    r.picard_iters = inputs.picard_iters;

    const AlignmentSums sums = compute_fields_and_dissipation(ensemble, kernel);
    double max_b2 = 0.0;
    for (const Vec3& b : sums.fields.b) max_b2 = std::max(max_b2, norm2(b));
    r.dissipation_alignment = sums.dissipation;

    Vec3 momentum;
    double mass = 0.0, kinetic = 0.0, speed_sum = 0.0;
    double m2 = 0.0, m3 = 0.0, m6 = 0.0, radius2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s2 = norm2(v[i]);
        mass += m[i];
        momentum += m[i] * v[i];
        kinetic += m[i] * s2;
        speed_sum += m[i] * std::sqrt(s2);
        m2 += m[i] * (1.0 + s2);
        m3 += m[i] * std::pow(1.0 + s2, 1.5);
        m6 += m[i] * std::pow(1.0 + s2, 3.0);
        radius2 = std::max(radius2, s2);
    }
    r.mass = mass;
    r.energy_particles = 0.5 * kinetic;
    r.moment2 = m2;
    r.moment3 = m3;
    r.moment6 = m6;
    r.support_radius = std::sqrt(radius2);

    const Vec3 mean_velocity = mass > 0.0 ? (1.0 / mass) * momentum : Vec3{};
    double variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) variance += m[i] * norm2(v[i] - mean_velocity);
    r.velocity_variance = variance;

    const Grid& grid = fluid.grid;
    const Vec3 fluid_momentum = integrate(grid, fluid.velocity_grid);
    double fluid_abs = 0.0, fluid_sq = 0.0;
    for (std::size_t q = 0; q < grid.nodes(); ++q) {
        const double s2 = fluid.velocity_grid[0][q] * fluid.velocity_grid[0][q] +
                          fluid.velocity_grid[1][q] * fluid.velocity_grid[1][q] +
                          fluid.velocity_grid[2][q] * fluid.velocity_grid[2][q];
        fluid_sq += s2;
        fluid_abs += std::sqrt(s2);
    }
    r.momentum = momentum + fluid_momentum;
    r.momentum_scale = speed_sum + grid.cell_volume() * fluid_abs;
    r.energy_fluid = 0.5 * grid.cell_volume() * fluid_sq;
    r.dissipation_viscous = viscous_dissipation(fluid);

    if (inputs.drag_active) {
        const std::vector<Vec3> u = interpolate(fluid, x);
        double drag = 0.0;
        for (std::size_t i = 0; i < n; ++i) drag += m[i] * norm2(u[i] - v[i]);
        r.dissipation_drag = drag;
    }

    r.u_max = max_norm(fluid.velocity_grid);
    const double integrand = std::sqrt(max_b2) + r.u_max;
    r.support_bound = inputs.initial_support_radius + inputs.committed.support + inputs.pending_half_dt * integrand;
    r.u_max_integral = inputs.committed.u_max + inputs.pending_half_dt * r.u_max;
    return r;
}

double alignment_dissipation(const ParticleEnsemble& ensemble, const KernelSpec& kernel) {
    const auto x = ensemble.positions();
    const auto v = ensemble.velocities();
    const auto m = ensemble.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        for (std::size_t j = 0; j < ensemble.size(); ++j)
            sum += m[i] * m[j] * kernel(norm(minimum_image(x[i], x[j], ensemble.box_length()))) *
                   norm2(v[i] - v[j]);
    return 0.5 * sum;
}

namespace {

void require_uniform(std::span<const DiagnosticsRecord> records, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("record spacing must be positive");
    for (std::size_t k = 1; k < records.size(); ++k) {
        const double gap = records[k].time - records[k - 1].time;
        if (std::abs(gap - dt) > 1e-9 * std::max(1.0, dt))
            throw std::invalid_argument("records are not uniformly spaced at the given dt");
    }
}

}  // namespace

EnergyBudget energy_budget(std::span<const DiagnosticsRecord> records, double dt) {
    if (records.size() < 2) throw std::invalid_argument("energy_budget: needs at least 2 records");
    require_uniform(records, dt);
    EnergyBudget out;
    const double e0 = records.front().energy();
    double integral = 0.0;
    out.residual.reserve(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (k > 0) integral += 0.5 * dt * (records[k - 1].dissipation() + records[k].dissipation());
        const double res = records[k].energy() + integral - e0;
        out.residual.push_back(res);
        if (e0 > 0.0) out.max_normalized = std::max(out.max_normalized, std::abs(res) / e0);
    }
    return out;
}

SupportBoundCheck support_bound_check(std::span<const DiagnosticsRecord> records, double dt) {
    SupportBoundCheck out;
    for (const auto& r : records) {
        const double slack = 10.0 * dt * (1.0 + r.support_bound);
        const double margin = r.support_bound + slack - r.support_radius;
        out.margins.push_back(margin);
        if (!(margin >= 0.0)) out.passed = false;
    }
    return out;
}

double envelope_constant(double value, double time, double power) {
    if (!(value > 0.0)) return 0.0;
    const double poly = 1.0 + std::pow(time, power);
    auto envelope = [&](double c) { return c * poly * std::exp(c * time); };
    double lo = 0.0, hi = std::max(1.0, value);
    while (envelope(hi) < value) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (envelope(mid) < value ? lo : hi) = mid;
    }
    return hi;
}

namespace {

double log_slope(const std::vector<double>& t, const std::vector<double>& y) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    int n = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(y[k] > 0.0)) continue;
        const double ly = std::log(y[k]);
        st += t[k];
        sy += ly;
        stt += t[k] * t[k];
        sty += t[k] * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = n * stt - st * st;
    return den > 0.0 ? (n * sty - st * sy) / den : 0.0;
}

GrowthEnvelope fit_envelope(const std::vector<double>& t, const std::vector<double>& y, double power) {
    GrowthEnvelope env;
    for (std::size_t k = 0; k < t.size(); ++k) env.constant = std::max(env.constant, envelope_constant(y[k], t[k], power));
    env.log_slope = log_slope(t, y);
    return env;
}

}  // namespace

MomentGrowthReport moment_growth_monitor(std::span<const DiagnosticsRecord> records) {
    MomentGrowthReport out;
    std::vector<double> t;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        t.push_back(r.time);
        out.moment3.push_back(r.moment3);
        out.u_max_integral.push_back(r.u_max_integral);
        if (!std::isfinite(r.moment3) || !std::isfinite(r.u_max_integral)) out.all_finite = false;
        if (k > 0 && r.moment3 > records[k - 1].moment3) out.moment_nonincreasing = false;
    }
    out.moment_envelope = fit_envelope(t, out.moment3, 1.5);
    out.fluid_envelope = fit_envelope(t, out.u_max_integral, 3.5);
    if (!std::isfinite(out.moment_envelope.constant) || !std::isfinite(out.fluid_envelope.constant))
        out.all_finite = false;
    return out;
}

double poisson_rate_from_occupied_mean(double mean) {
    if (!(mean > 1.0)) return 0.0;
    // lambda / (1 - e^{-lambda}) increases from 1 at lambda = 0.
    double lo = 0.0, hi = mean;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid / -std::expm1(-mid) < mean ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

WeightedNormEstimate weighted_norm_surrogate(const ParticleEnsemble& ensemble, const WeightSpec& weight,
                                             int bins_per_axis) {
    if (bins_per_axis < 1) throw std::invalid_argument("weighted_norm_surrogate: bins per axis must be >= 1");
    const int b = bins_per_axis;
    const double length = ensemble.box_length();
    double vext = 0.0;
    for (const Vec3& v : ensemble.velocities()) vext = std::max(vext, std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)}));
    if (!(vext > 0.0)) vext = 1.0;
    const double dx = length / b;
    const double dv = 2.0 * vext / b;

    auto bin = [b](double s) { return std::clamp(static_cast<int>(std::floor(s)), 0, b - 1); };
    using Key = std::tuple<int, int, int, int, int, int>;
    std::map<Key, std::pair<double, double>> mass;  // (sum m, sum m^2)
    const auto x = ensemble.positions();
    const auto v = ensemble.velocities();
    const auto m = ensemble.weights();
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const Key key{bin(x[i].x / dx), bin(x[i].y / dx), bin(x[i].z / dx), bin((v[i].x + vext) / dv),
                      bin((v[i].y + vext) / dv), bin((v[i].z + vext) / dv)};
        auto& cell = mass[key];
        cell.first += m[i];
        cell.second += m[i] * m[i];
    }

    WeightedNormEstimate out;
    out.bins_per_axis = b;
    out.bin_volume = std::pow(dx, 3) * std::pow(dv, 3);
    out.occupied_bins = mass.size();
    double sum = 0.0, pairs = 0.0;
    for (const auto& [key, cell] : mass) {
        const auto [mb, m2] = cell;
        const auto [i, j, k, p, q, r] = key;
        const Vec3 xc{(i + 0.5) * dx - 0.5 * length, (j + 0.5) * dx - 0.5 * length, (k + 0.5) * dx - 0.5 * length};
        const Vec3 vc{(p + 0.5) * dv - vext, (q + 0.5) * dv - vext, (r + 0.5) * dv - vext};
        const double w = weight.omega(norm2(xc), norm2(vc)) / out.bin_volume;
        sum += mb * mb * w;
        pairs += (mb * mb - m2) * w;
    }
    out.squared = sum;
    out.squared_distinct_pairs = pairs;
    out.value = std::sqrt(sum);
    out.mean_occupancy = out.occupied_bins ? static_cast<double>(ensemble.size()) / out.occupied_bins : 0.0;
    out.expected_occupancy = poisson_rate_from_occupied_mean(out.mean_occupancy);
    out.sparse_warning = out.expected_occupancy < 1.0;
    return out;
}

FlockingReport flocking_metrics(std::span<const DiagnosticsRecord> records) {
    FlockingReport out;
    std::vector<double> t, y;
    const double t_end = records.empty() ? 0.0 : records.back().time;
    const double t_start = records.empty() ? 0.0 : records.front().time;
    const double half = 0.5 * (t_start + t_end);
    for (const auto& r : records) {
        out.variance.push_back(r.velocity_variance);
        if (r.time >= half && r.velocity_variance > 0.0) {
            t.push_back(r.time);
            y.push_back(r.velocity_variance);
        }
    }
    if (t.size() >= 2) {
        out.decay_rate = -log_slope(t, y);
        out.rate_defined = true;
    }
    return out;
}

double momentum_drift(std::span<const DiagnosticsRecord> records) {
    if (records.empty()) return 0.0;
    const Vec3 p0 = records.front().momentum;
    const double scale = std::max(norm(p0), records.front().momentum_scale);
    double worst = 0.0;
    for (const auto& r : records) worst = std::max(worst, norm(r.momentum - p0));
    return scale > 0.0 ? worst / scale : worst;
}

}  // namespace csstokes
