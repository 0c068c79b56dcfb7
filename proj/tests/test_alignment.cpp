#include <cmath>
#include <random>

#include "doctest.h"
#include "csstokes/alignment.hpp"
#include "csstokes/diagnostics.hpp"
#include "support.hpp"

using namespace csstokes;
using namespace csstokes::testing;

namespace {

const KernelSpec unit_constant{KernelFamily::constant, 1.0};

double max_rel_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err = std::max(err, norm(a[i] - b[i]));
        scale = std::max(scale, norm(b[i]));
    }
    return err / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("two coincident particles, phi(0) = 1") {
    const Vec3 v1{1, 2, 3}, v2{-1, 0, 5};
    const ParticleEnsemble e(10.0, {{1, 1, 1}, {1, 1, 1}}, {v1, v2}, {0.5, 0.5});
    const AlignmentFields f = compute_fields(e, KernelSpec{});
    for (int i = 0; i < 2; ++i) {
        CHECK(f.a[i] == 1.0);
        CHECK(f.b[i].x == doctest::Approx(0.0));
        CHECK(f.b[i].y == doctest::Approx(1.0));
        CHECK(f.b[i].z == doctest::Approx(4.0));
    }
}

TEST_CASE("singleton: a = 1, b = V, L = 0") {
    const Vec3 v{0.3, -0.2, 0.9};
    const ParticleEnsemble e(4.0, {{2, 2, 2}}, {v}, {1.0});
    const AlignmentFields f = compute_fields(e, KernelSpec{});
    CHECK(f.a[0] == 1.0);
    CHECK(f.b[0] == v);
    CHECK(norm(alignment_force(f, e.velocities())[0]) == 0.0);
}

TEST_CASE("three particles at unit spacing: middle a = 2/3") {
    const double w = 1.0 / 3.0;
    const ParticleEnsemble e(100.0, {{49, 50, 50}, {50, 50, 50}, {51, 50, 50}}, {{}, {}, {}}, {w, w, w});
    const AlignmentFields f = compute_fields(e, KernelSpec{});
    CHECK(f.a[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // Ends see phi(0) + phi(1) + phi(2) = 1 + 1/2 + 1/5.
    CHECK(f.a[0] == doctest::Approx(w * 1.7).epsilon(1e-15));
}

TEST_CASE("minimum image enters the kernel distance") {
    const ParticleEnsemble e(10.0, {{0.25, 5, 5}, {9.75, 5, 5}}, {{}, {}}, {0.5, 0.5});
    const AlignmentFields f = compute_fields(e, KernelSpec{});
    CHECK(f.a[0] == doctest::Approx(0.5 + 0.5 / 1.25));
}

TEST_CASE("consensus velocities give zero alignment force") {
    std::mt19937_64 rng(7);
    ParticleEnsemble e = random_ensemble(rng, 50, 5.0);
    const std::vector<Vec3> x(e.positions().begin(), e.positions().end());
    e = e.with_state(x, std::vector<Vec3>(50, Vec3{0.4, -1.1, 2.0}));
    for (const Vec3& l : alignment_force(compute_fields(e, KernelSpec{}), e.velocities())) CHECK(norm(l) <= 1e-15);
}

TEST_CASE("two-body closed form with phi = 1: L = -1, +1") {
    const ParticleEnsemble e(10.0, {{1, 1, 1}, {6, 3, 2}}, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
    const auto l = alignment_force(compute_fields(e, unit_constant), e.velocities());
    CHECK(l[0].x == -1.0);
    CHECK(l[1].x == 1.0);
    CHECK(l[0].y == 0.0);
}

TEST_CASE("(a, b) factorization equals the direct double sum, random N <= 64") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(1, 64);
    for (int trial = 0; trial < 100; ++trial) {
        const ParticleEnsemble e = random_ensemble(rng, count(rng), 3.0, 2.0);
        for (const KernelSpec& k : {KernelSpec{}, KernelSpec{KernelFamily::constant, 0.7}}) {
            const auto via_fields = alignment_force(compute_fields(e, k), e.velocities());
            const auto direct = alignment_force_direct(e, k);
            CHECK(max_rel_diff(via_fields, direct) <= 1e-13);
        }
    }
}

TEST_CASE("a_i bounds and momentum neutrality") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const ParticleEnsemble e = random_ensemble(rng, 80, 4.0, 3.0);
        const AlignmentFields f = compute_fields(e, KernelSpec{});
        const auto l = alignment_force(f, e.velocities());
        double vmax = 0.0;
        Vec3 p;
        for (std::size_t i = 0; i < e.size(); ++i) {
            CHECK(f.a[i] > 0.0);
            CHECK(f.a[i] <= e.total_mass() * (1 + 1e-15));
            vmax = std::max(vmax, norm(e.velocities()[i]));
            p += e.weights()[i] * l[i];
        }
        for (const Vec3& b : f.b) CHECK(norm(b) <= e.total_mass() * vmax * (1 + 1e-14));
        CHECK(norm(p) <= 1e-12 * e.total_mass() * vmax);
    }
}

TEST_CASE("dissipativity: sum m V.L = -1/2 sum m m phi |dV|^2") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const ParticleEnsemble e = random_ensemble(rng, 60, 4.0, 2.0);
        const auto l = alignment_force(compute_fields(e, KernelSpec{}), e.velocities());
        double power = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) power += e.weights()[i] * dot(e.velocities()[i], l[i]);
        const double dissipation = alignment_dissipation(e, KernelSpec{});
        CHECK(power <= 0.0);
        CHECK(rel(-power, dissipation) <= 1e-12);
        CHECK(rel(compute_fields_and_dissipation(e, KernelSpec{}).dissipation, dissipation) <= 1e-12);
    }
}

TEST_CASE("cell list: no truncation matches the naive sum") {
    std::mt19937_64 rng(4);
    const ParticleEnsemble e = random_ensemble(rng, 300, 6.0);
    const KernelSpec k = unit_constant;
    const AlignmentFields naive = compute_fields(e, k);
    const AlignmentFields cells = compute_fields_celllist(e, k, k.cutoff_for(0.0));
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(cells.a[i] == doctest::Approx(naive.a[i]).epsilon(1e-14));
        CHECK(norm(cells.b[i] - naive.b[i]) <= 1e-14);
    }
}

TEST_CASE("cell list: single occupied cell is identical to the naive path") {
    const ParticleEnsemble e(20.0, {{1, 1, 1}, {1.2, 1.1, 1.3}, {1.4, 1.05, 1.2}},
                             {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0.2, 0.3, 0.5});
    const AlignmentFields naive = compute_fields(e, KernelSpec{});
    const AlignmentFields cells = compute_fields_celllist(e, KernelSpec{}, 5.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(cells.a[i] == doctest::Approx(naive.a[i]).epsilon(1e-15));
        CHECK(norm(cells.b[i] - naive.b[i]) <= 1e-15);
    }
}

TEST_CASE("cell list: truncation error <= phi(cutoff) M for N = 1000") {
    // phi(cutoff) = 1e-6 needs cutoff ~ 1000, so the box must exceed 2000.
    const double length = 4000.0;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.0, length), vel(-1, 1);
    std::vector<Vec3> x(1000), v(1000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = {pos(rng), pos(rng), pos(rng)};
        v[i] = {vel(rng), vel(rng), vel(rng)};
    }
    const ParticleEnsemble e(length, x, v, std::vector<double>(1000, 1e-3));
    const KernelSpec k;
    const double cutoff = k.cutoff_for(1e-6);
    const AlignmentFields naive = compute_fields(e, k);
    const AlignmentFields cells = compute_fields_celllist(e, k, cutoff);
    double err = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) err = std::max(err, std::abs(cells.a[i] - naive.a[i]));
    CHECK(err <= 1e-6 * e.total_mass());
}

TEST_CASE("cell list rejects cutoff beyond half the box") {
    std::mt19937_64 rng(4);
    const ParticleEnsemble e = random_ensemble(rng, 10, 6.0);
    CHECK_THROWS(compute_fields_celllist(e, KernelSpec{}, 3.5));
}
