#include <cmath>
#include <random>

#include "doctest.h"
#include "csstokes/init.hpp"
#include "csstokes/spectral.hpp"
#include "csstokes/stokes.hpp"
#include "support.hpp"

using namespace csstokes;
using namespace csstokes::testing;

TEST_CASE("rational kernel: dense scan finds max |phi'| = 3 sqrt(3) / 8 at r = 1/sqrt(3)") {
    const KernelScan scan = scan_kernel(KernelSpec{});
    CHECK(scan.positive);
    CHECK(scan.nonincreasing);
    CHECK(scan.max_phi == 1.0);
    CHECK(scan.max_abs_derivative == doctest::Approx(3.0 * std::sqrt(3.0) / 8.0).epsilon(1e-8));
    CHECK(scan.argmax_abs_derivative == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-4));
    CHECK_NOTHROW(validate_kernel(KernelSpec{}));
}

TEST_CASE("kernel registration rejects constants outside (0, 1]") {
    CHECK_THROWS_AS(validate_kernel(KernelSpec{KernelFamily::constant, 1.5}), ConfigError);
    CHECK_THROWS_AS(validate_kernel(KernelSpec{KernelFamily::constant, 0.0}), ConfigError);
    CHECK_NOTHROW(validate_kernel(KernelSpec{KernelFamily::constant, 0.25}));
}

TEST_CASE("kernel cutoff") {
    const KernelSpec k;
    CHECK(k(k.cutoff_for(1e-6)) == doctest::Approx(1e-6).epsilon(1e-9));
    CHECK(std::isinf(KernelSpec{KernelFamily::constant, 1.0}.cutoff_for(0.0)));
}

TEST_CASE("config validation names the field") {
    SimConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    auto fails_on = [](SimConfig bad, const std::string& key) {
        try {
            bad.validate();
        } catch (const ConfigError& e) {
            return std::string(e.what()).rfind(key, 0) == 0;
        }
        return false;
    };
    SimConfig bad = c;
    bad.grid_n = 9;
    CHECK(fails_on(bad, "grid_n"));
    bad = c;
    bad.grid_n = 2;
    CHECK(fails_on(bad, "grid_n"));
    bad = c;
    bad.dt = -1;
    CHECK(fails_on(bad, "dt"));
    bad = c;
    bad.particle_count = 0;
    CHECK(fails_on(bad, "n_particles"));
    bad = c;
    bad.picard_tol = 0;
    CHECK(fails_on(bad, "picard_tol"));
    bad = c;
    bad.picard_max_iter = 0;
    CHECK(fails_on(bad, "picard_max_iter"));
    bad = c;
    bad.weights.alpha = 1.0;
    CHECK(fails_on(bad, "weights.alpha"));
}

TEST_CASE("wrap_coordinate lands in [0, L) and is idempotent") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    const double length = two_pi;
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng);
        const double w = wrap_coordinate(x, length);
        CHECK(w >= 0.0);
        CHECK(w < length);
        CHECK(wrap_coordinate(w, length) == w);
    }
    CHECK(wrap_coordinate(-0.0, length) == 0.0);
    CHECK(wrap_coordinate(length, length) == 0.0);
    CHECK(wrap_coordinate(-1e-18, length) < length);
}

TEST_CASE("minimum image picks the nearest periodic copy") {
    const double length = 10.0;
    const Vec3 d = minimum_image({9.5, 0.5, 5.0}, {0.5, 9.5, 5.0}, length);
    CHECK(d.x == doctest::Approx(-1.0));
    CHECK(d.y == doctest::Approx(1.0));
    CHECK(d.z == 0.0);
}

TEST_CASE("init_ensemble: at_rest singleton") {
    SimConfig c = small_config();
    c.particle_count = 1;
    c.init_particles = "at_rest";
    const ParticleEnsemble e = init_ensemble(c);
    REQUIRE(e.size() == 1);
    CHECK(e.weights()[0] == c.total_mass);
    CHECK(norm(e.velocities()[0]) == 0.0);
    CHECK(e.initial_support_radius() == 0.0);
}

TEST_CASE("init_ensemble: two_cluster speeds +-1 along x give R(0) = 1") {
    SimConfig c = small_config();
    c.particle_count = 100;
    c.init_particles = "two_cluster:1";
    const ParticleEnsemble e = init_ensemble(c);
    CHECK(e.initial_support_radius() == 1.0);
    for (const Vec3& v : e.velocities()) {
        CHECK(std::abs(v.x) == 1.0);
        CHECK(v.y == 0.0);
        CHECK(v.z == 0.0);
    }
}

TEST_CASE("init_ensemble: uniform ball R0 = 2, N = 1e4") {
    SimConfig c = small_config();
    c.particle_count = 10000;
    c.init_particles = "uniform_ball:2";
    const ParticleEnsemble e = init_ensemble(c);
    double vmax = 0.0, mass = 0.0;
    for (const Vec3& v : e.velocities()) vmax = std::max(vmax, norm(v));
    for (double m : e.weights()) {
        CHECK(m == c.total_mass / c.particle_count);
        mass += m;
    }
    CHECK(vmax <= 2.0);
    CHECK(vmax >= 0.95 * 2.0);
    CHECK(e.initial_support_radius() == vmax);
    CHECK(mass == doctest::Approx(c.total_mass).epsilon(1e-12));
    for (const Vec3& x : e.positions()) {
        CHECK(x.x >= 0.0);
        CHECK(x.x < c.box_length);
    }
}

TEST_CASE("init_ensemble rejects unbounded velocity presets") {
    CHECK_THROWS_AS(ParticleInitSpec::parse("gaussian:1"), ConfigError);
    CHECK_THROWS_AS(ParticleInitSpec::parse("maxwellian"), ConfigError);
    CHECK_THROWS_AS(ParticleInitSpec::parse("uniform_ball:inf"), ConfigError);
    CHECK_THROWS_AS(ParticleInitSpec::parse("uniform_ball:-1"), ConfigError);
}

TEST_CASE("init_fluid presets") {
    SimConfig c = small_config();
    SUBCASE("zero") {
        const FluidState f = init_fluid(c, FluidInitSpec::parse("zero"));
        for (const auto& comp : f.velocity_spectral)
            for (const Complex& z : comp) CHECK(z == Complex{});
    }
    SUBCASE("compressive mode is removed by the projection") {
        const FluidState f = init_fluid(c, FluidInitSpec::parse("mode:1,0,0:1,0,0"));
        CHECK(max_norm(f.velocity_grid) < 1e-14);
    }
    SUBCASE("transverse mode is unchanged") {
        const FluidState f = init_fluid(c, FluidInitSpec::parse("mode:1,0,0:0,1,0"));
        const Grid& g = f.grid;
        double err = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    const double x = i * g.spacing();
                    err = std::max(err, std::abs(f.velocity_grid[1][g.node_index(i, j, k)] - std::sin(x)));
                    err = std::max(err, std::abs(f.velocity_grid[0][g.node_index(i, j, k)]));
                }
        CHECK(err < 1e-14);
    }
    SUBCASE("taylor_green is divergence free") {
        const FluidState f = init_fluid(c, FluidInitSpec::parse("taylor_green:0.5"));
        CHECK(max_norm(f.velocity_grid) > 0.1);
        CHECK(max_relative_divergence(f.grid, f.velocity_spectral) <= 1e-12);
    }
    CHECK_THROWS_AS(FluidInitSpec::parse("mode:0.5,0,0:0,1,0"), ConfigError);
    CHECK_THROWS_AS(FluidInitSpec::parse("vortex"), ConfigError);
}

TEST_CASE("ensembles share immutable weights across steps") {
    std::mt19937_64 rng(1);
    const ParticleEnsemble e = random_ensemble(rng, 16, two_pi);
    const ParticleEnsemble f = e.with_state({e.positions().begin(), e.positions().end()},
                                            {e.velocities().begin(), e.velocities().end()});
    CHECK(f.shared_weights().get() == e.shared_weights().get());
    CHECK_THROWS(ParticleEnsemble(1.0, {{0, 0, 0}}, {{0, 0, 0}}, {-1.0}));
    CHECK_THROWS(ParticleEnsemble(1.0, {{0, 0, 0}}, {{0, 0, 0}}, {1.0, 2.0}));
}

TEST_CASE("grid to spectral round trip on every preset to 1e-12") {
    SimConfig c = small_config();
    c.grid_n = 16;
    std::mt19937_64 rng(3);
    const Grid g{c.grid_n, c.box_length};
    std::vector<RealVectorField> fields{random_field(rng, g)};
    for (const char* p : {"zero", "taylor_green", "mode:2,1,0:0,0,1"}) fields.push_back(init_fluid(c, FluidInitSpec::parse(p)).velocity_grid);
    for (const auto& f : fields) {
        const RealVectorField back = to_grid(g, to_spectral(g, f));
        double err = 0.0, scale = 0.0;
        for (int a = 0; a < 3; ++a)
            for (std::size_t i = 0; i < g.nodes(); ++i) {
                err = std::max(err, std::abs(back[a][i] - f[a][i]));
                scale = std::max(scale, std::abs(f[a][i]));
            }
        CHECK(err <= 1e-12 * std::max(scale, 1.0));
    }
}
