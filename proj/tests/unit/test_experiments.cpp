#include <doctest.h>

#include <cmath>

#include "nlperim/experiments.hpp"
#include "oracles.hpp"

using namespace nlp;
using oracle::kPi;

TEST_SUITE("experiments") {
    TEST_CASE("error_decreasing looks at the last rows only") {
        std::vector<SweepRow> rows(4);
        const double e[] = {0.01, 0.5, 0.2, 0.1};
        for (int i = 0; i < 4; ++i) rows[i].rel_error = e[i];
        CHECK(error_decreasing(rows, 3));
        CHECK_FALSE(error_decreasing(rows, 4));
    }

    TEST_CASE("infinite-horizon sweep on an interval follows the finite-horizon closed form") {
        // P_eps((0,1)) = 2 int_0^1 int_{(0,1)^c, |x-y|<eps} |x-y|^{-1-alpha}, eps >= 1
        const double alpha = 0.5, h = 1.0 / 512;
        auto rep = sweep_infinite_horizon(ShapeDesc::box({0, 0, 0}, {1, 0, 0}), 1, alpha, {2, 8, 32}, h);
        REQUIRE(rep.rows.size() == 3);
        for (const auto& r : rep.rows) {
            const double eps = r.parameter;
            // each side gives int_0^1 ((1 - x)^{-alpha} - eps^{-alpha}) / alpha dx
            const double side = (1 / (1 - alpha) - std::pow(eps, -alpha)) / alpha;
            const double ref = 2 * 2 * side;
            CHECK(r.check == doctest::Approx(ref).epsilon(1e-6));
            CHECK(r.value == doctest::Approx(ref).epsilon(0.01));
            CHECK(r.reference == doctest::Approx(16.0));
        }
        CHECK(rep.rows[2].rel_error < rep.rows[0].rel_error);
    }

    TEST_CASE("relaxation lattice puts the half-horizon lattice on cell centers") {
        const double eps = 0.25;
        Lattice L = relaxation_lattice(2, eps, 8, {-0.6, -0.3, 0}, {0.6, 0.3, 0});
        CHECK(L.h == doctest::Approx(eps / 16));
        for (int a = 0; a < 2; ++a) {
            const double k0 = (0 - L.origin[a]) / L.h - 0.5;
            CHECK(k0 == doctest::Approx(std::round(k0)).epsilon(1e-12));
            const double k1 = (eps / 2 - L.origin[a]) / L.h - 0.5;
            CHECK(k1 == doctest::Approx(std::round(k1)).epsilon(1e-12));
        }
    }

    TEST_CASE("radius_for_perimeter inverts the ball perimeter") {
        auto k = KernelSpec::truncated_fractional(2, 0.5, 0.25);
        for (double bound : {0.5, 2.0, 5.0}) {
            const double r = radius_for_perimeter(k, bound);
            CHECK(ball_perimeter_continuum(k, r) <= bound * (1 + 1e-9));
            CHECK(ball_perimeter_continuum(k, r * 1.001) > bound * (1 - 1e-9));
        }
    }

    TEST_CASE("relaxation rows shrink and connect") {
        const double eps = 0.25;
        auto k = KernelSpec::truncated_fractional(2, 0.5, eps);
        Lattice L = relaxation_lattice(2, eps, 16, {-0.75, -0.375, 0}, {0.75, 0.375, 0});
        GridSet E = set_union(make_shape(ShapeDesc::ball({-0.4, 0, 0}, 0.2), L),
                              make_shape(ShapeDesc::ball({0.4, 0, 0}, 0.2), L));
        const double budget = relaxation_budget(k, L, eps, 6 * L.h);
        auto rep = relaxation_demo(E, k, eps, {1, 2, 4}, budget);
        CHECK(rep.base_components == 2);
        REQUIRE(rep.rows.size() >= 2);
        for (const auto& r : rep.rows) CHECK(r.components == 1);
        CHECK(rep.rows[1].measure < rep.rows[0].measure);
        CHECK(rep.rows[1].perimeter < rep.rows[0].perimeter);
    }

    TEST_CASE("annealer energy equals the pair-sum perimeter") {
        auto k = normalize_kernel(KernelSpec::bump(2, 0.2, 0.1, -1.0), Normalization::UnitMass);
        Lattice L = Lattice::covering(2, 1.0 / 32, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, 0.25);
        GridSet B = make_shape(ShapeDesc::ball({0.05, 0, 0}, 0.3), L);
        CHECK(anneal_energy(B, k) == doctest::Approx(gagliardo_perimeter(B, k).value).epsilon(1e-9));
    }

    TEST_CASE("constrained annealing keeps the mass and is reproducible") {
        auto k = normalize_kernel(KernelSpec::bump(2, 0.2, 0.1, -1.0), Normalization::UnitMass);
        Lattice L = Lattice::covering(2, 1.0 / 16, {-1, -1, 0}, {1, 1, 0});
        GridSet omega(L);
        std::fill(omega.occ.begin(), omega.occ.end(), 1);
        AnnealConfig cfg;
        cfg.moves_per_cell = 5;
        cfg.max_epochs = 6;
        cfg.quench_epochs = 1;
        cfg.audit_every = 500;
        const double mass = 0.75;
        auto r1 = minimize_constrained(omega, mass, k, cfg);
        auto r2 = minimize_constrained(omega, mass, k, cfg);
        CHECK(measure(r1.state.set) == doctest::Approx(mass).epsilon(L.h * L.h / mass));
        CHECK(r1.state.set.occ == r2.state.set.occ);
        CHECK(r1.state.energy == r2.state.energy);
        CHECK(r1.state.max_audit_drift <= 1e-9);
        CHECK(r1.state.audits > 0);
        CHECK(r1.perimeter == doctest::Approx(anneal_energy(r1.state.set, k)).epsilon(1e-9));
        cfg.seed = 2;
        auto r3 = minimize_constrained(omega, mass, k, cfg);
        CHECK(r3.state.seed == 2);
    }

    TEST_CASE("a nonnegative potential gives the empty minimizer") {
        auto k = normalize_kernel(KernelSpec::truncated_fractional(2, 0.5, 0.1), Normalization::UnitMass);
        Lattice L = Lattice::covering(2, 1.0 / 16, {-1, -1, 0}, {1, 1, 0});
        GridField g(L, 1);
        std::fill(g.data.begin(), g.data.end(), 0.5);
        AnnealConfig cfg;
        cfg.moves_per_cell = 5;
        cfg.max_epochs = 4;
        cfg.init = AnnealInit::Random;
        auto r = minimize_potential(g, k, cfg);
        CHECK(r.state.set.count() == 0);
        CHECK(r.state.energy == doctest::Approx(0.0));
    }

    TEST_CASE("deep wells are kept and every kept component pays for itself") {
        auto k = normalize_kernel(KernelSpec::truncated_fractional(2, 0.5, 0.1), Normalization::UnitMass);
        Lattice L = Lattice::covering(2, 1.0 / 32, {-2.2, -1.1, 0}, {2.2, 1.1, 0});
        GridField g(L, 1);
        for (std::size_t i = 0; i < L.size(); ++i) {
            const auto x = L.center(i);
            const bool well = std::hypot(x[0] - 1.2, x[1]) < 0.8 || std::hypot(x[0] + 1.2, x[1]) < 0.8;
            g.data[i] = well ? -2.0 : 1.0;
        }
        AnnealConfig cfg;
        cfg.moves_per_cell = 20;
        cfg.max_epochs = 10;
        auto r = minimize_potential(g, k, cfg);
        CHECK(r.components.size() == 2);
        for (double v : r.removal) CHECK(v <= 0);
    }
}
