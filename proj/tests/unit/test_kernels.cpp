#include <doctest.h>

#include <cmath>

#include "nlperim/errors.hpp"
#include "nlperim/kernels.hpp"
#include "oracles.hpp"

using namespace nlp;
using oracle::kPi;

TEST_SUITE("kernels") {
    TEST_CASE("ball volumes, sphere areas and the localization constant") {
        CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
        CHECK(unit_ball_volume(2) == doctest::Approx(kPi));
        CHECK(unit_ball_volume(3) == doctest::Approx(4 * kPi / 3));
        CHECK(sphere_area(2) == doctest::Approx(2 * kPi));
        CHECK(sphere_area(3) == doctest::Approx(4 * kPi));
        // mean of |cos| over the circle and of |z| over the sphere
        CHECK(localization_constant(1) == doctest::Approx(1.0));
        CHECK(localization_constant(2) == doctest::Approx(2 / kPi));
        CHECK(localization_constant(3) == doctest::Approx(0.5));
    }

    TEST_CASE("fractional constant matches the Gamma-function formula") {
        for (int d = 1; d <= 3; ++d)
            for (double a : {-0.7, -0.3, 0.2, 0.5, 0.9}) {
                const double ref = std::pow(2.0, a) * std::pow(kPi, -d / 2.0) * std::tgamma((d + a + 1) / 2) /
                                   std::tgamma((1 - a) / 2);
                CHECK(frac_constant(d, a) == doctest::Approx(ref).epsilon(1e-12));
            }
    }

    TEST_CASE("truncated fractional profile and potential") {
        const double alpha = 0.4, eps = 0.3;
        auto k = KernelSpec::truncated_fractional(2, alpha, eps);
        CHECK(k.horizon() == doctest::Approx(eps));
        CHECK(k.finite_horizon());
        CHECK(k.profile(0.1) == doctest::Approx(std::pow(0.1, -(2 + alpha - 1))));
        CHECK(k.profile(0.31) == 0.0);
        // Q(r) = int_r^eps t^{-(d+alpha)} dt
        for (double r : {0.01, 0.05, 0.2}) {
            const double ref = oracle::integrate([&](double t) { return std::pow(t, -(2 + alpha)); }, r, eps, 400);
            CHECK(k.potential(r) == doctest::Approx(ref).epsilon(1e-6));
        }
        CHECK(k.potential(0.4) == 0.0);
    }

    TEST_CASE("bump mass, normalization and rescaling") {
        auto k = KernelSpec::bump(2, 1.0, 0.1, 0.0);
        const double mass = 2 * kPi * oracle::integrate([&](double r) { return k.profile(r) * r; }, 1e-9, 1.0, 400);
        CHECK(kernel_mass(k) == doctest::Approx(mass).epsilon(1e-6));

        CHECK(kernel_mass(normalize_kernel(k, Normalization::UnitMass)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(kernel_mass(normalize_kernel(k, Normalization::MassD)) == doctest::Approx(2.0).epsilon(1e-9));

        const double t = 0.25;
        auto kt = rescale_kernel(k, t);
        CHECK(kt.horizon() == doctest::Approx(t));
        for (double r : {0.02, 0.1, 0.2})
            CHECK(kt.profile(r) == doctest::Approx(std::pow(t, -2) * k.profile(r / t)).epsilon(1e-10));
        // rescaling preserves mass
        CHECK(kernel_mass(kt) == doctest::Approx(kernel_mass(k)).epsilon(1e-8));
    }

    TEST_CASE("pair weight integral over an annulus") {
        auto k = KernelSpec::bump(2, 1.0, 0.1, 0.0);
        const double ref = 2 * kPi * oracle::integrate([&](double r) { return k.profile(r); }, 0.2, 0.7, 400);
        CHECK(pair_weight_integral(k, 0.2, 0.7) == doctest::Approx(ref).epsilon(1e-6));
    }

    TEST_CASE("tabulated kernel interpolates its nodes") {
        std::vector<double> r = {0.1, 0.2, 0.4, 0.8}, v = {8, 4, 2, 1};
        auto k = KernelSpec::tabulated(2, r, v);
        for (std::size_t i = 0; i < r.size() - 1; ++i) CHECK(k.profile(r[i]) == doctest::Approx(v[i]));
        CHECK(k.profile(0.3) <= 4.0);
        CHECK(k.profile(0.3) >= 2.0);
    }

    TEST_CASE("monotonicity predicates") {
        CHECK(radially_nonincreasing(KernelSpec::truncated_fractional(2, 0.5, 1.0)));
        CHECK(strictly_decreasing_f(KernelSpec::truncated_fractional(2, 0.5, 1.0)));
        // r * exp(a / (r^2 - 1)) rises from zero before it decays
        CHECK_FALSE(radially_nonincreasing(KernelSpec::bump(2, 1.0, 0.1, -1.0)));
    }

    TEST_CASE("hypothesis report for the truncated fractional kernel") {
        auto k = KernelSpec::truncated_fractional(2, 0.5, 1.0);
        std::vector<double> s;
        for (int i = 1; i <= 64; ++i) s.push_back(i / 65.0);
        auto rep = validate_hypotheses(k, s);
        CHECK(rep.h1.status == "pass");
        // not decidable from samples
        CHECK(rep.h2.status == "unverified");
        // sigma = gamma = alpha makes both weighted profiles constant
        CHECK(rep.h3.status == "pass");
        CHECK(rep.h4.status == "pass");
    }

    TEST_CASE("invalid parameters are rejected") {
        CHECK_THROWS_AS(KernelSpec::fractional(2, 1.5), Error);
        CHECK_THROWS_AS(KernelSpec::truncated_fractional(2, 0.5, -1.0), Error);
        CHECK_THROWS_AS(KernelSpec::bump(2, 1.0, -0.1, 0.0), Error);
        try {
            KernelSpec::fractional(2, 1.5);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Domain);
        }
    }
}
