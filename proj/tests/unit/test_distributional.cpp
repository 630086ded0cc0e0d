#include <doctest.h>

#include <cmath>

#include "nlperim/distributional.hpp"
#include "oracles.hpp"

using namespace nlp;
using oracle::kPi;

TEST_SUITE("distributional") {
    TEST_CASE("direct and boundary routes agree on a ball") {
        auto k = rescale_kernel(KernelSpec::bump(2, 1.0, 0.1, 1.0), 0.25);
        Lattice L = Lattice::covering(2, 1.0 / 64, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, 0.3);
        GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, 0.45), L);
        GridField d = nonlocal_gradient_direct(B, k), b = nonlocal_gradient_boundary(B, k);
        // away from the raster boundary, where the two discretizations differ most
        double num = 0, den = 0;
        for (std::size_t i = 0; i < L.size(); ++i)
            for (int a = 0; a < 2; ++a) {
                const auto x = L.center(i);
                if (std::abs(std::hypot(x[0], x[1]) - 0.45) < 3 * L.h) continue;
                num += std::pow(d.at(i, a) - b.at(i, a), 2);
                den += std::pow(d.at(i, a), 2);
            }
        CHECK(std::sqrt(num / den) <= 0.05);
    }

    TEST_CASE("gradient of a ball points inward along the radius") {
        auto k = rescale_kernel(KernelSpec::bump(2, 1.0, 0.1, 1.0), 0.25);
        Lattice L = Lattice::covering(2, 1.0 / 64, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, 0.3);
        GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, 0.45), L);
        std::vector<Point3> pts;
        for (int i = 0; i < 12; ++i) {
            const double th = 2 * kPi * i / 12;
            pts.push_back({0.4 * std::cos(th), 0.4 * std::sin(th), 0});
        }
        auto g = gradient_direct_at(B, k, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double n = std::hypot(g[i][0], g[i][1]);
            REQUIRE(n > 0);
            const double cosang = -(g[i][0] * pts[i][0] + g[i][1] * pts[i][1]) / (n * 0.4);
            CHECK(cosang >= std::cos(3 * kPi / 180));
        }
    }

    TEST_CASE("gradient vanishes beyond the horizon from the boundary") {
        auto k = rescale_kernel(KernelSpec::bump(2, 1.0, 0.1, 1.0), 0.1);
        Lattice L = Lattice::covering(2, 1.0 / 64, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, 0.2);
        GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, 0.4), L);
        auto g = gradient_direct_at(B, k, {{0, 0, 0}, {0.05, 0.1, 0}});
        for (const auto& v : g) CHECK(std::hypot(v[0], v[1]) == 0.0);
    }

    TEST_CASE("the divergence is negative inside a convex set") {
        auto k = rescale_kernel(KernelSpec::bump(2, 1.0, 0.1, 0.0), 0.25);
        Lattice L = Lattice::covering(2, 1.0 / 48, {-0.6, -0.4, 0}, {0.6, 0.4, 0}, 0.3);
        GridSet R = make_shape(ShapeDesc::box({-0.6, -0.4, 0}, {0.6, 0.4, 0}), L);
        auto ds = interior_divergence_sign(R, k, 4, 3);
        CHECK(ds.checked_count > 0);
        CHECK(ds.violations == 0);
        for (const auto& s : ds.spots) {
            CHECK(s.identity < 0);
            CHECK(s.finite_difference < 0);
            CHECK(s.relative <= 0.15);
        }
    }

    TEST_CASE("direct-route total variation agrees with the boundary-route Caccioppoli perimeter") {
        auto k = rescale_kernel(KernelSpec::bump(2, 1.0, 0.1, 0.0), 0.2);
        Lattice L = Lattice::covering(2, 1.0 / 32, {-0.4, -0.4, 0}, {0.4, 0.4, 0}, 0.5);
        GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, 0.35), L);
        GridField u(L, 1);
        for (std::size_t i = 0; i < L.size(); ++i) u.data[i] = B.occ[i];
        auto c = caccioppoli_perimeter(B, k);
        CHECK(tv_rho(u, k) == doctest::Approx(c.value).epsilon(0.02));
    }

    TEST_CASE("subadditivity defect vanishes for sets farther apart than twice the horizon") {
        auto k = rescale_kernel(KernelSpec::bump(2, 1.0, 0.1, 0.0), 0.1);
        Lattice L = Lattice::covering(2, 1.0 / 64, {-0.8, -0.3, 0}, {0.8, 0.3, 0}, 0.2);
        GridSet a = make_shape(ShapeDesc::ball({-0.4, 0, 0}, 0.25), L);
        GridSet b = make_shape(ShapeDesc::ball({0.4, 0, 0}, 0.25), L);
        auto r = caccioppoli_subadditivity(a, b, k);
        CHECK(r.defect <= 1e-12 * (r.p1 + r.p2));
        GridSet c = make_shape(ShapeDesc::ball({0.4 - 0.2, 0, 0}, 0.25), L);
        GridSet a2 = make_shape(ShapeDesc::ball({-0.1, 0, 0}, 0.05), L);
        auto close = caccioppoli_subadditivity(a2, set_difference(c, a2), k);
        CHECK(close.defect > 0);
    }

    TEST_CASE("extreme point coefficient and profile") {
        for (double alpha : {0.3, 0.5, 0.8}) {
            // c_{1,-alpha} / 2 with c_{d,a} = 2^a pi^{-d/2} Gamma((d+a+1)/2) / Gamma((1-a)/2)
            const double c = std::pow(2.0, -alpha) / std::sqrt(kPi) * std::tgamma((2 - alpha) / 2) /
                             std::tgamma((1 + alpha) / 2);
            CHECK(extreme_point_coefficient(alpha) == doctest::Approx(c / 2).epsilon(1e-12));
        }
        const double a = -1, b = 1, alpha = 0.5;
        Lattice L = extreme_point_lattice(a, b, 1.0 / 64);
        CHECK(L.origin[0] == doctest::Approx(-3.0));
        auto e = extreme_point_1d(a, b, alpha, 1, L, SampleMode::Sample);
        const double C = extreme_point_coefficient(alpha);
        const std::size_t n = L.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = L.center(i)[0];
            if (e.masked[i]) continue;
            const double ref = C * ((x - a) / std::pow(std::abs(x - a), 2 - alpha) -
                                    (x - b) / std::pow(std::abs(x - b), 2 - alpha));
            CHECK(e.u.data[i] == doctest::Approx(ref).epsilon(1e-12));
            // even about the midpoint
            CHECK(e.u.data[i] == doctest::Approx(e.u.data[n - 1 - i]).epsilon(1e-12));
        }
    }

    TEST_CASE("fractional reconstruction of a ball is radial") {
        Lattice L = Lattice::covering(2, 1.0 / 32, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, 0.25);
        GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, 0.4), L);
        auto bm = extract_boundary(B);
        GridField u = fractional_reconstruct(bm, 0.5, L);
        // compare the four axis points at the same radius
        auto at = [&](double x, double y) {
            return u.data[L.linear(static_cast<int>((x - L.origin[0]) / L.h), static_cast<int>((y - L.origin[1]) / L.h), 0)];
        };
        const double r = 0.2 + L.h / 2;
        const double v = at(r, L.h / 2);
        CHECK(at(-r + L.h, L.h / 2) == doctest::Approx(v).epsilon(0.02));
        CHECK(at(L.h / 2, r) == doctest::Approx(v).epsilon(0.02));
    }
}
