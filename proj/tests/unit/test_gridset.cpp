#include <doctest.h>

#include <cmath>

#include "nlperim/gridset.hpp"
#include "oracles.hpp"

using namespace nlp;
using oracle::kPi;

TEST_SUITE("gridset") {
    TEST_CASE("covering lattices are aligned to the global grid") {
        const double h = 0.125;
        Lattice L = Lattice::covering(2, h, {-0.3, 0.11, 0}, {0.7, 0.9, 0}, 0.2);
        for (int a = 0; a < 2; ++a) {
            const double k = L.origin[a] / h;
            CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
        }
        CHECK(L.origin[0] <= -0.5 + 1e-12);
        CHECK(L.origin[0] + L.n[0] * h >= 0.9 - 1e-12);
        for (std::size_t i = 0; i < L.size(); i += 7) CHECK(L.linear(L.unravel(i)) == i);
    }

    TEST_CASE("rasterized shapes approach their analytic measure and perimeter") {
        const double r = 0.4;
        for (double h : {1.0 / 64, 1.0 / 256}) {
            Lattice L = Lattice::covering(2, h, {-r, -r, 0}, {r, r, 0}, 0.1);
            GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, r), L);
            CHECK(std::abs(measure(B) - kPi * r * r) <= 4 * kPi * r * h);
            CHECK(classical_perimeter(B) == doctest::Approx(2 * kPi * r).epsilon(0.01));
        }
        auto box = ShapeDesc::box({0, 0, 0}, {1, 0.5, 0});
        CHECK(*analytic_measure(box, 2) == doctest::Approx(0.5));
        CHECK(*analytic_perimeter(box, 2) == doctest::Approx(3.0));
    }

    TEST_CASE("set algebra") {
        Lattice L = Lattice::covering(2, 0.1, {0, 0, 0}, {1, 1, 0});
        GridSet a = make_shape(ShapeDesc::box({0, 0, 0}, {0.5, 1, 0}), L);
        GridSet b = make_shape(ShapeDesc::box({0.3, 0, 0}, {1, 1, 0}), L);
        GridSet u = set_union(a, b), d = set_difference(a, b);
        std::size_t na = 0, nb = 0, nboth = 0;
        for (std::size_t i = 0; i < L.size(); ++i) {
            na += a.occ[i], nb += b.occ[i], nboth += a.occ[i] && b.occ[i];
            CHECK(u.contains(i) == (a.contains(i) || b.contains(i)));
            CHECK(d.contains(i) == (a.contains(i) && !b.contains(i)));
        }
        CHECK(u.count() == na + nb - nboth);
        CHECK(subset_of(d, a));
        CHECK_FALSE(subset_of(a, d));
        GridSet c = complement(a);
        CHECK(c.complement);
        for (std::size_t i = 0; i < L.size(); ++i) CHECK(c.contains(i) != a.contains(i));
    }

    TEST_CASE("distance transform equals brute force") {
        GridSet s = oracle::random_disks(40, 1.0, 3, 11);
        auto d2 = squared_distance_transform(s.lat, s.occ);
        const auto& L = s.lat;
        for (std::size_t i = 0; i < L.size(); ++i) {
            const auto ci = L.unravel(i);
            double best = INFINITY;
            for (std::size_t j = 0; j < L.size(); ++j) {
                if (!s.occ[j]) continue;
                const auto cj = L.unravel(j);
                const double dx = ci[0] - cj[0], dy = ci[1] - cj[1];
                best = std::min(best, dx * dx + dy * dy);
            }
            CHECK(d2[i] == best);
        }
    }

    TEST_CASE("dilation matches the center-distance definition") {
        GridSet s = oracle::random_disks(32, 0.5, 2, 5);
        const double r = 1.6;
        GridSet g = dilate(s, r);
        const auto& L = s.lat;
        for (std::size_t i = 0; i < L.size(); ++i) {
            bool near = false;
            for (std::size_t j = 0; j < L.size() && !near; ++j) {
                if (!s.occ[j]) continue;
                const auto x = L.center(i), y = L.center(j);
                near = std::hypot(x[0] - y[0], x[1] - y[1]) <= r + 1e-12;
            }
            CHECK(static_cast<bool>(g.occ[i]) == near);
        }
    }

    TEST_CASE("essential distance between two boxes") {
        Lattice L = Lattice::covering(2, 0.05, {0, 0, 0}, {2, 1, 0});
        GridSet a = make_shape(ShapeDesc::box({0, 0, 0}, {0.5, 1, 0}), L);
        GridSet b = make_shape(ShapeDesc::box({1.2, 0, 0}, {2, 1, 0}), L);
        CHECK(essential_distance(a, b) == doctest::Approx(0.7).epsilon(0.08));
    }

    TEST_CASE("Minkowski content counts both bands") {
        const double r = 0.3, h = 1.0 / 256, eps = 0.02;
        Lattice L = Lattice::covering(2, h, {-r, -r, 0}, {r, r, 0}, 0.1);
        GridSet B = make_shape(ShapeDesc::ball({0, 0, 0}, r), L);
        // |(B + eps) \ B| + |B \ (B - eps)| over eps tends to twice the perimeter
        CHECK(minkowski_perimeter(B, eps) == doctest::Approx(2 * 2 * kPi * r).epsilon(0.05));
    }

    TEST_CASE("boundary measure of a square") {
        Lattice L = Lattice::covering(2, 1.0 / 64, {0, 0, 0}, {1, 1, 0}, 0.1);
        GridSet S = make_shape(ShapeDesc::box({0, 0, 0}, {1, 1, 0}), L);
        auto bm = extract_boundary(S);
        CHECK(bm.total() == doctest::Approx(4.0).epsilon(0.02));
        // inner normals point toward the center
        for (const auto& f : bm.facets) {
            const double dot = f.normal[0] * (0.5 - f.center[0]) + f.normal[1] * (0.5 - f.center[1]);
            CHECK(dot > 0);
        }
    }

    TEST_CASE("embedding and translation keep membership") {
        Lattice L = Lattice::covering(2, 0.1, {0, 0, 0}, {1, 1, 0});
        GridSet a = make_shape(ShapeDesc::ball({0.5, 0.5, 0}, 0.3), L);
        Lattice big = Lattice::covering(2, 0.1, {-1, -1, 0}, {2, 2, 0});
        GridSet e = embed(a, big);
        CHECK(e.count() == a.count());
        CHECK(measure(e) == doctest::Approx(measure(a)));
        GridSet t = translate(a, {1, 0, 0});
        CHECK(t.count() <= a.count());
    }
}
