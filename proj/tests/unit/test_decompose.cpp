#include <doctest.h>

#include <cmath>

#include "nlperim/decompose.hpp"
#include "nlperim/errors.hpp"
#include "oracles.hpp"

using namespace nlp;

TEST_SUITE("decompose") {
    TEST_CASE("labels equal a brute-force breadth-first search") {
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            GridSet s = oracle::random_disks(36, 1.0 / 36, 5, seed);
            for (double cells : {1.5, 3.2, 7.7}) {
                const double eps = cells / 36;
                int count = 0;
                auto ref = oracle::bfs_labels(s, eps, &count);
                auto dec = epsilon_components(s, eps);
                REQUIRE(dec.size() == static_cast<std::size_t>(count));
                // same partition, labels may be permuted
                std::map<int, int> map;
                for (std::size_t i = 0; i < ref.size(); ++i) {
                    CHECK((ref[i] < 0) == (dec.labels[i] < 0));
                    if (ref[i] < 0) continue;
                    auto [it, fresh] = map.emplace(ref[i], dec.labels[i]);
                    CHECK(it->second == dec.labels[i]);
                }
            }
        }
    }

    TEST_CASE("component distances equal the brute-force minimum") {
        GridSet s = oracle::random_disks(30, 1.0 / 30, 4, 9);
        const double eps = 2.5 / 30;
        auto dec = epsilon_components(s, eps);
        const auto& L = s.lat;
        for (std::size_t a = 0; a < dec.size(); ++a)
            for (std::size_t b = a + 1; b < dec.size(); ++b) {
                double best = INFINITY;
                for (std::size_t i = 0; i < L.size(); ++i) {
                    if (dec.labels[i] != static_cast<int>(a)) continue;
                    for (std::size_t j = 0; j < L.size(); ++j) {
                        if (dec.labels[j] != static_cast<int>(b)) continue;
                        const auto x = L.center(i), y = L.center(j);
                        best = std::min(best, std::hypot(x[0] - y[0], x[1] - y[1]));
                    }
                }
                CHECK(dec.distance(a, b) == doctest::Approx(best).epsilon(1e-12));
                CHECK(dec.distance(a, b) >= eps);
            }
    }

    TEST_CASE("decomposability of separated and touching balls") {
        Lattice L = Lattice::covering(2, 1.0 / 32, {-1, -0.5, 0}, {1, 0.5, 0}, 0.2);
        GridSet far = set_union(make_shape(ShapeDesc::ball({-0.5, 0, 0}, 0.3), L),
                                make_shape(ShapeDesc::ball({0.5, 0, 0}, 0.3), L));
        auto v = is_epsilon_decomposable(far, 0.2);
        CHECK(v.decomposable);
        CHECK(v.witness_distance >= 0.2);
        REQUIRE(v.witness.has_value());
        CHECK(v.witness->first.count() + v.witness->second.count() == far.count());
        CHECK_FALSE(is_epsilon_decomposable(far, 0.5).decomposable);
    }

    TEST_CASE("perimeter is additive over eps components") {
        GridSet s = oracle::random_disks(40, 1.0 / 40, 6, 21);
        Lattice big = s.lat;
        big.n = {60, 60, 1};
        big.origin = {-0.25, -0.25, 0};
        GridSet E = embed(s, big);
        const double eps = 3.0 / 40;
        auto k = KernelSpec::truncated_fractional(2, 0.5, eps);
        auto add = additivity_residual(E, eps, k);
        CHECK(add.component_perimeters.size() == epsilon_components(E, eps).size());
        CHECK(std::abs(add.residual) <= 1e-10 * add.perimeter);
    }

    TEST_CASE("simplicity verdicts") {
        const double eps = 0.1;
        Lattice L = Lattice::covering(2, 1.0 / 32, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, 0.3);
        GridSet ball = make_shape(ShapeDesc::ball({0, 0, 0}, 0.4), L);
        CHECK(is_epsilon_simple(ball, eps) == Simplicity::Simple);

        GridSet ring = make_shape(
            ShapeDesc::difference(ShapeDesc::ball({0, 0, 0}, 0.45), ShapeDesc::ball({0, 0, 0}, 0.25)), L);
        CHECK(is_epsilon_simple(ring, eps) == Simplicity::ComplementHasFiniteComponent);

        GridSet two = set_union(make_shape(ShapeDesc::ball({-0.3, 0, 0}, 0.15), L),
                                make_shape(ShapeDesc::ball({0.3, 0, 0}, 0.15), L));
        CHECK(is_epsilon_simple(two, eps) == Simplicity::NotIndecomposable);

        // a margin below 2 eps hides what lies beyond the window
        Lattice tight = Lattice::covering(2, 1.0 / 32, {-0.4, -0.4, 0}, {0.4, 0.4, 0}, 0.1);
        GridSet cut = make_shape(ShapeDesc::ball({0, 0, 0}, 0.4), tight);
        CHECK(is_epsilon_simple(cut, eps) == Simplicity::Indeterminate);
        Lattice none = Lattice::covering(2, 1.0 / 32, {-0.4, -0.4, 0}, {0.4, 0.4, 0});
        CHECK_THROWS_AS(is_epsilon_simple(make_shape(ShapeDesc::box({-0.4, -0.4, 0}, {0.4, 0.4, 0}), none), eps),
                        Error);
    }

    TEST_CASE("a decomposable set is not extreme and the witness splits it") {
        const double eps = 0.2;
        auto k = KernelSpec::truncated_fractional(2, 0.5, eps);
        Lattice L = Lattice::covering(2, 1.0 / 32, {-1, -0.5, 0}, {1, 0.5, 0}, 0.3);
        GridSet far = set_union(make_shape(ShapeDesc::ball({-0.5, 0, 0}, 0.25), L),
                                make_shape(ShapeDesc::ball({0.5, 0, 0}, 0.25), L));
        auto v = extremality_witness(far, eps, k);
        CHECK_FALSE(v.extreme);
        CHECK(v.reason == "decomposable");
        CHECK(v.lambda > 0);
        CHECK(v.lambda < 1);
        CHECK(std::abs(v.identity_residual) <= 1e-9);

        GridSet ball = make_shape(ShapeDesc::ball({0, 0, 0}, 0.3), L);
        CHECK(extremality_witness(ball, eps, k).extreme);
    }
}
