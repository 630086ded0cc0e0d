#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "nlperim/errors.hpp"
#include "nlperim/io.hpp"
#include "oracles.hpp"

using namespace nlp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("nlperim_unit_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("FNV-1a reference vectors") {
        CHECK(io::hex64(io::fnv1a("")) == "cbf29ce484222325");
        CHECK(io::hex64(io::fnv1a("a")) == "af63dc4c8601ec8c");
        CHECK(io::hex64(io::fnv1a("foobar")) == "85944171f73967e8");
    }

    TEST_CASE("config hash ignores key order") {
        io::json a = {{"x", 1}, {"y", "two"}}, b = {{"y", "two"}, {"x", 1}};
        CHECK(io::config_hash(a) == io::config_hash(b));
        CHECK(io::config_hash(a) != io::config_hash({{"x", 2}, {"y", "two"}}));
        CHECK(io::config_hash(a).size() == 16);
    }

    TEST_CASE("shortest round-trip doubles") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> U(-1e6, 1e6);
        for (int i = 0; i < 200; ++i) {
            const double v = U(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
            CHECK(std::stod(io::format_double(v)) == v);
        }
        CHECK(io::format_double(0.5) == "0.5");
        CHECK(io::format_double(16) == "16");
    }

    TEST_CASE("atomic writes replace the target and leave no temporaries") {
        auto d = scratch_dir("atomic");
        const fs::path p = d / "out.txt";
        io::write_atomic(p, "first\n");
        io::write_atomic(p, "second\n");
        CHECK(io::read_file(p) == "second\n");
        std::size_t files = 0;
        for (const auto& e : fs::directory_iterator(d)) files += e.is_regular_file();
        CHECK(files == 1);
        CHECK_THROWS_AS(io::read_file(d / "missing.txt"), Error);
        fs::remove_all(d);
    }

    TEST_CASE("PGM masks round-trip with their geometry") {
        GridSet s = oracle::random_disks(37, 0.03125, 4, 8);
        s.lat.n = {37, 37, 1};
        s.lat.origin = {-0.5, 0.25, 0};
        const std::string bytes = io::mask_to_pgm(s, "0123456789abcdef");
        CHECK(bytes.rfind("P5\n", 0) == 0);
        CHECK(bytes.find("# config_hash=0123456789abcdef") != std::string::npos);
        GridSet t = io::mask_from_pgm(bytes);
        CHECK(t.lat.h == s.lat.h);
        CHECK(t.lat.origin[0] == s.lat.origin[0]);
        CHECK(t.lat.origin[1] == s.lat.origin[1]);
        CHECK(t.occ == s.occ);
    }

    TEST_CASE("PGM row 0 is the top of the image") {
        // 2 x 2 image: top-left set only
        const std::string img = std::string("P5\n2 2\n255\n") + char(255) + char(0) + char(0) + char(0);
        io::MaskGeometry g;
        g.h = 1.0;
        g.origin = Point3{0, 0, 0};
        GridSet s = io::mask_from_pgm(img, g);
        CHECK(s.occ[s.lat.linear(0, 1, 0)] == 1);
        CHECK(s.count() == 1);
    }

    TEST_CASE("run-length masks round-trip in one dimension") {
        Lattice L;
        L.dim = 1;
        L.h = 0.01;
        L.n = {50, 1, 1};
        L.origin = {-0.25, 0, 0};
        GridSet s(L);
        for (int i : {3, 4, 5, 20, 21, 40}) s.occ[i] = 1;
        GridSet t = io::mask_from_rle(io::mask_to_rle(s, "h"));
        CHECK(t.lat.dim == 1);
        CHECK(t.lat.n[0] == 50);
        CHECK(t.lat.h == doctest::Approx(0.01));
        CHECK(t.occ == s.occ);
    }

    TEST_CASE("three-dimensional masks round-trip through the raw volume and sidecar") {
        auto d = scratch_dir("raw");
        Lattice L = Lattice::covering(3, 0.1, {0, 0, 0}, {0.6, 0.5, 0.4});
        GridSet s = make_shape(ShapeDesc::ball({0.3, 0.25, 0.2}, 0.2), L);
        io::write_mask(d / "ball.raw", s, "abc");
        GridSet t = io::read_mask(d / "ball.raw");
        CHECK(t.lat.n == s.lat.n);
        CHECK(t.occ == s.occ);
        fs::remove_all(d);
    }

    TEST_CASE("field CSV orientation and comments") {
        const std::string text = "# h=0.5\n# origin=0,0\n1,2,3\n4,5,6\n";
        GridField f = io::field_from_csv(text);
        CHECK(f.lat.n[0] == 3);
        CHECK(f.lat.n[1] == 2);
        CHECK(f.lat.h == 0.5);
        // the last text row is the bottom row of the lattice
        CHECK(f.data[f.lat.linear(0, 0, 0)] == 4);
        CHECK(f.data[f.lat.linear(2, 1, 0)] == 3);
        CHECK_THROWS_AS(io::field_from_csv("1,2\n3\n"), Error);
    }

    TEST_CASE("CSV tables carry the hash line and a header") {
        io::Csv csv("feedbeef", {"a", "b"});
        csv.row({1.0, 0.25});
        csv.row(std::vector<std::string>{"x", "y"});
        CHECK(csv.str() == "# config_hash=feedbeef\na,b\n1,0.25\nx,y\n");
        CHECK_THROWS_AS(csv.row(std::vector<double>{1.0}), Error);
    }

    TEST_CASE("kernel JSON round-trip") {
        io::json j = {{"family", "bump"}, {"eps", 0.3}, {"a", 0.1}, {"s", 0.5}, {"normalization", "unit_mass"}};
        KernelSpec k = io::kernel_from_json(j);
        KernelSpec k2 = io::kernel_from_json(io::kernel_to_json(k));
        CHECK(k2.horizon() == doctest::Approx(k.horizon()));
        for (double r : {0.01, 0.1, 0.25}) CHECK(k2.profile(r) == doctest::Approx(k.profile(r)).epsilon(1e-12));
        CHECK(kernel_mass(k) == doctest::Approx(1.0).epsilon(1e-9));

        KernelSpec inf = io::kernel_from_json({{"family", "truncated_fractional"}, {"alpha", 0.5}, {"eps", "inf"}}, 1);
        CHECK_FALSE(inf.finite_horizon());
        CHECK(inf.dim() == 1);
        CHECK_THROWS_AS(io::kernel_from_json({{"family", "gaussian"}}), Error);
    }
}
