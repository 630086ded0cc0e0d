#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "nlperim/cli.hpp"
#include "nlperim/io.hpp"
#include "oracles.hpp"

using namespace nlp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("nlperim_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const std::string kKernel = R"({"family":"truncated_fractional","alpha":0.5,"eps":0.1})";

fs::path disk_mask(const fs::path& dir) {
    GridSet s = oracle::random_disks(48, 1.0 / 48, 3, 17);
    s.lat.origin = {-0.5, -0.5, 0};
    const fs::path p = dir / "mask.pgm";
    io::write_mask(p, s, "test");
    return p;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("every subcommand is registered") {
        CHECK(cli::subcommands().size() == 18);
        for (const auto& name : cli::subcommands()) CHECK(run({name, "--help"}).code == cli::Ok);
    }

    TEST_CASE("unknown subcommand exits 64 with an error document") {
        auto r = run({"frobnicate"});
        CHECK(r.code == cli::UnknownCommand);
        auto j = io::json::parse(r.out);
        CHECK(j["error"]["exit_code"] == 64);
    }

    TEST_CASE("unreadable input exits 66") {
        auto r = run({"perimeter", "--mask", "/nonexistent/mask.pgm", "--kernel", kKernel});
        CHECK(r.code == cli::Unreadable);
        CHECK(io::json::parse(r.out)["error"]["kind"] == "io");
    }

    TEST_CASE("precondition failures exit 2") {
        auto d = scratch_dir("pre");
        const auto mask = disk_mask(d).string();
        CHECK(run({"perimeter", "--mask", mask}).code == cli::Precondition);
        auto bad = run({"perimeter", "--mask", mask, "--kernel", R"({"family":"fractional","alpha":1.5})"});
        CHECK(bad.code == cli::Precondition);
        CHECK(io::json::parse(bad.out)["error"]["kind"] == "domain");
        CHECK(run({"extreme-1d", "--a", "1", "--b", "0"}).code == cli::Precondition);
        CHECK(run({"decompose", "--mask", mask, "--eps", "-1"}).code == cli::Precondition);
        fs::remove_all(d);
    }

    TEST_CASE("perimeter output carries the configuration hash") {
        auto d = scratch_dir("hash");
        const auto mask = disk_mask(d).string();
        auto a = run({"perimeter", "--mask", mask, "--kernel", kKernel});
        auto b = run({"perimeter", "--mask", mask, "--kernel", kKernel, "--refinement", "2"});
        REQUIRE(a.code == 0);
        REQUIRE(b.code == 0);
        auto ja = io::json::parse(a.out), jb = io::json::parse(b.out);
        CHECK(ja["config_hash"].get<std::string>().size() == 16);
        CHECK(ja["config_hash"] != jb["config_hash"]);
        // output paths do not change the hash
        auto c = run({"perimeter", "--mask", mask, "--kernel", kKernel, "--out", (d / "p.json").string()});
        CHECK(io::json::parse(io::read_file(d / "p.json"))["config_hash"] == ja["config_hash"]);
        CHECK(c.code == 0);
        fs::remove_all(d);
    }

    TEST_CASE("CSV reruns are byte-identical") {
        auto d = scratch_dir("rerun");
        const auto mask = disk_mask(d).string();
        for (int i = 0; i < 2; ++i) {
            const std::string tag = std::to_string(i);
            REQUIRE(run({"gradient-field", "--mask", mask, "--kernel", kKernel, "--out",
                         (d / ("g" + tag + ".csv")).string(), "--report", (d / ("g" + tag + ".json")).string()})
                        .code == 0);
            REQUIRE(run({"--workers", tag == "0" ? "1" : "3", "sweep-horizon", "--eps", "4,16", "--spacing",
                         "0.00390625", "--out", (d / ("s" + tag + ".csv")).string()})
                        .code == 0);
        }
        const std::string g0 = io::read_file(d / "g0.csv");
        CHECK(g0 == io::read_file(d / "g1.csv"));
        CHECK(g0.rfind("# config_hash=", 0) == 0);
        CHECK(io::read_file(d / "s0.csv") == io::read_file(d / "s1.csv"));
        fs::remove_all(d);
    }

    TEST_CASE("decompose writes a label image and a report") {
        auto d = scratch_dir("dec");
        const auto mask = disk_mask(d).string();
        auto r = run({"decompose", "--mask", mask, "--eps", "0.05", "--out", (d / "labels.pgm").string(), "--report",
                      (d / "report.json").string()});
        REQUIRE(r.code == 0);
        auto rep = io::json::parse(io::read_file(d / "report.json"));
        CHECK(rep["components"].size() >= 1);
        CHECK(rep["additivity"]["relative"].get<double>() <= 1e-10);
        CHECK(io::read_file(d / "labels.pgm").rfind("P5", 0) == 0);
        fs::remove_all(d);
    }

    TEST_CASE("extreme-1d writes the profile") {
        auto r = run({"extreme-1d", "--n", "16"});
        REQUIRE(r.code == 0);
        CHECK(r.out.rfind("# config_hash=", 0) == 0);
        CHECK(r.out.find("x,u,masked") != std::string::npos);
    }

    TEST_CASE("selftest runs a selected check") {
        auto r = run({"selftest", "--quick", "--only", "4"});
        CHECK(r.code == 0);
        CHECK(r.out.find("PASS") != std::string::npos);
    }
}
