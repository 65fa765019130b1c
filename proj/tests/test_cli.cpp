#include "asympode/problem.hpp"
#include "asympode/serialize.hpp"

#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace asympode;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

std::string scratch(const char* name) {
    const fs::path p = fs::temp_directory_path() / "asympode-tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

const Json kCubic = Json::parse(R"j({"matrix": [["1"]], "nonlinearity": "-x^3", "initial_condition": [0.5], "n_terms": 3})j");
const Json kBruno = Json::parse(R"j({"matrix": [[1, 0], [0, 3]],
    "nonlinearity": {"components": ["0", "3/2*x_1^2*sgnpow(x_2,1/3)"]},
    "initial_condition": [1, 0.5], "horizon": 30})j");

int cli(const std::string& args) {
    const std::string cmd = std::string(ASYMPODE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string problem_file(const std::string& dir, const Json& j) {
    const std::string path = dir + "/problem.json";
    write_file(path, j.dump());
    return path;
}

}  // namespace

TEST_CASE("pipeline: cubic passes and writes every artifact") {
    const std::string dir = scratch("cubic");
    const auto r = run_pipeline(parse_problem(kCubic), dir);
    CHECK(r.exit_code == 0);
    REQUIRE(r.series);
    CHECK(std::fabs(r.series->xi[0] - 0.5 / std::sqrt(1.25)) < 1e-7);
    for (const char* f : {"spectral.json", "trajectory.csv", "first-approx.json", "decay.json", "regularity.json",
                          "series.json", "lattice.json", "report.json", "residuals.csv", "resolved-config.json"})
        CHECK_MESSAGE(fs::exists(fs::path(dir) / f), f);
    CHECK_FALSE(fs::exists(fs::path(dir) / "error.json"));
}

TEST_CASE("pipeline: Bruno system is rejected at xi") {
    const std::string dir = scratch("bruno");
    const auto r = run_pipeline(parse_problem(kBruno), dir);
    CHECK(r.exit_code == 3);
    CHECK(r.message.find("sgnpow(x_2, 1/3)") != std::string::npos);
    const Json err = read_json(dir + "/error.json");
    CHECK(err.at("kind") == "InapplicableAtXi");
    CHECK(err.at("exit_code") == 3);
}

TEST_CASE("problem files: malformed input is collected and reported") {
    Json bad = kCubic;
    bad["matrix"] = Json::parse(R"([[1, 2], [3]])");
    CHECK(kind_of([&] { parse_problem(bad); }) == ErrorKind::InvalidInput);
    Json unknown = kCubic;
    unknown["colour"] = "red";
    CHECK(kind_of([&] { parse_problem(unknown); }) == ErrorKind::InvalidInput);
    Json missing = kCubic;
    missing.erase("initial_condition");
    CHECK(kind_of([&] { parse_problem(missing); }) == ErrorKind::InvalidInput);
    CHECK(exit_code_for(ErrorKind::InvalidInput) == 1);
    CHECK(exit_code_for(ErrorKind::InapplicableAtXi) == 3);
}

TEST_CASE("run directory: missing series") {
    const std::string dir = scratch("missing");
    Run run(parse_problem(kCubic), dir);
    CHECK(kind_of([&] { run.load_series(); }) == ErrorKind::MissingArtifact);
}

TEST_CASE("pipeline output is deterministic") {
    const std::string a = scratch("det-a"), b = scratch("det-b");
    run_pipeline(parse_problem(kCubic), a);
    run_pipeline(parse_problem(kCubic), b);
    for (const char* f : {"series.json", "lattice.json", "trajectory.csv", "report.json"})
        CHECK_MESSAGE(read_file(a + "/" + f) == read_file(b + "/" + f), f);
    const std::string before = read_file(a + "/series.json");
    run_pipeline(parse_problem(kCubic), a);
    CHECK(read_file(a + "/series.json") == before);
}

TEST_CASE("command line") {
    const std::string dir = scratch("cli");
    const std::string cubic = problem_file(dir, kCubic);
    const std::string out = dir + "/run";
    CHECK(cli("run --problem " + cubic + " --out " + out) == 0);
    CHECK(fs::exists(out + "/report.json"));

    // Stages reuse one another's artifacts.
    const std::string staged = dir + "/staged";
    CHECK(cli("spectral --problem " + cubic + " --out " + staged) == 0);
    CHECK(cli("verify --problem " + cubic + " --out " + staged) == 1);
    CHECK(read_json(staged + "/error.json").at("kind") == "MissingArtifact");
    CHECK(cli("simulate --problem " + cubic + " --out " + staged) == 0);
    CHECK(cli("first-approx --problem " + cubic + " --out " + staged) == 0);
    CHECK(cli("expand --problem " + cubic + " --out " + staged) == 0);
    CHECK(cli("verify --problem " + cubic + " --out " + staged + " --format csv") == 0);
    CHECK(read_file(staged + "/series.json") == read_file(out + "/series.json"));
    CHECK(cli("exponents --problem " + cubic + " --out " + staged + " --count 10") == 0);

    const std::string bruno = dir + "/bruno.json";
    write_file(bruno, kBruno.dump());
    CHECK(cli("run --problem " + bruno + " --out " + dir + "/b") == 3);

    Json bad = kCubic;
    bad["matrix"] = "not a matrix";
    const std::string badp = dir + "/bad.json";
    write_file(badp, bad.dump());
    CHECK(cli("run --problem " + badp + " --out " + dir + "/bad") == 1);
    CHECK(cli("run --problem " + dir + "/nope.json") == 1);
    CHECK(cli("run --problem " + cubic + " --out " + dir + "/o --resonance bogus") == 1);
}
