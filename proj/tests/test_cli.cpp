#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kBin = KAM_BIN;
const std::string kConfigs = std::string(KAM_SOURCE_DIR) + "/configs/";

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "kam_cli_tests";
    fs::create_directories(dir);
    return dir;
}

int kam(const std::string& args) {
    const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check-alpha") {
    const auto out = scratch() / "golden.csv";
    CHECK(kam("check-alpha --config " + kConfigs + "golden_check.json --out " + out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("k,divisor,amplification\n", 0) == 0);
    CHECK(csv.find("# min_margin 0.381966011250105") != std::string::npos);
    CHECK(kam("check-alpha --config " + kConfigs + "resonant.json") == 2);
}

TEST_CASE("usage errors") {
    CHECK(kam("") == 64);
    CHECK(kam("run") == 64);
    CHECK(kam("run --config /nonexistent.json") == 64);
    const auto bad = scratch() / "no_alpha.json";
    std::ofstream(bad) << R"({"n": 1, "truncation": {"kmax": 8, "mmax": 4}})";
    CHECK(kam("run --config " + bad.string()) == 64);
    const auto garbage = scratch() / "garbage.json";
    std::ofstream(garbage) << "{not json";
    CHECK(kam("check-alpha --config " + garbage.string()) == 64);
}

TEST_CASE("certificate") {
    const auto out = scratch() / "cert.json";
    CHECK(kam("certificate --config " + kConfigs + "pendulum.json --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.at("ok").get<bool>());
    CHECK(j.at("q").get<double>() < 0.5);

    const auto make = [](const std::string& name, double sigma, double y) {
        const auto p = scratch() / name;
        std::ofstream(p) << R"({"n": 1, "alpha": [0.6180339887498949], "truncation": {"kmax": 8, "mmax": 4},
            "certificate": {"C": 1, "gamma": 1, "tau": 1, "c": 1, "t": 1, "sigma": )"
                         << sigma << R"(, "y": )" << y << "}}";
        return p.string();
    };
    CHECK(kam("certificate --config " + make("c1.json", 0.5, 0.01)) == 0);
    CHECK(kam("certificate --config " + make("c2.json", 0.5, 0.0)) == 0);
    CHECK(kam("certificate --config " + make("c3.json", 0.1, 0.1)) == 5);
}

TEST_CASE("run on the unperturbed system") {
    const auto out = scratch() / "unperturbed.json";
    CHECK(kam("run --config " + kConfigs + "unperturbed.json --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.at("steps").empty());
    CHECK(j.at("verified").get<bool>());
    CHECK(j.at("exit_code").get<int>() == 0);
}

TEST_CASE("run, then verify the serialized conjugacy") {
    const auto dir = scratch();
    const auto out = dir / "pendulum.json";
    const auto gamma = dir / "gamma.json";
    const auto torus = dir / "torus.csv";
    CHECK(kam("run --config " + kConfigs + "pendulum.json --out " + out.string() + " --gamma " + gamma.string() +
              " --torus " + torus.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.at("outcome").get<std::string>() == "converged");
    CHECK(j.at("steps").size() <= 6);
    CHECK(j.at("invariance_residual").get<double>() < 1e-8);
    CHECK(j.contains("config_echo"));
    CHECK(fs::file_size(torus) > 0);
    CHECK(kam("verify --config " + kConfigs + "pendulum.json --gamma " + gamma.string()) == 0);
    // the same gamma does not conjugate a different Hamiltonian
    CHECK(kam("verify --config " + kConfigs + "unperturbed.json --gamma " + gamma.string()) != 0);
}

TEST_CASE("a large perturbation fails a precondition") {
    const auto out = scratch() / "large.json";
    CHECK(kam("run --config " + kConfigs + "pendulum_large.json --out " + out.string()) == 4);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.at("outcome").get<std::string>() == "precondition_failed");
    CHECK(j.at("failed_precondition").get<std::string>() == "picard-contraction");
}

}  // TEST_SUITE
