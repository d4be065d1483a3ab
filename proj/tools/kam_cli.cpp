// kam: command-line driver for the invariant-torus Newton engine.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "kam/config.hpp"
#include "kam/errors.hpp"
#include "kam/kernels.hpp"

namespace {

enum Exit : int {
    kOk = 0,
    kResonance = 2,
    kDivergence = 3,
    kPrecondition = 4,
    kCertificateFail = 5,
    kUsage = 64,
};

// verification tolerances for `run` and `verify`
constexpr double kInvarianceTol = 1e-8;
constexpr double kTorusDistanceTol = 1e-6;
constexpr double kRotationTol = 1e-5;

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw kam::UsageError("cannot write " + path);
    out << text;
}

kam::ProblemConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
    kam::ProblemConfig cfg = kam::load_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

std::string format_k(const std::array<int, kam::kMaxDim>& k, int n) {
    std::string s;
    for (int j = 0; j < n; ++j) s += (j ? ";" : "") + std::to_string(k[j]);
    return s;
}

int cmd_check_alpha(const kam::ProblemConfig& cfg, const std::string& out) {
    const auto scan = kam::check_diophantine(cfg.alpha, cfg.tau, cfg.alpha_check_kmax);
    const auto spectrum = kam::small_divisor_spectrum(cfg.frequency(), cfg.alpha_check_kmax);
    std::ostringstream os;
    os << "k,divisor,amplification\n";
    char buf[96];
    for (const auto& e : spectrum) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", e.divisor, e.amplification);
        os << format_k(e.k, cfg.n) << buf;
    }
    std::snprintf(buf, sizeof buf, "# min_margin %.17g at k=", scan.min_margin);
    os << buf << format_k(scan.argmin_k, cfg.n) << " (tau " << cfg.tau << ", kmax " << cfg.alpha_check_kmax
       << ")\n";
    emit(os.str(), out);
    return scan.min_margin > 0.0 ? kOk : kResonance;
}

struct Verification {
    kam::Json json;
    bool ok = false;
};

Verification verify_torus(const kam::ProblemConfig& cfg, const kam::Series& H, const kam::GroupElement& gamma,
                          const kam::GroupElement& G, const std::string& torus_path) {
    const auto emb = kam::torus_embedding(gamma, cfg.verify.grid_N);
    if (!torus_path.empty()) {
        std::ofstream csv(torus_path);
        if (!csv) throw kam::UsageError("cannot write " + torus_path);
        kam::write_embedding_csv(csv, emb);
    }
    const double inv = kam::invariance_residual(H, gamma, emb, cfg.alpha);
    kam::FlowCheckOptions fo;
    fo.T = cfg.verify.T;
    fo.dt = cfg.verify.dt;
    fo.points = cfg.verify.points;
    fo.r_limit = cfg.schedule.s;
    fo.seed = cfg.seed;
    const auto fc = kam::flow_check(H, gamma, G, cfg.alpha, fo);
    Verification v;
    v.json = {{"invariance_residual", inv}, {"flow_check", kam::flow_check_to_json(fc)}};
    v.ok = inv <= kInvarianceTol && !fc.escaped && fc.max_torus_distance <= kTorusDistanceTol &&
           fc.rotation_error <= kRotationTol;
    return v;
}

int cmd_run(const kam::ProblemConfig& cfg, const std::string& out, const std::string& torus,
            const std::string& gamma_path) {
    kam::check_diophantine(cfg.alpha, cfg.tau, cfg.alpha_check_kmax);
    const kam::Series H = cfg.H();
    kam::Json report = {{"config_echo", kam::config_to_json(cfg)}};
    kam::IterationReport trace;
    int code = kOk;
    std::optional<kam::RunResult> result;
    try {
        result = kam::kam_run(H, cfg.K0(), cfg.schedule, cfg.grid, &trace);
    } catch (const kam::PreconditionError&) {
        code = kPrecondition;
    } catch (const kam::ResonanceError&) {
        code = kResonance;
    } catch (const kam::DivergenceError&) {
        code = kDivergence;
    }
    const kam::IterationReport& rep = result ? result->report : trace;
    const kam::Json rep_json = kam::report_to_json(rep);
    for (auto& [key, value] : rep_json.items()) report[key] = value;
    if (result) {
        if (rep.outcome != kam::Outcome::converged) code = kDivergence;
        report["K"] = {{"c", result->K.c()}, {"series", kam::series_to_json(result->K.assemble())}};
        if (!gamma_path.empty())
            emit(kam::dump_json({{"gamma", kam::group_to_json(result->gamma)}, {"G", kam::group_to_json(result->G)}}),
                 gamma_path);
        if (code == kOk) {
            const auto v = verify_torus(cfg, H, result->gamma, result->G, torus);
            for (auto& [key, value] : v.json.items()) report[key] = value;
            report["verified"] = v.ok;
            if (!v.ok) code = kDivergence;
        }
    }
    report["exit_code"] = code;
    emit(kam::dump_json(report), out);
    if (code == kPrecondition) std::cerr << "precondition failed: " << rep.message << '\n';
    return code;
}

int cmd_certificate(const kam::ProblemConfig& cfg, const std::string& out) {
    const kam::CertificateConstants consts = cfg.certificate.value_or(kam::CertificateConstants{});
    const double sigma = cfg.certificate_sigma.value_or(cfg.schedule.sigma);
    double y = 0.0;
    if (cfg.certificate_y) {
        y = *cfg.certificate_y;
    } else {
        const kam::Series hdot = kam::sub(cfg.H(), cfg.K0().assemble());
        y = kam::majorant_norm(hdot, cfg.schedule.s + cfg.schedule.sigma);
    }
    const auto cert = kam::convergence_certificate(consts, sigma, y, cfg.schedule.max_iters);
    const auto sim = cert.ok ? kam::abstract_fp_simulate(consts, sigma, y, cfg.schedule.max_iters) : kam::Simulation{};
    kam::Json j = {{"sigma", sigma}, {"y_norm", y}};
    const kam::Json cert_json = kam::certificate_to_json(cert, sim);
    for (auto& [key, value] : cert_json.items()) j[key] = value;
    emit(kam::dump_json(j), out);
    return cert.ok ? kOk : kCertificateFail;
}

int cmd_verify(const kam::ProblemConfig& cfg, const std::string& gamma_path, const std::string& out,
               const std::string& torus) {
    std::ifstream in(gamma_path);
    if (!in) throw kam::UsageError("cannot open " + gamma_path);
    kam::Json j;
    try {
        j = kam::Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw kam::UsageError(gamma_path + " is not valid JSON: " + e.what());
    }
    const kam::Json& gj = j.contains("gamma") ? j.at("gamma") : j;
    const auto gamma = kam::group_from_json(gj, cfg.n, cfg.grid.kmax);
    const auto G = kam::inverse(gamma, cfg.grid);
    const auto v = verify_torus(cfg, cfg.H(), gamma, G, torus);
    kam::Json report = v.json;
    report["verified"] = v.ok;
    emit(kam::dump_json(report), out);
    return v.ok ? kOk : kDivergence;
}

}  // namespace

int main(int argc, char** argv) {
    kam::configure_threads_from_env();
    CLI::App app{"Invariant tori of nearly integrable Hamiltonians by a Newton scheme on Fourier-Taylor series"};
    app.require_subcommand(1);
    std::string config, out, torus, gamma_path;
    std::optional<std::uint64_t> seed;

    auto* check = app.add_subcommand("check-alpha", "Diophantine scan and small-divisor spectrum (CSV)");
    auto* run = app.add_subcommand("run", "Newton iteration, conjugacy and dynamical verification");
    auto* cert = app.add_subcommand("certificate", "Convergence certificate for the configured perturbation");
    auto* verify = app.add_subcommand("verify", "Re-verify a serialized gamma against the config");
    for (auto* sub : {check, run, cert, verify}) {
        sub->add_option("--config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output file (default stdout)");
        sub->add_option("--seed", seed, "seed for verification sampling");
    }
    run->add_option("--torus", torus, "write the torus embedding CSV here");
    run->add_option("--gamma", gamma_path, "write gamma and G = gamma^-1 here");
    verify->add_option("--gamma", gamma_path, "serialized gamma")->required()->check(CLI::ExistingFile);
    verify->add_option("--torus", torus, "write the torus embedding CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        const kam::ProblemConfig cfg = load(config, seed);
        if (*check) return cmd_check_alpha(cfg, out);
        if (*run) return cmd_run(cfg, out, torus, gamma_path);
        if (*cert) return cmd_certificate(cfg, out);
        return cmd_verify(cfg, gamma_path, out, torus);
    } catch (const kam::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kUsage;
    } catch (const kam::ResonanceError& e) {
        std::cerr << "resonance: " << e.what() << '\n';
        return kResonance;
    } catch (const kam::PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << '\n';
        return kPrecondition;
    } catch (const kam::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kDivergence;
    }
}
