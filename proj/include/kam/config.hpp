#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kam/scheme.hpp"
#include "kam/verify.hpp"

namespace kam {

using Json = nlohmann::ordered_json;

struct VerifySettings {
    double T = 100.0;
    double dt = 1e-3;
    int grid_N = 256;
    int points = 20;
};

struct ProblemConfig {
    int n = 0;
    std::vector<double> alpha;
    double tau = 0.0;
    double divisor_floor = 1e-10;
    int alpha_check_kmax = 0;  // defaults to the truncation kmax

    double c0 = 0.0;
    std::vector<std::vector<Series>> Q;  // full symmetric n x n
    Series tail;
    Series perturbation;
    bool full_H = false;  // perturbation holds all of H

    GridOptions grid;
    ScheduleParams schedule;
    VerifySettings verify;
    std::optional<CertificateConstants> certificate;
    std::optional<double> certificate_y;
    std::optional<double> certificate_sigma;
    std::uint64_t seed = 0;

    Frequency frequency() const;
    KolmogorovForm K0() const;
    Series H() const;
};

/// Throws UsageError for missing or malformed fields.
ProblemConfig parse_config(const Json& j);
ProblemConfig load_config(const std::string& path);
Json config_to_json(const ProblemConfig& cfg);

/// Literal: [{k: [...], m: [...], re, im}, ...]; a missing -k partner is
/// filled in by reality.
Json series_to_json(const Series& a);
Series series_from_json(const Json& j, int dim, int kmax, int mmax);

Json group_to_json(const GroupElement& g);
GroupElement group_from_json(const Json& j, int dim, int kmax);

Json step_to_json(const StepRecord& s);
Json report_to_json(const IterationReport& r);
Json certificate_to_json(const Certificate& c, const Simulation& sim);
Json flow_check_to_json(const FlowCheck& f);

/// Pretty JSON with every double printed to 17 significant digits.
std::string dump_json(const Json& j);
void write_embedding_csv(std::ostream& os, const TorusEmbedding& emb);

}  // namespace kam
