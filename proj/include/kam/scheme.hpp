#pragma once

#include <string>
#include <vector>

#include "kam/group.hpp"
#include "kam/normalform.hpp"

namespace kam {

struct ScheduleParams {
    double s = 0.1;
    double sigma = 0.2;
    double defect_tol = 1e-13;
    int max_iters = 12;
    double gamma2 = 1e-2;
    double tau2 = -1.0;             // negative: tau + 2
    bool strict_exp_gate = false;   // refuse steps with |G_dot|_{s+delta} > gamma_0 delta^2
    bool track_accumulator = false; // recompute H o gamma_j - K_j each step (costly)

    void validate() const;
    /// s_j = s + 2^{-j} sigma
    double strip(int j) const;
    /// sigma_j = s_j - s_{j+1} = 2^{-(j+1)} sigma
    double width(int j) const;
};

struct CertificateConstants {
    double C = 1.0;
    double gamma = 1.0;
    double tau = 1.0;
    double c = 1.0;
    double t = 1.0;
    void validate() const;
};

struct StepRecord {
    int j = 0;
    double s_j = 0.0;
    double sigma_j = 0.0;
    double defect = 0.0;      // |H_dot_j|_{s_j}
    double defect_next = 0.0; // |H_dot_{j+1}|_{s_{j+1}}
    double kdot_norm = 0.0;   // |K_dot_j|_{s_{j+1}}
    double gdot_norm = 0.0;   // |G_dot_j|_{s_{j+1} + sigma_j / 2}
    double truncation_debt = 0.0;
    double exp_gate_ratio = 0.0;  // |G_dot| / (gamma_0 delta^2); > 1 means the gate is exceeded
    double picard_lipschitz = 0.0;
    double smallness_ratio = 0.0; // (1 + |K|)|H_dot| / (gamma_2 sigma^tau_2)
    double linearized_residual = 0.0;
    double second_average = 0.0;
    double accumulator_gap = -1.0; // |H o gamma_{j+1} - K_{j+1} - H_dot_{j+1}|_{s_{j+1}}, -1 if not tracked
};

enum class Outcome { converged, max_iters, diverged, precondition_failed };
const char* outcome_name(Outcome o);

struct IterationReport {
    std::vector<StepRecord> steps;
    Outcome outcome = Outcome::max_iters;
    std::string failed_precondition;
    std::string message;
    double initial_defect = 0.0;
    double final_defect = 0.0;
    double fitted_exponent = 0.0;  // NaN when fewer than one usable pair
    double truncation_debt = 0.0;
    double conjugacy_residual = -1.0;
    std::vector<std::string> warnings;
};

struct NewtonResult {
    KolmogorovForm K;
    Series hdot;
    LieElement gdot;
    GroupElement step_map;  // exp(-G_dot)
    StepRecord record;
};

/// One application of (K, H_dot) -> (K + K_dot, (K + H_dot) o exp(-G_dot) - (K + K_dot)),
/// mapping the strip s_j onto s_{j+1}.
NewtonResult newton_step(const KolmogorovForm& K, const Series& hdot, int j, const ScheduleParams& sched,
                         const GridOptions& opts, double reference_det = 0.0);

struct RunResult {
    KolmogorovForm K;
    GroupElement gamma;  // H o gamma = K
    GroupElement G;      // gamma^{-1}, H = K o G
    IterationReport report;
};

/// Throws DivergenceError after two consecutive defect increases and passes
/// step precondition failures through; `trace`, when given, receives the
/// report so far in either case.
RunResult kam_run(const Series& H, const KolmogorovForm& K0, const ScheduleParams& sched,
                  const GridOptions& opts, IterationReport* trace = nullptr);

/// Least-squares slope through the origin of log d_{j+1} against log d_j over
/// pairs with d_j above the floor.
double fitted_exponent(const std::vector<double>& defects, double floor);

struct Certificate {
    bool ok = false;
    double q = 0.0;
    std::vector<double> predicted;  // q^{2^j}, j = 0..iters
    std::string reason;
};

Certificate convergence_certificate(const CertificateConstants& consts, double sigma, double y_norm,
                                    int iters = 12);

struct SimulationStep {
    double x_drift = 0.0;  // sum of the x-increments so far
    double y = 0.0;        // worst-case |y_j|
};

struct Simulation {
    std::vector<SimulationStep> steps;  // j = 1..iters
    bool borderline = false;            // 2q = 1
    bool x_within_C = true;
};

/// Worst-case recursion y_{j+1} = c sigma_j^{-t} y_j^2, sigma_j = 2^{-(j+1)} sigma.
Simulation abstract_fp_simulate(const CertificateConstants& consts, double sigma, double y_norm, int iters);

/// Closed form of the recursion: y^{2^j} prod_{k<j} (c sigma^{-t} 2^{t(k+1)})^{2^{j-1-k}}.
double abstract_fp_closed_form(const CertificateConstants& consts, double sigma, double y_norm, int j);

/// Smallest c >= 2^{-t} with d_{j+1} <= c sigma_j^{-t} d_j^2 along a run.
double fit_certificate_c(const IterationReport& report, double sigma, double t);

}  // namespace kam
