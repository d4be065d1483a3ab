#include "kam/scheme.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kam/errors.hpp"

namespace kam {

void ScheduleParams::validate() const {
    if (!(s > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("schedule: s and sigma must be positive");
    if (!(defect_tol > 0.0)) throw std::invalid_argument("schedule: defect_tol must be positive");
    if (max_iters < 0) throw std::invalid_argument("schedule: max_iters must be >= 0");
    if (!(gamma2 > 0.0)) throw std::invalid_argument("schedule: gamma2 must be positive");
    StripParams{s, sigma}.validate();
}

double ScheduleParams::strip(int j) const { return s + std::ldexp(sigma, -j); }
double ScheduleParams::width(int j) const { return std::ldexp(sigma, -(j + 1)); }

void CertificateConstants::validate() const {
    if (!(C > 0.0 && gamma > 0.0 && tau > 0.0 && c > 0.0 && t > 0.0))
        throw std::invalid_argument("certificate constants must be positive");
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::converged: return "converged";
        case Outcome::max_iters: return "max_iters";
        case Outcome::diverged: return "diverged";
        case Outcome::precondition_failed: return "precondition_failed";
    }
    return "unknown";
}

NewtonResult newton_step(const KolmogorovForm& K, const Series& hdot, int j, const ScheduleParams& sched,
                         const GridOptions& opts, double reference_det) {
    sched.validate();
    const int n = K.dim();
    const double s_j = sched.strip(j);
    const double s_next = sched.strip(j + 1);
    const double sigma_j = sched.width(j);
    StepRecord rec;
    rec.j = j;
    rec.s_j = s_j;
    rec.sigma_j = sigma_j;
    rec.defect = majorant_norm(hdot, s_j);

    if (hdot.empty()) {
        LieElement zero = LieElement::zero(n, K.kmax());
        return {K, hdot, zero, GroupElement::identity(n, opts.kmax), rec};
    }

    const auto nd = check_nondegeneracy(K, reference_det);
    if (!nd.ok)
        throw PreconditionError("nondegeneracy", "det <Q> = " + std::to_string(nd.det) +
                                                     " lost more than half of its initial size");
    const Series Kseries = K.assemble();
    const double tau2 = sched.tau2 < 0.0 ? K.freq().tau + 2.0 : sched.tau2;
    rec.smallness_ratio = (1.0 + majorant_norm(Kseries, s_j)) * rec.defect /
                          (sched.gamma2 * std::pow(sigma_j, tau2));

    LinearizedSolution sol = solve_linearized(K, hdot, s_j);
    rec.second_average = sol.second_average;
    rec.truncation_debt += sol.tail_norm;
    rec.linearized_residual = linearized_residual(K, hdot, sol.kdot, sol.gdot, s_next);
    rec.kdot_norm = std::abs(sol.kdot.c_dot) + majorant_norm(sol.kdot.K2_dot, s_next);

    const ExpResult ex = exponential(sol.gdot.scaled(-1.0), StripParams{s_next, 0.5 * sigma_j}, opts,
                                     sched.strict_exp_gate ? ExpGate::enforce : ExpGate::monitor);
    rec.gdot_norm = ex.lie_norm;
    rec.exp_gate_ratio = ex.gate_ratio;
    rec.picard_lipschitz = ex.lipschitz;
    rec.truncation_debt += ex.stats.pruned_mass;

    // new defect via the Lie series of exp(-G_dot), coefficient-exact up to the Fourier cut
    const Series total = add(Kseries, hdot.retruncate(Kseries.kmax(), Kseries.mmax()));
    double tail = 0.0;
    const Series delta = lie_transform_delta(total, sol.gdot, -1.0, s_j, &tail);
    rec.truncation_debt += tail;
    const Series kdot = add_constant(sol.kdot.K2_dot.retruncate(total.kmax(), total.mmax()), sol.kdot.c_dot);
    Series hnew = add(sub(hdot.retruncate(total.kmax(), total.mmax()), kdot), delta);
    rec.defect_next = majorant_norm(hnew, s_next);

    KolmogorovForm Knew = K.plus(sol.kdot);
    return {std::move(Knew), std::move(hnew), std::move(sol.gdot), ex.element, rec};
}

double fitted_exponent(const std::vector<double>& defects, double floor) {
    double sxy = 0.0;
    double sxx = 0.0;
    int pairs = 0;
    for (std::size_t j = 0; j + 1 < defects.size(); ++j) {
        if (!(defects[j] > floor) || !(defects[j + 1] > 0.0)) continue;
        const double x = std::log(defects[j]);
        const double y = std::log(defects[j + 1]);
        sxy += x * y;
        sxx += x * x;
        ++pairs;
    }
    return pairs ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

RunResult kam_run(const Series& H, const KolmogorovForm& K0, const ScheduleParams& sched,
                  const GridOptions& opts, IterationReport* trace) {
    sched.validate();
    const int n = K0.dim();
    if (H.dim() != n) throw std::invalid_argument("kam_run: dimension mismatch");
    const Series K0s = K0.assemble();
    const int kmax = std::max(K0s.kmax(), H.kmax());
    const int mmax = std::max(K0s.mmax(), H.mmax());
    const Series Hs = H.retruncate(kmax, mmax);

    IterationReport local;
    IterationReport& report = trace ? *trace : local;
    report = IterationReport{};
    const double reference_det = K0.average_Q().determinant();

    KolmogorovForm K = K0;
    Series hdot = sub(Hs, K0s.retruncate(kmax, mmax));
    GroupElement gamma = GroupElement::identity(n, opts.kmax);
    std::vector<double> defects;
    report.initial_defect = majorant_norm(hdot, sched.strip(0));
    int increases = 0;

    int j = 0;
    for (;; ++j) {
        const double d = majorant_norm(hdot, sched.strip(j));
        defects.push_back(d);
        report.final_defect = d;
        if (d <= sched.defect_tol) {
            report.outcome = Outcome::converged;
            break;
        }
        if (j >= sched.max_iters) {
            report.outcome = Outcome::max_iters;
            break;
        }
        NewtonResult step = [&] {
            try {
                return newton_step(K, hdot, j, sched, opts, reference_det);
            } catch (const PreconditionError& e) {
                report.outcome = Outcome::precondition_failed;
                report.failed_precondition = e.name();
                report.message = e.what();
                throw;
            }
        }();
        TransformStats stats;
        gamma = compose(gamma, step.step_map, opts, &stats);
        step.record.truncation_debt += stats.pruned_mass;
        if (sched.track_accumulator) {
            const Series lhs = pullback(Hs, gamma, opts);
            const Series gap = sub(sub(lhs, step.K.assemble()), step.hdot);
            step.record.accumulator_gap = majorant_norm(gap, sched.strip(j + 1));
        }
        if (step.record.smallness_ratio > 1.0)
            report.warnings.push_back("step " + std::to_string(j) +
                                      ": Newton smallness (1+|K|)|H_dot| <= gamma2 sigma^tau2 not met (ratio " +
                                      std::to_string(step.record.smallness_ratio) + ")");
        if (step.record.exp_gate_ratio > 1.0)
            report.warnings.push_back("step " + std::to_string(j) + ": exp gate |G_dot| <= gamma0 delta^2 exceeded (ratio " +
                                      std::to_string(step.record.exp_gate_ratio) + ")");
        report.truncation_debt += step.record.truncation_debt;
        report.steps.push_back(step.record);
        K = step.K;
        hdot = std::move(step.hdot);

        increases = step.record.defect_next > step.record.defect ? increases + 1 : 0;
        if (increases >= 2) {
            report.outcome = Outcome::diverged;
            report.message = "defect increased on two consecutive steps";
            report.final_defect = step.record.defect_next;
            report.fitted_exponent = fitted_exponent(defects, 100.0 * sched.defect_tol);
            throw DivergenceError(report.message);
        }
    }
    report.fitted_exponent = fitted_exponent(defects, 100.0 * sched.defect_tol);

    RunResult out{K, gamma, inverse(gamma, opts), report};
    const Series residual = sub(pullback(Hs, gamma, opts), K.assemble());
    out.report.conjugacy_residual = majorant_norm(residual, sched.s);
    report.conjugacy_residual = out.report.conjugacy_residual;
    return out;
}

Certificate convergence_certificate(const CertificateConstants& consts, double sigma, double y_norm, int iters) {
    consts.validate();
    if (!(sigma > 0.0) || !(y_norm >= 0.0) || iters < 0)
        throw std::invalid_argument("convergence_certificate: sigma > 0, y >= 0, iters >= 0 required");
    Certificate out;
    out.q = consts.c * std::pow(4.0, consts.t) * std::pow(sigma, -consts.t) * y_norm;
    double p = out.q;
    for (int j = 0; j <= iters; ++j) {
        out.predicted.push_back(p);
        p *= p;
    }
    const double radius = consts.gamma * std::pow(sigma, consts.tau);
    if (y_norm > radius) {
        out.reason = "|y| = " + std::to_string(y_norm) + " outside the ball gamma sigma^tau = " +
                     std::to_string(radius);
        return out;
    }
    if (consts.c < std::pow(2.0, -consts.t)) {
        out.reason = "c below 2^{-t}";
        return out;
    }
    out.ok = 2.0 * out.q <= 1.0;
    if (!out.ok) out.reason = "2q = " + std::to_string(2.0 * out.q) + " exceeds 1";
    return out;
}

Simulation abstract_fp_simulate(const CertificateConstants& consts, double sigma, double y_norm, int iters) {
    consts.validate();
    Simulation sim;
    const double q = consts.c * std::pow(4.0, consts.t) * std::pow(sigma, -consts.t) * y_norm;
    sim.borderline = std::abs(2.0 * q - 1.0) <= 1e-12;
    double y = y_norm;
    double x = 0.0;
    for (int j = 0; j < iters; ++j) {
        const double sigma_j = std::ldexp(sigma, -(j + 1));
        const double next = consts.c * std::pow(sigma_j, -consts.t) * y * y;
        x += next;
        y = next;
        sim.steps.push_back({x, y});
    }
    sim.x_within_C = x <= consts.C;
    return sim;
}

double abstract_fp_closed_form(const CertificateConstants& consts, double sigma, double y_norm, int j) {
    // logs keep the huge powers finite
    if (y_norm == 0.0) return 0.0;
    double log_y = std::ldexp(1.0, j) * std::log(y_norm);
    for (int k = 0; k < j; ++k) {
        const double log_d = std::log(consts.c) - consts.t * std::log(sigma) + consts.t * (k + 1) * std::log(2.0);
        log_y += std::ldexp(1.0, j - 1 - k) * log_d;
    }
    return std::exp(log_y);
}

double fit_certificate_c(const IterationReport& report, double sigma, double t) {
    double c = std::pow(2.0, -t);
    for (const auto& st : report.steps) {
        if (!(st.defect > 0.0)) continue;
        const double sigma_j = std::ldexp(sigma, -(st.j + 1));
        c = std::max(c, st.defect_next * std::pow(sigma_j, t) / (st.defect * st.defect));
    }
    return c;
}

}  // namespace kam
