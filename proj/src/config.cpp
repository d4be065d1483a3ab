#include "kam/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "kam/errors.hpp"

namespace kam {

namespace {

template <typename T>
T field(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config field '") + key + "': " + e.what());
    }
}

const Json& object(const Json& j, const char* key) {
    static const Json empty = Json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw UsageError(std::string("config field '") + key + "' must be an object");
    return j.at(key);
}

bool canonical(const Mode& mode, int dim) {
    for (int j = 0; j < dim; ++j) {
        if (mode.k[j] > 0) return true;
        if (mode.k[j] < 0) return false;
    }
    return true;
}

std::array<int, kMaxDim> int_vector(const Json& rec, const char* key, int dim) {
    std::array<int, kMaxDim> out{};
    if (!rec.contains(key)) return out;
    const Json& arr = rec.at(key);
    if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
        throw UsageError(std::string("series literal: '") + key + "' must be an array of length " +
                         std::to_string(dim));
    for (int i = 0; i < dim; ++i) {
        if (!arr[i].is_number_integer()) throw UsageError("series literal: indices must be integers");
        out[i] = arr[i].get<int>();
    }
    return out;
}

void write_number(std::ostream& os, double x) {
    if (!std::isfinite(x)) {
        os << "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
}

void write_json(std::ostream& os, const Json& j, int indent) {
    const std::string pad(indent + 2, ' ');
    const std::string close(indent, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << Json(it.key()).dump() << ": ";
            write_json(os, it.value(), indent + 2);
        }
        os << '\n' << close << '}';
    } else if (j.is_array()) {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // flat arrays of numbers stay on one line
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& x) { return x.is_number(); });
        os << '[';
        bool first = true;
        for (const auto& x : j) {
            if (!first) os << (flat ? ", " : ",");
            first = false;
            if (!flat) os << '\n' << pad;
            write_json(os, x, indent + 2);
        }
        if (!flat) os << '\n' << close;
        os << ']';
    } else if (j.is_number_float()) {
        write_number(os, j.get<double>());
    } else {
        os << j.dump();
    }
}

}  // namespace

Json series_to_json(const Series& a) {
    Json out = Json::array();
    for (const auto& t : a.terms()) {
        const Mode mode = unpack(t.key);
        if (!canonical(mode, a.dim())) continue;
        Json k = Json::array(), m = Json::array();
        for (int j = 0; j < a.dim(); ++j) {
            k.push_back(mode.k[j]);
            m.push_back(mode.m[j]);
        }
        out.push_back({{"k", k}, {"m", m}, {"re", t.c.real()}, {"im", t.c.imag()}});
    }
    return out;
}

Series series_from_json(const Json& j, int dim, int kmax, int mmax) {
    if (j.is_null()) return Series(dim, kmax, mmax);
    if (!j.is_array()) throw UsageError("series literal must be an array of {k, m, re, im} records");
    std::map<Key, cplx> coeffs;
    for (const auto& rec : j) {
        if (!rec.is_object()) throw UsageError("series literal: records must be objects");
        Mode mode;
        mode.k = int_vector(rec, "k", dim);
        mode.m = int_vector(rec, "m", dim);
        for (int i = 0; i < dim; ++i)
            if (mode.m[i] < 0) throw UsageError("series literal: negative Taylor index");
        if (mode.k_l1(dim) > kmax || mode.m_l1(dim) > mmax)
            throw UsageError("series literal: mode outside the truncation (kmax " + std::to_string(kmax) +
                             ", mmax " + std::to_string(mmax) + ")");
        const cplx c{field<double>(rec, "re", 0.0), field<double>(rec, "im", 0.0)};
        if (mode.k_l1(dim) == 0 && c.imag() != 0.0)
            throw UsageError("series literal: k = 0 coefficients must be real");
        coeffs[pack(mode)] += c;
    }
    std::vector<std::pair<Mode, cplx>> list;
    for (const auto& [key, c] : coeffs) {
        const Mode mode = unpack(key);
        list.emplace_back(mode, c);
        if (mode.k_l1(dim) != 0 && !coeffs.count(pack(mode.conj()))) list.emplace_back(mode.conj(), std::conj(c));
    }
    return Series::make(dim, kmax, mmax, list);
}

Json group_to_json(const GroupElement& g) {
    Json v = Json::array();
    for (const auto& c : g.v) v.push_back(series_to_json(c));
    return {{"v", v}, {"R", g.R}, {"S", series_to_json(g.S)}};
}

GroupElement group_from_json(const Json& j, int dim, int kmax) {
    if (!j.is_object() || !j.contains("v") || !j.contains("R") || !j.contains("S"))
        throw UsageError("group element must have fields v, R, S");
    GroupElement g;
    g.R = field<std::vector<double>>(j, "R", {});
    if (static_cast<int>(g.R.size()) != dim || !j.at("v").is_array() || static_cast<int>(j.at("v").size()) != dim)
        throw UsageError("group element dimension does not match the config");
    for (const auto& c : j.at("v")) g.v.push_back(series_from_json(c, dim, kmax, 0));
    g.S = series_from_json(j.at("S"), dim, kmax, 0);
    return g;
}

Frequency ProblemConfig::frequency() const { return Frequency{alpha, 0.0, tau, divisor_floor}; }

KolmogorovForm ProblemConfig::K0() const { return KolmogorovForm(c0, frequency(), Q, tail); }

Series ProblemConfig::H() const {
    if (full_H) return perturbation;
    return add(K0().assemble(), perturbation);
}

ProblemConfig parse_config(const Json& j) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    ProblemConfig cfg;
    if (!j.contains("alpha")) throw UsageError("config is missing 'alpha'");
    cfg.alpha = field<std::vector<double>>(j, "alpha", {});
    cfg.n = field<int>(j, "n", static_cast<int>(cfg.alpha.size()));
    if (cfg.n < 1 || cfg.n > kMaxDim) throw UsageError("n must be in [1, 4]");
    if (static_cast<int>(cfg.alpha.size()) != cfg.n) throw UsageError("alpha must have n components");
    cfg.tau = field<double>(j, "tau", static_cast<double>(cfg.n));
    cfg.divisor_floor = field<double>(j, "divisor_floor", cfg.divisor_floor);

    const Json& tr = object(j, "truncation");
    cfg.grid.kmax = field<int>(tr, "kmax", cfg.grid.kmax);
    cfg.grid.mmax = field<int>(tr, "mmax", cfg.grid.mmax);
    cfg.grid.oversample = field<int>(tr, "oversample", cfg.grid.oversample);
    cfg.grid.prune_rel = field<double>(tr, "prune_rel", cfg.grid.prune_rel);
    cfg.grid.alias_tol = field<double>(tr, "alias_tol", cfg.grid.alias_tol);
    if (cfg.grid.kmax < 1 || cfg.grid.mmax < 2 || cfg.grid.oversample < 2)
        throw UsageError("truncation needs kmax >= 1, mmax >= 2, oversample >= 2");
    cfg.alpha_check_kmax = field<int>(j, "alpha_check_kmax", cfg.grid.kmax);
    const int n = cfg.n;
    const int kmax = cfg.grid.kmax;
    const int mmax = cfg.grid.mmax;

    const Json& k0 = object(j, "K0");
    cfg.c0 = field<double>(k0, "c", 0.0);
    cfg.Q.assign(n, std::vector<Series>(n, Series(n, kmax, 0)));
    if (k0.contains("Q")) {
        const Json& q = k0.at("Q");
        if (!q.is_array() || static_cast<int>(q.size()) != n)
            throw UsageError("K0.Q must list the upper triangle row by row");
        for (int i = 0; i < n; ++i) {
            if (!q[i].is_array() || static_cast<int>(q[i].size()) != n - i)
                throw UsageError("K0.Q row " + std::to_string(i) + " must have " + std::to_string(n - i) + " entries");
            for (int jj = i; jj < n; ++jj) {
                cfg.Q[i][jj] = series_from_json(q[i][jj - i], n, kmax, 0);
                cfg.Q[jj][i] = cfg.Q[i][jj];
            }
        }
    } else {
        for (int i = 0; i < n; ++i) cfg.Q[i][i] = Series::constant(n, kmax, 0, 1.0);
    }
    cfg.tail = series_from_json(k0.contains("tail") ? k0.at("tail") : Json(), n, kmax, mmax);
    cfg.perturbation = series_from_json(j.contains("perturbation") ? j.at("perturbation") : Json(), n, kmax, mmax);
    cfg.full_H = field<bool>(j, "full_H", false);

    const Json& st = object(j, "strips");
    cfg.schedule.s = field<double>(st, "s", cfg.schedule.s);
    cfg.schedule.sigma = field<double>(st, "sigma", cfg.schedule.sigma);
    const Json& sc = object(j, "scheme");
    cfg.schedule.defect_tol = field<double>(sc, "defect_tol", cfg.schedule.defect_tol);
    cfg.schedule.max_iters = field<int>(sc, "max_iters", cfg.schedule.max_iters);
    cfg.schedule.gamma2 = field<double>(sc, "gamma2", cfg.schedule.gamma2);
    cfg.schedule.tau2 = field<double>(sc, "tau2", cfg.tau + 2.0);
    cfg.schedule.strict_exp_gate = field<bool>(sc, "strict_exp_gate", false);
    try {
        cfg.schedule.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const Json& ve = object(j, "verify");
    cfg.verify.T = field<double>(ve, "T", cfg.verify.T);
    cfg.verify.dt = field<double>(ve, "dt", cfg.verify.dt);
    cfg.verify.grid_N = field<int>(ve, "grid_N", cfg.verify.grid_N);
    cfg.verify.points = field<int>(ve, "points", cfg.verify.points);

    if (j.contains("certificate")) {
        const Json& ce = object(j, "certificate");
        CertificateConstants c;
        c.C = field<double>(ce, "C", c.C);
        c.gamma = field<double>(ce, "gamma", c.gamma);
        c.tau = field<double>(ce, "tau", c.tau);
        c.c = field<double>(ce, "c", c.c);
        c.t = field<double>(ce, "t", c.t);
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        cfg.certificate = c;
        if (ce.contains("y")) cfg.certificate_y = field<double>(ce, "y", 0.0);
        if (ce.contains("sigma")) cfg.certificate_sigma = field<double>(ce, "sigma", 0.0);
    }
    cfg.seed = field<std::uint64_t>(j, "seed", 0);
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

Json config_to_json(const ProblemConfig& cfg) {
    Json q = Json::array();
    for (int i = 0; i < cfg.n; ++i) {
        Json row = Json::array();
        for (int j = i; j < cfg.n; ++j) row.push_back(series_to_json(cfg.Q[i][j]));
        q.push_back(row);
    }
    Json out = {
        {"n", cfg.n},
        {"alpha", cfg.alpha},
        {"tau", cfg.tau},
        {"divisor_floor", cfg.divisor_floor},
        {"alpha_check_kmax", cfg.alpha_check_kmax},
        {"K0", {{"c", cfg.c0}, {"Q", q}, {"tail", series_to_json(cfg.tail)}}},
        {"perturbation", series_to_json(cfg.perturbation)},
        {"full_H", cfg.full_H},
        {"truncation",
         {{"kmax", cfg.grid.kmax},
          {"mmax", cfg.grid.mmax},
          {"oversample", cfg.grid.oversample},
          {"prune_rel", cfg.grid.prune_rel},
          {"alias_tol", cfg.grid.alias_tol}}},
        {"strips", {{"s", cfg.schedule.s}, {"sigma", cfg.schedule.sigma}}},
        {"scheme",
         {{"defect_tol", cfg.schedule.defect_tol},
          {"max_iters", cfg.schedule.max_iters},
          {"gamma2", cfg.schedule.gamma2},
          {"tau2", cfg.schedule.tau2},
          {"strict_exp_gate", cfg.schedule.strict_exp_gate}}},
        {"verify",
         {{"T", cfg.verify.T}, {"dt", cfg.verify.dt}, {"grid_N", cfg.verify.grid_N}, {"points", cfg.verify.points}}},
        {"seed", cfg.seed},
    };
    if (cfg.certificate) {
        const auto& c = *cfg.certificate;
        Json ce = {{"C", c.C}, {"gamma", c.gamma}, {"tau", c.tau}, {"c", c.c}, {"t", c.t}};
        if (cfg.certificate_y) ce["y"] = *cfg.certificate_y;
        if (cfg.certificate_sigma) ce["sigma"] = *cfg.certificate_sigma;
        out["certificate"] = ce;
    }
    return out;
}

Json step_to_json(const StepRecord& s) {
    Json out = {{"j", s.j},
                {"s_j", s.s_j},
                {"sigma_j", s.sigma_j},
                {"defect_norm", s.defect},
                {"defect_next", s.defect_next},
                {"kdot_norm", s.kdot_norm},
                {"gdot_norm", s.gdot_norm},
                {"truncation_debt", s.truncation_debt},
                {"exp_gate_ratio", s.exp_gate_ratio},
                {"picard_lipschitz", s.picard_lipschitz},
                {"smallness_ratio", s.smallness_ratio},
                {"linearized_residual", s.linearized_residual},
                {"second_average", s.second_average}};
    if (s.accumulator_gap >= 0.0) out["accumulator_gap"] = s.accumulator_gap;
    return out;
}

Json report_to_json(const IterationReport& r) {
    Json steps = Json::array();
    for (const auto& s : r.steps) steps.push_back(step_to_json(s));
    Json out = {{"steps", steps},
                {"outcome", outcome_name(r.outcome)},
                {"initial_defect", r.initial_defect},
                {"final_defect", r.final_defect},
                {"fitted_exponent", r.fitted_exponent},
                {"truncation_debt", r.truncation_debt},
                {"warnings", r.warnings}};
    if (r.conjugacy_residual >= 0.0) out["conjugacy_residual"] = r.conjugacy_residual;
    if (!r.failed_precondition.empty()) out["failed_precondition"] = r.failed_precondition;
    if (!r.message.empty()) out["message"] = r.message;
    return out;
}

Json certificate_to_json(const Certificate& c, const Simulation& sim) {
    Json steps = Json::array();
    for (const auto& s : sim.steps) steps.push_back({{"x_drift", s.x_drift}, {"y", s.y}});
    Json out = {{"ok", c.ok}, {"q", c.q}, {"predicted", c.predicted}, {"simulation", steps},
                {"borderline", sim.borderline}, {"x_within_C", sim.x_within_C}};
    if (!c.reason.empty()) out["reason"] = c.reason;
    return out;
}

Json flow_check_to_json(const FlowCheck& f) {
    return {{"max_torus_distance", f.max_torus_distance},
            {"rotation_error", f.rotation_error},
            {"energy_drift", f.energy_drift},
            {"escaped", f.escaped}};
}

std::string dump_json(const Json& j) {
    std::ostringstream os;
    write_json(os, j, 0);
    os << '\n';
    return os.str();
}

void write_embedding_csv(std::ostream& os, const TorusEmbedding& emb) {
    const int n = emb.dim;
    for (int j = 0; j < n; ++j) os << (j ? "," : "") << "theta_" << j + 1;
    for (int j = 0; j < n; ++j) os << ",theta_img_" << j + 1;
    for (int j = 0; j < n; ++j) os << ",r_img_" << j + 1;
    os << '\n';
    char buf[40];
    for (std::size_t p = 0; p < emb.size(); ++p) {
        for (int j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", emb.theta[p * n + j]);
            os << (j ? "," : "") << buf;
        }
        for (const auto* v : {&emb.theta_img, &emb.r_img})
            for (int j = 0; j < n; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", (*v)[p * n + j]);
                os << ',' << buf;
            }
        os << '\n';
    }
}

}  // namespace kam
