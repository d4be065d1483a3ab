#include "kam/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kam/errors.hpp"

namespace kam {

namespace {

std::array<int, kMaxDim> unit(int j, int times = 1) {
    std::array<int, kMaxDim> m{};
    m[j] = times;
    return m;
}

std::array<int, kMaxDim> pair_index(int i, int j) {
    std::array<int, kMaxDim> m{};
    m[i] += 1;
    m[j] += 1;
    return m;
}

double average_of(const Series& a) { return a.coeff(Mode{}).real(); }

Series strip_average(const Series& a) {
    const double avg = average_of(a);
    if (avg == 0.0) return a;
    return add_constant(a, -avg);
}

}  // namespace

LieElement LieElement::zero(int dim, int kmax) {
    LieElement g;
    g.R_dot.assign(dim, 0.0);
    g.S_dot = Series(dim, kmax, 0);
    g.phi_dot.assign(dim, Series(dim, kmax, 0));
    return g;
}

Series LieElement::rho_dot(int j) const {
    return add_constant(deriv_theta(S_dot, j), R_dot[j]);
}

LieElement LieElement::scaled(double t) const {
    LieElement out;
    out.R_dot = R_dot;
    for (auto& x : out.R_dot) x *= t;
    out.S_dot = scale(S_dot, t);
    for (const auto& p : phi_dot) out.phi_dot.push_back(scale(p, t));
    return out;
}

double LieElement::norm(double s) const {
    double worst = 0.0;
    for (int j = 0; j < dim(); ++j) {
        worst = std::max(worst, majorant_norm(rho_dot(j), s));
        worst = std::max(worst, majorant_norm(phi_dot[j], s));
    }
    return worst;
}

void LieElement::validate() const {
    const int n = dim();
    if (n < 1 || static_cast<int>(phi_dot.size()) != n || S_dot.dim() != n)
        throw std::invalid_argument("LieElement: inconsistent dimensions");
    auto check = [](const Series& a, const char* what) {
        if (!a.theta_only()) throw std::invalid_argument(std::string(what) + " must depend on theta only");
        if (std::abs(a.coeff(Mode{})) > 1e-12 * (1.0 + majorant_norm(a, 0.0)))
            throw std::invalid_argument(std::string(what) + " must have zero average");
    };
    check(S_dot, "S_dot");
    for (const auto& p : phi_dot) check(p, "phi_dot");
}

KolmogorovForm::KolmogorovForm(double c, Frequency freq, std::vector<std::vector<Series>> Q,
                               Series tail)
    : c_(c), freq_(std::move(freq)), Q_(std::move(Q)), tail_(std::move(tail)) {
    const int n = freq_.dim();
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("KolmogorovForm: bad dimension");
    if (static_cast<int>(Q_.size()) != n) throw std::invalid_argument("KolmogorovForm: Q must be n x n");
    if (tail_.dim() != n) throw std::invalid_argument("KolmogorovForm: tail dimension mismatch");
    if (tail_.mmax() < 2) throw std::invalid_argument("KolmogorovForm: mmax must be at least 2");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(Q_[i].size()) != n) throw std::invalid_argument("KolmogorovForm: Q must be n x n");
        for (int j = 0; j < n; ++j) {
            if (Q_[i][j].dim() != n || !Q_[i][j].theta_only())
                throw std::invalid_argument("KolmogorovForm: Q entries must be theta-only series");
            Q_[i][j] = Q_[i][j].retruncate(tail_.kmax(), tail_.mmax());
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (Q_[i][j].terms().size() != Q_[j][i].terms().size() ||
                !std::equal(Q_[i][j].terms().begin(), Q_[i][j].terms().end(), Q_[j][i].terms().begin(),
                            [](const Term& a, const Term& b) { return a.key == b.key && a.c == b.c; }))
                throw std::invalid_argument("KolmogorovForm: Q must be symmetric");
    for (const auto& t : tail_.terms())
        if (unpack(t.key).m_l1(n) < 3)
            throw std::invalid_argument("KolmogorovForm: tail must be O(r^3)");
}

KolmogorovForm KolmogorovForm::from_series(const Series& K, const Frequency& freq, double tol) {
    const int n = freq.dim();
    if (K.dim() != n) throw std::invalid_argument("from_series: dimension mismatch");
    const Decomposition d = decompose(K);
    const double c = average_of(d.H0);
    if (majorant_norm(strip_average(d.H0), 0.0) > tol)
        throw PreconditionError("normal-form shape", "r^0 part is not constant");
    for (int j = 0; j < n; ++j)
        if (majorant_norm(add_constant(d.H1[j], -freq.alpha[j]), 0.0) > tol)
            throw PreconditionError("normal-form shape", "r^1 part differs from alpha");
    std::vector<std::vector<Series>> Q(n, std::vector<Series>(n, Series(n, K.kmax(), K.mmax())));
    for (int i = 0; i < n; ++i) {
        Q[i][i] = taylor_coefficient(K, unit(i, 2));
        for (int j = i + 1; j < n; ++j) {
            Q[i][j] = scale(taylor_coefficient(K, pair_index(i, j)), 0.5);
            Q[j][i] = Q[i][j];
        }
    }
    return KolmogorovForm(c, freq, std::move(Q), remainder(K, 2));
}

Series KolmogorovForm::assemble() const {
    const int n = dim();
    std::vector<std::pair<Mode, cplx>> base{{Mode{}, cplx{c_, 0.0}}};
    for (int j = 0; j < n; ++j) {
        Mode m;
        m.m = unit(j);
        base.push_back({m, cplx{freq_.alpha[j], 0.0}});
    }
    Series out = Series::make(n, kmax(), mmax(), base);
    for (int i = 0; i < n; ++i) {
        out = add(out, times_monomial(Q_[i][i], unit(i, 2)));
        for (int j = i + 1; j < n; ++j)
            out = add(out, times_monomial(scale(Q_[i][j], 2.0), pair_index(i, j)));
    }
    return add(out, tail_);
}

Eigen::MatrixXd KolmogorovForm::average_Q() const {
    const int n = dim();
    Eigen::MatrixXd avg(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) avg(i, j) = average_of(Q_[i][j]);
    return avg;
}

KolmogorovForm KolmogorovForm::plus(const TangentForm& dk) const {
    const Series merged = add(assemble(), add_constant(dk.K2_dot.retruncate(kmax(), mmax()), dk.c_dot));
    return from_series(merged, freq_, 1e-12 * (1.0 + majorant_norm(merged, 0.0)));
}

Decomposition decompose(const Series& H) {
    Decomposition d;
    d.H0 = taylor_coefficient(H, {});
    for (int j = 0; j < H.dim(); ++j) d.H1.push_back(taylor_coefficient(H, unit(j)));
    d.rest = remainder(H, 1);
    return d;
}

NondegeneracyCheck check_nondegeneracy(const KolmogorovForm& K, double reference_det, double floor) {
    NondegeneracyCheck out;
    out.det = K.average_Q().determinant();
    out.ok = std::abs(out.det) >= floor && std::abs(out.det) >= 0.5 * std::abs(reference_det);
    return out;
}

Series lie_action(const Series& H, const LieElement& gdot, double tail_s, double* tail_norm) {
    const int n = H.dim();
    if (gdot.dim() != n) throw std::invalid_argument("lie_action: dimension mismatch");
    const int kmax = H.kmax();
    const int mmax = H.mmax();
    Series out(n, kmax, mmax);
    double tail = 0.0;
    for (int j = 0; j < n; ++j) {
        const Series dth = deriv_theta(H, j);
        if (!dth.empty() && !gdot.phi_dot[j].empty()) {
            auto p = mul(dth, gdot.phi_dot[j].retruncate(kmax, mmax), tail_s);
            out = add(out, p.value);
            tail += p.tail_norm;
        }
        const Series dr = deriv_r(H, j);
        if (dr.empty()) continue;
        Series field = gdot.rho_dot(j).retruncate(kmax, mmax);
        for (int i = 0; i < n; ++i) {
            const Series dphi = deriv_theta(gdot.phi_dot[i], j).retruncate(kmax, mmax);
            field = sub(field, times_monomial(dphi, unit(i)));
        }
        if (field.empty()) continue;
        auto p = mul(dr, field, tail_s);
        out = add(out, p.value);
        tail += p.tail_norm;
    }
    if (tail_norm) *tail_norm += tail;
    return out.retruncate(kmax, mmax);
}

Series directional_derivative(const KolmogorovForm& K, const LieElement& gdot) {
    return lie_action(K.assemble(), gdot);
}

LinearizedSolution solve_linearized(const KolmogorovForm& K, const Series& hdot, double tail_s) {
    const int n = K.dim();
    if (hdot.dim() != n) throw std::invalid_argument("solve_linearized: dimension mismatch");
    const Frequency& freq = K.freq();
    const int kmax = std::max(K.kmax(), hdot.kmax());
    const int mmax = K.mmax();
    const Series h = hdot.retruncate(kmax, mmax);

    LinearizedSolution sol;
    const Eigen::MatrixXd qavg = K.average_Q();
    const auto nd = check_nondegeneracy(K);
    if (!nd.ok)
        throw PreconditionError("nondegeneracy", "|det <Q>| = " + std::to_string(std::abs(nd.det)) +
                                                     " below floor");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qavg);
    const auto sv = svd.singularValues();
    sol.condition = sv(0) / sv(n - 1);
    if (!(sol.condition <= 1e8))
        throw PreconditionError("conditioning", "condition number of <Q> is " +
                                                    std::to_string(sol.condition));

    const Decomposition d = decompose(h);
    const double h0_average = average_of(d.H0);

    // order r^0: c_dot + alpha.(R_dot + S_dot') = H0
    const Series S_dot = solve_homological(strip_average(d.H0), freq);
    std::vector<Series> dS;
    for (int j = 0; j < n; ++j) dS.push_back(deriv_theta(S_dot, j));

    // Q S' products are reused for the R_dot average and the phi_dot rhs
    std::vector<Series> QdS(n, Series(n, kmax, mmax));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto p = mul(K.Q(i, j), dS[j], tail_s);
            QdS[i] = add(QdS[i], p.value);
            sol.tail_norm += p.tail_norm;
        }

    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = average_of(d.H1[i]) - 2.0 * average_of(QdS[i]);
    const Eigen::VectorXd R = 0.5 * qavg.partialPivLu().solve(b);

    // order r^1: -alpha.phi_dot' + 2 Q (R_dot + S_dot') = H1
    LieElement g;
    g.R_dot.assign(R.data(), R.data() + n);
    g.S_dot = S_dot.retruncate(kmax, mmax);
    for (int i = 0; i < n; ++i) {
        Series rhs = sub(scale(QdS[i], 2.0), d.H1[i]);
        for (int j = 0; j < n; ++j) rhs = add(rhs, scale(K.Q(i, j), 2.0 * R(j)));
        const double avg = average_of(rhs);
        sol.second_average = std::max(sol.second_average, std::abs(avg));
        if (std::abs(avg) > 1e-12)
            throw Error("solve_linearized: second homological right-hand side has average " +
                        std::to_string(avg));
        g.phi_dot.push_back(solve_homological(strip_average(rhs), freq).retruncate(kmax, mmax));
    }

    sol.kdot.c_dot = h0_average - R.dot(Eigen::Map<const Eigen::VectorXd>(freq.alpha.data(), n));
    double tail = 0.0;
    const Series action = lie_action(K.assemble(), g, tail_s, &tail);
    sol.tail_norm += tail;
    sol.kdot.K2_dot = remainder(sub(h, action), 1);
    sol.gdot = std::move(g);
    return sol;
}

double linearized_residual(const KolmogorovForm& K, const Series& hdot, const TangentForm& kdot,
                           const LieElement& gdot, double s) {
    const Series lhs = add(add_constant(kdot.K2_dot, kdot.c_dot), lie_action(K.assemble(), gdot));
    return majorant_norm(sub(lhs, hdot), s);
}

}  // namespace kam
