#include "kam/group.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "kam/errors.hpp"

namespace kam {

namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

constexpr int kNodes = 20;  // collocation degree in time
constexpr double kPicardTol = 1e-14;
constexpr int kPicardMaxSweeps = 50;

// Chebyshev-Lobatto nodes on [0, 1] and the matrix of integrals
// int_0^{t_q} l_j(t) dt of the Lagrange basis through them.
struct TimeCollocation {
    std::vector<double> t;
    std::vector<double> integral;  // (kNodes+1)^2 row-major

    TimeCollocation() {
        const int P = kNodes;
        t.resize(P + 1);
        std::vector<double> w(P + 1);
        for (int q = 0; q <= P; ++q) {
            t[q] = 0.5 * (1.0 - std::cos(M_PI * q / P));
            w[q] = (q % 2 ? -1.0 : 1.0) * ((q == 0 || q == P) ? 0.5 : 1.0);
        }
        auto lagrange = [&](int l, double x) {
            double num = 0.0;
            double den = 0.0;
            for (int q = 0; q <= P; ++q) {
                const double d = x - t[q];
                if (d == 0.0) return q == l ? 1.0 : 0.0;
                den += w[q] / d;
                if (q == l) num = w[q] / d;
            }
            return num / den;
        };
        integral.assign((P + 1) * (P + 1), 0.0);
        for (int q = 1; q <= P; ++q)
            for (int l = 0; l <= P; ++l)
                integral[q * (P + 1) + l] = boost::math::quadrature::gauss<double, 30>::integrate(
                    [&](double x) { return lagrange(l, x); }, 0.0, t[q]);
    }
};

const TimeCollocation& collocation() {
    static const TimeCollocation c;
    return c;
}

Series strip_average(const Series& a) {
    const double avg = a.coeff(Mode{}).real();
    return avg == 0.0 ? a : add_constant(a, -avg);
}

Series zero_theta(int dim, int kmax) { return Series(dim, kmax, 0); }

std::vector<std::vector<double>> component_values(const std::vector<Series>& comps,
                                                  std::span<const double> pts) {
    std::vector<std::vector<double>> out;
    out.reserve(comps.size());
    for (const auto& c : comps) out.push_back(series_at(c, pts));
    return out;
}

GridOptions theta_opts(const GridOptions& opts) {
    GridOptions o = opts;
    o.mmax = 0;
    return o;
}

// Dense polynomials in r of total degree <= mmax.
class TaylorBasis {
public:
    TaylorBasis(int dim, int mmax) : dim_(dim), ms_(taylor_indices(dim, mmax)) {
        for (std::size_t i = 0; i < ms_.size(); ++i) index_[key(ms_[i])] = static_cast<int>(i);
        for (std::size_t a = 0; a < ms_.size(); ++a)
            for (std::size_t b = 0; b < ms_.size(); ++b) {
                std::array<int, kMaxDim> m{};
                int deg = 0;
                for (int j = 0; j < dim; ++j) {
                    m[j] = ms_[a][j] + ms_[b][j];
                    deg += m[j];
                }
                if (deg <= mmax) products_.push_back({int(a), int(b), index_.at(key(m))});
            }
    }
    std::size_t size() const { return ms_.size(); }
    const std::array<int, kMaxDim>& monomial(std::size_t i) const { return ms_[i]; }
    int index(const std::array<int, kMaxDim>& m) const { return index_.at(key(m)); }

    void multiply(const double* a, const double* b, double* out) const {
        std::fill(out, out + ms_.size(), 0.0);
        for (const auto& p : products_) out[p.c] += a[p.a] * b[p.b];
    }

private:
    struct Triple {
        int a, b, c;
    };
    static Key key(const std::array<int, kMaxDim>& m) {
        Mode mode;
        mode.m = m;
        return pack(mode);
    }
    int dim_;
    std::vector<std::array<int, kMaxDim>> ms_;
    std::unordered_map<Key, int> index_;
    std::vector<Triple> products_;
};

}  // namespace

GroupElement GroupElement::identity(int dim, int kmax) {
    GroupElement g;
    g.v.assign(dim, zero_theta(dim, kmax));
    g.R.assign(dim, 0.0);
    g.S = zero_theta(dim, kmax);
    return g;
}

Series GroupElement::rho(int j) const { return add_constant(deriv_theta(S, j), R[j]); }

double exp_gamma0(int dim) { return 1.0 / (36.0 * dim); }
double exp_c0(int dim) { return 6.0 * dim; }

PointMap::PointMap(const GroupElement& g) : dim_(g.dim()), R_(g.R) {
    for (int i = 0; i < dim_; ++i) {
        v_.emplace_back(g.v[i]);
        dS_.emplace_back(deriv_theta(g.S, i));
        for (int j = 0; j < dim_; ++j) dv_.emplace_back(deriv_theta(g.v[i], j));
    }
}

void PointMap::jacobian(const double* theta, double* out) const {
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            out[i * dim_ + j] = (i == j ? 1.0 : 0.0) + dv_[i * dim_ + j].value(theta, nullptr).real();
}

void PointMap::rho(const double* theta, double* out) const {
    for (int j = 0; j < dim_; ++j) out[j] = R_[j] + dS_[j].value(theta, nullptr).real();
}

void PointMap::apply(const double* theta, const double* r, double* theta_out, double* r_out) const {
    double jac[kMaxDim * kMaxDim];
    double rho_val[kMaxDim];
    jacobian(theta, jac);
    rho(theta, rho_val);
    SmallMatrix J(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) J(i, j) = jac[i * dim_ + j];
    const SmallMatrix A = J.inverse();
    for (int j = 0; j < dim_; ++j) {
        theta_out[j] = theta[j] + v_[j].value(theta, nullptr).real();
        double acc = 0.0;
        for (int i = 0; i < dim_; ++i) acc += (r[i] + rho_val[i]) * A(i, j);
        r_out[j] = acc;
    }
}

std::pair<std::vector<double>, std::vector<double>> apply_point(const GroupElement& g,
                                                                std::span<const double> theta,
                                                                std::span<const double> r) {
    const auto n = static_cast<std::size_t>(g.dim());
    if (theta.size() != n || r.size() != n) throw std::invalid_argument("apply_point: dimension mismatch");
    std::vector<double> th(n), rr(n);
    PointMap(g).apply(theta.data(), r.data(), th.data(), rr.data());
    return {th, rr};
}

ExpResult exponential(const LieElement& gdot, const StripParams& strips, const GridOptions& opts,
                      ExpGate gate) {
    strips.validate();
    gdot.validate();
    const int n = gdot.dim();
    ExpResult out;
    out.lie_norm = gdot.norm(strips.s + strips.sigma);
    const double limit = exp_gamma0(n) * strips.sigma * strips.sigma;
    out.gate_ratio = out.lie_norm / limit;
    if (gate == ExpGate::enforce && out.lie_norm > limit)
        throw PreconditionError("exp-smallness", "|G_dot|_{s+sigma} = " + std::to_string(out.lie_norm) +
                                                     " exceeds gamma_0 sigma^2 = " + std::to_string(limit));
    for (int j = 0; j < n; ++j) {
        double row = 0.0;
        for (int i = 0; i < n; ++i) row += majorant_norm(deriv_theta(gdot.phi_dot[j], i), 0.0);
        out.lipschitz = std::max(out.lipschitz, row);
    }
    if (out.lipschitz > 0.5)
        throw PreconditionError("picard-contraction", "Lipschitz bound " + std::to_string(out.lipschitz) +
                                                          " of the Picard operator exceeds 1/2");

    const GridOptions topts = theta_opts(opts);
    const Grid grid = opts.grid(n);
    const std::vector<double> base = grid.points();
    const std::size_t npts = grid.size();
    const auto& col = collocation();
    const int Q = kNodes + 1;

    // f[(q * npts + p) * n + j]: displacement at time t_q of the orbit from theta_p
    std::vector<double> f(Q * npts * n);
    {
        const auto phi0 = component_values(gdot.phi_dot, base);
        for (int q = 0; q < Q; ++q)
            for (std::size_t p = 0; p < npts; ++p)
                for (int j = 0; j < n; ++j) f[(q * npts + p) * n + j] = col.t[q] * phi0[j][p];
    }
    std::vector<double> pts(Q * npts * n);
    auto positions = [&] {
        for (int q = 0; q < Q; ++q)
            for (std::size_t p = 0; p < npts; ++p)
                for (int j = 0; j < n; ++j)
                    pts[(q * npts + p) * n + j] = base[p * n + j] + f[(q * npts + p) * n + j];
    };
    bool converged = false;
    for (int sweep = 1; sweep <= kPicardMaxSweeps; ++sweep) {
        positions();
        const auto F = component_values(gdot.phi_dot, pts);
        double change = 0.0;
        for (int q = 0; q < Q; ++q)
            for (std::size_t p = 0; p < npts; ++p)
                for (int j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (int l = 0; l < Q; ++l) acc += col.integral[q * Q + l] * F[j][l * npts + p];
                    double& slot = f[(q * npts + p) * n + j];
                    change = std::max(change, std::abs(acc - slot));
                    slot = acc;
                }
        out.sweeps = sweep;
        if (change < kPicardTol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error("exp: Picard iteration failed to contract");

    positions();
    const std::vector<double> S_at = series_at(gdot.S_dot, pts);
    std::vector<std::vector<double>> v_grid(n, std::vector<double>(npts));
    std::vector<double> S_grid(npts, 0.0);
    double S_scale = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
        for (int j = 0; j < n; ++j) v_grid[j][p] = f[(kNodes * npts + p) * n + j];
        double acc = 0.0;
        double mag = 0.0;
        for (int q = 0; q < Q; ++q) {
            double integrand = S_at[q * npts + p];
            double size = std::abs(integrand);
            for (int j = 0; j < n; ++j) {
                const double term = gdot.R_dot[j] * f[(q * npts + p) * n + j];
                integrand += term;
                size += std::abs(term);
            }
            acc += col.integral[kNodes * Q + q] * integrand;
            mag += std::abs(col.integral[kNodes * Q + q]) * size;
        }
        S_grid[p] = acc;
        S_scale = std::max(S_scale, mag);
    }
    GroupElement& g = out.element;
    g.R = gdot.R_dot;
    for (int j = 0; j < n; ++j) g.v.push_back(grid_to_series(grid, v_grid[j], topts, {}, &out.stats));
    g.S = strip_average(grid_to_series(grid, S_grid, topts, {}, &out.stats, S_scale));

    out.displacement = distance_from_identity(g, strips.s, opts);
    out.bound = exp_c0(n) / strips.sigma * out.lie_norm;
    if (gate == ExpGate::enforce && out.displacement > out.bound)
        throw Error("exp: displacement " + std::to_string(out.displacement) +
                    " violates the c_0 sigma^{-1} |G_dot| estimate " + std::to_string(out.bound));
    return out;
}

GroupElement compose(const GroupElement& g1, const GroupElement& g2, const GridOptions& opts,
                     TransformStats* stats) {
    const int n = g1.dim();
    if (g2.dim() != n) throw std::invalid_argument("compose: dimension mismatch");
    const GridOptions topts = theta_opts(opts);
    const Grid grid = opts.grid(n);
    const std::vector<double> base = grid.points();
    const std::size_t npts = grid.size();
    const auto v2 = component_values(g2.v, base);
    std::vector<double> moved(base.size());
    for (std::size_t p = 0; p < npts; ++p)
        for (int j = 0; j < n; ++j) moved[p * n + j] = base[p * n + j] + v2[j][p];
    const auto v1 = component_values(g1.v, moved);
    const auto S1 = series_at(g1.S, moved);
    const auto S2 = series_on_grid(g2.S, grid);

    GroupElement out;
    out.R.resize(n);
    for (int j = 0; j < n; ++j) out.R[j] = g1.R[j] + g2.R[j];
    std::vector<double> S_grid(npts);
    double S_scale = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
        double acc = S2[p] + S1[p];
        double mag = std::abs(S2[p]) + std::abs(S1[p]);
        for (int j = 0; j < n; ++j) {
            acc += g1.R[j] * v2[j][p];
            mag += std::abs(g1.R[j] * v2[j][p]);
        }
        S_grid[p] = acc;
        S_scale = std::max(S_scale, mag);
    }
    for (int j = 0; j < n; ++j) {
        std::vector<double> vj(npts);
        double scale = 0.0;
        for (std::size_t p = 0; p < npts; ++p) {
            vj[p] = v2[j][p] + v1[j][p];
            scale = std::max(scale, std::abs(v2[j][p]) + std::abs(v1[j][p]));
        }
        out.v.push_back(grid_to_series(grid, vj, topts, {}, stats, scale));
    }
    out.S = strip_average(grid_to_series(grid, S_grid, topts, {}, stats, S_scale));
    return out;
}

double min_jacobian_det(const GroupElement& g, int N) {
    const int n = g.dim();
    const Grid grid{n, N};
    const auto pts = grid.points();
    const PointMap map(g);
    double worst = std::numeric_limits<double>::infinity();
    double jac[kMaxDim * kMaxDim];
    for (std::size_t p = 0; p < grid.size(); ++p) {
        map.jacobian(pts.data() + p * n, jac);
        SmallMatrix J(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) J(i, j) = jac[i * n + j];
        worst = std::min(worst, J.determinant());
    }
    return worst;
}

GroupElement inverse(const GroupElement& g, const GridOptions& opts, TransformStats* stats) {
    const int n = g.dim();
    const double det = min_jacobian_det(g, 64);
    if (!(det > 0.5))
        throw PreconditionError("inverse-near-identity",
                                "min det(I + v') = " + std::to_string(det) + " is not above 1/2");
    const GridOptions topts = theta_opts(opts);
    const Grid grid = opts.grid(n);
    const std::vector<double> base = grid.points();
    const std::size_t npts = grid.size();
    const PointMap map(g);
    std::vector<Evaluator> v;
    for (const auto& c : g.v) v.emplace_back(c);

    // w(theta) with phi(theta + w) = theta, by Newton's method pointwise
    std::vector<double> w(npts * n);
    bool stalled = false;
#pragma omp parallel for schedule(static) reduction(|| : stalled)
    for (long p = 0; p < static_cast<long>(npts); ++p) {
        double x[kMaxDim];
        double jac[kMaxDim * kMaxDim];
        double* wp = w.data() + p * n;
        for (int j = 0; j < n; ++j) wp[j] = -v[j].value(base.data() + p * n, nullptr).real();
        bool done = false;
        for (int it = 0; it < 50 && !done; ++it) {
            for (int j = 0; j < n; ++j) x[j] = base[p * n + j] + wp[j];
            Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1> F(n);
            for (int j = 0; j < n; ++j) F(j) = wp[j] + v[j].value(x, nullptr).real();
            map.jacobian(x, jac);
            SmallMatrix J(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) J(i, j) = jac[i * n + j];
            const auto step = J.partialPivLu().solve(F);
            double size = 0.0;
            for (int j = 0; j < n; ++j) {
                wp[j] -= step(j);
                size = std::max(size, std::abs(step(j)));
            }
            done = size < 1e-16 || F.cwiseAbs().maxCoeff() < 1e-17;
        }
        if (!done) {
            for (int j = 0; j < n; ++j) x[j] = base[p * n + j] + wp[j];
            double res = 0.0;
            for (int j = 0; j < n; ++j)
                res = std::max(res, std::abs(wp[j] + v[j].value(x, nullptr).real()));
            if (res > 1e-14) stalled = true;
        }
    }
    if (stalled) throw Error("inverse: Newton iteration stagnated; map too far from identity");

    std::vector<double> moved(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) moved[i] = base[i] + w[i];
    const auto S_moved = series_at(g.S, moved);
    GroupElement out;
    out.R.resize(n);
    for (int j = 0; j < n; ++j) out.R[j] = -g.R[j];
    std::vector<double> S_grid(npts);
    double S_scale = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
        double acc = S_moved[p];
        double mag = std::abs(acc);
        for (int j = 0; j < n; ++j) {
            acc += g.R[j] * w[p * n + j];
            mag += std::abs(g.R[j] * w[p * n + j]);
        }
        S_grid[p] = -acc;
        S_scale = std::max(S_scale, mag);
    }
    for (int j = 0; j < n; ++j) {
        std::vector<double> wj(npts);
        for (std::size_t p = 0; p < npts; ++p) wj[p] = w[p * n + j];
        out.v.push_back(grid_to_series(grid, wj, topts, {}, stats));
    }
    out.S = strip_average(grid_to_series(grid, S_grid, topts, {}, stats, S_scale));
    return out;
}

Series pullback(const Series& H, const GroupElement& g, const GridOptions& opts,
                TransformStats* stats) {
    const int n = H.dim();
    if (g.dim() != n) throw std::invalid_argument("pullback: dimension mismatch");
    const int mmax = H.mmax();
    GridOptions popts = opts;
    popts.mmax = mmax;
    const Grid grid = opts.grid(n);
    const std::vector<double> base = grid.points();
    const std::size_t npts = grid.size();
    const TaylorBasis basis(n, mmax);
    const std::size_t M = basis.size();
    std::vector<Evaluator> coeff;
    std::vector<int> present;
    for (std::size_t i = 0; i < M; ++i) {
        const Series hm = taylor_coefficient(H, basis.monomial(i));
        if (hm.empty()) continue;
        coeff.emplace_back(hm);
        present.push_back(static_cast<int>(i));
    }
    const PointMap map(g);
    std::vector<Evaluator> v;
    for (const auto& c : g.v) v.emplace_back(c);
    std::vector<double> values(M * npts, 0.0);
    std::vector<double> sizes(M * npts, 0.0);  // sum of |summands|, the rounding scale

#pragma omp parallel
    {
        std::vector<double> lin(n * M), powers((mmax + 1) * n * M), term(M), tmp(M);
        double jac[kMaxDim * kMaxDim];
        double rho[kMaxDim];
        double moved[kMaxDim];
#pragma omp for schedule(static)
        for (long p = 0; p < static_cast<long>(npts); ++p) {
            const double* th = base.data() + p * n;
            map.jacobian(th, jac);
            map.rho(th, rho);
            SmallMatrix J(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) J(i, j) = jac[i * n + j];
            const SmallMatrix A = J.inverse();
            for (int j = 0; j < n; ++j) moved[j] = th[j] + v[j].value(th, nullptr).real();
            // r'_j = sum_i (r_i + rho_i) A_ij as a degree-one polynomial in r
            std::fill(lin.begin(), lin.end(), 0.0);
            for (int j = 0; j < n; ++j) {
                double* lj = lin.data() + j * M;
                for (int i = 0; i < n; ++i) {
                    lj[0] += rho[i] * A(i, j);
                    if (mmax >= 1) {
                        std::array<int, kMaxDim> e{};
                        e[i] = 1;
                        lj[basis.index(e)] += A(i, j);
                    }
                }
                double* p0 = powers.data() + (j * (mmax + 1)) * M;
                std::fill(p0, p0 + M, 0.0);
                p0[0] = 1.0;
                for (int e = 1; e <= mmax; ++e)
                    basis.multiply(p0 + (e - 1) * M, lj, p0 + e * M);
            }
            std::vector<double> acc(M, 0.0), mag(M, 0.0);
            for (std::size_t c = 0; c < coeff.size(); ++c) {
                const auto& m = basis.monomial(present[c]);
                const double h = coeff[c].value(moved, nullptr).real();
                std::fill(term.begin(), term.end(), 0.0);
                term[0] = 1.0;
                for (int j = 0; j < n; ++j) {
                    if (m[j] == 0) continue;
                    basis.multiply(term.data(), powers.data() + (j * (mmax + 1) + m[j]) * M, tmp.data());
                    std::swap(term, tmp);
                }
                for (std::size_t i = 0; i < M; ++i) {
                    acc[i] += h * term[i];
                    mag[i] += std::abs(h * term[i]);
                }
            }
            for (std::size_t i = 0; i < M; ++i) {
                values[i * npts + p] = acc[i];
                sizes[i * npts + p] = mag[i];
            }
        }
    }

    Series out(n, opts.kmax, mmax);
    for (std::size_t i = 0; i < M; ++i) {
        const std::span<const double> slice(values.data() + i * npts, npts);
        if (std::all_of(slice.begin(), slice.end(), [](double x) { return x == 0.0; })) continue;
        const double scale = *std::max_element(sizes.begin() + i * npts, sizes.begin() + (i + 1) * npts);
        out = add(out, grid_to_series(grid, slice, popts, basis.monomial(i), stats, scale));
    }
    return out;
}

Series lie_transform_delta(const Series& H, const LieElement& gdot, double t, double s,
                           double* tail_norm) {
    Series term = H;
    Series total(H.dim(), H.kmax(), H.mmax());
    const double scale_ref = std::max(majorant_norm(H, s), 1e-300);
    for (int k = 1; k <= 60; ++k) {
        term = scale(lie_action(term, gdot, s, tail_norm), t / k);
        if (term.empty()) return total;
        total = add(total, term);
        const double size = majorant_norm(term, s);
        if (size <= 1e-20 * scale_ref || size < 1e-300) return total;
    }
    throw Error("Lie series failed to converge in 60 terms");
}

Series lie_transform(const Series& H, const LieElement& gdot, double t, double s) {
    return add(H, lie_transform_delta(H, gdot, t, s));
}

double symplectic_defect(const PhaseMap& map, int dim, int npoints, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 1.0);
    std::uniform_real_distribution<double> action(-0.1, 0.1);
    const int d = 2 * dim;
    const double h = 1e-5;
    double worst = 0.0;
    for (int p = 0; p < npoints; ++p) {
        double z[2 * kMaxDim];
        for (int j = 0; j < dim; ++j) z[j] = angle(rng);
        for (int j = 0; j < dim; ++j) z[dim + j] = action(rng);
        Eigen::MatrixXd J(d, d);
        for (int c = 0; c < d; ++c) {
            double zp[2 * kMaxDim], zm[2 * kMaxDim], op[2 * kMaxDim], om[2 * kMaxDim];
            std::copy(z, z + d, zp);
            std::copy(z, z + d, zm);
            zp[c] += h;
            zm[c] -= h;
            map(zp, zp + dim, op, op + dim);
            map(zm, zm + dim, om, om + dim);
            for (int r = 0; r < d; ++r) J(r, c) = (op[r] - om[r]) / (2 * h);
        }
        Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
        omega.topRightCorner(dim, dim) = Eigen::MatrixXd::Identity(dim, dim);
        omega.bottomLeftCorner(dim, dim) = -Eigen::MatrixXd::Identity(dim, dim);
        worst = std::max(worst, (J.transpose() * omega * J - omega).cwiseAbs().maxCoeff());
    }
    return worst;
}

double symplectic_defect(const GroupElement& g, int npoints, std::uint64_t seed) {
    const PointMap map(g);
    return symplectic_defect(
        [&](const double* th, const double* r, double* tho, double* ro) { map.apply(th, r, tho, ro); },
        g.dim(), npoints, seed);
}

double distance_from_identity(const GroupElement& g, double s, const GridOptions& opts) {
    const int n = g.dim();
    const GridOptions topts = theta_opts(opts);
    const Grid grid = opts.grid(n);
    const auto base = grid.points();
    const std::size_t npts = grid.size();
    const PointMap map(g);
    std::vector<std::vector<double>> a_minus_i(n * n, std::vector<double>(npts));
    double jac[kMaxDim * kMaxDim];
    for (std::size_t p = 0; p < npts; ++p) {
        map.jacobian(base.data() + p * n, jac);
        SmallMatrix J(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) J(i, j) = jac[i * n + j];
        const SmallMatrix A = J.inverse();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a_minus_i[i * n + j][p] = A(i, j) - (i == j ? 1.0 : 0.0);
    }
    std::vector<Series> dA;
    // A - I is formed by cancellation against entries of size one
    for (const auto& vals : a_minus_i) dA.push_back(grid_to_series(grid, vals, topts, {}, nullptr, 1.0));
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        worst = std::max(worst, majorant_norm(g.v[j], s));
        Series shift = g.rho(j);
        double linear = 0.0;
        for (int i = 0; i < n; ++i) {
            shift = add(shift, mul(g.rho(i), dA[i * n + j]).value);
            linear += majorant_norm(dA[i * n + j], s);
        }
        worst = std::max(worst, majorant_norm(shift, s) + s * linear);
    }
    return worst;
}

GroupElement fiber_translation(const std::vector<double>& R, const Series& S, int kmax) {
    const int n = static_cast<int>(R.size());
    GroupElement g = GroupElement::identity(n, kmax);
    g.R = R;
    g.S = strip_average(S.retruncate(kmax, 0));
    return g;
}

}  // namespace kam
