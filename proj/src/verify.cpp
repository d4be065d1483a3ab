#include "kam/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kam/cohomology.hpp"
#include "kam/errors.hpp"

namespace kam {

namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

}  // namespace

TorusEmbedding torus_embedding(const GroupElement& gamma, int N) {
    const int n = gamma.dim();
    if (N < 2) throw std::invalid_argument("torus_embedding: N must be >= 2");
    const Grid grid{n, N};
    TorusEmbedding emb;
    emb.dim = n;
    emb.N = N;
    emb.theta = grid.points();
    const std::size_t npts = grid.size();
    emb.theta_img.resize(npts * n);
    emb.r_img.resize(npts * n);
    const PointMap map(gamma);
    const double zero[kMaxDim] = {};
    for (std::size_t p = 0; p < npts; ++p)
        map.apply(emb.theta.data() + p * n, zero, emb.theta_img.data() + p * n, emb.r_img.data() + p * n);
    for (double x : emb.theta_img)
        if (!std::isfinite(x)) throw Error("torus_embedding: non-finite image");
    for (double x : emb.r_img)
        if (!std::isfinite(x)) throw Error("torus_embedding: non-finite image");

    // degree one: along each axis the image angle increases monotonically by exactly 1
    std::size_t stride = 1;
    for (int j = n - 1; j >= 0; --j) {
        for (std::size_t p = 0; p < npts; ++p) {
            if ((p / stride) % N != 0) continue;
            double total = 0.0;
            for (int step = 0; step < N; ++step) {
                const std::size_t a = p + step * stride;
                const std::size_t b = step + 1 < N ? a + stride : p;
                double d = emb.theta_img[b * n + j] - emb.theta_img[a * n + j];
                if (step + 1 == N) d += 1.0;
                if (!(d > 0.0)) throw Error("torus_embedding: image angle not monotone; not a graph over the torus");
                total += d;
            }
            if (std::abs(total - 1.0) > 1e-9) throw Error("torus_embedding: winding number differs from 1");
        }
        stride *= N;
    }
    return emb;
}

double invariance_residual(const Series& H, const GroupElement& gamma, const TorusEmbedding& emb,
                           const std::vector<double>& alpha) {
    const int n = gamma.dim();
    if (H.dim() != n || emb.dim != n || static_cast<int>(alpha.size()) != n)
        throw std::invalid_argument("invariance_residual: dimension mismatch");
    const Evaluator h(H);
    std::vector<Evaluator> dv, ddv, dS, ddS;  // first and second theta-derivatives
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const Series d = deriv_theta(gamma.v[i], k);
            dv.emplace_back(d);
            for (int l = 0; l < n; ++l) ddv.emplace_back(deriv_theta(d, l));
        }
    for (int i = 0; i < n; ++i) {
        const Series d = deriv_theta(gamma.S, i);
        dS.emplace_back(d);
        for (int l = 0; l < n; ++l) ddS.emplace_back(deriv_theta(d, l));
    }

    const std::size_t npts = emb.size();
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (long p = 0; p < static_cast<long>(npts); ++p) {
        const double* th = emb.theta.data() + p * n;
        SmallMatrix J(n, n), dJ(n, n);
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1> rho(n), drho(n);
        for (int i = 0; i < n; ++i) {
            rho(i) = gamma.R[i] + dS[i].value(th, nullptr).real();
            drho(i) = 0.0;
            for (int l = 0; l < n; ++l) drho(i) += alpha[l] * ddS[i * n + l].value(th, nullptr).real();
            for (int k = 0; k < n; ++k) {
                J(i, k) = (i == k ? 1.0 : 0.0) + dv[i * n + k].value(th, nullptr).real();
                dJ(i, k) = 0.0;
                for (int l = 0; l < n; ++l)
                    dJ(i, k) += alpha[l] * ddv[(i * n + k) * n + l].value(th, nullptr).real();
            }
        }
        const SmallMatrix A = J.inverse();
        const SmallMatrix dA = -A * dJ * A;
        // D gamma (alpha, 0)
        const auto dtheta = J * Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
        const auto dr = (drho.transpose() * A + rho.transpose() * dA).transpose();

        double gth[kMaxDim], gr[kMaxDim];
        h.value_and_gradient(emb.theta_img.data() + p * n, emb.r_img.data() + p * n, gth, gr);
        for (int j = 0; j < n; ++j) {
            worst = std::max(worst, std::abs(gr[j] - dtheta(j)));
            worst = std::max(worst, std::abs(-gth[j] - dr(j)));
        }
    }
    return worst;
}

FlowCheck flow_check(const Series& H, const GroupElement& gamma, const GroupElement& G,
                     const std::vector<double>& alpha, const FlowCheckOptions& opts) {
    const int n = gamma.dim();
    if (H.dim() != n || G.dim() != n || static_cast<int>(alpha.size()) != n)
        throw std::invalid_argument("flow_check: dimension mismatch");
    if (!(opts.dt > 0.0) || opts.dt > 1e-2) throw std::invalid_argument("flow_check: dt must be in (0, 1e-2]");
    if (!(opts.T >= 0.0) || opts.points < 1 || opts.sample_every < 1)
        throw std::invalid_argument("flow_check: bad options");
    const Evaluator h(H);
    const PointMap gmap(gamma);
    const PointMap ginv(G);
    std::vector<Evaluator> vG;
    for (const auto& c : G.v) vG.emplace_back(c);
    const long steps = std::lround(opts.T / opts.dt);

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> starts(opts.points * n);
    for (double& x : starts) x = unit(rng);

    FlowCheck out;
    const int d = 2 * n;
    auto field = [&](const double* z, double* dz) {
        double gth[kMaxDim], gr[kMaxDim];
        h.value_and_gradient(z, z + n, gth, gr);
        for (int j = 0; j < n; ++j) {
            dz[j] = gr[j];
            dz[n + j] = -gth[j];
        }
    };
    auto distance = [&](const double* z) {
        double rho[kMaxDim];
        ginv.rho(z, rho);
        double worst = 0.0;
        for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(z[n + j] + rho[j]));
        return worst;
    };
    auto intrinsic = [&](const double* z, double* psi) {
        for (int j = 0; j < n; ++j) psi[j] = z[j] + vG[j].value(z, nullptr).real();
    };

    double max_dist = 0.0, max_rot = 0.0, max_drift = 0.0;
    bool escaped = false;
#pragma omp parallel for schedule(dynamic) reduction(max : max_dist, max_rot, max_drift) reduction(|| : escaped)
    for (int p = 0; p < opts.points; ++p) {
        double z[2 * kMaxDim], k1[2 * kMaxDim], k2[2 * kMaxDim], k3[2 * kMaxDim], k4[2 * kMaxDim],
            tmp[2 * kMaxDim];
        const double zero[kMaxDim] = {};
        gmap.apply(starts.data() + p * n, zero, z, z + n);
        for (int j = 0; j < n; ++j) z[n + j] += opts.start_offset;
        double psi0[kMaxDim], psi1[kMaxDim];
        intrinsic(z, psi0);
        const double e0 = h.value(z, z + n).real();
        max_dist = std::max(max_dist, distance(z));
        bool gone = false;
        for (long s = 1; s <= steps; ++s) {
            const double dt = opts.dt;
            field(z, k1);
            for (int i = 0; i < d; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
            field(tmp, k2);
            for (int i = 0; i < d; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
            field(tmp, k3);
            for (int i = 0; i < d; ++i) tmp[i] = z[i] + dt * k3[i];
            field(tmp, k4);
            for (int i = 0; i < d; ++i) z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            bool out_of_range = false;
            for (int j = 0; j < n; ++j) out_of_range = out_of_range || !(std::abs(z[n + j]) <= opts.r_limit);
            if (out_of_range) {
                gone = true;
                break;
            }
            if (s % opts.sample_every == 0 || s == steps) {
                max_dist = std::max(max_dist, distance(z));
                max_drift = std::max(max_drift, std::abs(h.value(z, z + n).real() - e0));
            }
        }
        escaped = escaped || gone;
        if (!gone) {
            intrinsic(z, psi1);
            for (int j = 0; j < n; ++j)
                max_rot = std::max(max_rot, dist_to_integer(psi1[j] - psi0[j] - alpha[j] * opts.T));
        }
    }
    out.max_torus_distance = max_dist;
    out.rotation_error = max_rot;
    out.energy_drift = max_drift;
    out.escaped = escaped;
    return out;
}

}  // namespace kam
