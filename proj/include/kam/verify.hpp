#pragma once

#include <cstdint>
#include <vector>

#include "kam/group.hpp"

namespace kam {

/// Samples of gamma(theta, 0) on a uniform N^n grid, row-major npts x dim.
struct TorusEmbedding {
    int dim = 0;
    int N = 0;
    std::vector<double> theta;
    std::vector<double> theta_img;
    std::vector<double> r_img;

    std::size_t size() const { return dim ? theta.size() / dim : 0; }
};

/// Throws Error when the image is not finite or does not wind once around
/// each angle.
TorusEmbedding torus_embedding(const GroupElement& gamma, int N);

/// max over the grid of |X_H(gamma(theta, 0)) - D gamma(theta, 0) (alpha, 0)|,
/// with the theta-derivative of gamma taken spectrally.
double invariance_residual(const Series& H, const GroupElement& gamma, const TorusEmbedding& emb,
                           const std::vector<double>& alpha);

struct FlowCheckOptions {
    double T = 100.0;
    double dt = 1e-3;
    int points = 20;
    int sample_every = 10;  // steps between torus-distance samples
    double r_limit = 0.1;   // |r| beyond this declares an escape
    double start_offset = 0.0;  // added to r at t = 0 (negative controls)
    std::uint64_t seed = 0;
};

struct FlowCheck {
    double max_torus_distance = 0.0;
    double rotation_error = 0.0;
    double energy_drift = 0.0;
    bool escaped = false;
};

/// RK4 integration of theta' = dH/dr, r' = -dH/dtheta from points on gamma(T_0).
/// The torus distance is |r + rho_G(theta)| with G = gamma^{-1}: the torus is the
/// graph r = -rho_G(theta). The rotation error is taken in the intrinsic angle
/// theta + v_G(theta).
FlowCheck flow_check(const Series& H, const GroupElement& gamma, const GroupElement& G,
                     const std::vector<double>& alpha, const FlowCheckOptions& opts);

}  // namespace kam
