#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kam/grid.hpp"
#include "kam/kernels.hpp"
#include "kam/normalform.hpp"
#include "kam/series.hpp"

namespace kam {

/// Fibered symplectomorphism (theta, r) -> (phi(theta), (r + rho(theta)) . phi'(theta)^{-1})
/// with phi = id + v and the closed 1-form rho = R + grad S.
struct GroupElement {
    std::vector<Series> v;
    std::vector<double> R;
    Series S;

    static GroupElement identity(int dim, int kmax);
    int dim() const { return static_cast<int>(R.size()); }
    Series rho(int j) const;
};

/// Exponential constants: smallness gamma_0 = 1/(36 n), displacement c_0 = 6 n.
double exp_gamma0(int dim);
double exp_c0(int dim);

enum class ExpGate {
    enforce,  // refuse when |G_dot|_{s+sigma} > gamma_0 sigma^2
    monitor,  // record the ratio, proceed while Picard still contracts
};

struct ExpResult {
    GroupElement element;
    double lie_norm = 0.0;    // |G_dot|_{s+sigma}
    double gate_ratio = 0.0;  // lie_norm / (gamma_0 sigma^2)
    double lipschitz = 0.0;   // Lipschitz bound of the Picard operator on [0, 1]
    int sweeps = 0;
    double displacement = 0.0;  // |exp G_dot - id|_s
    double bound = 0.0;         // c_0 sigma^{-1} |G_dot|_{s+sigma}
    TransformStats stats;
};

/// Time-one flow of the Lie element, theta-part by Picard iteration on a
/// grid with Chebyshev collocation in time; rho is the time average of the
/// pulled-back 1-form, which keeps it closed.
ExpResult exponential(const LieElement& gdot, const StripParams& strips, const GridOptions& opts,
                      ExpGate gate = ExpGate::enforce);

/// Map composition g1 o g2.
GroupElement compose(const GroupElement& g1, const GroupElement& g2, const GridOptions& opts,
                     TransformStats* stats = nullptr);

GroupElement inverse(const GroupElement& g, const GridOptions& opts, TransformStats* stats = nullptr);

/// H o G on an oversampled grid.
Series pullback(const Series& H, const GroupElement& g, const GridOptions& opts,
                TransformStats* stats = nullptr);

/// H o exp(t G_dot) - H by the Lie series sum_{k>=1} t^k/k! L^k H.
Series lie_transform_delta(const Series& H, const LieElement& gdot, double t, double s,
                           double* tail_norm = nullptr);
Series lie_transform(const Series& H, const LieElement& gdot, double t, double s);

/// Pointwise evaluation of a group element.
class PointMap {
public:
    explicit PointMap(const GroupElement& g);

    int dim() const { return dim_; }
    void apply(const double* theta, const double* r, double* theta_out, double* r_out) const;
    /// phi'(theta) row-major; entry (i, j) = d phi_i / d theta_j.
    void jacobian(const double* theta, double* out) const;
    void rho(const double* theta, double* out) const;

private:
    int dim_;
    std::vector<double> R_;
    std::vector<Evaluator> v_;
    std::vector<Evaluator> dv_;  // dv_[i * dim + j] = d v_i / d theta_j
    std::vector<Evaluator> dS_;
};

std::pair<std::vector<double>, std::vector<double>> apply_point(const GroupElement& g,
                                                                std::span<const double> theta,
                                                                std::span<const double> r);

/// max |J^T Omega J - Omega| over random points with |r| <= 0.1.
double symplectic_defect(const GroupElement& g, int npoints, std::uint64_t seed = 0);
using PhaseMap = std::function<void(const double* theta, const double* r, double* theta_out,
                                    double* r_out)>;
double symplectic_defect(const PhaseMap& map, int dim, int npoints, std::uint64_t seed = 0);

/// |G - id|_s: max over components of v and of (r + rho) A - r with |r| <= s.
double distance_from_identity(const GroupElement& g, double s, const GridOptions& opts);

/// min over a uniform grid of det(I + v'(theta)).
double min_jacobian_det(const GroupElement& g, int N = 64);

/// Group element corresponding to the flat shift rho = R + grad S, v = 0.
GroupElement fiber_translation(const std::vector<double>& R, const Series& S, int kmax);

}  // namespace kam
