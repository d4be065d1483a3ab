#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; the two agree up to floating-point reassociation.

#include <span>
#include <vector>

#include "kam/series.hpp"

namespace kam {

/// Pre-decoded series for repeated pointwise evaluation.
class Evaluator {
public:
    explicit Evaluator(const Series& a);

    int dim() const { return dim_; }
    cplx value(const double* theta, const double* r) const;
    /// Fills dtheta[j] = d/dtheta_j, dr[j] = d/dr_j (real parts).
    double value_and_gradient(const double* theta, const double* r, double* dtheta,
                              double* dr) const;

private:
    void phases(const double* theta, std::vector<cplx>* table) const;

    int dim_ = 0;
    int kspan_ = 0;  // max |k_j| over the stored terms
    int mspan_ = 0;
    std::vector<std::array<int, kMaxDim>> k_;
    std::vector<std::array<int, kMaxDim>> m_;
    std::vector<cplx> c_;
};

namespace kernels {

/// out[p] = sum c e^{2 pi i k.theta_p} r_p^m; theta/r are row-major npts x dim,
/// r may be empty (evaluated at r = 0).
void evaluate_points_serial(const Series& a, std::span<const double> theta,
                            std::span<const double> r, std::span<cplx> out);
void evaluate_points_parallel(const Series& a, std::span<const double> theta,
                              std::span<const double> r, std::span<cplx> out);

Product convolve_serial(const Series& a, const Series& b, int kmax, int mmax, double tail_s);
Product convolve_parallel(const Series& a, const Series& b, int kmax, int mmax, double tail_s);

/// Threshold below which the parallel paths fall back to the serial ones.
inline constexpr std::size_t kParallelMinWork = 4096;

}  // namespace kernels

/// Caps OpenMP threads from the KAM_THREADS environment variable, if set.
void configure_threads_from_env();

}  // namespace kam
