#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace kam {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 4;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Multi-index of a Fourier-Taylor mode: e^{2 pi i k.theta} r^m.
struct Mode {
    std::array<int, kMaxDim> k{};
    std::array<int, kMaxDim> m{};

    int k_l1(int dim) const;
    int m_l1(int dim) const;
    Mode conj() const;  // k -> -k
    bool operator==(const Mode&) const = default;
};

using Key = std::uint64_t;

Key pack(const Mode& mode);
Mode unpack(Key key);

struct Term {
    Key key;
    cplx c;
};

/// Truncated Fourier-Taylor series sum c_{k,m} e^{2 pi i k.theta} r^m in
/// dim angle/action pairs, |k|_1 <= kmax, |m|_1 <= mmax.
///
/// Both members of each +-k pair are stored. Values are immutable once
/// built; every operation returns a new series.
class Series {
public:
    Series() = default;
    Series(int dim, int kmax, int mmax);

    /// Builds from raw coefficients, projecting onto real functions:
    /// c_{k,m} <- (c_{k,m} + conj(c_{-k,m})) / 2.
    static Series make(int dim, int kmax, int mmax,
                       const std::vector<std::pair<Mode, cplx>>& coeffs);

    /// Builds from terms that are already real up to rounding. Drift larger
    /// than 1e-12 (relative) is treated as corrupted input and throws.
    static Series from_terms(int dim, int kmax, int mmax, std::vector<Term> terms,
                             double drop_below = 0.0);

    static Series constant(int dim, int kmax, int mmax, double value);

    int dim() const { return dim_; }
    int kmax() const { return kmax_; }
    int mmax() const { return mmax_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    cplx coeff(const Mode& mode) const;
    bool contains(const Mode& mode) const;

    /// True when no term carries a positive power of r.
    bool theta_only() const;

    /// Same coefficients, different truncation (drops what falls outside).
    Series retruncate(int kmax, int mmax) const;

private:
    int dim_ = 0;
    int kmax_ = 0;
    int mmax_ = 0;
    std::vector<Term> terms_;  // sorted by key, zeros removed
};

struct StripParams {
    double s = 0.1;
    double sigma = 0.2;

    void validate() const;
};

Series add(const Series& a, const Series& b);
Series sub(const Series& a, const Series& b);
Series scale(const Series& a, double lambda);
Series add_constant(const Series& a, double value);

struct Product {
    Series value;
    double tail_norm = 0.0;  // majorant norm of the discarded convolution tail
};

/// Full convolution truncated to max(kmax), max(mmax) of the operands.
Product mul(const Series& a, const Series& b, double tail_s = 0.0);
Series mul_trunc(const Series& a, const Series& b);

/// Derivatives; j is zero-based.
Series deriv_theta(const Series& a, int j);
Series deriv_r(const Series& a, int j);

Series jet(const Series& a, int order);
Series remainder(const Series& a, int order);
Series theta_average(const Series& a);

/// theta-series coefficient of r^m.
Series taylor_coefficient(const Series& a, const std::array<int, kMaxDim>& m);
/// Multiplies a theta-only series by r^m.
Series times_monomial(const Series& a, const std::array<int, kMaxDim>& m);

/// Value at real (theta, r). The imaginary part of the sum must vanish to
/// 1e-12 (1 + |result|), otherwise the coefficients are corrupted.
double evaluate(const Series& a, std::span<const double> theta, std::span<const double> r);

/// sum |c_{k,m}| e^{2 pi s |k|_1} s^{|m|_1}; dominates the sup norm on the
/// complex strip of half-width s.
double majorant_norm(const Series& a, double s);

/// Largest |Im c_{k,m} + Im c_{-k,m}|-type asymmetry, normalized.
double reality_drift(const Series& a);

/// Removes coefficients with |c| < threshold; returns the removed mass at s.
std::pair<Series, double> prune(const Series& a, double threshold, double s);

/// Enumerates all m with |m|_1 <= mmax (graded, lexicographic inside a degree).
std::vector<std::array<int, kMaxDim>> taylor_indices(int dim, int mmax);
/// Enumerates all k with |k|_1 <= kmax.
std::vector<std::array<int, kMaxDim>> fourier_indices(int dim, int kmax);

}  // namespace kam
