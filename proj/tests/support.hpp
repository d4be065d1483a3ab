#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "kam/series.hpp"

namespace testing_support {

using kam::cplx;
using kam::Mode;
using kam::Series;

inline Mode mode1(int k, int m = 0) {
    Mode md;
    md.k[0] = k;
    md.m[0] = m;
    return md;
}

inline Mode mode2(int k1, int k2, int m1 = 0, int m2 = 0) {
    Mode md;
    md.k[0] = k1;
    md.k[1] = k2;
    md.m[0] = m1;
    md.m[1] = m2;
    return md;
}

// a cos(2 pi k theta) + b sin(2 pi k theta), n = 1
inline Series trig1(int kmax, int mmax, int k, double a, double b, int m = 0) {
    return Series::make(1, kmax, mmax,
                        {{mode1(k, m), cplx{a / 2, -b / 2}}, {mode1(-k, m), cplx{a / 2, b / 2}}});
}

inline Series monomial1(int kmax, int mmax, int m, double c) {
    return Series::make(1, kmax, mmax, {{mode1(0, m), c}});
}

/// Random real series with coefficients ~ amp * decay^{|k|_1}, every mode present.
inline Series random_series(std::mt19937_64& rng, int dim, int kmax, int mmax, double amp = 1.0,
                            double decay = 0.5, bool zero_average = false) {
    std::normal_distribution<double> normal;
    std::vector<std::pair<Mode, cplx>> coeffs;
    for (const auto& m : kam::taylor_indices(dim, mmax))
        for (const auto& k : kam::fourier_indices(dim, kmax)) {
            Mode md;
            md.k = k;
            md.m = m;
            int l1 = 0;
            for (int j = 0; j < dim; ++j) l1 += std::abs(k[j]);
            if (zero_average && l1 == 0) continue;
            const double w = amp * std::pow(decay, l1);
            coeffs.emplace_back(md, cplx{normal(rng) * w, normal(rng) * w});
        }
    return Series::make(dim, kmax, mmax, coeffs);
}

/// Largest coefficient difference.
inline double max_coeff_diff(const Series& a, const Series& b) {
    double worst = 0.0;
    const Series d = kam::sub(a, b);
    for (const auto& t : d.terms()) worst = std::max(worst, std::abs(t.c));
    return worst;
}

}  // namespace testing_support
