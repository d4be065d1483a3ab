#pragma once

#include <array>
#include <limits>
#include <vector>

#include "kam/series.hpp"

namespace kam {

/// Rotation vector alpha with Diophantine data.
struct Frequency {
    std::vector<double> alpha;
    double gamma = 0.0;  // scan-verified constant, 0 until verified
    double tau = 1.0;
    double divisor_floor = 1e-10;

    int dim() const { return static_cast<int>(alpha.size()); }
    double dot(const std::array<int, kMaxDim>& k) const;
};

/// Distance from x to the nearest integer.
double dist_to_integer(double x);

struct DiophantineScan {
    double min_margin = 0.0;             // min |k.alpha|_Z |k|_1^tau
    std::array<int, kMaxDim> argmin_k{};  // minimizing k
    double admissible_gamma = 0.0;       // largest gamma valid up to kmax
};

/// Exhaustive scan over 0 < |k|_1 <= kmax. Throws ResonanceError when some
/// k.alpha is an integer.
DiophantineScan check_diophantine(const std::vector<double>& alpha, double tau, int kmax);

struct SpectrumEntry {
    std::array<int, kMaxDim> k{};
    double divisor = 0.0;        // dist(k.alpha, Z)
    double amplification = 0.0;  // 1 / (2 pi divisor), +inf on resonance
    bool resonant = false;
};

/// One representative of each +-k pair, sorted by amplification descending.
std::vector<SpectrumEntry> small_divisor_spectrum(const Frequency& freq, int kmax);

/// Solves L_alpha f = alpha . grad f = g for zero-average theta-only g;
/// returns the zero-average solution f_k = g_k / (2 pi i k.alpha).
Series solve_homological(const Series& g, const Frequency& freq);

/// alpha . grad f
Series lie_derivative_alpha(const Series& f, const Frequency& freq);

}  // namespace kam
