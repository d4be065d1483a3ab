#include "kam/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kam/errors.hpp"

namespace kam {

namespace {

std::string format_k(const std::array<int, kMaxDim>& k, int dim) {
    std::ostringstream os;
    os << '(';
    for (int j = 0; j < dim; ++j) os << (j ? "," : "") << k[j];
    os << ')';
    return os.str();
}

bool first_nonzero_positive(const std::array<int, kMaxDim>& k, int dim) {
    for (int j = 0; j < dim; ++j) {
        if (k[j] > 0) return true;
        if (k[j] < 0) return false;
    }
    return false;
}

}  // namespace

double Frequency::dot(const std::array<int, kMaxDim>& k) const {
    double total = 0.0;
    for (int j = 0; j < dim(); ++j) total += k[j] * alpha[j];
    return total;
}

double dist_to_integer(double x) { return std::abs(x - std::round(x)); }

DiophantineScan check_diophantine(const std::vector<double>& alpha, double tau, int kmax) {
    if (kmax < 1) throw std::invalid_argument("check_diophantine: kmax must be >= 1");
    if (alpha.empty() || alpha.size() > kMaxDim)
        throw std::invalid_argument("check_diophantine: alpha dimension must be in [1, 4]");
    const Frequency freq{alpha, 0.0, tau};
    const int dim = freq.dim();
    DiophantineScan scan;
    scan.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& k : fourier_indices(dim, kmax)) {
        if (!first_nonzero_positive(k, dim)) continue;
        int l1 = 0;
        for (int j = 0; j < dim; ++j) l1 += std::abs(k[j]);
        const double margin = dist_to_integer(freq.dot(k)) * std::pow(static_cast<double>(l1), tau);
        if (margin < scan.min_margin) {
            scan.min_margin = margin;
            scan.argmin_k = k;
        }
    }
    if (!(scan.min_margin > 0.0))
        throw ResonanceError("resonant frequency: k.alpha is an integer for k = " +
                             format_k(scan.argmin_k, dim));
    scan.admissible_gamma = scan.min_margin;
    return scan;
}

std::vector<SpectrumEntry> small_divisor_spectrum(const Frequency& freq, int kmax) {
    std::vector<SpectrumEntry> out;
    if (kmax < 1) return out;
    const int dim = freq.dim();
    for (const auto& k : fourier_indices(dim, kmax)) {
        if (!first_nonzero_positive(k, dim)) continue;
        SpectrumEntry e;
        e.k = k;
        e.divisor = dist_to_integer(freq.dot(k));
        e.resonant = e.divisor == 0.0;
        e.amplification = e.resonant ? std::numeric_limits<double>::infinity()
                                     : 1.0 / (kTwoPi * e.divisor);
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
        return a.amplification > b.amplification;
    });
    return out;
}

Series solve_homological(const Series& g, const Frequency& freq) {
    if (g.dim() != freq.dim()) throw std::invalid_argument("solve_homological: dimension mismatch");
    if (!g.theta_only()) throw std::invalid_argument("solve_homological: g must depend on theta only");
    const double average = std::abs(g.coeff(Mode{}));
    if (average > 1e-13 * std::max(majorant_norm(g, 0.0), 1e-300) && average > 0.0)
        throw PreconditionError("zero-average",
                                "solve_homological needs a zero-average right-hand side (average " +
                                    std::to_string(average) + ")");
    std::vector<Term> out;
    out.reserve(g.size());
    for (const auto& t : g.terms()) {
        const Mode mode = unpack(t.key);
        if (mode.k_l1(g.dim()) == 0) continue;
        const double divisor = freq.dot(mode.k);
        if (std::abs(divisor) < freq.divisor_floor)
            throw ResonanceError("small divisor |k.alpha| = " + std::to_string(std::abs(divisor)) +
                                 " below floor at k = " + format_k(mode.k, g.dim()));
        out.push_back({t.key, t.c / cplx{0.0, kTwoPi * divisor}});
    }
    return Series::from_terms(g.dim(), g.kmax(), g.mmax(), std::move(out));
}

Series lie_derivative_alpha(const Series& f, const Frequency& freq) {
    if (f.dim() != freq.dim()) throw std::invalid_argument("lie_derivative_alpha: dimension mismatch");
    std::vector<Term> out;
    out.reserve(f.size());
    for (const auto& t : f.terms()) {
        const double divisor = freq.dot(unpack(t.key).k);
        if (divisor != 0.0) out.push_back({t.key, t.c * cplx{0.0, kTwoPi * divisor}});
    }
    return Series::from_terms(f.dim(), f.kmax(), f.mmax(), std::move(out));
}

}  // namespace kam
