#include "kam/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "kam/kernels.hpp"

namespace kam {

int Mode::k_l1(int dim) const {
    int total = 0;
    for (int j = 0; j < dim; ++j) total += std::abs(k[j]);
    return total;
}

int Mode::m_l1(int dim) const {
    int total = 0;
    for (int j = 0; j < dim; ++j) total += m[j];
    return total;
}

Mode Mode::conj() const {
    Mode out = *this;
    for (auto& kj : out.k) kj = -kj;
    return out;
}

Key pack(const Mode& mode) {
    Key key = 0;
    for (int j = 0; j < kMaxDim; ++j) {
        key |= static_cast<Key>(static_cast<std::uint8_t>(mode.k[j] + 128)) << (56 - 8 * j);
        key |= static_cast<Key>(static_cast<std::uint8_t>(mode.m[j])) << (24 - 8 * j);
    }
    return key;
}

Mode unpack(Key key) {
    Mode mode;
    for (int j = 0; j < kMaxDim; ++j) {
        mode.k[j] = static_cast<int>((key >> (56 - 8 * j)) & 0xff) - 128;
        mode.m[j] = static_cast<int>((key >> (24 - 8 * j)) & 0xff);
    }
    return mode;
}

namespace {

void check_shape(int dim, int kmax, int mmax) {
    if (dim < 1 || dim > kMaxDim)
        throw std::invalid_argument("series dimension must be in [1, 4], got " + std::to_string(dim));
    if (kmax < 0 || kmax > 120) throw std::invalid_argument("kmax out of range");
    if (mmax < 0 || mmax > 60) throw std::invalid_argument("mmax out of range");
}

void check_mode(const Mode& mode, int dim, int kmax, int mmax) {
    for (int j = dim; j < kMaxDim; ++j)
        if (mode.k[j] != 0 || mode.m[j] != 0)
            throw std::invalid_argument("mode index beyond series dimension");
    for (int j = 0; j < dim; ++j)
        if (mode.m[j] < 0) throw std::invalid_argument("negative Taylor exponent");
    if (mode.k_l1(dim) > kmax || mode.m_l1(dim) > mmax)
        throw std::invalid_argument("mode index outside truncation bounds");
}

void check_same_dim(const Series& a, const Series& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("series dimension mismatch");
}

// Coefficients are stored for both k and -k; symmetrize the sorted map.
std::vector<Term> symmetrize(const std::map<Key, cplx>& raw) {
    std::vector<Term> out;
    out.reserve(raw.size() * 2);
    std::map<Key, cplx> sym;
    for (const auto& [key, c] : raw) {
        const Key partner = pack(unpack(key).conj());
        auto it = raw.find(partner);
        const cplx cp = it == raw.end() ? cplx{} : it->second;
        const cplx value = 0.5 * (c + std::conj(cp));
        sym[key] = value;
        sym[partner] = std::conj(value);
    }
    for (const auto& [key, c] : sym)
        if (c != cplx{}) out.push_back({key, c});
    return out;
}

Series map_terms(const Series& a, auto&& fn) {
    std::vector<Term> out;
    out.reserve(a.size());
    for (const auto& t : a.terms()) {
        const cplx c = fn(unpack(t.key), t.c);
        if (c != cplx{}) out.push_back({t.key, c});
    }
    return Series::from_terms(a.dim(), a.kmax(), a.mmax(), std::move(out));
}

Series filter_terms(const Series& a, auto&& keep) {
    return map_terms(a, [&](const Mode& mode, cplx c) { return keep(mode) ? c : cplx{}; });
}

}  // namespace

Series::Series(int dim, int kmax, int mmax) : dim_(dim), kmax_(kmax), mmax_(mmax) {
    check_shape(dim, kmax, mmax);
}

Series Series::make(int dim, int kmax, int mmax,
                    const std::vector<std::pair<Mode, cplx>>& coeffs) {
    Series out(dim, kmax, mmax);
    std::map<Key, cplx> raw;
    for (const auto& [mode, c] : coeffs) {
        check_mode(mode, dim, kmax, mmax);
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::invalid_argument("non-finite series coefficient");
        raw[pack(mode)] += c;
    }
    out.terms_ = symmetrize(raw);
    return out;
}

Series Series::from_terms(int dim, int kmax, int mmax, std::vector<Term> terms,
                          double drop_below) {
    Series out(dim, kmax, mmax);
    std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.key < y.key; });
    // merge duplicates
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const auto& t : terms) {
        if (!merged.empty() && merged.back().key == t.key)
            merged.back().c += t.c;
        else
            merged.push_back(t);
    }
    std::map<Key, cplx> lookup;
    for (const auto& t : merged) lookup.emplace(t.key, t.c);
    std::vector<Term> kept;
    kept.reserve(merged.size());
    for (const auto& t : merged) {
        const Mode mode = unpack(t.key);
        if (mode.k_l1(dim) > kmax || mode.m_l1(dim) > mmax) continue;
        auto it = lookup.find(pack(mode.conj()));
        const cplx partner = it == lookup.end() ? cplx{} : std::conj(it->second);
        const double drift = std::abs(t.c - partner);
        const double size = std::max(std::abs(t.c), std::abs(partner));
        if (drift > 1e-12 * size && size >= drop_below)
            throw std::runtime_error("series reality drift " + std::to_string(drift / size));
        const cplx value = 0.5 * (t.c + partner);
        if (std::abs(value) < drop_below || value == cplx{}) continue;
        kept.push_back({t.key, value});
    }
    out.terms_ = std::move(kept);
    return out;
}

Series Series::constant(int dim, int kmax, int mmax, double value) {
    return make(dim, kmax, mmax, {{Mode{}, cplx{value, 0.0}}});
}

cplx Series::coeff(const Mode& mode) const {
    const Key key = pack(mode);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const Term& t, Key k) { return t.key < k; });
    if (it != terms_.end() && it->key == key) return it->c;
    return {};
}

bool Series::contains(const Mode& mode) const { return coeff(mode) != cplx{}; }

bool Series::theta_only() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [&](const Term& t) { return unpack(t.key).m_l1(dim_) == 0; });
}

Series Series::retruncate(int kmax, int mmax) const {
    Series out(dim_, kmax, mmax);
    for (const auto& t : terms_) {
        const Mode mode = unpack(t.key);
        if (mode.k_l1(dim_) <= kmax && mode.m_l1(dim_) <= mmax) out.terms_.push_back(t);
    }
    return out;
}

void StripParams::validate() const {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("strip width s must lie in (0, 1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("strip budget sigma must be positive");
    if (!(s + sigma < 1.0)) throw std::invalid_argument("s + sigma must stay below 1");
}

Series add(const Series& a, const Series& b) {
    check_same_dim(a, b);
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    auto ia = a.terms().begin();
    auto ib = b.terms().begin();
    while (ia != a.terms().end() || ib != b.terms().end()) {
        if (ib == b.terms().end() || (ia != a.terms().end() && ia->key < ib->key)) {
            out.push_back(*ia++);
        } else if (ia == a.terms().end() || ib->key < ia->key) {
            out.push_back(*ib++);
        } else {
            const cplx c = ia->c + ib->c;
            if (c != cplx{}) out.push_back({ia->key, c});
            ++ia;
            ++ib;
        }
    }
    return Series::from_terms(a.dim(), std::max(a.kmax(), b.kmax()), std::max(a.mmax(), b.mmax()),
                              std::move(out));
}

Series sub(const Series& a, const Series& b) { return add(a, scale(b, -1.0)); }

Series scale(const Series& a, double lambda) {
    if (lambda == 0.0) return Series(a.dim(), a.kmax(), a.mmax());
    return map_terms(a, [&](const Mode&, cplx c) { return lambda * c; });
}

Series add_constant(const Series& a, double value) {
    return add(a, Series::constant(a.dim(), a.kmax(), a.mmax(), value));
}

Product mul(const Series& a, const Series& b, double tail_s) {
    check_same_dim(a, b);
    const int kmax = std::max(a.kmax(), b.kmax());
    const int mmax = std::max(a.mmax(), b.mmax());
    if (a.size() * b.size() >= kernels::kParallelMinWork)
        return kernels::convolve_parallel(a, b, kmax, mmax, tail_s);
    return kernels::convolve_serial(a, b, kmax, mmax, tail_s);
}

Series mul_trunc(const Series& a, const Series& b) { return mul(a, b).value; }

Series deriv_theta(const Series& a, int j) {
    if (j < 0 || j >= a.dim()) throw std::out_of_range("deriv_theta index");
    return map_terms(a, [&](const Mode& mode, cplx c) {
        return c * cplx{0.0, kTwoPi * mode.k[j]};
    });
}

Series deriv_r(const Series& a, int j) {
    if (j < 0 || j >= a.dim()) throw std::out_of_range("deriv_r index");
    std::vector<Term> out;
    for (const auto& t : a.terms()) {
        Mode mode = unpack(t.key);
        if (mode.m[j] == 0) continue;
        const double factor = mode.m[j];
        mode.m[j] -= 1;
        out.push_back({pack(mode), factor * t.c});
    }
    return Series::from_terms(a.dim(), a.kmax(), a.mmax(), std::move(out));
}

Series jet(const Series& a, int order) {
    return filter_terms(a, [&](const Mode& mode) { return mode.m_l1(a.dim()) <= order; });
}

Series remainder(const Series& a, int order) {
    return filter_terms(a, [&](const Mode& mode) { return mode.m_l1(a.dim()) > order; });
}

Series theta_average(const Series& a) {
    return filter_terms(a, [&](const Mode& mode) { return mode.k_l1(a.dim()) == 0; });
}

Series taylor_coefficient(const Series& a, const std::array<int, kMaxDim>& m) {
    std::vector<Term> out;
    for (const auto& t : a.terms()) {
        Mode mode = unpack(t.key);
        if (mode.m != m) continue;
        mode.m = {};
        out.push_back({pack(mode), t.c});
    }
    return Series::from_terms(a.dim(), a.kmax(), a.mmax(), std::move(out));
}

Series times_monomial(const Series& a, const std::array<int, kMaxDim>& m) {
    std::vector<Term> out;
    for (const auto& t : a.terms()) {
        Mode mode = unpack(t.key);
        for (int j = 0; j < kMaxDim; ++j) mode.m[j] += m[j];
        out.push_back({pack(mode), t.c});
    }
    return Series::from_terms(a.dim(), a.kmax(), a.mmax(), std::move(out));
}

double evaluate(const Series& a, std::span<const double> theta, std::span<const double> r) {
    if (theta.size() != static_cast<std::size_t>(a.dim()) || r.size() != static_cast<std::size_t>(a.dim()))
        throw std::invalid_argument("evaluate: point dimension mismatch");
    for (double x : theta)
        if (!std::isfinite(x)) throw std::invalid_argument("evaluate: non-finite theta");
    for (double x : r)
        if (!std::isfinite(x)) throw std::invalid_argument("evaluate: non-finite r");
    const cplx value = Evaluator(a).value(theta.data(), r.data());
    if (std::abs(value.imag()) > 1e-12 * (1.0 + std::abs(value.real())))
        throw std::runtime_error("evaluate: reality violation, imaginary part " +
                                 std::to_string(value.imag()));
    return value.real();
}

double majorant_norm(const Series& a, double s) {
    if (s < 0.0) throw std::invalid_argument("majorant_norm: negative strip width");
    double total = 0.0;
    for (const auto& t : a.terms()) {
        const Mode mode = unpack(t.key);
        const int mdeg = mode.m_l1(a.dim());
        const double weight = std::exp(kTwoPi * s * mode.k_l1(a.dim())) * std::pow(s, mdeg);
        total += std::abs(t.c) * weight;
    }
    return total;
}

double reality_drift(const Series& a) {
    double worst = 0.0;
    for (const auto& t : a.terms()) {
        const cplx partner = std::conj(a.coeff(unpack(t.key).conj()));
        worst = std::max(worst, std::abs(t.c - partner) / (1e-300 + std::abs(t.c)));
    }
    return worst;
}

std::pair<Series, double> prune(const Series& a, double threshold, double s) {
    std::vector<Term> kept;
    double removed = 0.0;
    for (const auto& t : a.terms()) {
        if (std::abs(t.c) < threshold) {
            const Mode mode = unpack(t.key);
            removed += std::abs(t.c) * std::exp(kTwoPi * s * mode.k_l1(a.dim())) *
                       std::pow(s, mode.m_l1(a.dim()));
        } else {
            kept.push_back(t);
        }
    }
    return {Series::from_terms(a.dim(), a.kmax(), a.mmax(), std::move(kept), threshold), removed};
}

std::vector<std::array<int, kMaxDim>> taylor_indices(int dim, int mmax) {
    std::vector<std::array<int, kMaxDim>> out;
    for (int degree = 0; degree <= mmax; ++degree) {
        std::array<int, kMaxDim> m{};
        // enumerate compositions of degree into dim parts
        auto rec = [&](auto&& self, int j, int left) -> void {
            if (j == dim - 1) {
                m[j] = left;
                out.push_back(m);
                return;
            }
            for (int v = left; v >= 0; --v) {
                m[j] = v;
                self(self, j + 1, left - v);
            }
        };
        rec(rec, 0, degree);
    }
    return out;
}

std::vector<std::array<int, kMaxDim>> fourier_indices(int dim, int kmax) {
    std::vector<std::array<int, kMaxDim>> out;
    std::array<int, kMaxDim> k{};
    auto rec = [&](auto&& self, int j, int budget) -> void {
        if (j == dim) {
            out.push_back(k);
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            k[j] = v;
            self(self, j + 1, budget - std::abs(v));
        }
        k[j] = 0;
    };
    rec(rec, 0, kmax);
    return out;
}

}  // namespace kam
