#include "kam/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>

namespace kam {

namespace {

constexpr int kMaxK = 120;
constexpr int kMaxM = 60;

bool canonical(const Mode& mode) {
    for (int j = 0; j < kMaxDim; ++j) {
        if (mode.k[j] > 0) return true;
        if (mode.k[j] < 0) return false;
    }
    return true;
}

}  // namespace

Evaluator::Evaluator(const Series& a) : dim_(a.dim()) {
    k_.reserve(a.size());
    m_.reserve(a.size());
    c_.reserve(a.size());
    for (const auto& t : a.terms()) {
        const Mode mode = unpack(t.key);
        for (int j = 0; j < dim_; ++j) {
            kspan_ = std::max(kspan_, std::abs(mode.k[j]));
            mspan_ = std::max(mspan_, mode.m[j]);
        }
        k_.push_back(mode.k);
        m_.push_back(mode.m);
        c_.push_back(t.c);
    }
}

cplx Evaluator::value(const double* theta, const double* r) const {
    std::array<cplx, kMaxDim*(2 * kMaxK + 1)> table;
    std::array<double, kMaxDim*(kMaxM + 1)> rpow;
    const int width = 2 * kspan_ + 1;
    for (int j = 0; j < dim_; ++j) {
        cplx* row = table.data() + j * width + kspan_;
        row[0] = 1.0;
        const double x = theta[j] - std::floor(theta[j]);
        for (int q = 1; q <= kspan_; ++q) {
            row[q] = std::polar(1.0, kTwoPi * q * x);
            row[-q] = std::conj(row[q]);
        }
        double* rp = rpow.data() + j * (kMaxM + 1);
        rp[0] = 1.0;
        for (int p = 1; p <= mspan_; ++p) rp[p] = rp[p - 1] * (r ? r[j] : 0.0);
    }
    cplx sum = 0.0;
    for (std::size_t t = 0; t < c_.size(); ++t) {
        cplx phase = c_[t];
        double mono = 1.0;
        for (int j = 0; j < dim_; ++j) {
            phase *= table[j * width + kspan_ + k_[t][j]];
            mono *= rpow[j * (kMaxM + 1) + m_[t][j]];
        }
        sum += phase * mono;
    }
    return sum;
}

double Evaluator::value_and_gradient(const double* theta, const double* r, double* dtheta,
                                     double* dr) const {
    std::array<cplx, kMaxDim*(2 * kMaxK + 1)> table;
    std::array<double, kMaxDim*(kMaxM + 1)> rpow;
    const int width = 2 * kspan_ + 1;
    for (int j = 0; j < dim_; ++j) {
        cplx* row = table.data() + j * width + kspan_;
        row[0] = 1.0;
        const double x = theta[j] - std::floor(theta[j]);
        for (int q = 1; q <= kspan_; ++q) {
            row[q] = std::polar(1.0, kTwoPi * q * x);
            row[-q] = std::conj(row[q]);
        }
        double* rp = rpow.data() + j * (kMaxM + 1);
        rp[0] = 1.0;
        for (int p = 1; p <= mspan_; ++p) rp[p] = rp[p - 1] * r[j];
        dtheta[j] = 0.0;
        dr[j] = 0.0;
    }
    cplx sum = 0.0;
    cplx gth[kMaxDim] = {};
    cplx gr[kMaxDim] = {};
    for (std::size_t t = 0; t < c_.size(); ++t) {
        cplx phase = c_[t];
        for (int j = 0; j < dim_; ++j) phase *= table[j * width + kspan_ + k_[t][j]];
        double mono = 1.0;
        for (int j = 0; j < dim_; ++j) mono *= rpow[j * (kMaxM + 1) + m_[t][j]];
        const cplx term = phase * mono;
        sum += term;
        for (int j = 0; j < dim_; ++j) {
            gth[j] += term * cplx{0.0, kTwoPi * k_[t][j]};
            const int mj = m_[t][j];
            if (mj > 0) {
                double dmono = mj;
                for (int i = 0; i < dim_; ++i)
                    dmono *= rpow[i * (kMaxM + 1) + (i == j ? mj - 1 : m_[t][i])];
                gr[j] += phase * dmono;
            }
        }
    }
    for (int j = 0; j < dim_; ++j) {
        dtheta[j] = gth[j].real();
        dr[j] = gr[j].real();
    }
    return sum.real();
}

namespace kernels {

namespace {

void check_points(const Series& a, std::span<const double> theta, std::span<const double> r,
                  std::span<cplx> out) {
    const std::size_t n = static_cast<std::size_t>(a.dim());
    if (theta.size() != out.size() * n) throw std::invalid_argument("evaluate_points: theta size");
    if (!r.empty() && r.size() != theta.size()) throw std::invalid_argument("evaluate_points: r size");
}

using Accumulator = std::unordered_map<Key, cplx>;

void accumulate_rows(const Series& a, const Series& b, std::size_t row_begin, std::size_t row_end,
                     int kmax, int mmax, Accumulator& kept, Accumulator& tail) {
    const int dim = a.dim();
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    std::vector<Mode> modes_b;
    modes_b.reserve(tb.size());
    for (const auto& t : tb) modes_b.push_back(unpack(t.key));
    for (std::size_t i = row_begin; i < row_end; ++i) {
        const Mode ma = unpack(ta[i].key);
        for (std::size_t q = 0; q < tb.size(); ++q) {
            Mode mode;
            for (int j = 0; j < dim; ++j) {
                mode.k[j] = ma.k[j] + modes_b[q].k[j];
                mode.m[j] = ma.m[j] + modes_b[q].m[j];
            }
            if (!canonical(mode)) continue;
            const cplx c = ta[i].c * tb[q].c;
            if (mode.k_l1(dim) <= kmax && mode.m_l1(dim) <= mmax)
                kept[pack(mode)] += c;
            else if (mode.k_l1(dim) <= kMaxK && mode.m_l1(dim) <= kMaxM)
                tail[pack(mode)] += c;
        }
    }
}

Product finish(int dim, int kmax, int mmax, const Accumulator& kept, const Accumulator& tail,
               double tail_s) {
    std::vector<Term> terms;
    terms.reserve(2 * kept.size());
    for (const auto& [key, c] : kept) {
        const Mode mode = unpack(key);
        if (mode.k_l1(dim) == 0) {
            if (c.real() != 0.0) terms.push_back({key, cplx{c.real(), 0.0}});
        } else if (c != cplx{}) {
            terms.push_back({key, c});
            terms.push_back({pack(mode.conj()), std::conj(c)});
        }
    }
    double tail_norm = 0.0;
    for (const auto& [key, c] : tail) {
        const Mode mode = unpack(key);
        const double mult = mode.k_l1(dim) == 0 ? 1.0 : 2.0;
        tail_norm += mult * std::abs(c) * std::exp(kTwoPi * tail_s * mode.k_l1(dim)) *
                     std::pow(tail_s, mode.m_l1(dim));
    }
    return {Series::from_terms(dim, kmax, mmax, std::move(terms)), tail_norm};
}

void check_conv(const Series& a, const Series& b, int kmax, int mmax) {
    if (a.dim() != b.dim()) throw std::invalid_argument("series dimension mismatch");
    if (kmax < 0 || mmax < 0) throw std::invalid_argument("negative truncation");
}

}  // namespace

void evaluate_points_serial(const Series& a, std::span<const double> theta,
                            std::span<const double> r, std::span<cplx> out) {
    check_points(a, theta, r, out);
    const Evaluator ev(a);
    const std::size_t n = static_cast<std::size_t>(a.dim());
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = ev.value(theta.data() + p * n, r.empty() ? nullptr : r.data() + p * n);
}

void evaluate_points_parallel(const Series& a, std::span<const double> theta,
                              std::span<const double> r, std::span<cplx> out) {
    check_points(a, theta, r, out);
    const Evaluator ev(a);
    const std::size_t n = static_cast<std::size_t>(a.dim());
    const long npts = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
    for (long p = 0; p < npts; ++p)
        out[p] = ev.value(theta.data() + p * n, r.empty() ? nullptr : r.data() + p * n);
}

Product convolve_serial(const Series& a, const Series& b, int kmax, int mmax, double tail_s) {
    check_conv(a, b, kmax, mmax);
    Accumulator kept;
    Accumulator tail;
    accumulate_rows(a, b, 0, a.size(), kmax, mmax, kept, tail);
    return finish(a.dim(), kmax, mmax, kept, tail, tail_s);
}

Product convolve_parallel(const Series& a, const Series& b, int kmax, int mmax, double tail_s) {
    check_conv(a, b, kmax, mmax);
    const int nthreads = omp_get_max_threads();
    std::vector<Accumulator> kept(nthreads);
    std::vector<Accumulator> tail(nthreads);
    const std::size_t rows = a.size();
#pragma omp parallel num_threads(nthreads)
    {
        const int tid = omp_get_thread_num();
        const int used = omp_get_num_threads();
        const std::size_t begin = rows * tid / used;
        const std::size_t end = rows * (tid + 1) / used;
        accumulate_rows(a, b, begin, end, kmax, mmax, kept[tid], tail[tid]);
    }
    // fixed-order merge keeps results reproducible for a given thread count
    for (int t = 1; t < nthreads; ++t) {
        for (const auto& [key, c] : kept[t]) kept[0][key] += c;
        for (const auto& [key, c] : tail[t]) tail[0][key] += c;
    }
    return finish(a.dim(), kmax, mmax, kept[0], tail[0], tail_s);
}

}  // namespace kernels

void configure_threads_from_env() {
    if (const char* env = std::getenv("KAM_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) omp_set_num_threads(cap);
    }
}

}  // namespace kam
