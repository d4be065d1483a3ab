#include "kam/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

#include "kam/errors.hpp"
#include "kam/kernels.hpp"

namespace kam {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::size_t Grid::size() const {
    std::size_t total = 1;
    for (int j = 0; j < dim; ++j) total *= static_cast<std::size_t>(N);
    return total;
}

std::vector<double> Grid::points() const {
    const std::size_t npts = size();
    std::vector<double> out(npts * dim);
    for (std::size_t p = 0; p < npts; ++p) {
        std::size_t rest = p;
        for (int j = dim - 1; j >= 0; --j) {
            out[p * dim + j] = static_cast<double>(rest % N) / N;
            rest /= N;
        }
    }
    return out;
}

Grid make_grid(int dim, int kmax, int oversample) {
    if (oversample < 2) throw std::invalid_argument("grid oversampling must be at least 2");
    if (kmax < 1) throw std::invalid_argument("grid needs kmax >= 1");
    return Grid{dim, 2 * oversample * kmax};
}

Series grid_to_series(const Grid& grid, std::span<const double> values, const GridOptions& opts,
                      const std::array<int, kMaxDim>& m, TransformStats* stats, double scale) {
    const std::size_t npts = grid.size();
    if (values.size() != npts) throw std::invalid_argument("grid_to_series: value count mismatch");
    if (2 * opts.kmax >= grid.N) throw std::invalid_argument("grid_to_series: grid too coarse for kmax");

    fftw_complex* buf = fftw_alloc_complex(npts);
    double vmax = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
        buf[p][0] = values[p];
        buf[p][1] = 0.0;
        vmax = std::max(vmax, std::abs(values[p]));
    }
    std::array<int, kMaxDim> dims{};
    for (int j = 0; j < grid.dim; ++j) dims[j] = grid.N;
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft(grid.dim, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    const double threshold = opts.prune_rel * std::max(vmax, scale);
    const double inv = 1.0 / static_cast<double>(npts);
    std::vector<Term> terms;
    double energy_total = 0.0;
    double energy_top = 0.0;
    double pruned = 0.0;
    const int top_from = (2 * opts.kmax) / 3;
    for (const auto& k : fourier_indices(grid.dim, opts.kmax)) {
        std::size_t idx = 0;
        for (int j = 0; j < grid.dim; ++j) idx = idx * grid.N + ((k[j] % grid.N) + grid.N) % grid.N;
        Mode mode;
        mode.k = k;
        mode.m = m;
        // real data: use the canonical member of each pair and mirror it
        Mode partner = mode.conj();
        std::size_t pidx = 0;
        for (int j = 0; j < grid.dim; ++j)
            pidx = pidx * grid.N + ((partner.k[j] % grid.N) + grid.N) % grid.N;
        cplx c{0.5 * (buf[idx][0] + buf[pidx][0]) * inv, 0.5 * (buf[idx][1] - buf[pidx][1]) * inv};
        const int l1 = mode.k_l1(grid.dim);
        if (l1 == 0) c = {c.real(), 0.0};
        if (std::abs(c) < threshold || c == cplx{}) {
            pruned += std::abs(c) * std::exp(kTwoPi * opts.report_s * l1);
            continue;
        }
        // only coefficients above the noise floor count towards the alarm
        const double mag2 = std::norm(c);
        energy_total += mag2;
        if (l1 > top_from) energy_top += mag2;
        terms.push_back({pack(mode), c});
    }
    fftw_free(buf);

    const double fraction = energy_total > 0.0 ? energy_top / energy_total : 0.0;
    if (stats) {
        stats->alias_fraction = std::max(stats->alias_fraction, fraction);
        stats->pruned_mass += pruned;
    }
    if (fraction > opts.alias_tol)
        throw Error("aliasing alarm: top-third modal energy fraction " + std::to_string(fraction) +
                    " exceeds " + std::to_string(opts.alias_tol));
    return Series::from_terms(grid.dim, opts.kmax, opts.mmax, std::move(terms), threshold);
}

std::vector<double> series_on_grid(const Series& a, const Grid& grid) {
    if (a.dim() != grid.dim) throw std::invalid_argument("series_on_grid: dimension mismatch");
    return series_at(a, grid.points());
}

std::vector<double> series_at(const Series& a, std::span<const double> points) {
    const std::size_t npts = points.size() / static_cast<std::size_t>(a.dim());
    std::vector<cplx> out(npts);
    if (npts * a.size() >= kernels::kParallelMinWork)
        kernels::evaluate_points_parallel(a, points, {}, out);
    else
        kernels::evaluate_points_serial(a, points, {}, out);
    std::vector<double> values(npts);
    for (std::size_t p = 0; p < npts; ++p) values[p] = out[p].real();
    return values;
}

}  // namespace kam
