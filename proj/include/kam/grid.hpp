#pragma once

#include <array>
#include <span>
#include <vector>

#include "kam/series.hpp"

namespace kam {

/// Uniform tensor grid theta = idx / N on the real torus.
struct Grid {
    int dim = 1;
    int N = 1;

    std::size_t size() const;
    /// Row-major size() x dim coordinates.
    std::vector<double> points() const;
};

/// Grid fine enough for modes |k|_1 <= kmax with the given oversampling.
Grid make_grid(int dim, int kmax, int oversample);

struct GridOptions {
    int kmax = 64;
    int mmax = 4;
    int oversample = 2;
    double prune_rel = 1e-15;  // drop coefficients below prune_rel * max(max|values|, scale)
    double alias_tol = 1e-8;   // top-third energy fraction that trips the alarm
    double report_s = 0.0;     // strip at which discarded mass is measured

    Grid grid(int dim) const { return make_grid(dim, kmax, oversample); }
};

struct TransformStats {
    double alias_fraction = 0.0;
    double pruned_mass = 0.0;
};

/// Fourier coefficients (|k|_1 <= opts.kmax) of real grid data, returned as a
/// theta-series multiplied by r^m. `scale` is the size of the summands that
/// produced the values (rounding noise is measured against it when it exceeds
/// max|values|). Throws on the aliasing alarm.
Series grid_to_series(const Grid& grid, std::span<const double> values,
                      const GridOptions& opts, const std::array<int, kMaxDim>& m = {},
                      TransformStats* stats = nullptr, double scale = 0.0);

/// Real values of a theta-only series on the grid.
std::vector<double> series_on_grid(const Series& a, const Grid& grid);

/// Real values of a theta-only series at arbitrary points (row-major npts x dim).
std::vector<double> series_at(const Series& a, std::span<const double> points);

}  // namespace kam
