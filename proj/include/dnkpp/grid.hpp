#pragma once

// Periodic lattices, fields sampled on them, and kernel weights for
// circular convolution.

#include "dnkpp/errors.hpp"
#include "dnkpp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace dnkpp {

/// Uniform periodic lattice on [-L, L)^d with N points per axis.
struct Grid {
    int dimension = 1;
    double half_length = 20.0;
    std::size_t points = 1024;

    static Grid make(int d, double L, std::size_t N) {
        Grid g{d, L, N};
        g.validate();
        return g;
    }

    void validate() const {
        if (dimension != 1 && dimension != 2) throw InvalidArgument("grid dimension must be 1 or 2");
        if (!(half_length > 0.0) || !std::isfinite(half_length))
            throw InvalidArgument("grid half_length must be positive");
        if (points < 16) throw InvalidArgument("grid needs at least 16 points per axis");
        if ((points & (points - 1)) != 0) {
            throw InvalidArgument("grid points per axis must be a power of two (got " +
                                  std::to_string(points) + ")");
        }
    }

    double spacing() const noexcept { return 2.0 * half_length / static_cast<double>(points); }
    std::size_t size() const noexcept { return dimension == 1 ? points : points * points; }
    double cell_volume() const noexcept { return std::pow(spacing(), dimension); }

    /// Coordinate of index i along an axis.
    double coord(std::size_t i) const noexcept {
        return -half_length + static_cast<double>(i) * spacing();
    }

    /// Signed displacement represented by wrapped offset k (k < N/2 positive, else negative).
    double displacement(std::size_t k) const noexcept {
        const auto n = static_cast<std::ptrdiff_t>(points);
        auto kk = static_cast<std::ptrdiff_t>(k);
        if (kk >= n / 2) kk -= n;
        return static_cast<double>(kk) * spacing();
    }

    /// Index of the grid point nearest to x along an axis (clamped).
    std::size_t nearest(double x) const noexcept {
        const double r = std::round((x + half_length) / spacing());
        if (r <= 0.0) return 0;
        if (r >= static_cast<double>(points - 1)) return points - 1;
        return static_cast<std::size_t>(r);
    }

    bool operator==(const Grid& o) const noexcept {
        return dimension == o.dimension && half_length == o.half_length && points == o.points;
    }
};

/// A real-valued state on a grid. 2-D values are stored row-major: index i*N + j
/// holds the value at (coord(i), coord(j)).
struct Field {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0, double t = 0.0)
        : grid(g), values(g.size(), fill), time(t) {}

    template <class F>
    static Field from_function(const Grid& g, F&& f, double t = 0.0) {
        Field u(g, 0.0, t);
        const std::size_t n = g.points;
        if constexpr (std::is_invocable_v<F&, double>) {
            if (g.dimension != 1) throw InvalidArgument("a one-argument function needs a 1-D grid");
            for (std::size_t i = 0; i < n; ++i) u.values[i] = f(g.coord(i));
        } else {
            if (g.dimension != 2) throw InvalidArgument("a two-argument function needs a 2-D grid");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) u.values[i * n + j] = f(g.coord(i), g.coord(j));
        }
        return u;
    }

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    double min() const { return *std::min_element(values.begin(), values.end()); }
    double max() const { return *std::max_element(values.begin(), values.end()); }
    double sup_norm() const {
        double s = 0.0;
        for (double v : values) s = std::max(s, std::abs(v));
        return s;
    }

    bool all_finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }

    /// Periodic translation by whole cells: result(x) = u(x - k h) along each axis.
    Field shifted(long k1, long k2 = 0) const {
        Field r(grid, 0.0, time);
        const auto n = static_cast<long>(grid.points);
        auto wrap = [n](long i) { return ((i % n) + n) % n; };
        if (grid.dimension == 1) {
            for (long i = 0; i < n; ++i) r.values[static_cast<std::size_t>(wrap(i + k1))] = values[static_cast<std::size_t>(i)];
        } else {
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j)
                    r.values[static_cast<std::size_t>(wrap(i + k1) * n + wrap(j + k2))] =
                        values[static_cast<std::size_t>(i * n + j)];
        }
        return r;
    }
};

inline double sup_distance(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

/// Sampled kernel on a grid in wrapped-offset layout: weight k multiplies u(x - displacement(k)).
struct KernelWeights {
    Grid grid;
    std::vector<double> w;
    bool renormalized = false;
    double sampled_mass = 0.0;   // sum of raw samples times cell volume
    double box_mass = 1.0;       // kernel mass inside the periodic box (quadrature)
    double truncated_mass = 0.0; // 1 - box_mass for heavy tails, 0 after renormalization
    bool under_resolved_warning = false;

    double sum() const {
        double s = 0.0;
        for (double v : w) s += v;
        return s;
    }
};

namespace detail {

// In 2-D the inscribed disc gives a lower bound for the mass of the square.
inline double box_mass(const Kernel& k, double L) { return k.mass_in_origin_ball(L); }

inline double suggest_half_length(const Kernel& k, double coverage) {
    double L = std::max(1.0, 4.0 * k.effective_scale() + k.offset_norm());
    for (int i = 0; i < 60 && box_mass(k, L) < coverage; ++i) L *= 1.5;
    return std::ceil(L);
}

}  // namespace detail

inline constexpr double required_coverage = 0.9999;

/// Samples `kernel` on `grid`. Exponentially decaying kernels must have at least
/// 99.99% of their mass inside the box and are renormalized to sum to exactly
/// one; heavy-tailed kernels keep their truncated mass.
inline KernelWeights discretize(const Kernel& kernel, const Grid& grid) {
    grid.validate();
    if (kernel.dimension() != grid.dimension) throw InvalidArgument("kernel and grid dimensions differ");
    const double h = grid.spacing();
    const double scale = kernel.effective_scale();
    if (scale < 0.5 * h) {
        std::ostringstream os;
        os << "kernel " << kernel.spec().describe() << " is under-resolved: length scale " << scale
           << " is below half the grid spacing " << h;
        throw InvalidArgument(os.str());
    }

    KernelWeights kw;
    kw.grid = grid;
    kw.under_resolved_warning = scale < h;
    kw.box_mass = detail::box_mass(kernel, grid.half_length);

    const bool exp_decay = is_exp_decay(kernel.tail_class());
    if (exp_decay && kw.box_mass < required_coverage) {
        std::ostringstream os;
        os << "domain half-length " << grid.half_length << " covers only " << kw.box_mass
           << " of the mass of " << kernel.spec().describe() << "; use L >= "
           << detail::suggest_half_length(kernel, required_coverage);
        throw InvalidArgument(os.str());
    }

    const std::size_t n = grid.points;
    const double vol = grid.cell_volume();
    kw.w.assign(grid.size(), 0.0);
    if (grid.dimension == 1) {
        for (std::size_t k = 0; k < n; ++k) kw.w[k] = kernel.at(grid.displacement(k)) * vol;
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                kw.w[i * n + j] = kernel.at(grid.displacement(i), grid.displacement(j)) * vol;
    }
    kw.sampled_mass = kw.sum();
    if (!(kw.sampled_mass > 0.0)) throw InvalidArgument("kernel has no mass on the grid");

    if (exp_decay) {
        const double s = kw.sampled_mass;
        for (double& v : kw.w) v /= s;
        // Nudge the largest weight until the sequential sum is exactly one.
        const auto peak = static_cast<std::size_t>(
            std::distance(kw.w.begin(), std::max_element(kw.w.begin(), kw.w.end())));
        for (int it = 0; it < 8; ++it) {
            const double err = 1.0 - kw.sum();
            if (err == 0.0) break;
            kw.w[peak] += err;
        }
        kw.renormalized = true;
        kw.truncated_mass = 0.0;
    } else {
        kw.truncated_mass = std::max(0.0, 1.0 - kw.box_mass);
    }
    return kw;
}

}  // namespace dnkpp
