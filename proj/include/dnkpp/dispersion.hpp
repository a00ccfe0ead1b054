#pragma once

// Traveling-wave dispersion theory along a direction: bilateral Laplace
// transforms of directional marginals, the speed function G, the minimal speed
// and the V/W classification, characteristic roots, and the front set.

#include "dnkpp/errors.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/parallel.hpp"
#include "dnkpp/params.hpp"
#include "dnkpp/quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace dnkpp {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class KernelClass { V_class, W_class };

inline std::string_view to_string(KernelClass c) { return c == KernelClass::V_class ? "V" : "W"; }

namespace detail {

// Even/odd centered moments N_j(lambda) = int u^j base(u) e^{lambda u} du over R.
inline double centered_moment(const Kernel1D& k, int j, double lambda) {
    auto f = [&](double u) {
        const double up = k.tilted(u, lambda);
        const double dn = k.tilted(u, -lambda);
        const double pw = j == 0 ? 1.0 : std::pow(u, j);
        return pw * (j % 2 == 0 ? up + dn : up - dn);
    };
    if (k.source().spec().family == KernelFamily::compact_uniform) {
        double R = k.source().spec().radius;
        return quad::interval(f, 0.0, R);
    }
    return quad::half_line(f);
}

inline bool transform_finite(const Kernel1D& k, double lambda, int order) {
    const TailInfo& t = k.tail();
    if (t.lambda0 == infinity) return true;
    if (lambda < t.lambda0) return true;
    if (lambda > t.lambda0) return false;
    return t.moment_finite_at_abscissa(order);
}

}  // namespace detail

/// Abscissa of convergence lambda0 of s -> int a(s) e^{lambda s} ds (0 for heavy tails).
inline double abscissa(const Kernel1D& k) { return k.abscissa(); }

/// Whether the transform is finite at the abscissa itself (false when lambda0 is 0 or infinite).
inline bool transform_finite_at_abscissa(const Kernel1D& k) {
    const double l0 = k.abscissa();
    if (l0 == infinity || l0 <= 0.0) return false;
    return k.tail().moment_finite_at_abscissa(0);
}

/// Exponential moment M_k(lambda) = int s^k a(s) e^{lambda s} ds for k = 0, 1, 2.
/// Returns +inf when the integral diverges (lambda beyond the abscissa, or the
/// polynomial tail is too heavy at the abscissa).
inline double exp_moment(const Kernel1D& k, int order, double lambda) {
    if (order < 0 || order > 2) throw InvalidArgument("exp_moment supports orders 0, 1, 2");
    if (lambda < 0.0) throw InvalidArgument("exp_moment requires lambda >= 0");
    if (lambda > 0.0 && !detail::transform_finite(k, lambda, order)) return infinity;
    if (lambda == 0.0 && k.tail_class() == TailClass::heavy_tail && !k.tail().moment_finite_at_abscissa(order))
        return infinity;
    const double b = k.shift();
    const double scale = std::exp(lambda * b);
    const double n0 = detail::centered_moment(k, 0, lambda);
    if (order == 0) return scale * n0;
    const double n1 = detail::centered_moment(k, 1, lambda);
    if (order == 1) return scale * (n1 + b * n0);
    const double n2 = detail::centered_moment(k, 2, lambda);
    return scale * (n2 + 2.0 * b * n1 + b * b * n0);
}

/// Bilateral Laplace transform int a(s) e^{lambda s} ds, lambda > 0.
inline double laplace_transform(const Kernel1D& k, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("laplace_transform requires lambda > 0");
    return exp_moment(k, 0, lambda);
}

/// G(lambda) = (kappa_plus L(lambda) - m) / lambda.
inline double dispersion_G(const ModelParams& p, const Kernel1D& k, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("dispersion_G requires lambda > 0");
    if (!detail::transform_finite(k, lambda, 0)) {
        throw InvalidArgument("lambda = " + std::to_string(lambda) +
                              " is outside the convergence interval of the transform");
    }
    return (p.kappa_plus * laplace_transform(k, lambda) - p.mortality) / lambda;
}

/// t(lambda) = kappa_plus int (1 - lambda s) a(s) e^{lambda s} ds on (0, lambda0];
/// -inf when the first moment diverges at the abscissa.
inline double t_xi(const ModelParams& p, const Kernel1D& k, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("t_xi requires lambda > 0");
    if (lambda > k.abscissa()) throw InvalidArgument("t_xi requires lambda <= lambda0");
    if (!detail::transform_finite(k, lambda, 0))
        throw InvalidArgument("t_xi at the abscissa requires a finite transform there");
    const double m1 = exp_moment(k, 1, lambda);
    if (m1 == infinity) return -infinity;
    return p.kappa_plus * (exp_moment(k, 0, lambda) - lambda * m1);
}

/// Directional mean int s a(s) ds. Rejects kernels whose first moment diverges.
inline double directional_mean(const Kernel1D& k) {
    if (k.tail_class() == TailClass::heavy_tail && !k.tail().moment_finite_at_abscissa(1))
        throw InvalidArgument("first moment of the kernel diverges");
    // The centered marginal is even, so only the center contributes.
    return k.shift();
}

inline double directional_mean(const Kernel& kernel, std::span<const double> xi) {
    return directional_mean(reduce_to_direction(kernel, xi));
}

/// Mean vector int x a(x) dx.
inline std::vector<double> global_mean(const Kernel& kernel) {
    if (kernel.tail_class() == TailClass::heavy_tail && !kernel.marginal_tail().moment_finite_at_abscissa(1))
        throw InvalidArgument("first moment of the kernel diverges");
    std::vector<double> m(static_cast<std::size_t>(kernel.dimension()), 0.0);
    for (int i = 0; i < kernel.dimension(); ++i) m[static_cast<std::size_t>(i)] = kernel.spec().offset_component(i);
    return m;
}

/// int |s| a(s) ds by quadrature.
inline double absolute_first_moment(const Kernel1D& k) {
    if (k.tail_class() == TailClass::heavy_tail && !k.tail().moment_finite_at_abscissa(1)) return infinity;
    auto f = [&](double s) { return std::abs(s) * k(s); };
    return quad::real_line(f, k.shift(), 1e-13);
}

struct ConvergenceInterval {
    double upper = infinity;     // lambda0
    bool upper_closed = false;   // transform finite at lambda0
};

struct DispersionReport {
    double lambda0 = infinity;
    double value_at_abscissa = infinity;   // L(lambda0), +inf when divergent or lambda0 infinite
    double lambda_star = 0.0;
    double c_star = 0.0;
    KernelClass kernel_class = KernelClass::V_class;
    double t_xi_at_lambda0 = -infinity;    // NaN when lambda0 is infinite
    double m_xi = 0.0;
    ConvergenceInterval interval_I_xi;
    double laplace_at_lambda_star = 0.0;
    double alt_speed = 0.0;                // kappa_plus M_1(lambda*) (V class)
};

namespace detail {

template <class F>
double toms748_root(F f, double lo, double hi, double flo, double fhi) {
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Minimal speed along the marginal's direction. Bisection on the increasing
/// function H(lambda) = m - t(lambda) brackets the minimizer.
inline DispersionReport minimize_G(const ModelParams& p, const Kernel1D& k) {
    p.require_positive_theta();
    const double l0 = k.abscissa();
    if (!(l0 > 0.0)) {
        throw MollisonFailure("kernel " + k.source().spec().describe() +
                              " has no exponential moment; no finite minimal speed exists");
    }
    DispersionReport r;
    r.lambda0 = l0;
    r.m_xi = directional_mean(k);
    const bool closed = transform_finite_at_abscissa(k);
    r.interval_I_xi = {l0, closed};
    r.value_at_abscissa = closed ? laplace_transform(k, l0) : infinity;

    auto H = [&](double lam) { return p.mortality - t_xi(p, k, lam); };

    double lo = 0.0;
    double hi = 0.0;
    bool interior = true;
    if (l0 == infinity) {
        r.t_xi_at_lambda0 = std::numeric_limits<double>::quiet_NaN();
        hi = 1.0;
        while (H(hi) <= 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e6) throw NonConvergence("could not bracket the minimizer of G");
        }
    } else if (closed && std::isfinite(t_xi(p, k, l0))) {
        r.t_xi_at_lambda0 = t_xi(p, k, l0);
        if (r.t_xi_at_lambda0 >= p.mortality - 1e-8) {
            interior = false;
        } else {
            hi = l0;
        }
    } else {
        // H -> +inf at the abscissa (divergent transform or first moment);
        // find an evaluable point with H > 0.
        if (closed) r.t_xi_at_lambda0 = -infinity;
        double gap = 0.5 * l0;
        hi = l0 - gap;
        while (H(hi) <= 0.0) {
            lo = hi;
            gap *= 0.5;
            hi = l0 - gap;
            if (gap < 1e-14 * l0) throw NonConvergence("H does not change sign below the abscissa");
        }
    }

    if (interior) {
        const double flo = lo > 0.0 ? H(lo) : p.mortality - p.kappa_plus;
        const double fhi = H(hi);
        r.lambda_star = detail::toms748_root(
            [&](double lam) { return lam <= 0.0 ? p.mortality - p.kappa_plus : H(lam); }, lo, hi, flo, fhi);
        r.kernel_class = KernelClass::V_class;
    } else {
        r.lambda_star = l0;
        r.kernel_class = KernelClass::W_class;
    }
    r.laplace_at_lambda_star = laplace_transform(k, r.lambda_star);
    r.c_star = (p.kappa_plus * r.laplace_at_lambda_star - p.mortality) / r.lambda_star;
    const double m1 = exp_moment(k, 1, r.lambda_star);
    r.alt_speed = p.kappa_plus * m1;
    if (r.kernel_class == KernelClass::V_class &&
        std::abs(r.alt_speed - r.c_star) > 1e-6 * std::max(1.0, std::abs(r.c_star))) {
        throw NonConvergence("minimal speed representations disagree: G(lambda*) = " +
                             std::to_string(r.c_star) + ", kappa_plus M1(lambda*) = " +
                             std::to_string(r.alt_speed));
    }
    if (!(r.c_star > p.kappa_plus * r.m_xi)) {
        throw NonConvergence("computed minimal speed does not exceed kappa_plus times the mean");
    }
    return r;
}

inline KernelClass classify(const ModelParams& p, const Kernel1D& k) { return minimize_G(p, k).kernel_class; }

/// Characteristic function h(lambda) = kappa_plus L(lambda) - m - lambda c.
inline double characteristic(const ModelParams& p, const Kernel1D& k, double c, double lambda) {
    return p.kappa_plus * laplace_transform(k, lambda) - p.mortality - lambda * c;
}

/// The smaller positive root of the characteristic function, the decay rate of
/// the wave profile with speed c >= c*.
inline double speed_to_abscissa(const ModelParams& p, const Kernel1D& k, double c,
                                const DispersionReport& rep) {
    const double cs = rep.c_star;
    const double tol = 1e-12 * std::max(1.0, std::abs(cs));
    if (c < cs - tol) throw InvalidArgument("no wave below minimal speed (c < c*)");
    if (c <= cs + tol) return rep.lambda_star;
    auto h = [&](double lam) {
        return lam <= 0.0 ? p.kappa_plus - p.mortality : characteristic(p, k, c, lam);
    };
    const double hi = rep.lambda_star;
    return detail::toms748_root(h, 0.0, hi, p.kappa_plus - p.mortality, h(hi));
}

inline double speed_to_abscissa(const ModelParams& p, const Kernel1D& k, double c) {
    return speed_to_abscissa(p, k, c, minimize_G(p, k));
}

/// Multiplicity (1 or 2) of the characteristic root at lambda0(psi) for speed c.
inline int char_multiplicity(const ModelParams& p, const Kernel1D& k, double c, const DispersionReport& rep) {
    const double tol = 1e-12 * std::max(1.0, std::abs(rep.c_star));
    if (c < rep.c_star - tol) throw InvalidArgument("no wave below minimal speed (c < c*)");
    if (c > rep.c_star + tol) return 1;
    if (rep.kernel_class == KernelClass::V_class) return 2;
    const double t0 = rep.t_xi_at_lambda0;
    if (p.mortality < t0 - 1e-8) return 1;
    if (!k.tail().moment_finite_at_abscissa(2)) {
        throw Unsupported("critical case m = t(lambda0) with infinite second moment is not covered");
    }
    return 2;
}

inline int char_multiplicity(const ModelParams& p, const Kernel1D& k, double c) {
    return char_multiplicity(p, k, c, minimize_G(p, k));
}

/// Front set as an intersection of half-spaces {x . xi_i <= c*(xi_i)}.
struct FrontSet {
    int dimension = 1;
    std::vector<std::vector<double>> directions;
    std::vector<double> speeds;
    std::vector<double> kappa_mean;  // kappa_plus times the mean vector

    /// Whether x lies in scale * front (outer polygonal approximation).
    bool contains(std::span<const double> x, double scale = 1.0) const {
        for (std::size_t i = 0; i < directions.size(); ++i) {
            double dot = 0.0;
            for (int j = 0; j < dimension; ++j) dot += x[static_cast<std::size_t>(j)] * directions[i][static_cast<std::size_t>(j)];
            if (dot > scale * speeds[i]) return false;
        }
        return true;
    }

    double min_speed() const { return *std::min_element(speeds.begin(), speeds.end()); }
    double max_speed() const { return *std::max_element(speeds.begin(), speeds.end()); }

    /// Vertices of the outer polygon (d = 2), in angular order.
    std::vector<std::array<double, 2>> outer_vertices() const {
        std::vector<std::array<double, 2>> v;
        if (dimension != 2) return v;
        const std::size_t n = directions.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = directions[i];
            const auto& b = directions[(i + 1) % n];
            const double det = a[0] * b[1] - a[1] * b[0];
            if (std::abs(det) < 1e-14) continue;
            const double ca = speeds[i];
            const double cb = speeds[(i + 1) % n];
            v.push_back({(ca * b[1] - cb * a[1]) / det, (a[0] * cb - b[0] * ca) / det});
        }
        return v;
    }

    /// Radius of the largest disc about the origin inside the outer polygon.
    double inner_radius() const { return min_speed(); }
};

/// Minimal speeds over a uniform direction sample (d=1: -1, +1; d=2: n equi-angular).
/// Directions are evaluated on up to `threads` worker threads; results do not depend on it.
inline FrontSet front_set(const ModelParams& p, const Kernel& kernel, int n_directions = 64,
                          unsigned threads = 1) {
    p.require_positive_theta();
    FrontSet f;
    f.dimension = kernel.dimension();
    if (f.dimension == 1) {
        f.directions = {{1.0}, {-1.0}};
    } else {
        if (n_directions < 3) throw InvalidArgument("front_set needs at least 3 directions in 2-D");
        for (int i = 0; i < n_directions; ++i) {
            const double phi = 2.0 * std::numbers::pi * i / n_directions;
            f.directions.push_back({std::cos(phi), std::sin(phi)});
        }
    }
    f.speeds.assign(f.directions.size(), 0.0);
    parallel_for(f.directions.size(), threads, [&](std::size_t i) {
        f.speeds[i] = minimize_G(p, reduce_to_direction(kernel, f.directions[i])).c_star;
    });

    const auto mean = global_mean(kernel);
    f.kappa_mean.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) f.kappa_mean[i] = p.kappa_plus * mean[i];
    if (!f.contains(f.kappa_mean, 1.0 - 1e-12)) throw NonConvergence("kappa_plus * mean is not interior to the front set");
    for (double c : f.speeds)
        if (!std::isfinite(c)) throw NonConvergence("front set is unbounded");
    return f;
}

}  // namespace dnkpp
