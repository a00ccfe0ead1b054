#pragma once

// A-priori estimates: the explicit all-time sup bound and the certified
// Gaussian subsolution.

#include "dnkpp/assumptions.hpp"
#include "dnkpp/evolution.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/params.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

namespace dnkpp {

struct UniformBound {
    double bound = 0.0;
    double M = 0.0;          // 1.01 * max{b_r sup u0, theta / alpha}
    double a_q = 0.0;        // sum over cubes H_q(z) of sup a+
    double q = 0.0;
    double r0 = 0.0;
    double alpha = 0.0;      // inf of a- over the ball of radius r0
    bool strip = false;      // bound is theta from the invariance of [0, theta]
    bool decay_regime = false;
};

namespace detail {

// sup of a radial, non-increasing-in-distance kernel over the cube of half side q centered at c.
inline double sup_on_cube(const Kernel& k, std::span<const double> c, double q) {
    double d2 = 0.0;
    for (int i = 0; i < k.dimension(); ++i) {
        const double b = k.spec().offset_component(i);
        const double lo = c[static_cast<std::size_t>(i)] - q;
        const double hi = c[static_cast<std::size_t>(i)] + q;
        const double nearest = std::clamp(b, lo, hi);
        d2 += (nearest - b) * (nearest - b);
    }
    return k.radial(std::sqrt(d2));
}

// sum_z sup_{H_q(z)} a, truncated once a full shell contributes below 1e-17 of the sum.
inline double cube_sum(const Kernel& k, double q) {
    const int d = k.dimension();
    double total = 0.0;
    long shift = 0;
    if (d == 1) shift = std::lround(k.spec().offset_component(0) / (2.0 * q));
    for (long R = 0; R < 100000000; ++R) {
        double shell = 0.0;
        if (d == 1) {
            for (long z : {shift - R, shift + R}) {
                const double c = 2.0 * q * static_cast<double>(z);
                shell += sup_on_cube(k, std::span<const double>(&c, 1), q);
                if (R == 0) break;
            }
        } else {
            for (long i = -R; i <= R; ++i)
                for (long j = -R; j <= R; ++j) {
                    if (std::max(std::labs(i), std::labs(j)) != R) continue;
                    const std::array<double, 2> c{2.0 * q * static_cast<double>(i), 2.0 * q * static_cast<double>(j)};
                    shell += sup_on_cube(k, c, q);
                }
        }
        total += shell;
        if (R > 2 && shell < 1e-17 * total) break;
        if (R > 20000 && d == 2) break;
    }
    return total;
}

}  // namespace detail

/// Explicit sup bound for all times: max{kappa+ M a_q / m, sup u0} with
/// M = 1.01 max{b_r sup u0, theta / alpha}, r = q sqrt(d), q = r0 / (2 sqrt(d)).
/// The ball radius r0 is chosen from a small scan to make the bound smallest.
inline UniformBound uniform_bound(const ModelParams& p, const Kernel& a_plus, const Kernel& a_minus, double u0_sup,
                                  std::optional<bool> strip_hypotheses = std::nullopt) {
    p.validate();
    if (u0_sup < 0.0) throw InvalidArgument("u0_sup must be nonnegative");
    UniformBound ub;
    if (!p.has_positive_theta()) {
        ub.bound = u0_sup;
        ub.decay_regime = true;
        return ub;
    }
    const double theta = p.theta();
    bool strip = false;
    if (strip_hypotheses) {
        strip = *strip_hypotheses;
    } else {
        const auto rep = check_assumptions(p, a_plus, a_minus, 4.0 * std::max(a_plus.effective_scale(), a_minus.effective_scale()));
        strip = rep.A1_kappa_gt_m && rep.A2_kernel_domination;
    }
    if (strip && u0_sup <= theta) {
        ub.bound = theta;
        ub.strip = true;
        return ub;
    }
    if (a_plus.tail_class() == TailClass::heavy_tail && a_plus.marginal_tail().poly_power <= 1.0) {
        throw InvalidArgument("the cube sum of a+ diverges");
    }
    const int d = a_plus.dimension();
    const double sd = std::sqrt(static_cast<double>(d));
    const double b = a_minus.offset_norm();
    double best = infinity;
    const double base = a_minus.effective_scale();
    for (double f : {0.125, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
        double r0 = f * base;
        if (a_minus.spec().family == KernelFamily::compact_uniform) {
            if (r0 + b >= a_minus.spec().radius) continue;
        }
        const double alpha = a_minus.radial(r0 + b);
        if (!(alpha > 0.0)) continue;
        const double q = r0 / (2.0 * sd);
        const double r = q * sd;
        const double ball = d == 1 ? 2.0 * r : std::numbers::pi * r * r;
        const double M = 1.01 * std::max(ball * u0_sup, theta / alpha);
        const double aq = detail::cube_sum(a_plus, q);
        const double bound = std::max(p.kappa_plus * M * aq / p.mortality, u0_sup);
        if (bound < best) {
            best = bound;
            ub = UniformBound{bound, M, aq, q, r0, alpha, false, false};
        }
    }
    if (!std::isfinite(best)) throw InvalidArgument("no admissible ball radius for the positivity of a-");
    return ub;
}

/// w(x, t) = q exp(-|x - t mean|^2 / (alpha t)).
inline Field gaussian_profile(const Grid& grid, std::span<const double> mean, double q, double alpha, double t) {
    if (!(t > 0.0) || !(alpha > 0.0)) throw InvalidArgument("gaussian subsolution needs t > 0 and alpha > 0");
    if (grid.dimension == 1) {
        const double c = t * mean[0];
        return Field::from_function(grid, [&](double x) { return q * std::exp(-(x - c) * (x - c) / (alpha * t)); }, t);
    }
    const double c0 = t * mean[0];
    const double c1 = t * mean[1];
    return Field::from_function(
        grid, [&](double x, double y) { return q * std::exp(-((x - c0) * (x - c0) + (y - c1) * (y - c1)) / (alpha * t)); }, t);
}

/// F w = dw/dt - kappa+ (a+ * w) + m w + kappa- w (a- * w) at time t on the grid.
inline Field evolution_operator_on_gaussian(Model& model, std::span<const double> mean, double q, double alpha,
                                            double t) {
    const Grid& g = model.grid();
    Field w = gaussian_profile(g, mean, q, alpha, t);
    Field r = model.rhs(w);
    const std::size_t n = g.points;
    for (std::size_t idx = 0; idx < w.size(); ++idx) {
        double y2 = 0.0;
        double ym = 0.0;
        if (g.dimension == 1) {
            const double y = g.coord(idx) - t * mean[0];
            y2 = y * y;
            ym = y * mean[0];
        } else {
            const double y0 = g.coord(idx / n) - t * mean[0];
            const double y1 = g.coord(idx % n) - t * mean[1];
            y2 = y0 * y0 + y1 * y1;
            ym = y0 * mean[0] + y1 * mean[1];
        }
        // d/dt of -|x - t m|^2 / (alpha t)
        const double rate = 2.0 * ym / (alpha * t) + y2 / (alpha * t * t);
        r[idx] = w[idx] * rate - r[idx];
    }
    return r;
}

/// Samples the Gaussian subsolution and certifies F w <= tol on the grid.
inline Field gaussian_subsolution(Model& model, std::span<const double> mean, double q, double alpha, double t,
                                  double tol = 1e-8) {
    Field F = evolution_operator_on_gaussian(model, mean, q, alpha, t);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < F.size(); ++i)
        if (F[i] > F[worst]) worst = i;
    if (F[worst] > tol) {
        const Grid& g = model.grid();
        const double loc = g.dimension == 1 ? g.coord(worst) : g.coord(worst / g.points);
        std::ostringstream os;
        os << "Gaussian subsolution certification failed at x = " << loc << " (F w = " << F[worst]
           << " > " << tol << ")";
        throw CertificationFailed(os.str(), loc, F[worst]);
    }
    return gaussian_profile(model.grid(), mean, q, alpha, t);
}

}  // namespace dnkpp
