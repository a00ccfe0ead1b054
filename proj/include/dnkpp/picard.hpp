#pragma once

// Fixed-point construction of the solution on successive short intervals:
//   (Phi v)(t) = B(v)(tau, t) u_tau + int_tau^t B(v)(s, t) kappa+ (a+ * v)(s) ds,
//   B(v)(s, t) = exp(-int_s^t (m + kappa- (a- * v)(p)) dp).
// Time is discretized on Chebyshev-Lobatto nodes with spectral integration.

#include "dnkpp/errors.hpp"
#include "dnkpp/evolution.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace dnkpp {

enum class PicardSizing {
    verbatim,  // mu_{n+1} = mu_n + alpha kappa+ / C (interval lengths shrink like 1/n)
    adaptive   // mu_{n+1} = max(mu_1, 1.01 sup u(Upsilon_n))
};

struct PicardOptions {
    double alpha = 0.5;
    PicardSizing sizing = PicardSizing::adaptive;
    int nodes = 16;              // Chebyshev-Lobatto nodes per interval (polynomial degree)
    double tolerance = 1e-10;    // sup-change that ends the iteration on an interval
    int max_sweeps = 500;
    std::size_t max_intervals = 100000;
};

struct PicardInterval {
    double start = 0.0;
    double end = 0.0;
    double mu = 0.0;
    int sweeps = 0;
    double final_change = 0.0;
};

struct PicardResult {
    Trajectory trajectory;             // snapshots at interval ends
    std::vector<PicardInterval> intervals;
    double alpha = 0.0;
    double C = 0.0;
};

namespace detail {

// Cumulative integration matrix S on Chebyshev-Lobatto nodes of [0, tau]:
// (S f)_j ~ int_0^{t_j} f.
struct ChebyshevIntegrator {
    std::vector<double> nodes;  // on [0, 1]
    Eigen::MatrixXd S;          // for an interval of unit length

    explicit ChebyshevIntegrator(int n) {
        const int m = n + 1;
        Eigen::VectorXd x(m);
        for (int j = 0; j < m; ++j) x(j) = -std::cos(std::numbers::pi * j / n);
        Eigen::MatrixXd V(m, m);
        Eigen::MatrixXd I(m, m);
        for (int j = 0; j < m; ++j) {
            std::vector<double> T(static_cast<std::size_t>(m + 1));
            T[0] = 1.0;
            T[1] = x(j);
            for (int k = 2; k <= m; ++k) T[static_cast<std::size_t>(k)] = 2.0 * x(j) * T[static_cast<std::size_t>(k - 1)] - T[static_cast<std::size_t>(k - 2)];
            for (int k = 0; k < m; ++k) {
                V(j, k) = T[static_cast<std::size_t>(k)];
                double integral = 0.0;
                if (k == 0) {
                    integral = x(j) + 1.0;
                } else if (k == 1) {
                    integral = 0.5 * (x(j) * x(j) - 1.0);
                } else {
                    // int_{-1}^{x} T_k = [T_{k+1}/(k+1) - T_{k-1}/(k-1)]/2 - value at -1
                    const double at_minus1 = ((k + 1) % 2 == 0 ? 1.0 : -1.0) / (k + 1) -
                                             ((k - 1) % 2 == 0 ? 1.0 : -1.0) / (k - 1);
                    integral = 0.5 * (T[static_cast<std::size_t>(k + 1)] / (k + 1) -
                                      T[static_cast<std::size_t>(k - 1)] / (k - 1) - at_minus1);
                }
                I(j, k) = integral;
            }
        }
        // Map [-1, 1] to [0, 1]: dt = dx / 2.
        S = 0.5 * I * V.inverse();
        for (int j = 0; j < m; ++j) nodes.push_back(0.5 * (x(j) + 1.0));
    }
};

}  // namespace detail

/// Solves the initial-value problem on [u0.time, horizon] by the interval-wise
/// fixed-point scheme. Throws NonConvergence when the sup-change grows for five
/// consecutive sweeps on an interval.
inline PicardResult picard_solve(Model& model, const Field& u0, double horizon, const PicardOptions& opt = {}) {
    const ModelParams& p = model.params();
    if (u0.min() < 0.0) throw InvalidArgument("picard_solve requires u0 >= 0");
    if (!(u0.grid == model.grid())) throw InvalidArgument("initial field grid differs from the model grid");
    if (opt.nodes < 2) throw InvalidArgument("Picard needs at least 2 time nodes");

    PicardResult res;
    const double C = p.kappa_minus + p.kappa_plus * p.kappa_minus / (p.mortality * std::numbers::e);
    res.C = C;
    const double mu1 = std::max(1.01 * u0.sup_norm(), 0.1 * std::max(p.theta(), 1.0));

    // alpha must satisfy alpha^2 / (1 - alpha) < C^2 mu m e / (kappa+^2 kappa-) for mu = mu1.
    const double bound = C * C * mu1 * p.mortality * std::numbers::e / (p.kappa_plus * p.kappa_plus * p.kappa_minus);
    double alpha = opt.alpha;
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("Picard alpha must lie in (0, 1)");
    while (!(alpha * alpha / (1.0 - alpha) < bound)) alpha *= 0.5;
    res.alpha = alpha;

    const detail::ChebyshevIntegrator cheb(opt.nodes);
    const int m = opt.nodes + 1;
    const std::size_t n = u0.size();
    const double kp = p.kappa_plus;
    const double km = p.kappa_minus;
    const double mort = p.mortality;

    Field u = u0;
    res.trajectory.record(u);
    double mu = mu1;
    std::vector<std::vector<double>> v(static_cast<std::size_t>(m), u.values);
    std::vector<std::vector<double>> cp(static_cast<std::size_t>(m)), cm(static_cast<std::size_t>(m));
    std::vector<std::vector<double>> E(static_cast<std::size_t>(m), std::vector<double>(n));
    std::vector<double> integrand_rate(static_cast<std::size_t>(m)), integrand_src(static_cast<std::size_t>(m));

    while (u.time < horizon * (1.0 - 1e-15) && res.intervals.size() < opt.max_intervals) {
        const double tau = u.time;
        double len = alpha / (C * mu + alpha * kp);
        if (tau + len > horizon) len = horizon - tau;
        for (auto& vj : v) vj = u.values;

        PicardInterval info{tau, tau + len, mu, 0, 0.0};
        double prev_change = std::numeric_limits<double>::infinity();
        int growing = 0;
        for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
            for (int j = 0; j < m; ++j) model.convolve(v[static_cast<std::size_t>(j)], cp[static_cast<std::size_t>(j)], cm[static_cast<std::size_t>(j)]);
            double change = 0.0;
            std::vector<std::vector<double>> next(static_cast<std::size_t>(m), std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i) {
                for (int k = 0; k < m; ++k) integrand_rate[static_cast<std::size_t>(k)] = mort + km * cm[static_cast<std::size_t>(k)][i];
                for (int j = 0; j < m; ++j) {
                    double e = 0.0;
                    for (int k = 0; k < m; ++k) e += cheb.S(j, k) * integrand_rate[static_cast<std::size_t>(k)];
                    E[static_cast<std::size_t>(j)][i] = e * len;
                }
                for (int k = 0; k < m; ++k)
                    integrand_src[static_cast<std::size_t>(k)] = std::exp(E[static_cast<std::size_t>(k)][i]) * kp * cp[static_cast<std::size_t>(k)][i];
                for (int j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < m; ++k) s += cheb.S(j, k) * integrand_src[static_cast<std::size_t>(k)];
                    const double phi = std::exp(-E[static_cast<std::size_t>(j)][i]) * (u[i] + s * len);
                    change = std::max(change, std::abs(phi - v[static_cast<std::size_t>(j)][i]));
                    next[static_cast<std::size_t>(j)][i] = phi;
                }
            }
            v.swap(next);
            info.sweeps = sweep;
            info.final_change = change;
            if (!std::isfinite(change)) throw NumericalBlowup("Picard iterate became non-finite");
            if (change <= opt.tolerance) break;
            growing = change > prev_change ? growing + 1 : 0;
            if (growing >= 5) {
                std::ostringstream os;
                os << "Picard iteration is not contracting on [" << info.start << ", " << info.end
                   << "] (mu = " << mu << ", alpha = " << alpha << ", change = " << change << ")";
                throw NonConvergence(os.str());
            }
            prev_change = change;
            if (sweep == opt.max_sweeps) {
                std::ostringstream os;
                os << "Picard iteration did not reach tolerance on [" << info.start << ", " << info.end
                   << "] after " << sweep << " sweeps (change = " << change << ")";
                throw NonConvergence(os.str());
            }
        }
        u.values = v.back();
        u.time = tau + len;
        res.trajectory.record(u);
        res.intervals.push_back(info);
        if (opt.sizing == PicardSizing::verbatim) {
            mu += alpha * kp / C;
        } else {
            mu = std::max(mu1, 1.01 * u.sup_norm());
        }
    }
    if (u.time < horizon * (1.0 - 1e-15)) throw NonConvergence("Picard interval budget exhausted before the horizon");
    return res;
}

}  // namespace dnkpp
