#pragma once

// Measurements on simulated trajectories: level tracking and spreading speed,
// convergence to theta inside the front, decay outside it, acceleration for
// heavy tails, and ordering harnesses.

#include "dnkpp/assumptions.hpp"
#include "dnkpp/bounds.hpp"
#include "dnkpp/dispersion.hpp"
#include "dnkpp/errors.hpp"
#include "dnkpp/evolution.hpp"
#include "dnkpp/grid.hpp"
#include "dnkpp/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dnkpp {

struct LevelTrace {
    double level = 0.0;
    std::vector<double> direction;
    std::vector<double> times;
    std::vector<double> positions;
    bool truncated = false;   // stopped because the front came within 10% of the domain edge

    std::size_t size() const noexcept { return times.size(); }
};

namespace detail {

// Bilinear sample of a 2-D field at (x, y); periodic wrap.
inline double sample2d(const Field& u, double x, double y) {
    const Grid& g = u.grid;
    const auto n = static_cast<long>(g.points);
    const double h = g.spacing();
    const double fx = (x + g.half_length) / h;
    const double fy = (y + g.half_length) / h;
    const long i0 = static_cast<long>(std::floor(fx));
    const long j0 = static_cast<long>(std::floor(fy));
    const double tx = fx - static_cast<double>(i0);
    const double ty = fy - static_cast<double>(j0);
    auto at = [&](long i, long j) {
        i = ((i % n) + n) % n;
        j = ((j % n) + n) % n;
        return u[static_cast<std::size_t>(i * n + j)];
    };
    return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) + (1 - tx) * ty * at(i0, j0 + 1) +
           tx * ty * at(i0 + 1, j0 + 1);
}

// Values of u along the ray s xi, s = 0, h, 2h, ... up to the domain edge.
inline std::vector<double> ray(const Field& u, std::span<const double> xi, double& step) {
    const Grid& g = u.grid;
    step = g.spacing();
    std::vector<double> v;
    if (g.dimension == 1) {
        const std::size_t c = g.points / 2;  // coord(c) = 0
        if (xi[0] > 0.0) {
            for (std::size_t i = c; i < g.points; ++i) v.push_back(u[i]);
        } else {
            for (std::size_t i = c + 1; i-- > 0;) v.push_back(u[i]);
        }
        return v;
    }
    const double reach = g.half_length - g.spacing();
    const double m = std::max(std::abs(xi[0]), std::abs(xi[1]));
    const double smax = reach / m;
    for (double s = 0.0; s <= smax + 1e-12; s += step) v.push_back(sample2d(u, s * xi[0], s * xi[1]));
    return v;
}

}  // namespace detail

/// Rightmost crossing of u = level along the ray s xi, linearly interpolated.
/// When u >= level on the whole ray the last ray point is returned.
inline std::optional<double> level_position(const Field& u, double level, std::span<const double> xi) {
    double h = 0.0;
    const auto v = detail::ray(u, xi, h);
    for (std::size_t i = v.size(); i-- > 0;) {
        if (v[i] >= level) {
            if (i + 1 == v.size()) return static_cast<double>(i) * h;
            const double f = (v[i] - level) / (v[i] - v[i + 1]);
            return (static_cast<double>(i) + f) * h;
        }
    }
    return std::nullopt;
}

inline LevelTrace track_level(const Trajectory& traj, double level, std::vector<double> xi) {
    if (traj.size() == 0) throw InvalidArgument("empty trajectory");
    const int d = traj.snapshots.front().grid.dimension;
    if (static_cast<int>(xi.size()) != d) throw InvalidArgument("direction dimension does not match the grid");
    double norm = 0.0;
    for (double v : xi) norm += v * v;
    if (std::abs(norm - 1.0) > 1e-9) throw InvalidArgument("direction must be a unit vector");
    if (!(level > 0.0)) throw InvalidArgument("level must be positive");
    LevelTrace tr;
    tr.level = level;
    tr.direction = std::move(xi);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field& u = traj.snapshots[k];
        double h = 0.0;
        const double extent = static_cast<double>(detail::ray(u, tr.direction, h).size() - 1) * h;
        const auto pos = level_position(u, level, tr.direction);
        if (!pos) continue;
        // pos == extent is the sentinel for "level attained up to the edge"; after
        // an interior crossing it means the front ran off the ray.
        const bool ran_off = *pos >= extent && !tr.positions.empty() && tr.positions.back() < extent;
        if ((*pos > 0.9 * extent && *pos < extent) || ran_off) {
            tr.truncated = true;
            break;
        }
        tr.times.push_back(traj.times[k]);
        tr.positions.push_back(*pos);
    }
    return tr;
}

struct SpeedEstimate {
    double c_hat = 0.0;
    double stderr_c = 0.0;
    double window_begin = 0.0;
    double window_end = 0.0;
    std::size_t points = 0;
    double curvature = 0.0;   // quadratic coefficient of a degree-2 fit on the window
};

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};

inline LineFit line_fit(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.stderr_slope = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
    return f;
}

}  // namespace detail

/// Least-squares slope of position against time. Without an explicit window the
/// first 25% of the trace duration is dropped.
inline SpeedEstimate estimate_speed(const LevelTrace& trace, std::optional<std::pair<double, double>> window = std::nullopt) {
    if (trace.size() < 2) throw InvalidArgument("speed estimate needs at least 10 trace points");
    double t0 = 0.0, t1 = 0.0;
    if (window) {
        t0 = window->first;
        t1 = window->second;
    } else {
        const double a = trace.times.front();
        const double b = trace.times.back();
        t0 = a + 0.25 * (b - a);
        t1 = b;
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.times[i] >= t0 - 1e-12 && trace.times[i] <= t1 + 1e-12) {
            x.push_back(trace.times[i]);
            y.push_back(trace.positions[i]);
        }
    }
    if (x.size() < 10) {
        std::ostringstream os;
        os << "speed estimate needs at least 10 trace points in [" << t0 << ", " << t1 << "], got " << x.size();
        throw InvalidArgument(os.str());
    }
    const auto f = detail::line_fit(x, y);
    SpeedEstimate s;
    s.c_hat = f.slope;
    s.stderr_c = f.stderr_slope;
    s.window_begin = x.front();
    s.window_end = x.back();
    s.points = x.size();
    // Quadratic coefficient from the fit of the residuals against centered t^2.
    const double tm = 0.5 * (x.front() + x.back());
    std::vector<double> q(x.size()), r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        q[i] = (x[i] - tm) * (x[i] - tm);
        r[i] = y[i] - f.intercept - f.slope * x[i];
    }
    s.curvature = detail::line_fit(q, r).slope;
    return s;
}

struct DeviationSeries {
    std::vector<double> times;
    std::vector<double> deviation;
    bool truncated = false;
};

namespace detail {

inline std::array<double, 2> point(const Grid& g, std::size_t idx) {
    if (g.dimension == 1) return {g.coord(idx), 0.0};
    return {g.coord(idx / g.points), g.coord(idx % g.points)};
}

// Whether the set scale * front reaches the boundary of the periodic box.
inline bool reaches_boundary(const FrontSet& f, const Grid& g, double scale) {
    const double e = g.half_length - g.spacing();
    if (g.dimension == 1) {
        const std::array<double, 1> a{e}, b{-e};
        return f.contains(a, scale) || f.contains(b, scale);
    }
    for (std::size_t i = 0; i < g.points; ++i) {
        const double s = g.coord(i);
        for (auto x : {std::array<double, 2>{s, e}, std::array<double, 2>{s, -e}, std::array<double, 2>{e, s},
                       std::array<double, 2>{-e, s}})
            if (f.contains(x, scale)) return true;
    }
    return false;
}

}  // namespace detail

/// theta - min of u over t * shrink * front, per snapshot.
inline DeviationSeries interior_convergence(const Trajectory& traj, const FrontSet& front, double shrink,
                                            double theta) {
    if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("shrink must lie in (0, 1)");
    DeviationSeries out;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field& u = traj.snapshots[k];
        const double t = traj.times[k];
        if (detail::reaches_boundary(front, u.grid, shrink * t)) {
            out.truncated = true;
            break;
        }
        double mn = infinity;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const auto x = detail::point(u.grid, i);
            if (front.contains(std::span<const double>(x.data(), static_cast<std::size_t>(u.grid.dimension)), shrink * t))
                mn = std::min(mn, u[i]);
        }
        if (!std::isfinite(mn)) continue;
        out.times.push_back(t);
        out.deviation.push_back(theta - mn);
    }
    return out;
}

/// sup |f(x)| e^{lambda x . xi} over grid points with |f| above `floor`.
inline double weighted_norm(const Field& f, double lambda, std::span<const double> xi, double floor = 0.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = std::abs(f[i]);
        if (v <= floor) continue;
        const auto x = detail::point(f.grid, i);
        double dot = x[0] * xi[0];
        if (f.grid.dimension == 2) dot += x[1] * xi[1];
        s = std::max(s, v * std::exp(lambda * dot));
    }
    return s;
}

struct ExteriorDecay {
    std::vector<double> times;
    std::vector<double> sup_outside;
    std::vector<double> bound;        // max over directions of ||u0||_{lambda*, xi} e^{-lambda* delta t}
    double delta = 0.0;
    double nu_hat = 0.0;              // fitted exponential rate of sup_outside
    double max_excess = -infinity;    // max over snapshots of sup_outside - bound
    bool below_bound = true;
};

/// Decay of u outside inflate * t * front against the analytic envelope.
/// `lambda_star[i]` and the weighted norms refer to front.directions[i].
inline ExteriorDecay exterior_decay(const Trajectory& traj, const FrontSet& front, double inflate,
                                    std::span<const double> lambda_star, double floor = 0.0) {
    if (!(inflate > 1.0)) throw InvalidArgument("inflate must exceed 1");
    if (lambda_star.size() != front.directions.size()) throw InvalidArgument("one lambda* per front direction is required");
    const Field& u0 = traj.snapshots.front();
    const Grid& g = u0.grid;
    std::vector<double> norms(front.directions.size());
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const auto& xi = front.directions[i];
        norms[i] = weighted_norm(u0, lambda_star[i], xi, floor);
        // Fat tails put the weighted supremum at the domain edge.
        double inner = 0.0, outer = 0.0;
        for (std::size_t k = 0; k < u0.size(); ++k) {
            const double v = std::abs(u0[k]);
            if (v <= floor) continue;
            const auto x = detail::point(g, k);
            const double r = std::max(std::abs(x[0]), std::abs(x[1]));
            const double dot = x[0] * xi[0] + (g.dimension == 2 ? x[1] * xi[1] : 0.0);
            const double w = v * std::exp(lambda_star[i] * dot);
            double& slot = r > 0.9 * g.half_length ? outer : inner;
            slot = std::max(slot, w);
        }
        if (outer > inner && outer > 0.0) {
            throw InvalidArgument("initial datum decays slower than e^{-lambda* |x|}: weighted norm is attained at the domain edge");
        }
    }
    ExteriorDecay out;
    out.delta = (inflate - 1.0) * front.min_speed();
    std::vector<double> ft, fl;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field& u = traj.snapshots[k];
        const double t = traj.times[k];
        if (!(t > 0.0)) continue;
        double sup = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const auto x = detail::point(g, i);
            if (!front.contains(std::span<const double>(x.data(), static_cast<std::size_t>(g.dimension)), inflate * t))
                sup = std::max(sup, u[i]);
        }
        double b = 0.0;
        for (std::size_t i = 0; i < norms.size(); ++i) b = std::max(b, norms[i] * std::exp(-lambda_star[i] * out.delta * t));
        out.times.push_back(t);
        out.sup_outside.push_back(sup);
        out.bound.push_back(b);
        out.max_excess = std::max(out.max_excess, sup - b);
        if (sup > b + floor) out.below_bound = false;
        if (sup > floor) {
            ft.push_back(t);
            fl.push_back(std::log(sup));
        }
    }
    if (ft.size() >= 3) out.nu_hat = -detail::line_fit(ft, fl).slope;
    return out;
}

struct WeightedGrowth {
    double lambda = 0.0;
    double p = 0.0;                    // kappa+ L(lambda) - m
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> envelope;      // ||u0||_{lambda,xi} e^{p t}
    bool within = true;
};

inline WeightedGrowth weighted_growth(const Trajectory& traj, const ModelParams& p, const Kernel1D& k, double lambda,
                                      std::span<const double> xi, double floor = 0.0) {
    WeightedGrowth w;
    w.lambda = lambda;
    w.p = p.kappa_plus * laplace_transform(k, lambda) - p.mortality;
    const double n0 = weighted_norm(traj.snapshots.front(), lambda, xi, floor);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i] - traj.times.front();
        const double n = weighted_norm(traj.snapshots[i], lambda, xi, floor);
        const double e = n0 * std::exp(w.p * t);
        w.times.push_back(traj.times[i]);
        w.norms.push_back(n);
        w.envelope.push_back(e);
        if (n > e * (1.0 + 1e-9)) w.within = false;
    }
    return w;
}

enum class AccelerationVerdict { ballistic_consistent, superlinear, inconclusive };

inline std::string_view to_string(AccelerationVerdict v) {
    switch (v) {
        case AccelerationVerdict::ballistic_consistent: return "BallisticConsistent";
        case AccelerationVerdict::superlinear: return "Superlinear";
        default: return "Inconclusive";
    }
}

struct AccelerationReport {
    AccelerationVerdict verdict = AccelerationVerdict::inconclusive;
    std::vector<double> t;
    std::vector<double> ratio;   // x(2t) / x(t)
};

/// Ratios x(2t)/x(t) for t in [T/4, T/2], T the last trace time. Superlinear when
/// every ratio is >= 2.15, ballistic when every ratio lies in [1.9, 2.1].
inline AccelerationReport acceleration_test(const LevelTrace& trace) {
    AccelerationReport rep;
    std::vector<double> tt, xx;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace.times[i] > 0.0) {
            tt.push_back(trace.times[i]);
            xx.push_back(trace.positions[i]);
        }
    if (tt.size() < 4 || tt.back() < 4.0 * tt.front()) throw InvalidArgument("acceleration test needs a trace spanning a time factor of at least 4");
    auto at = [&](double t) {
        const auto it = std::lower_bound(tt.begin(), tt.end(), t);
        if (it == tt.begin()) return xx.front();
        if (it == tt.end()) return xx.back();
        const auto j = static_cast<std::size_t>(it - tt.begin());
        const double f = (t - tt[j - 1]) / (tt[j] - tt[j - 1]);
        return xx[j - 1] + f * (xx[j] - xx[j - 1]);
    };
    const double T = tt.back();
    bool all_super = true;
    bool all_ball = true;
    for (int k = 0; k <= 10; ++k) {
        const double t = T / 4.0 + (T / 4.0) * k / 10.0;
        const double x1 = at(t);
        const double x2 = at(2.0 * t);
        const double r = x1 > 0.0 ? x2 / x1 : infinity;
        rep.t.push_back(t);
        rep.ratio.push_back(r);
        if (!(r >= 2.15)) all_super = false;
        if (!(r >= 1.9 && r <= 2.1)) all_ball = false;
    }
    rep.verdict = all_super ? AccelerationVerdict::superlinear
                            : (all_ball ? AccelerationVerdict::ballistic_consistent : AccelerationVerdict::inconclusive);
    return rep;
}

struct ComparisonReport {
    double max_violation = 0.0;          // max (u - v)_+ over all snapshots
    double strip_excess = 0.0;           // max of (u - theta)_+, (v - theta)_+, (-u)_+, (-v)_+
    bool envelope_checked = false;
    double envelope_violation = 0.0;     // max (lower envelope - u)_+
};

namespace detail {

// Lower bound beta theta / (beta + (theta - beta) e^{-theta kappa- t}).
inline double lower_envelope(const ModelParams& p, double beta, double t) {
    const double theta = p.theta();
    return beta * theta / (beta + (theta - beta) * std::exp(-theta * p.kappa_minus * t));
}

}  // namespace detail

/// Co-evolves u0 <= v0 and records ordering and strip violations. Refuses
/// when the domination hypothesis fails.
inline ComparisonReport comparison_harness(Model& model, const AssumptionReport& assumptions, const Field& u0,
                                           const Field& v0, double horizon, const StepConfig& cfg,
                                           std::size_t stride = 10) {
    if (!assumptions.A1_kappa_gt_m || !assumptions.A2_kernel_domination)
        throw InvalidArgument("comparison harness requires kappa+ > m and kernel domination");
    const ModelParams& p = model.params();
    const double theta = p.theta();
    for (std::size_t i = 0; i < u0.size(); ++i)
        if (u0[i] > v0[i]) throw InvalidArgument("comparison harness requires u0 <= v0");
    ComparisonReport rep;
    const double beta = u0.min();
    rep.envelope_checked = beta > 0.0 && u0.max() <= theta;
    std::vector<Field> us, vs;
    integrate(model, u0, cfg, horizon, stride, [&](const Field& f) { us.push_back(f); });
    integrate(model, v0, cfg, horizon, stride, [&](const Field& f) { vs.push_back(f); });
    for (std::size_t k = 0; k < us.size(); ++k) {
        const Field& u = us[k];
        const Field& v = vs[k];
        const double env = rep.envelope_checked ? detail::lower_envelope(p, beta, u.time) : 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            rep.max_violation = std::max(rep.max_violation, u[i] - v[i]);
            rep.strip_excess = std::max({rep.strip_excess, u[i] - theta, v[i] - theta, -u[i], -v[i]});
            if (rep.envelope_checked) rep.envelope_violation = std::max(rep.envelope_violation, env - u[i]);
        }
    }
    return rep;
}

struct OvershootReport {
    double max_excess = 0.0;   // max over t <= horizon of sup u - theta
    double time = 0.0;         // first snapshot time attaining it
};

/// Runs u0 <= theta without the domination hypothesis and reports how far u rises above theta.
inline OvershootReport necessity_counterexample(Model& model, const Field& u0, double horizon, const StepConfig& cfg,
                                                std::size_t stride = 1) {
    const double theta = model.params().theta();
    OvershootReport rep;
    rep.max_excess = -infinity;
    integrate(model, u0, cfg, horizon, stride, [&](const Field& f) {
        const double e = f.max() - theta;
        if (e > rep.max_excess) {
            rep.max_excess = e;
            rep.time = f.time;
        }
    });
    return rep;
}

struct SeparationReport {
    double min_gap_final = 0.0;      // min over the grid of v - u at the horizon
    double min_gap_positive_t = 0.0; // min over snapshots with t > 0
};

inline SeparationReport separation_harness(Model& model, const Field& u0, const Field& v0, double horizon,
                                           const StepConfig& cfg, std::size_t stride = 10) {
    for (std::size_t i = 0; i < u0.size(); ++i)
        if (u0[i] > v0[i]) throw InvalidArgument("separation harness requires u0 <= v0");
    std::vector<Field> us, vs;
    integrate(model, u0, cfg, horizon, stride, [&](const Field& f) { us.push_back(f); });
    integrate(model, v0, cfg, horizon, stride, [&](const Field& f) { vs.push_back(f); });
    SeparationReport rep;
    rep.min_gap_positive_t = infinity;
    for (std::size_t k = 0; k < us.size(); ++k) {
        double g = infinity;
        for (std::size_t i = 0; i < us[k].size(); ++i) g = std::min(g, vs[k][i] - us[k][i]);
        if (us[k].time > u0.time) rep.min_gap_positive_t = std::min(rep.min_gap_positive_t, g);
        if (k + 1 == us.size()) rep.min_gap_final = g;
    }
    return rep;
}

struct StabilityReport {
    std::vector<double> times;
    std::vector<double> distance;   // sup |u - theta|
    std::vector<double> envelope;   // theta - lower envelope, empty when no claim is made
    bool claim = false;             // perturbation below theta: envelope applies
    bool eventually_below = true;
};

/// u0 = theta - epsilon * bump (below) or theta + epsilon * bump (above) with a
/// Gaussian bump of unit height and width `width`.
inline StabilityReport stability_perturbation(Model& model, double epsilon, bool below, double horizon,
                                              const StepConfig& cfg, std::size_t stride = 100, double width = 2.0) {
    const ModelParams& p = model.params();
    const double theta = p.theta();
    if (epsilon < 0.0 || (below && epsilon >= theta)) throw InvalidArgument("epsilon must lie in [0, theta)");
    const double sign = below ? -1.0 : 1.0;
    const Grid& g = model.grid();
    Field u0 = g.dimension == 1
                   ? Field::from_function(g, [&](double x) { return theta + sign * epsilon * std::exp(-x * x / (width * width)); })
                   : Field::from_function(g, [&](double x, double y) {
                         return theta + sign * epsilon * std::exp(-(x * x + y * y) / (width * width));
                     });
    StabilityReport rep;
    rep.claim = below;
    const double beta = u0.min();
    integrate(model, u0, cfg, horizon, stride, [&](const Field& f) {
        double d = 0.0;
        for (double v : f.values) d = std::max(d, std::abs(v - theta));
        rep.times.push_back(f.time);
        rep.distance.push_back(d);
        if (rep.claim) {
            const double e = theta - detail::lower_envelope(p, beta, f.time);
            rep.envelope.push_back(e);
            if (d > e + 1e-12 * theta) rep.eventually_below = false;
        }
    });
    return rep;
}

struct SubsolutionOrdering {
    std::optional<std::size_t> start;   // first snapshot with w <= u
    double max_violation = 0.0;         // max (w - u)_+ over later snapshots
    double max_operator = -infinity;    // max of F w over the checked snapshots (<= 0 certifies)
};

/// Compares u with w(x, t) = q exp(-|x - t mean|^2 / (alpha t)) along a trajectory,
/// using only snapshots with t >= t_min (w is a subsolution for t beyond some T).
inline SubsolutionOrdering subsolution_ordering(Model& model, const Trajectory& traj, std::span<const double> mean,
                                                double q, double alpha, double tol = 1e-12, double t_min = 0.0) {
    SubsolutionOrdering rep;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (!(t > 0.0) || t < t_min) continue;
        const Field w = gaussian_profile(model.grid(), mean, q, alpha, t);
        const Field& u = traj.snapshots[k];
        double viol = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) viol = std::max(viol, w[i] - u[i]);
        if (!rep.start) {
            if (viol <= tol) rep.start = k;
            else continue;
        }
        rep.max_violation = std::max(rep.max_violation, viol);
        const Field F = evolution_operator_on_gaussian(model, mean, q, alpha, t);
        rep.max_operator = std::max(rep.max_operator, F.max());
    }
    return rep;
}

/// Runs independent scenarios on up to `threads` workers; results keep scenario order.
template <class R>
std::vector<R> run_scenarios(const std::vector<std::function<R()>>& scenarios, unsigned threads) {
    std::vector<R> out(scenarios.size());
    parallel_for(scenarios.size(), threads, [&](std::size_t i) { out[i] = scenarios[i](); });
    return out;
}

}  // namespace dnkpp
