#pragma once

// Time integration of du/dt = kappa+ (a+ * u) - m u - kappa- u (a- * u) on a
// periodic grid, the exact spatially homogeneous solution, and the equation
// with kernels truncated to a ball.

#include "dnkpp/convolution.hpp"
#include "dnkpp/errors.hpp"
#include "dnkpp/grid.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dnkpp {

enum class StepMethod { rk4, exponential_euler };

inline std::string_view to_string(StepMethod m) {
    return m == StepMethod::rk4 ? "RK4" : "ExponentialEuler";
}

struct StepConfig {
    double dt = 1e-3;
    StepMethod method = StepMethod::rk4;
    bool clip_negative = false;
    // |u| below this is set to zero after each step. FFT roundoff near the
    // unstable state 0 otherwise grows like e^{(kappa+ - m) t}.
    double noise_floor = 0.0;

    /// Throws unless dt (kappa+ + m + kappa- max(theta, 0)) < 0.5.
    void check(const ModelParams& p) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
        const double rate = p.kappa_plus + p.mortality + p.kappa_minus * std::max(p.theta(), 0.0);
        if (!(dt * rate < 0.5)) {
            std::ostringstream os;
            os << "time step " << dt << " violates the stability guard dt*(kappa+ + m + kappa- theta) < 0.5"
               << " (limit dt < " << 0.5 / rate << ")";
            throw InvalidArgument(os.str());
        }
    }
};

/// Rates plus sampled kernels on a common grid. Owns convolution work
/// buffers, so a Model is used by one thread at a time.
class Model {
public:
    Model(const ModelParams& p, KernelWeights a_plus, KernelWeights a_minus,
          ConvolutionBackend backend = ConvolutionBackend::spectral)
        : params_(p), conv_({std::move(a_plus), std::move(a_minus)}, backend) {
        params_.validate();
        ap_.resize(grid().size());
        am_.resize(grid().size());
    }

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    /// Independent copy with its own buffers.
    std::unique_ptr<Model> clone(std::optional<ConvolutionBackend> backend = std::nullopt) const {
        return std::make_unique<Model>(params_, conv_.weights(0), conv_.weights(1),
                                       backend.value_or(conv_.backend()));
    }

    const ModelParams& params() const noexcept { return params_; }
    const Grid& grid() const noexcept { return conv_.grid(); }
    const KernelWeights& a_plus() const { return conv_.weights(0); }
    const KernelWeights& a_minus() const { return conv_.weights(1); }
    ConvolutionBackend backend() const noexcept { return conv_.backend(); }

    /// Fills (a+ * u) and (a- * u).
    void convolve(std::span<const double> u, std::vector<double>& ap, std::vector<double>& am) {
        std::array<std::vector<double>, 2> out{std::move(ap), std::move(am)};
        conv_.apply(u, out);
        ap = std::move(out[0]);
        am = std::move(out[1]);
    }

    /// out = kappa+ (a+ * u) - m u - kappa- u (a- * u).
    void rhs(std::span<const double> u, std::vector<double>& out) {
        if (u.size() != grid().size()) throw InvalidArgument("field does not match the model grid");
        convolve(u, ap_, am_);
        out.resize(u.size());
        const double kp = params_.kappa_plus;
        const double km = params_.kappa_minus;
        const double m = params_.mortality;
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = kp * ap_[i] - m * u[i] - km * u[i] * am_[i];
    }

    Field rhs(const Field& u) {
        if (!(u.grid == grid())) throw InvalidArgument("field grid differs from the model grid");
        Field r(u.grid, 0.0, u.time);
        rhs(u.values, r.values);
        return r;
    }

    /// The last convolutions computed by rhs().
    const std::vector<double>& last_a_plus_conv() const { return ap_; }
    const std::vector<double>& last_a_minus_conv() const { return am_; }

private:
    ModelParams params_;
    Convolver conv_;
    std::vector<double> ap_;
    std::vector<double> am_;
};

inline std::unique_ptr<Model> make_model(const ModelParams& p, const Kernel& a_plus, const Kernel& a_minus,
                                         const Grid& grid,
                                         ConvolutionBackend backend = ConvolutionBackend::spectral) {
    return std::make_unique<Model>(p, discretize(a_plus, grid), discretize(a_minus, grid), backend);
}

/// Fixed-step integrator with its own stage buffers.
class Integrator {
public:
    Integrator(Model& model, StepConfig cfg) : model_(model), cfg_(cfg) { cfg_.check(model.params()); }

    const StepConfig& config() const noexcept { return cfg_; }
    Model& model() noexcept { return model_; }

    /// Advances u by dt (or by `dt_override` when positive).
    void step(Field& u, double dt_override = 0.0) {
        const double dt = dt_override > 0.0 ? dt_override : cfg_.dt;
        const std::size_t n = u.size();
        if (cfg_.method == StepMethod::rk4) {
            model_.rhs(u.values, k1_);
            tmp_.resize(n);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = u[i] + 0.5 * dt * k1_[i];
            model_.rhs(tmp_, k2_);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = u[i] + 0.5 * dt * k2_[i];
            model_.rhs(tmp_, k3_);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = u[i] + dt * k3_[i];
            model_.rhs(tmp_, k4_);
            for (std::size_t i = 0; i < n; ++i)
                u[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        } else {
            // Integrating factor on the loss rate L = m + kappa- (a- * u), frozen over the step:
            // u <- e^{-L dt} u + (1 - e^{-L dt}) / L * kappa+ (a+ * u).
            model_.convolve(u.values, ap_, am_);
            const ModelParams& p = model_.params();
            for (std::size_t i = 0; i < n; ++i) {
                const double L = p.mortality + p.kappa_minus * am_[i];
                const double decay = std::exp(-L * dt);
                const double phi = L != 0.0 ? -std::expm1(-L * dt) / L : dt;
                u[i] = decay * u[i] + phi * p.kappa_plus * ap_[i];
            }
        }
        if (cfg_.clip_negative) {
            for (double& v : u.values) v = std::max(v, 0.0);
        }
        if (cfg_.noise_floor > 0.0) {
            for (double& v : u.values)
                if (std::abs(v) < cfg_.noise_floor) v = 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(u[i])) {
                std::ostringstream os;
                os << "non-finite value at index " << i << " at time " << u.time + dt;
                throw NumericalBlowup(os.str());
            }
        }
        u.time += dt;
    }

private:
    Model& model_;
    StepConfig cfg_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_, ap_, am_;
};

/// EvolutionProblem: a model together with the current state.
struct EvolutionProblem {
    std::shared_ptr<Model> model;
    Field u;
};

/// One step of `problem` (returns the advanced problem; the model is shared).
inline EvolutionProblem step(EvolutionProblem problem, const StepConfig& cfg) {
    Integrator integ(*problem.model, cfg);
    integ.step(problem.u);
    return problem;
}

inline Field rhs(EvolutionProblem& problem) { return problem.model->rhs(problem.u); }

/// Snapshots of a run at a fixed stride.
struct Trajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    std::vector<double> mins;
    std::vector<double> maxs;

    void record(const Field& u) {
        if (!times.empty() && !(u.time > times.back())) {
            throw InvalidArgument("trajectory times must be strictly increasing");
        }
        times.push_back(u.time);
        snapshots.push_back(u);
        mins.push_back(u.min());
        maxs.push_back(u.max());
    }

    std::size_t size() const noexcept { return times.size(); }
    const Field& back() const { return snapshots.back(); }
};

using SnapshotObserver = std::function<void(const Field&)>;

/// Integrates from u0 to `horizon`, calling `observe` at t = 0 and every
/// `stride` steps (and at the final time). Step times are k*dt exactly.
inline Field integrate(Model& model, Field u, const StepConfig& cfg, double horizon, std::size_t stride,
                       const SnapshotObserver& observe) {
    if (!(u.grid == model.grid())) throw InvalidArgument("initial field grid differs from the model grid");
    if (!u.all_finite()) throw InvalidArgument("initial field is not finite");
    if (stride == 0) throw InvalidArgument("snapshot stride must be positive");
    Integrator integ(model, cfg);
    const double t0 = u.time;
    const double span = horizon - t0;
    if (span < 0.0) throw InvalidArgument("horizon precedes the initial time");
    auto steps = static_cast<std::size_t>(std::floor(span / cfg.dt + 1e-9));
    const double remainder = span - static_cast<double>(steps) * cfg.dt;
    const bool partial = remainder > 1e-12 * std::max(1.0, span);
    if (observe) observe(u);
    for (std::size_t k = 1; k <= steps; ++k) {
        integ.step(u);
        u.time = t0 + static_cast<double>(k) * cfg.dt;
        const bool last = k == steps && !partial;
        if (observe && (k % stride == 0 || last)) observe(u);
    }
    if (partial) {
        integ.step(u, remainder);
        u.time = horizon;
        if (observe) observe(u);
    }
    return u;
}

inline Trajectory simulate(Model& model, const Field& u0, const StepConfig& cfg, double horizon,
                           std::size_t stride) {
    Trajectory tr;
    integrate(model, u0, cfg, horizon, stride, [&](const Field& u) { tr.record(u); });
    return tr;
}

/// Exact solution of the spatially constant problem u' = u (kappa+ - m - kappa- u).
inline double logistic_exact(const ModelParams& p, double u0, double t) {
    if (u0 < 0.0) throw InvalidArgument("logistic_exact requires u0 >= 0");
    if (u0 == 0.0) return 0.0;
    const double theta = p.theta();
    const double km = p.kappa_minus;
    const double e = std::exp(-theta * km * t);
    const double g = theta != 0.0 ? -std::expm1(-theta * km * t) / theta : km * t;
    return u0 / (u0 * g + e);
}

/// Kernels restricted to the ball of radius R (not renormalized).
struct TruncatedProblem {
    double R = 0.0;
    double A_plus = 0.0;           // mass of a+ in the ball (quadrature)
    double A_minus = 0.0;
    double theta_R = 0.0;          // (kappa+ A+ - m) / (kappa- A-)
    double A_plus_discrete = 0.0;  // mass of the masked weights
    double A_minus_discrete = 0.0;
    double theta_R_discrete = 0.0;
    std::unique_ptr<Model> model;
};

namespace detail {

inline KernelWeights mask_to_ball(const KernelWeights& full, double R, double quad_mass) {
    KernelWeights t = full;
    const Grid& g = full.grid;
    const std::size_t n = g.points;
    if (g.dimension == 1) {
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(g.displacement(k)) > R) t.w[k] = 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double dx = g.displacement(i);
                const double dy = g.displacement(j);
                if (dx * dx + dy * dy > R * R) t.w[i * n + j] = 0.0;
            }
    }
    t.renormalized = false;
    t.box_mass = quad_mass;
    t.truncated_mass = 1.0 - quad_mass;
    return t;
}

}  // namespace detail

/// Smallest R with kappa+ A_R(a+) > m, found by bisection on the ball mass.
inline double minimal_truncation_radius(const ModelParams& p, const Kernel& a_plus) {
    const double target = p.mortality / p.kappa_plus;
    double hi = std::max(1.0, a_plus.effective_scale() + a_plus.offset_norm());
    for (int i = 0; i < 80 && a_plus.mass_in_origin_ball(hi) <= target; ++i) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (a_plus.mass_in_origin_ball(mid) > target ? hi : lo) = mid;
    }
    return hi;
}

inline TruncatedProblem truncated_problem(const ModelParams& p, const Kernel& a_plus, const Kernel& a_minus,
                                          const Grid& grid, double R,
                                          ConvolutionBackend backend = ConvolutionBackend::spectral) {
    p.require_positive_theta();
    if (!(R > 0.0)) throw InvalidArgument("truncation radius must be positive");
    TruncatedProblem tp;
    tp.R = R;
    tp.A_plus = a_plus.mass_in_origin_ball(R);
    tp.A_minus = a_minus.mass_in_origin_ball(R);
    if (!(tp.A_plus > p.mortality / p.kappa_plus)) {
        std::ostringstream os;
        os << "truncation radius " << R << " leaves mass " << tp.A_plus << " of a+, need more than m/kappa+ = "
           << p.mortality / p.kappa_plus << "; minimal admissible R is about "
           << minimal_truncation_radius(p, a_plus);
        throw InvalidArgument(os.str());
    }
    if (!(tp.A_minus > 0.0)) throw InvalidArgument("a- has no mass in the truncation ball");
    tp.theta_R = (p.kappa_plus * tp.A_plus - p.mortality) / (p.kappa_minus * tp.A_minus);
    auto wp = detail::mask_to_ball(discretize(a_plus, grid), R, tp.A_plus);
    auto wm = detail::mask_to_ball(discretize(a_minus, grid), R, tp.A_minus);
    tp.A_plus_discrete = wp.sum();
    tp.A_minus_discrete = wm.sum();
    tp.theta_R_discrete = (p.kappa_plus * tp.A_plus_discrete - p.mortality) / (p.kappa_minus * tp.A_minus_discrete);
    tp.model = std::make_unique<Model>(p, std::move(wp), std::move(wm), backend);
    return tp;
}

}  // namespace dnkpp
