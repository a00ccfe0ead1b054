#pragma once

// Traveling-wave profiles psi(s), s = x . xi - c t, solving
//   c psi' + kappa+ (a+ * psi) - m psi - kappa- psi (a- * psi) = 0,
//   psi(-inf) = theta, psi(+inf) = 0,
// plus the profile residual and the tail fit psi(s) ~ D s^{j-1} e^{-lambda s}.

#include "dnkpp/convolution.hpp"
#include "dnkpp/dispersion.hpp"
#include "dnkpp/errors.hpp"
#include "dnkpp/evolution.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/params.hpp"
#include "dnkpp/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <array>
#include <complex>
#include <limits>
#include <numbers>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

namespace dnkpp {

/// Uniform non-periodic 1-D grid s_i = start + i h, i = 0..points-1.
struct WaveGrid {
    double start = -40.0;
    double spacing = 0.1;
    std::size_t points = 801;

    double coord(std::size_t i) const noexcept { return start + static_cast<double>(i) * spacing; }
    std::size_t center() const noexcept { return points / 2; }
    double length() const noexcept { return spacing * static_cast<double>(points - 1); }
};

struct WaveProfile {
    WaveGrid grid;
    std::vector<double> psi;
    double speed_c = 0.0;
    double theta = 0.0;
    std::size_t pin_index = 0;       // psi(pin) = theta / 2
    double tail_lambda = 0.0;        // decay rate imposed on the right extension
    int tail_j = 1;
    double fitted_lambda = 0.0;
    double fitted_j = 1.0;
    double residual = 0.0;
    int sweeps = 0;
    int newton_iterations = 0;
};

struct WaveOptions {
    double spacing = 0.1;
    double half_length = 0.0;        // 0 chooses it from the decay rates
    double tol_bc = 1e-10;
    double sweep_time = 0.1;         // flow time per sweep in phase 1
    double flow_dt = 0.02;
    int max_sweeps = 10000;
    double sweep_tolerance = 1e-8;   // sup-change per sweep that ends phase 1
    int flow_sweeps = 60;            // phase-1 budget before Newton takes over
    int max_newton = 50;
    double newton_tolerance = 1e-12;
    double residual_tolerance = 1e-6;
};

enum class WaveSeed { supersolution, smoothed_step };

namespace detail {

// Bilateral transform at a possibly negative argument.
inline double laplace_signed(const Kernel1D& k, double z) {
    if (z == 0.0) return 1.0;
    if (z > 0.0) return laplace_transform(k, z);
    // int a(s) e^{z s} ds = e^{z b} N_0(|z|) with the even centered marginal.
    return std::exp(z * k.shift()) * centered_moment(k, 0, -z);
}

// Radius beyond which the centered marginal carries less than `eps` mass.
inline double support_radius(const Kernel1D& k, double eps = 1e-17) {
    if (k.source().spec().family == KernelFamily::compact_uniform) return k.source().spec().radius;
    double R = std::max(1.0, k.source().effective_scale());
    auto tail = [&](double r) { return 2.0 * quad::tail([&](double u) { return std::exp(k.log_base(u)); }, r, 1e-10); };
    for (int i = 0; i < 200 && tail(R) > eps; ++i) R *= 1.25;
    return R;
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 16;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace detail

/// Evaluates the profile operator on a finite window with a constant left
/// extension (theta unless set_left_value) and an exponential right extension.
class WaveOperator {
public:
    WaveOperator(const ModelParams& p, const Kernel1D& kp, const Kernel1D& km, double c, const WaveGrid& grid,
                 double tail_lambda, int tail_j)
        : p_(p), c_(c), grid_(grid), lambda_(tail_lambda), j_(tail_j) {
        const double h = grid.spacing;
        const double R = std::max(detail::support_radius(kp) + std::abs(kp.shift()),
                                  detail::support_radius(km) + std::abs(km.shift()));
        pad_ = static_cast<std::size_t>(std::ceil(R / h)) + 3;
        ext_n_ = grid.points + 2 * pad_;
        const std::size_t M = detail::next_pow2(ext_n_);
        Grid g = Grid::make(1, 0.5 * static_cast<double>(M) * h, M);
        weights_.push_back(sample(kp, g));
        weights_.push_back(sample(km, g));
        conv_ = std::make_unique<Convolver>(weights_, ConvolutionBackend::spectral);
        ext_.assign(M, 0.0);
        tail_window_ = std::max<std::size_t>(8, grid.points / 40);
    }

    const WaveGrid& grid() const noexcept { return grid_; }
    std::size_t pad() const noexcept { return pad_; }
    void set_left_value(double v) noexcept { left_ = v; }
    double speed() const noexcept { return c_; }

    /// Weights of the right extension: ext_right(k) = sum_i X(k, i) psi_{n-W+i}.
    void right_extension(std::span<const double> psi, std::vector<double>& out) const {
        const std::size_t n = psi.size();
        out.assign(pad_, 0.0);
        const double h = grid_.spacing;
        if (j_ == 1) {
            for (std::size_t k = 0; k < pad_; ++k) out[k] = psi[n - 1] * std::exp(-lambda_ * h * static_cast<double>(k + 1));
            return;
        }
        // Linear least squares for g = psi e^{lambda s} over the last W points, g ~ alpha + beta s.
        const auto coef = tail_coefficients();
        for (std::size_t k = 0; k < pad_; ++k) {
            double v = 0.0;
            for (std::size_t i = 0; i < tail_window_; ++i) v += coef[k][i] * psi[n - tail_window_ + i];
            out[k] = v;
        }
    }

    /// Matrix X with ext_right = X psi_tail (rows: pad cells, cols: last W grid points).
    std::vector<std::vector<double>> tail_coefficients() const {
        const std::size_t n = grid_.points;
        const double h = grid_.spacing;
        std::vector<std::vector<double>> X(pad_, std::vector<double>(j_ == 1 ? 1 : tail_window_, 0.0));
        if (j_ == 1) {
            for (std::size_t k = 0; k < pad_; ++k) X[k][0] = std::exp(-lambda_ * h * static_cast<double>(k + 1));
            return X;
        }
        // Local coordinate t = s - s_{n-1}; g_i = psi_i e^{lambda t_i}.
        const std::size_t W = tail_window_;
        double st = 0.0, stt = 0.0;
        std::vector<double> t(W);
        for (std::size_t i = 0; i < W; ++i) {
            t[i] = (static_cast<double>(i) - static_cast<double>(W - 1)) * h;
            st += t[i];
            stt += t[i] * t[i];
        }
        const double Wd = static_cast<double>(W);
        const double det = Wd * stt - st * st;
        (void)n;
        for (std::size_t k = 0; k < pad_; ++k) {
            const double tk = h * static_cast<double>(k + 1);
            for (std::size_t i = 0; i < W; ++i) {
                const double gi_weight = std::exp(lambda_ * t[i]);
                // alpha = (stt * sum g - st * sum t g) / det, beta = (W sum t g - st sum g) / det
                const double dalpha = (stt - st * t[i]) / det;
                const double dbeta = (Wd * t[i] - st) / det;
                X[k][i] = (dalpha + dbeta * tk) * gi_weight * std::exp(-lambda_ * tk);
            }
        }
        return X;
    }

    std::size_t tail_window() const noexcept { return j_ == 1 ? 1 : tail_window_; }

    /// Fills the extended array: [theta x pad | psi | right extension | zeros].
    void extend(std::span<const double> psi) {
        std::fill(ext_.begin(), ext_.end(), 0.0);
        const double left = std::isnan(left_) ? p_.theta() : left_;
        for (std::size_t k = 0; k < pad_; ++k) ext_[k] = left;
        std::copy(psi.begin(), psi.end(), ext_.begin() + static_cast<std::ptrdiff_t>(pad_));
        right_extension(psi, right_);
        std::copy(right_.begin(), right_.end(), ext_.begin() + static_cast<std::ptrdiff_t>(pad_ + psi.size()));
    }

    /// out_i = c psi'_i + kappa+ (a+ * psi)_i - m psi_i - kappa- psi_i (a- * psi)_i.
    void residual(std::span<const double> psi, std::vector<double>& out) {
        if (psi.size() != grid_.points) throw InvalidArgument("profile size does not match the wave grid");
        extend(psi);
        std::array<std::vector<double>, 2> conv;
        conv_->apply(ext_, conv);
        conv_plus_.assign(conv[0].begin() + static_cast<std::ptrdiff_t>(pad_), conv[0].begin() + static_cast<std::ptrdiff_t>(pad_ + psi.size()));
        conv_minus_.assign(conv[1].begin() + static_cast<std::ptrdiff_t>(pad_), conv[1].begin() + static_cast<std::ptrdiff_t>(pad_ + psi.size()));
        out.resize(psi.size());
        const double h = grid_.spacing;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const std::size_t e = i + pad_;
            const double d = (ext_[e - 2] - 8.0 * ext_[e - 1] + 8.0 * ext_[e + 1] - ext_[e + 2]) / (12.0 * h);
            out[i] = c_ * d + p_.kappa_plus * conv_plus_[i] - p_.mortality * psi[i] -
                     p_.kappa_minus * psi[i] * conv_minus_[i];
        }
    }

    /// Dense Jacobian of residual() at psi (call residual() first).
    Eigen::MatrixXd jacobian(std::span<const double> psi) const {
        const std::size_t n = psi.size();
        const double h = grid_.spacing;
        const auto P = static_cast<std::ptrdiff_t>(pad_);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        const auto X = tail_coefficients();
        const std::size_t W = tail_window();
        const std::size_t tail0 = n - W;
        const auto& wp = weights_[0].w;
        const auto& wm = weights_[1].w;
        const std::size_t M = wp.size();
        auto weight = [&](const std::vector<double>& w, std::ptrdiff_t k) {
            return w[static_cast<std::size_t>((k % static_cast<std::ptrdiff_t>(M) + static_cast<std::ptrdiff_t>(M)) % static_cast<std::ptrdiff_t>(M))];
        };
        // d residual_i / d ext_e, then chain through the extension map.
        auto add = [&](std::size_t i, std::ptrdiff_t e, double v) {
            const std::ptrdiff_t local = e - P;
            if (local < 0) return;  // left extension is constant
            if (local < static_cast<std::ptrdiff_t>(n)) {
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(local)) += v;
                return;
            }
            const auto k = static_cast<std::size_t>(local - static_cast<std::ptrdiff_t>(n));
            if (k >= pad_) return;
            for (std::size_t t = 0; t < W; ++t)
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(tail0 + t)) += v * X[k][t];
        };
        const double kp = p_.kappa_plus;
        const double km = p_.kappa_minus;
        const double m = p_.mortality;
        const double dcoef[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
        for (std::size_t i = 0; i < n; ++i) {
            const std::ptrdiff_t e = static_cast<std::ptrdiff_t>(i) + P;
            for (int q = 0; q < 5; ++q)
                if (dcoef[q] != 0.0) add(i, e + q - 2, c_ * dcoef[q] / (12.0 * h));
            for (std::ptrdiff_t k = -P; k <= P; ++k) {
                const double a = weight(wp, k);
                const double b = weight(wm, k);
                const double v = kp * a - km * psi[i] * b;
                if (v != 0.0) add(i, e - k, v);
            }
            J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += -m - km * conv_minus_[i];
        }
        return J;
    }

private:
    static KernelWeights sample(const Kernel1D& k, const Grid& g) {
        KernelWeights kw;
        kw.grid = g;
        kw.w.assign(g.points, 0.0);
        const double h = g.spacing();
        const std::size_t M = g.points;
        const double R = detail::support_radius(k) + std::abs(k.shift());
        const auto P = static_cast<std::ptrdiff_t>(std::ceil(R / h)) + 1;
        for (std::ptrdiff_t j = -P; j <= P; ++j) {
            const auto idx = static_cast<std::size_t>((j % static_cast<std::ptrdiff_t>(M) + static_cast<std::ptrdiff_t>(M)) % static_cast<std::ptrdiff_t>(M));
            kw.w[idx] += k(static_cast<double>(j) * h) * h;
        }
        const double s = kw.sum();
        for (double& v : kw.w) v /= s;
        kw.renormalized = true;
        kw.sampled_mass = s;
        return kw;
    }

    ModelParams p_;
    double left_ = std::numeric_limits<double>::quiet_NaN();
    double c_;
    WaveGrid grid_;
    double lambda_;
    int j_;
    std::size_t pad_ = 0;
    std::size_t ext_n_ = 0;
    std::size_t tail_window_ = 8;
    std::vector<KernelWeights> weights_;
    std::unique_ptr<Convolver> conv_;
    std::vector<double> ext_, right_, conv_plus_, conv_minus_;
};

/// Supersolution seed phi(s) = theta min{e^{-mu s}, 1} with speed (kappa+ L(mu) - m) / mu.
struct Supersolution {
    WaveGrid grid;
    std::vector<double> phi;
    double c = 0.0;
    double max_J = 0.0;   // max over the grid of the left side of the supersolution inequality
};

inline Supersolution initial_supersolution(const ModelParams& p, const Kernel1D& k, double mu,
                                           const WaveGrid& grid, double tol = 1e-10) {
    p.require_positive_theta();
    if (!(mu > 0.0) || mu >= k.abscissa()) throw InvalidArgument("initial_supersolution requires 0 < mu < lambda0");
    Supersolution s;
    s.grid = grid;
    s.c = (p.kappa_plus * laplace_transform(k, mu) - p.mortality) / mu;
    const double theta = p.theta();
    s.phi.resize(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) s.phi[i] = theta * std::min(std::exp(-mu * grid.coord(i)), 1.0);

    // J_c(s) = c phi' + kappa+ (a * phi) - m phi - kappa- phi (a * phi) with the exact one-sided phi'
    // and the exact exponential continuation of phi on the right.
    WaveOperator op(p, k, k, s.c, grid, mu, 1);
    std::vector<double> r;
    op.residual(s.phi, r);
    double worst = -infinity;
    std::size_t arg = 0;
    const double h = grid.spacing;
    for (std::size_t i = 2; i + 2 < grid.points; ++i) {
        // Replace the finite-difference derivative by the exact derivative of phi.
        const double si = grid.coord(i);
        const std::vector<double>& ph = s.phi;
        const double fd = (ph[i - 2] - 8.0 * ph[i - 1] + 8.0 * ph[i + 1] - ph[i + 2]) / (12.0 * h);
        const double exact = si > 0.0 ? -mu * theta * std::exp(-mu * si) : 0.0;
        const double v = r[i] + s.c * (exact - fd);
        if (v > worst) {
            worst = v;
            arg = i;
        }
    }
    s.max_J = worst;
    if (worst > tol) {
        std::ostringstream os;
        os << "supersolution certification failed at s = " << grid.coord(arg) << " (value " << worst
           << "); enlarge the grid or refine the spacing";
        throw CertificationFailed(os.str(), grid.coord(arg), worst);
    }
    return s;
}

namespace detail {

// Position where psi crosses `level` (first crossing from the left), by linear interpolation.
inline std::optional<double> crossing(const WaveGrid& g, std::span<const double> psi, double level) {
    for (std::size_t i = 0; i + 1 < psi.size(); ++i) {
        if (psi[i] >= level && psi[i + 1] < level) {
            const double f = (psi[i] - level) / (psi[i] - psi[i + 1]);
            return g.coord(i) + f * g.spacing;
        }
    }
    return std::nullopt;
}

// psi(s) <- psi(s + delta): band-limited shift of psi - r plus the exact shift of r,
// r(s) = theta/2 erfc(s / w).
inline void spectral_shift(const WaveGrid& g, std::vector<double>& psi, double delta, double theta) {
    const std::size_t n = psi.size();
    const std::size_t M = next_pow2(2 * n);
    const double w = 0.1 * g.length();
    const double s0 = g.coord(g.center());
    auto ref = [&](double s) { return 0.5 * theta * std::erfc((s - s0) / w); };
    std::vector<double> f(M, 0.0);
    for (std::size_t i = 0; i < n; ++i) f[i] = psi[i] - ref(g.coord(i));
    // Even reflection keeps the periodic extension continuous.
    for (std::size_t i = n; i < M; ++i) {
        const std::size_t mirror = 2 * n - 1 - i;
        f[i] = i < 2 * n ? f[mirror] : 0.0;
    }
    detail::FftPair fft(Grid::make(1, 1.0, M));
    std::copy(f.begin(), f.end(), fft.real());
    fft.forward();
    const double L = static_cast<double>(M) * g.spacing;
    for (std::size_t k = 0; k < fft.complex_size(); ++k) {
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / L;
        std::complex<double> z(fft.spectrum()[k][0], fft.spectrum()[k][1]);
        if (k == M / 2) z = std::complex<double>(z.real() * std::cos(omega * delta), 0.0);
        else z *= std::polar(1.0, omega * delta);
        fft.spectrum()[k][0] = z.real() / static_cast<double>(M);
        fft.spectrum()[k][1] = z.imag() / static_cast<double>(M);
    }
    fft.backward();
    for (std::size_t i = 0; i < n; ++i) psi[i] = fft.real()[i] + ref(g.coord(i) + delta);
}

inline void pin(const WaveGrid& g, std::vector<double>& psi, double theta) {
    const auto s = crossing(g, psi, 0.5 * theta);
    if (!s) throw NonConvergence("profile lost its theta/2 crossing");
    const double delta = *s - g.coord(g.center());
    if (std::abs(delta) > 1e-14) spectral_shift(g, psi, delta, theta);
}

}  // namespace detail

struct DecayFit {
    double lambda = 0.0;
    double amplitude = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log psi(s) = -lambda s + (j - 1) log s + const on the
/// tail window psi in [10 tol_bc, theta / 100]; s is measured from the pin.
inline DecayFit fit_decay(const WaveGrid& g, std::span<const double> psi, double theta, int expected_j,
                          double tol_bc = 1e-10, std::size_t pin_index = std::numeric_limits<std::size_t>::max()) {
    if (expected_j != 1 && expected_j != 2) throw InvalidArgument("expected_j must be 1 or 2");
    const std::size_t pin = pin_index == std::numeric_limits<std::size_t>::max() ? g.center() : pin_index;
    const double lo = 10.0 * tol_bc;
    const double hi = theta / 100.0;
    std::vector<double> xs, ys;
    for (std::size_t i = pin; i < psi.size(); ++i) {
        if (psi[i] >= lo && psi[i] <= hi) {
            const double s = g.coord(i) - g.coord(pin);
            if (expected_j == 2 && !(s > 0.0)) continue;
            xs.push_back(s);
            ys.push_back(std::log(psi[i]) - (expected_j == 2 ? std::log(s) : 0.0));
        }
    }
    if (xs.size() < 30) {
        std::ostringstream os;
        os << "tail window has only " << xs.size() << " points (need 30); enlarge the domain";
        throw InvalidArgument(os.str());
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    const double ybar = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (icpt + slope * xs[i]);
        ss_res += r * r;
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    DecayFit f;
    f.lambda = -slope;
    f.amplitude = std::exp(icpt);
    f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    f.points = xs.size();
    return f;
}

inline DecayFit fit_decay(const WaveProfile& w, int expected_j) {
    return fit_decay(w.grid, w.psi, w.theta, expected_j, 1e-10, w.pin_index);
}

/// sup over interior points (5% buffers excluded at both ends) of the profile equation residual.
/// The left extension repeats psi.front().
inline double profile_residual(const WaveGrid& g, std::span<const double> psi, double c, const ModelParams& p,
                               const Kernel1D& kp, const Kernel1D& km, double tail_lambda = 0.0, int tail_j = 1) {
    if (c == 0.0) throw InvalidArgument("profile_residual requires c != 0");
    WaveOperator op(p, kp, km, c, g, tail_lambda, tail_j);
    if (!psi.empty()) op.set_left_value(psi.front());
    std::vector<double> r;
    op.residual(psi, r);
    const auto buffer = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(g.points)));
    double worst = 0.0;
    for (std::size_t i = buffer; i + buffer < g.points; ++i) worst = std::max(worst, std::abs(r[i]));
    return worst;
}

inline double profile_residual(const WaveProfile& w, const ModelParams& p, const Kernel1D& kp, const Kernel1D& km) {
    return profile_residual(w.grid, w.psi, w.speed_c, p, kp, km, w.tail_lambda, w.tail_j);
}

/// Wave grid sized so that psi falls below tol_bc on the right and rises to
/// within tol_bc of theta on the left.
inline WaveGrid wave_grid_for(const ModelParams& p, const Kernel1D& kp, const Kernel1D& km, double c,
                              double lambda, const WaveOptions& opt) {
    const double theta = p.theta();
    // Left decay rate nu of theta - psi ~ e^{nu s}: root of
    // -c nu - kappa+ L+(-nu) + m + kappa- theta (1 + L-(-nu)) = 0.
    auto left = [&](double nu) {
        return -c * nu - p.kappa_plus * detail::laplace_signed(kp, -nu) + p.mortality +
               p.kappa_minus * theta * (1.0 + detail::laplace_signed(km, -nu));
    };
    double nu = 1.0;
    {
        const double cap = std::min({kp.abscissa(), km.abscissa(), 1e3});
        double lo = 0.0, hi = std::min(1.0, 0.5 * cap);
        while (left(hi) > 0.0 && hi < 0.99 * cap) {
            lo = hi;
            hi = std::min(2.0 * hi, 0.5 * (hi + cap));
        }
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            (left(mid) > 0.0 ? lo : hi) = mid;
        }
        nu = 0.5 * (lo + hi);
    }
    const double scale = std::max(kp.source().effective_scale(), km.source().effective_scale());
    double L = opt.half_length;
    if (L <= 0.0) {
        const double right = 1.3 * std::log(theta / (0.01 * opt.tol_bc)) / lambda;
        const double lft = 1.3 * std::log(theta / (0.01 * opt.tol_bc)) / nu;
        L = std::max({right, lft, 30.0}) + 10.0 * scale;
        L = std::ceil(L / 10.0) * 10.0;
    }
    WaveGrid g;
    g.spacing = opt.spacing;
    const auto half = static_cast<std::size_t>(std::llround(L / opt.spacing));
    g.points = 2 * half + 1;
    g.start = -static_cast<double>(half) * opt.spacing;
    return g;
}

namespace detail {

inline void check_profile_shape(const WaveProfile& w, double tol_bc) {
    const double theta = w.theta;
    if (w.psi.front() < theta - tol_bc || w.psi.back() > tol_bc) {
        std::ostringstream os;
        os << "profile boundary values psi(left) = " << w.psi.front() << ", psi(right) = " << w.psi.back()
           << " miss the limits; enlarge the domain";
        throw NonConvergence(os.str());
    }
    for (std::size_t i = 0; i + 1 < w.psi.size(); ++i) {
        const double a = w.psi[i];
        const double b = w.psi[i + 1];
        if (a > tol_bc && a < theta - tol_bc && !(b < a)) {
            std::ostringstream os;
            os << "profile is not strictly decreasing near s = " << w.grid.coord(i);
            throw NonConvergence(os.str());
        }
    }
}

}  // namespace detail

/// Solves for the monotone wave with speed c >= c*. Phase 1 relaxes the seed by
/// the moving-frame flow with re-pinning; phase 2 is a damped Newton iteration
/// with the pin psi(center) = theta/2 replacing the leftmost equation.
inline WaveProfile solve_profile(const ModelParams& p, const Kernel1D& kp, const Kernel1D& km, double c,
                                 const WaveOptions& opt = {}, WaveSeed seed = WaveSeed::supersolution) {
    p.require_positive_theta();
    if (c == 0.0) throw InvalidArgument("zero-speed waves are not supported");
    const DispersionReport rep = minimize_G(p, kp);
    if (c < rep.c_star - 1e-9) {
        std::ostringstream os;
        os << "no wave below minimal speed: c = " << c << " < c* = " << rep.c_star;
        throw InvalidArgument(os.str());
    }
    const double cc = std::max(c, rep.c_star);
    const double lambda = speed_to_abscissa(p, kp, cc, rep);
    const int j = char_multiplicity(p, kp, cc, rep);
    const double theta = p.theta();

    WaveProfile w;
    w.grid = wave_grid_for(p, kp, km, c, lambda, opt);
    w.speed_c = c;
    w.theta = theta;
    w.pin_index = w.grid.center();
    w.tail_lambda = lambda;
    w.tail_j = j;
    const WaveGrid& g = w.grid;
    const double s0 = g.coord(g.center());

    // Seeds, both pinned at the center.
    w.psi.resize(g.points);
    if (seed == WaveSeed::supersolution) {
        const double mu = lambda;
        const double shift = std::log(2.0) / mu;  // phi = theta/2 at s0
        for (std::size_t i = 0; i < g.points; ++i)
            w.psi[i] = theta * std::min(std::exp(-mu * (g.coord(i) - s0 + shift)), 1.0);
    } else {
        for (std::size_t i = 0; i < g.points; ++i) w.psi[i] = 0.5 * theta * std::erfc(g.coord(i) - s0);
    }

    WaveOperator op(p, kp, km, c, g, lambda, j);
    const std::size_t n = g.points;
    std::vector<double> k1, k2, k3, k4, tmp(n), prev;

    // Phase 1: moving-frame flow psi_t = residual(psi), pinned after each sweep.
    const int steps = std::max(1, static_cast<int>(std::lround(opt.sweep_time / opt.flow_dt)));
    const double dt = opt.sweep_time / steps;
    int sweep = 0;
    for (; sweep < std::min(opt.flow_sweeps, opt.max_sweeps); ++sweep) {
        prev = w.psi;
        for (int s = 0; s < steps; ++s) {
            op.residual(w.psi, k1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = w.psi[i] + 0.5 * dt * k1[i];
            op.residual(tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = w.psi[i] + 0.5 * dt * k2[i];
            op.residual(tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = w.psi[i] + dt * k3[i];
            op.residual(tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                w.psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        try {
            detail::pin(g, w.psi, theta);
        } catch (const NonConvergence&) {
            w.psi = prev;
            break;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(w.psi[i] - prev[i]));
        if (!std::isfinite(change)) {
            w.psi = prev;
            break;
        }
        if (change <= opt.sweep_tolerance) {
            ++sweep;
            break;
        }
    }
    w.sweeps = sweep;

    // Phase 2: Gauss-Newton on the n profile equations plus the pin equation.
    // The square pinned system is close to singular because the left null vector
    // of the profile Jacobian sits at the right boundary, so the pin is appended.
    std::vector<double> r;
    auto merit = [&](const std::vector<double>& psi, std::vector<double>& res) {
        op.residual(psi, res);
        res.push_back(psi[g.center()] - 0.5 * theta);
        double s = 0.0;
        for (double v : res) s += v * v;
        return std::sqrt(s);
    };
    auto sup_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };
    double norm = merit(w.psi, r);
    int it = 0;
    for (; it < opt.max_newton && sup_of(r) > opt.newton_tolerance; ++it) {
        Eigen::MatrixXd J(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
        J.topRows(static_cast<Eigen::Index>(n)) = op.jacobian(w.psi);
        J.row(static_cast<Eigen::Index>(n)).setZero();
        J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g.center())) = 1.0;
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(n + 1));
        for (std::size_t i = 0; i <= n; ++i) rhs(static_cast<Eigen::Index>(i)) = -r[i];
        const Eigen::VectorXd delta = J.householderQr().solve(rhs);
        double step = 1.0;
        std::vector<double> trial(n), rt;
        double tn = infinity;
        for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = w.psi[i] + step * delta(static_cast<Eigen::Index>(i));
            tn = merit(trial, rt);
            if (tn < norm) break;
        }
        if (!(tn < norm)) break;
        w.psi = trial;
        r = rt;
        norm = tn;
    }
    norm = sup_of(r);
    w.newton_iterations = it;
    if (norm > 1e3 * opt.newton_tolerance && norm > 1e-9) {
        std::ostringstream os;
        os << "wave Newton iteration stalled with residual " << norm << " after " << it << " iterations";
        throw NonConvergence(os.str());
    }
    // Roundoff can leave the far tail a hair below zero or the left end a hair above theta.
    w.residual = profile_residual(w, p, kp, km);
    if (w.residual > opt.residual_tolerance) {
        std::ostringstream os;
        os << "profile residual " << w.residual << " exceeds " << opt.residual_tolerance;
        throw NonConvergence(os.str());
    }
    detail::check_profile_shape(w, opt.tol_bc);
    try {
        const DecayFit f = fit_decay(w, j);
        w.fitted_lambda = f.lambda;
        w.fitted_j = j;
    } catch (const InvalidArgument&) {
        w.fitted_lambda = std::numeric_limits<double>::quiet_NaN();
    }
    return w;
}

}  // namespace dnkpp
