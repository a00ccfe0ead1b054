#pragma once

// Dispersal / competition kernels: analytic radial families on R^d (d = 1, 2),
// their normalization, tail classification and directional 1-D marginals.

#include "dnkpp/errors.hpp"
#include "dnkpp/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dnkpp {

enum class KernelFamily { gaussian, laplace, exp_poly, compact_uniform, power_tail };

inline std::string_view to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "Gaussian";
        case KernelFamily::laplace: return "Laplace";
        case KernelFamily::exp_poly: return "ExpPoly";
        case KernelFamily::compact_uniform: return "CompactUniform";
        case KernelFamily::power_tail: return "PowerTail";
    }
    return "?";
}

inline std::optional<KernelFamily> family_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "gaussian") return KernelFamily::gaussian;
    if (lower == "laplace") return KernelFamily::laplace;
    if (lower == "exppoly" || lower == "exp_poly") return KernelFamily::exp_poly;
    if (lower == "compactuniform" || lower == "compact_uniform" || lower == "uniform")
        return KernelFamily::compact_uniform;
    if (lower == "powertail" || lower == "power_tail") return KernelFamily::power_tail;
    return std::nullopt;
}

/// Parameters of an analytic kernel family. Densities are radial about `offset`:
///   Gaussian        exp(-r^2 / (2 sigma^2))
///   Laplace         exp(-mu r)
///   ExpPoly         exp(-mu r^p) / (1 + r^q)
///   CompactUniform  1{r <= radius}
///   PowerTail       1 / (1 + r^q)
/// each multiplied by a normalizer so that the density integrates to one.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double sigma = 1.0;
    double mu = 1.0;
    double p = 1.0;
    double q = 0.0;
    double radius = 1.0;
    int dimension = 1;
    std::vector<double> offset;  // empty means the origin

    static KernelSpec gaussian(double sigma, int dim = 1) {
        KernelSpec s;
        s.family = KernelFamily::gaussian;
        s.sigma = sigma;
        s.dimension = dim;
        return s;
    }
    static KernelSpec laplace(double mu, int dim = 1) {
        KernelSpec s;
        s.family = KernelFamily::laplace;
        s.mu = mu;
        s.dimension = dim;
        return s;
    }
    static KernelSpec exp_poly(double p, double q, double mu, int dim = 1) {
        KernelSpec s;
        s.family = KernelFamily::exp_poly;
        s.p = p;
        s.q = q;
        s.mu = mu;
        s.dimension = dim;
        return s;
    }
    static KernelSpec compact_uniform(double radius, int dim = 1) {
        KernelSpec s;
        s.family = KernelFamily::compact_uniform;
        s.radius = radius;
        s.dimension = dim;
        return s;
    }
    static KernelSpec power_tail(double q, int dim = 1) {
        KernelSpec s;
        s.family = KernelFamily::power_tail;
        s.q = q;
        s.dimension = dim;
        return s;
    }

    KernelSpec shifted(std::vector<double> b) const {
        KernelSpec s = *this;
        s.offset = std::move(b);
        return s;
    }

    double offset_component(int i) const {
        return offset.empty() ? 0.0 : offset[static_cast<std::size_t>(i)];
    }

    std::string describe() const {
        std::ostringstream os;
        os << to_string(family) << "(";
        switch (family) {
            case KernelFamily::gaussian: os << "sigma=" << sigma; break;
            case KernelFamily::laplace: os << "mu=" << mu; break;
            case KernelFamily::exp_poly: os << "p=" << p << ",q=" << q << ",mu=" << mu; break;
            case KernelFamily::compact_uniform: os << "radius=" << radius; break;
            case KernelFamily::power_tail: os << "q=" << q; break;
        }
        os << ",d=" << dimension;
        if (!offset.empty()) {
            os << ",offset=";
            for (std::size_t i = 0; i < offset.size(); ++i) os << (i ? ";" : "") << offset[i];
        }
        os << ")";
        return os.str();
    }

    /// Throws InvalidArgument with a diagnostic when the spec is not a valid
    /// (nonnegative, integrable) density.
    void validate() const {
        auto fail = [&](const std::string& why) {
            throw InvalidArgument("invalid kernel " + describe() + ": " + why);
        };
        if (dimension != 1 && dimension != 2) fail("dimension must be 1 or 2");
        if (!offset.empty() && static_cast<int>(offset.size()) != dimension)
            fail("offset length must equal the dimension");
        for (double b : offset)
            if (!std::isfinite(b)) fail("offset must be finite");
        const double d = dimension;
        switch (family) {
            case KernelFamily::gaussian:
                if (!(sigma > 0.0) || !std::isfinite(sigma)) fail("sigma must be positive");
                break;
            case KernelFamily::laplace:
                if (!(mu > 0.0) || !std::isfinite(mu)) fail("mu must be positive");
                break;
            case KernelFamily::exp_poly:
                if (!(p >= 0.0) || !(q >= 0.0) || !(mu > 0.0)) fail("requires p>=0, q>=0, mu>0");
                if (p == 0.0 && !(q > d)) fail("p=0 is integrable only for q > dimension");
                break;
            case KernelFamily::compact_uniform:
                if (!(radius > 0.0) || !std::isfinite(radius)) fail("radius must be positive");
                break;
            case KernelFamily::power_tail:
                if (!(q > d)) fail("q must exceed the dimension for integrability");
                break;
        }
    }
};

enum class TailClass { exp_decay_finite, exp_decay_infinite, heavy_tail };

inline std::string_view to_string(TailClass c) {
    switch (c) {
        case TailClass::exp_decay_finite: return "ExpDecayFinite";
        case TailClass::exp_decay_infinite: return "ExpDecayInfinite";
        case TailClass::heavy_tail: return "HeavyTail";
    }
    return "?";
}

inline bool is_exp_decay(TailClass c) { return c != TailClass::heavy_tail; }

/// Asymptotics of a 1-D marginal: a(s) ~ C s^{-poly_power} exp(-lambda0 s) as
/// s -> +inf (meaningful when 0 < lambda0 < inf).
struct TailInfo {
    TailClass cls = TailClass::exp_decay_infinite;
    double lambda0 = std::numeric_limits<double>::infinity();
    double poly_power = 0.0;

    /// Whether int^inf s^k a(s) e^{lambda0 s} ds is finite. For heavy tails
    /// (lambda0 = 0) this is the plain polynomial moment.
    bool moment_finite_at_abscissa(int k) const {
        if (!std::isfinite(lambda0)) return true;
        return poly_power - k > 1.0;
    }
};

class Kernel;
Kernel make_kernel(const KernelSpec& spec);

/// A normalized radial density on R^d.
class Kernel {
public:
    const KernelSpec& spec() const noexcept { return spec_; }
    int dimension() const noexcept { return spec_.dimension; }
    double normalizer() const noexcept { return alpha_; }
    TailClass tail_class() const noexcept { return tail_.cls; }

    /// Tail of the directional marginal; identical for every direction for these families.
    const TailInfo& marginal_tail() const noexcept { return tail_; }

    /// Abscissa of convergence of the directional Laplace transform.
    double abscissa() const noexcept { return tail_.lambda0; }

    /// Unnormalized radial profile f(r), r >= 0.
    double profile(double r) const {
        switch (spec_.family) {
            case KernelFamily::gaussian: return std::exp(-r * r / (2.0 * spec_.sigma * spec_.sigma));
            case KernelFamily::laplace: return std::exp(-spec_.mu * r);
            case KernelFamily::exp_poly:
                return std::exp(-spec_.mu * std::pow(r, spec_.p)) / (1.0 + std::pow(r, spec_.q));
            case KernelFamily::compact_uniform: return r <= spec_.radius ? 1.0 : 0.0;
            case KernelFamily::power_tail: return 1.0 / (1.0 + std::pow(r, spec_.q));
        }
        return 0.0;
    }

    /// Density at distance r from the kernel's center.
    double radial(double r) const { return alpha_ * profile(r); }

    /// Density at a point of R^d.
    double operator()(std::span<const double> x) const {
        double r2 = 0.0;
        for (int i = 0; i < dimension(); ++i) {
            const double z = x[static_cast<std::size_t>(i)] - spec_.offset_component(i);
            r2 += z * z;
        }
        return radial(std::sqrt(r2));
    }

    double at(double s) const {
        const std::array<double, 1> x{s};
        return (*this)(x);
    }

    double at(double x, double y) const {
        const std::array<double, 2> p{x, y};
        return (*this)(p);
    }

    /// Euclidean norm of the offset (center) of the kernel.
    double offset_norm() const {
        double r2 = 0.0;
        for (double b : spec_.offset) r2 += b * b;
        return std::sqrt(r2);
    }

    /// Length scale that a grid must resolve.
    double effective_scale() const {
        switch (spec_.family) {
            case KernelFamily::gaussian: return spec_.sigma;
            case KernelFamily::laplace: return 1.0 / spec_.mu;
            case KernelFamily::exp_poly: {
                if (spec_.p == 0.0) return 1.0;
                const double s = std::pow(spec_.mu, -1.0 / spec_.p);
                return spec_.q > 0.0 ? std::min(s, 1.0) : s;
            }
            case KernelFamily::compact_uniform: return spec_.radius;
            case KernelFamily::power_tail: return 1.0;
        }
        return 1.0;
    }

    /// Surface measure of the unit sphere in R^d (2 for d=1, 2 pi for d=2).
    double sphere_measure() const { return dimension() == 1 ? 2.0 : 2.0 * std::numbers::pi; }

    /// Mass of the density outside the ball of radius R about its center.
    double mass_beyond(double R) const {
        if (R <= 0.0) return 1.0;
        const int d = dimension();
        if (spec_.family == KernelFamily::compact_uniform) {
            if (R >= spec_.radius) return 0.0;
            return 1.0 - std::pow(R / spec_.radius, d);
        }
        auto g = [&](double r) { return profile(r) * (d == 1 ? 1.0 : r); };
        return std::max(0.0, alpha_ * sphere_measure() * quad::tail(g, R, 1e-15));
    }

    /// Mass of the density inside the ball of radius R about the origin of R^d.
    double mass_in_origin_ball(double R) const;

private:
    friend Kernel make_kernel(const KernelSpec& spec);
    KernelSpec spec_;
    double alpha_ = 1.0;
    TailInfo tail_;
};

inline Kernel make_kernel(const KernelSpec& spec) {
    spec.validate();
    Kernel k;
    k.spec_ = spec;
    const int d = spec.dimension;
    const double dd = d;

    // Normalizer: alpha = 1 / (|S^{d-1}| int_0^inf f(r) r^{d-1} dr).
    double radial_integral = 0.0;
    if (spec.family == KernelFamily::compact_uniform) {
        radial_integral = std::pow(spec.radius, dd) / dd;
    } else {
        k.alpha_ = 1.0;
        auto g = [&](double r) { return k.profile(r) * (d == 1 ? 1.0 : r); };
        radial_integral = quad::half_line(g, 1e-15);
    }
    const double sphere = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
    if (!(radial_integral > 0.0) || !std::isfinite(radial_integral)) {
        throw InvalidArgument("kernel " + spec.describe() + " is not integrable");
    }
    k.alpha_ = 1.0 / (sphere * radial_integral);

    // Tail of the directional marginal. In d=2 integrating out the orthogonal
    // coordinate raises the polynomial prefactor by s^{1/2} for exponential tails
    // and by s^{1} for power tails.
    const double inf = std::numeric_limits<double>::infinity();
    TailInfo t;
    switch (spec.family) {
        case KernelFamily::gaussian:
        case KernelFamily::compact_uniform:
            t = {TailClass::exp_decay_infinite, inf, 0.0};
            break;
        case KernelFamily::laplace:
            t = {TailClass::exp_decay_finite, spec.mu, d == 1 ? 0.0 : -0.5};
            break;
        case KernelFamily::exp_poly:
            if (spec.p > 1.0) {
                t = {TailClass::exp_decay_infinite, inf, 0.0};
            } else if (spec.p == 1.0) {
                t = {TailClass::exp_decay_finite, spec.mu, d == 1 ? spec.q : spec.q - 0.5};
            } else {
                t = {TailClass::heavy_tail, 0.0, spec.p == 0.0 ? spec.q - (dd - 1.0) : inf};
            }
            break;
        case KernelFamily::power_tail:
            t = {TailClass::heavy_tail, 0.0, spec.q - (dd - 1.0)};
            break;
    }
    k.tail_ = t;
    return k;
}

inline double Kernel::mass_in_origin_ball(double R) const {
    if (R <= 0.0) return 0.0;
    if (dimension() == 1) {
        const double b = spec_.offset_component(0);
        // Integrate the centered density over [-R - b, R - b], splitting at 0.
        const double lo = -R - b;
        const double hi = R - b;
        auto f = [&](double s) { return radial(std::abs(s)); };
        double m = 0.0;
        if (lo < 0.0 && hi > 0.0) {
            m = quad::interval(f, lo, 0.0) + quad::interval(f, 0.0, hi);
        } else {
            m = quad::interval(f, lo, hi);
        }
        if (spec_.family == KernelFamily::compact_uniform) {
            const double a = std::max(lo, -spec_.radius);
            const double c = std::min(hi, spec_.radius);
            m = c > a ? alpha_ * (c - a) : 0.0;
        }
        return m;
    }
    if (offset_norm() == 0.0) {
        return 1.0 - mass_beyond(R);
    }
    // Polar coordinates about the origin for an off-center kernel.
    auto ring = [&](double r) {
        auto ang = [&](double phi) { return at(r * std::cos(phi), r * std::sin(phi)); };
        return r * quad::interval(ang, 0.0, 2.0 * std::numbers::pi, 1e-12);
    };
    return quad::interval(ring, 0.0, R, 1e-11);
}

/// Directional marginal a_xi(s) = int_{xi-perp} a(s xi + tau) d tau of a Kernel.
/// Because every family is radial about its offset b, a_xi(s) = base(s - b.xi)
/// with `base` the (even) marginal of the centered density.
class Kernel1D {
public:
    Kernel1D(Kernel source, std::vector<double> direction)
        : source_(std::move(source)), xi_(std::move(direction)) {
        shift_ = 0.0;
        for (int i = 0; i < source_.dimension(); ++i) {
            shift_ += source_.spec().offset_component(i) * xi_[static_cast<std::size_t>(i)];
        }
    }

    const Kernel& source() const noexcept { return source_; }
    std::span<const double> direction() const noexcept { return xi_; }

    /// Location of the marginal's center, b . xi.
    double shift() const noexcept { return shift_; }

    const TailInfo& tail() const noexcept { return source_.marginal_tail(); }
    double abscissa() const noexcept { return tail().lambda0; }
    TailClass tail_class() const noexcept { return tail().cls; }

    /// Density a_xi(s).
    double operator()(double s) const { return std::exp(log_base(std::abs(s - shift_))); }

    /// log of the centered, even marginal at u >= 0 (may be -inf).
    double log_base(double u) const { return log_tilted(u, 0.0); }

    /// log(base(u)) + lambda u, u >= 0, with the exponential rates combined
    /// before adding so that nothing cancels far out in the tail.
    double log_tilted(double u, double lambda) const {
        u = std::abs(u);
        const KernelSpec& sp = source_.spec();
        const double alpha = source_.normalizer();
        const double ninf = -std::numeric_limits<double>::infinity();
        auto rate = [&](double p) {
            // lambda u - mu u^p
            if (p == 1.0) return (lambda - sp.mu) * u;
            return lambda * u - sp.mu * std::pow(u, p);
        };
        if (source_.dimension() == 1) {
            switch (sp.family) {
                case KernelFamily::gaussian:
                    return std::log(alpha) + lambda * u - u * u / (2.0 * sp.sigma * sp.sigma);
                case KernelFamily::laplace: return std::log(alpha) + rate(1.0);
                case KernelFamily::exp_poly: return std::log(alpha) + rate(sp.p) - std::log1p(std::pow(u, sp.q));
                case KernelFamily::compact_uniform: return u <= sp.radius ? std::log(alpha) + lambda * u : ninf;
                case KernelFamily::power_tail: return std::log(alpha) + lambda * u - std::log1p(std::pow(u, sp.q));
            }
        }
        // d = 2: integrate out the orthogonal coordinate.
        switch (sp.family) {
            case KernelFamily::gaussian:
                return std::log(alpha * std::sqrt(2.0 * std::numbers::pi) * sp.sigma) + lambda * u -
                       u * u / (2.0 * sp.sigma * sp.sigma);
            case KernelFamily::compact_uniform:
                if (u >= sp.radius) return ninf;
                return std::log(2.0 * alpha * std::sqrt(sp.radius * sp.radius - u * u)) + lambda * u;
            case KernelFamily::laplace:
            case KernelFamily::exp_poly: {
                const bool lap = sp.family == KernelFamily::laplace;
                const double p = lap ? 1.0 : sp.p;
                const double up = std::pow(u, p);
                // exp(-mu (r^p - u^p)) with r = sqrt(u^2 + tau^2), written without cancellation.
                auto excess = [&](double tau) {
                    if (u == 0.0) return std::pow(tau, p);
                    if (p == 1.0) return tau * tau / (std::sqrt(u * u + tau * tau) + u);
                    return up * std::expm1(0.5 * p * std::log1p((tau / u) * (tau / u)));
                };
                auto g = [&](double tau) {
                    double v = std::exp(-sp.mu * excess(tau));
                    if (!lap) v /= 1.0 + std::pow(u * u + tau * tau, 0.5 * sp.q);
                    return v;
                };
                const double inner = quad::half_line(g, 1e-14);
                return std::log(2.0 * alpha * inner) + rate(p);
            }
            case KernelFamily::power_tail: {
                auto g = [&](double tau) { return 1.0 / (1.0 + std::pow(u * u + tau * tau, 0.5 * sp.q)); };
                return std::log(2.0 * alpha * quad::half_line(g, 1e-14)) + lambda * u;
            }
        }
        return ninf;
    }

    /// Centered marginal tilted by e^{lambda u}: base(u) exp(lambda u), u >= 0.
    double tilted(double u, double lambda) const { return std::exp(log_tilted(u, lambda)); }

private:
    Kernel source_;
    std::vector<double> xi_;
    double shift_ = 0.0;
};

/// Directional reduction of a kernel. `xi` must be a unit vector of the kernel's dimension.
inline Kernel1D reduce_to_direction(const Kernel& kernel, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) != kernel.dimension()) {
        throw InvalidArgument("direction has wrong dimension");
    }
    double n2 = 0.0;
    for (double v : xi) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12) {
        throw InvalidArgument("direction must be a unit vector");
    }
    return Kernel1D(kernel, std::vector<double>(xi.begin(), xi.end()));
}

inline Kernel1D reduce_to_direction(const Kernel& kernel, std::initializer_list<double> xi) {
    const std::vector<double> v(xi);
    return reduce_to_direction(kernel, std::span<const double>(v));
}

/// Marginal of a 1-D kernel along +1.
inline Kernel1D as_1d(const Kernel& kernel) {
    if (kernel.dimension() != 1) throw InvalidArgument("as_1d requires a 1-D kernel");
    return Kernel1D(kernel, {1.0});
}

}  // namespace dnkpp
