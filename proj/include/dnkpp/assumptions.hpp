#pragma once

// Checks of the standing hypotheses on (kappa+, kappa-, m, a+, a-) with
// witnesses, and the signed competition-gap kernel J_q.

#include "dnkpp/dispersion.hpp"
#include "dnkpp/errors.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/params.hpp"
#include "dnkpp/quadrature.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dnkpp {

struct DominationWitness {
    double min_margin = 0.0;                 // min of kappa+ a+ - (kappa+ - m) a- over the sample
    std::vector<double> argmin;              // where the minimum was attained
    std::size_t samples = 0;
};

struct GapWitness {
    double rho = 0.0;    // J_theta >= rho on the ball of radius delta
    double delta = 0.0;
};

struct InfPosWitness {
    double alpha = 0.0;  // inf of a- over the ball of radius r0
    double r0 = 0.0;
};

struct AssumptionReport {
    bool A1_kappa_gt_m = false;
    bool A2_kernel_domination = false;
    DominationWitness A2_witness;
    std::optional<double> A3_mollison;                  // lambda with a finite exponential moment in every direction
    std::optional<GapWitness> A4_gap_positive_near_origin;
    std::optional<double> radial_exp_moment;            // mu_d with int a+(x) e^{mu_d |x|} dx finite
    std::optional<InfPosWitness> infpos;                // for the uniform bound

    /// key = value lines for summaries.
    std::vector<std::pair<std::string, std::string>> entries() const {
        auto num = [](double v) {
            std::ostringstream os;
            os.precision(12);
            os << v;
            return os.str();
        };
        std::vector<std::pair<std::string, std::string>> e;
        e.emplace_back("assumption.A1_kappa_gt_m", A1_kappa_gt_m ? "true" : "false");
        e.emplace_back("assumption.A2_kernel_domination", A2_kernel_domination ? "true" : "false");
        e.emplace_back("assumption.A2_min_margin", num(A2_witness.min_margin));
        e.emplace_back("assumption.A2_samples", std::to_string(A2_witness.samples));
        e.emplace_back("assumption.A3_mollison", A3_mollison ? "true" : "false");
        if (A3_mollison) e.emplace_back("assumption.A3_lambda", num(*A3_mollison));
        e.emplace_back("assumption.A4_gap_positive", A4_gap_positive_near_origin ? "true" : "false");
        if (A4_gap_positive_near_origin) {
            e.emplace_back("assumption.A4_rho", num(A4_gap_positive_near_origin->rho));
            e.emplace_back("assumption.A4_delta", num(A4_gap_positive_near_origin->delta));
        }
        e.emplace_back("assumption.radial_exp_moment", radial_exp_moment ? "true" : "false");
        if (radial_exp_moment) e.emplace_back("assumption.radial_exp_moment_mu", num(*radial_exp_moment));
        return e;
    }
};

/// Signed kernel J_q(x) = kappa+ a+(x) - q kappa- a-(x), 0 < q <= theta.
class GapKernel {
public:
    GapKernel(const ModelParams& p, Kernel a_plus, Kernel a_minus, double q)
        : p_(p), ap_(std::move(a_plus)), am_(std::move(a_minus)), q_(q) {
        p_.require_positive_theta();
        if (ap_.dimension() != am_.dimension()) throw InvalidArgument("kernels must share a dimension");
        if (!(q > 0.0) || q > p_.theta() * (1.0 + 1e-15)) {
            throw InvalidArgument("J_q requires 0 < q <= theta");
        }
    }

    double q() const noexcept { return q_; }
    int dimension() const noexcept { return ap_.dimension(); }

    double operator()(std::span<const double> x) const {
        return p_.kappa_plus * ap_(x) - q_ * p_.kappa_minus * am_(x);
    }
    double at(double s) const { return p_.kappa_plus * ap_.at(s) - q_ * p_.kappa_minus * am_.at(s); }
    double at(double x, double y) const {
        return p_.kappa_plus * ap_.at(x, y) - q_ * p_.kappa_minus * am_.at(x, y);
    }

    /// int J_q by quadrature (equals kappa+ - q kappa- for normalized kernels).
    double integral() const {
        auto mass = [](const Kernel& k) {
            if (k.dimension() == 1) {
                const double b = k.spec().offset_component(0);
                if (k.spec().family == KernelFamily::compact_uniform)
                    return quad::interval([&](double s) { return k.at(s); }, b - k.spec().radius, b + k.spec().radius);
                return quad::real_line([&](double s) { return k.at(s); }, b);
            }
            // Polar coordinates about the kernel's own center.
            auto ring = [&](double r) { return 2.0 * std::numbers::pi * r * k.radial(r); };
            if (k.spec().family == KernelFamily::compact_uniform) return quad::interval(ring, 0.0, k.spec().radius);
            return quad::half_line(ring);
        };
        return p_.kappa_plus * mass(ap_) - q_ * p_.kappa_minus * mass(am_);
    }

private:
    ModelParams p_;
    Kernel ap_;
    Kernel am_;
    double q_;
};

inline GapKernel competition_gap_kernel(const ModelParams& p, const Kernel& a_plus, const Kernel& a_minus, double q) {
    return GapKernel(p, a_plus, a_minus, q);
}

namespace detail {

// Radical inverse in base b (van der Corput / Halton component).
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

// Deterministic low-discrepancy points in the ball of radius R (plus a dense
// cluster near the origin and the origin itself).
inline std::vector<std::array<double, 2>> ball_sample(int d, double R, std::size_t n) {
    std::vector<std::array<double, 2>> pts;
    pts.push_back({0.0, 0.0});
    auto add = [&](double radius, std::size_t count) {
        for (std::size_t i = 1; i <= count; ++i) {
            if (d == 1) {
                pts.push_back({radius * (2.0 * radical_inverse(i, 2) - 1.0), 0.0});
            } else {
                const double r = radius * std::sqrt(radical_inverse(i, 2));
                const double phi = 2.0 * std::numbers::pi * radical_inverse(i, 3);
                pts.push_back({r * std::cos(phi), r * std::sin(phi)});
            }
        }
    };
    add(R, n);
    add(std::min(R, 1e-2 * R + 1e-3), n / 10);
    return pts;
}

}  // namespace detail

/// Evaluates the standing hypotheses. The domination condition is checked
/// pointwise on at least 10^4 quasi-random points in the ball of `sample_radius`.
inline AssumptionReport check_assumptions(const ModelParams& p, const Kernel& a_plus, const Kernel& a_minus,
                                          double sample_radius, std::size_t samples = 10000) {
    if (a_plus.dimension() != a_minus.dimension()) throw InvalidArgument("kernels must share a dimension");
    if (!(sample_radius > 0.0)) throw InvalidArgument("sample_radius must be positive");
    p.validate();
    AssumptionReport rep;
    const int d = a_plus.dimension();
    rep.A1_kappa_gt_m = p.has_positive_theta();

    const double c = p.kappa_plus - p.mortality;
    const auto pts = detail::ball_sample(d, sample_radius, std::max<std::size_t>(samples, 10000));
    rep.A2_witness.samples = pts.size();
    rep.A2_witness.min_margin = infinity;
    rep.A2_kernel_domination = true;
    for (const auto& x : pts) {
        const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
        const double ap = a_plus(xs);
        const double am = a_minus(xs);
        const double margin = p.kappa_plus * ap - c * am;
        if (margin < rep.A2_witness.min_margin) {
            rep.A2_witness.min_margin = margin;
            rep.A2_witness.argmin.assign(xs.begin(), xs.end());
        }
        // Scale-aware so that equal kernels are not rejected by rounding.
        const double slack = 1e-12 * (p.kappa_plus * ap + std::abs(c) * am);
        if (margin < -slack) rep.A2_kernel_domination = false;
    }

    // Mollison: all families are radial, so one direction decides.
    const double l0 = a_plus.abscissa();
    if (l0 > 0.0) {
        const double lam = l0 == infinity ? 1.0 : 0.5 * l0;
        std::vector<double> xi(static_cast<std::size_t>(d), 0.0);
        xi[0] = 1.0;
        if (std::isfinite(laplace_transform(reduce_to_direction(a_plus, xi), lam))) {
            rep.A3_mollison = lam;
            rep.radial_exp_moment = lam;
        }
    }

    // J_theta bounded below near the origin.
    if (rep.A1_kappa_gt_m) {
        const GapKernel J(p, a_plus, a_minus, p.theta());
        std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
        const double j0 = J(origin);
        if (j0 > 0.0) {
            const double rho = 0.5 * j0;
            double delta = 2.0 * std::max(a_plus.effective_scale(), a_minus.effective_scale());
            for (int it = 0; it < 40; ++it, delta *= 0.5) {
                bool ok = true;
                for (const auto& x : detail::ball_sample(d, delta, 400)) {
                    const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
                    if (J(xs) < rho) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    rep.A4_gap_positive_near_origin = GapWitness{rho, delta};
                    break;
                }
            }
        }
    }

    // inf of a- over a ball about the origin; radial profiles are non-increasing
    // in the distance from the kernel center.
    {
        const double b = a_minus.offset_norm();
        double r0 = a_minus.effective_scale();
        if (a_minus.spec().family == KernelFamily::compact_uniform) {
            r0 = 0.5 * (a_minus.spec().radius - b);
        }
        if (r0 > 0.0) {
            const double alpha = a_minus.radial(r0 + b);
            if (alpha > 0.0) rep.infpos = InfPosWitness{alpha, r0};
        }
    }
    return rep;
}

}  // namespace dnkpp
