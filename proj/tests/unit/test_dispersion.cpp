#include "oracles.hpp"

#include "dnkpp/dnkpp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace dnkpp;
using Catch::Approx;

namespace {
const ModelParams canon = ModelParams::make(2.0, 1.0, 1.0);

Kernel1D k1(const KernelSpec& s) { return as_1d(make_kernel(s)); }

// Laplace transform of the 1-D ExpPoly(1, q, mu) kernel by Simpson on a
// truncated range; the integrand decays like e^{-(mu - lambda) s} / s^q.
double exppoly_laplace(double q, double mu, double lambda) {
    auto prof = [&](double s) { return std::exp(-mu * std::abs(s)) / (1.0 + std::pow(std::abs(s), q)); };
    const double mass = 2.0 * oracle::simpson([&](double s) { return prof(s); }, 0.0, 60.0 / mu);
    return oracle::simpson([&](double s) { return prof(s) * std::exp(lambda * s); }, -60.0, 60.0 / std::max(mu - lambda, 1e-3), 400000) / mass;
}
}  // namespace

TEST_CASE("closed-form Laplace transforms", "[dispersion]") {
    CHECK(laplace_transform(k1(KernelSpec::gaussian(1.0)), 1.0) == Approx(std::exp(0.5)).epsilon(1e-10));
    CHECK(laplace_transform(k1(KernelSpec::laplace(1.0)), 0.5) == Approx(4.0 / 3.0).epsilon(1e-10));
    CHECK(std::isinf(laplace_transform(k1(KernelSpec::laplace(1.0)), 1.5)));
    CHECK_THROWS_AS(laplace_transform(k1(KernelSpec::gaussian(1.0)), 0.0), InvalidArgument);

    // quadrature oracle for a non-closed-form family
    const double lam = 0.6;
    CHECK(laplace_transform(k1(KernelSpec::exp_poly(1.0, 3.0, 1.0)), lam) ==
          Approx(exppoly_laplace(3.0, 1.0, lam)).epsilon(1e-7));
}

TEST_CASE("abscissas", "[dispersion]") {
    CHECK(std::isinf(abscissa(k1(KernelSpec::gaussian(1.0)))));
    const Kernel1D e = k1(KernelSpec::exp_poly(1.0, 3.0, 2.0));
    CHECK(abscissa(e) == 2.0);
    CHECK(transform_finite_at_abscissa(e));
    CHECK(std::isfinite(laplace_transform(e, 2.0)));
    CHECK(abscissa(k1(KernelSpec::power_tail(4.0))) == 0.0);
    CHECK_FALSE(transform_finite_at_abscissa(k1(KernelSpec::exp_poly(1.0, 0.5, 1.0))));
}

TEST_CASE("dispersion function values", "[dispersion]") {
    CHECK(dispersion_G(canon, k1(KernelSpec::gaussian(1.0)), 1.0) == Approx(2.0 * std::exp(0.5) - 1.0).epsilon(1e-10));
    CHECK(dispersion_G(canon, k1(KernelSpec::laplace(1.0)), 0.5) == Approx(10.0 / 3.0).epsilon(1e-10));
    CHECK(dispersion_G(canon, k1(KernelSpec::gaussian(1.0)), 1e-6) > 1e5);
    CHECK_THROWS_AS(dispersion_G(canon, k1(KernelSpec::laplace(1.0)), 1.2), InvalidArgument);
}

TEST_CASE("minimal speed against a brute-force scan", "[dispersion]") {
    struct Case {
        KernelSpec spec;
        std::function<double(double)> G;
        double hi;
    };
    const double kp = canon.kappa_plus, m = canon.mortality;
    const std::vector<Case> cases{
        {KernelSpec::gaussian(1.0), [&](double l) { return (kp * std::exp(0.5 * l * l) - m) / l; }, 5.0},
        {KernelSpec::laplace(1.0), [&](double l) { return (kp / (1.0 - l * l) - m) / l; }, 0.999999},
    };
    for (const auto& c : cases) {
        const auto [ls, cs] = oracle::scan_min(c.G, 1e-4, c.hi);
        const DispersionReport r = minimize_G(canon, k1(c.spec));
        CHECK(oracle::rel(r.lambda_star, ls) <= 1e-6);
        CHECK(oracle::rel(r.c_star, cs) <= 1e-6);
        CHECK(r.kernel_class == KernelClass::V_class);
        CHECK(r.c_star > kp * r.m_xi);
    }
    // First-order condition for the Gaussian: e^{l^2/2} (1 - l^2) = 1/2.
    const double l = minimize_G(canon, k1(KernelSpec::gaussian(1.0))).lambda_star;
    CHECK(std::exp(0.5 * l * l) * (1.0 - l * l) == Approx(0.5).margin(1e-9));
    CHECK(l == Approx(0.797648).margin(1e-6));
}

TEST_CASE("alternative representation of the minimal speed", "[dispersion]") {
    const DispersionReport r = minimize_G(canon, k1(KernelSpec::gaussian(1.0)));
    // kappa+ int s a(s) e^{l s} ds = kappa+ l e^{l^2/2} for the standard Gaussian.
    CHECK(r.alt_speed == Approx(canon.kappa_plus * r.lambda_star * std::exp(0.5 * r.lambda_star * r.lambda_star)).epsilon(1e-8));
    CHECK(oracle::rel(r.alt_speed, r.c_star) <= 1e-6);
}

TEST_CASE("G is unimodal around lambda*", "[dispersion]") {
    const Kernel1D k = k1(KernelSpec::laplace(1.0));
    const DispersionReport r = minimize_G(canon, k);
    double prev = infinity;
    for (int i = 1; i <= 1000; ++i) {
        const double l = r.lambda_star * i / 1000.0;
        const double g = dispersion_G(canon, k, l);
        CHECK(g < prev);
        prev = g;
    }
    for (int i = 1; i <= 1000; ++i) {
        const double l = r.lambda_star + (0.999 - r.lambda_star) * i / 1000.0;
        const double g = dispersion_G(canon, k, l);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("t_xi", "[dispersion]") {
    const Kernel1D g = k1(KernelSpec::gaussian(1.0));
    CHECK(t_xi(canon, g, 1e-6) == Approx(canon.kappa_plus).epsilon(1e-6));
    // kappa+ int (1 - l s) a e^{l s} = kappa+ e^{l^2/2} (1 - l^2)
    CHECK(t_xi(canon, g, 0.7) == Approx(2.0 * std::exp(0.245) * (1.0 - 0.49)).epsilon(1e-9));
    CHECK(t_xi(canon, k1(KernelSpec::exp_poly(1.0, 2.0, 1.0)), 1.0) == -infinity);
    const double t = t_xi(canon, k1(KernelSpec::exp_poly(1.0, 4.0, 1.0)), 1.0);
    CHECK(std::isfinite(t));
    CHECK(t < canon.kappa_plus);
    CHECK_THROWS_AS(t_xi(canon, k1(KernelSpec::laplace(1.0)), 1.5), InvalidArgument);
}

TEST_CASE("classification examples", "[dispersion]") {
    CHECK(classify(canon, k1(KernelSpec::exp_poly(2.0, 1.0, 1.0))) == KernelClass::V_class);
    CHECK(classify(canon, k1(KernelSpec::exp_poly(1.0, 0.5, 1.0))) == KernelClass::V_class);
    // q in (1, 2]: finite transform at the abscissa but divergent first moment there.
    for (double q : {1.5, 2.0}) {
        const DispersionReport r = minimize_G(canon, k1(KernelSpec::exp_poly(1.0, q, 1.0)));
        CHECK(r.kernel_class == KernelClass::V_class);
        CHECK(r.t_xi_at_lambda0 == -infinity);
        CHECK(r.lambda_star < 1.0);
    }

    // ExpPoly(1, 4, mu) with t_xi(mu) >= m is W. Oracle value of t_xi by Simpson.
    const double mu = 0.5;
    auto prof = [&](double s) { return std::exp(-mu * std::abs(s)) / (1.0 + std::pow(s, 4)); };
    const double mass = 2.0 * oracle::simpson(prof, 0.0, 400.0, 400000);
    // (1 - mu s) e^{mu s} e^{-mu |s|}: on s > 0 the exponentials cancel.
    const double pos = oracle::simpson([&](double s) { return (1.0 - mu * s) / (1.0 + std::pow(s, 4)); }, 0.0, 4000.0, 2000000);
    const double neg = oracle::simpson([&](double s) { return (1.0 + mu * s) * std::exp(-2.0 * mu * s) / (1.0 + std::pow(s, 4)); }, 0.0, 200.0);
    const double tx = canon.kappa_plus * (pos + neg) / mass;
    const Kernel1D k = k1(KernelSpec::exp_poly(1.0, 4.0, mu));
    CHECK(t_xi(canon, k, mu) == Approx(tx).epsilon(1e-4));
    const ModelParams w = ModelParams::make(2.0, 1.0, 0.5 * tx);
    CHECK(classify(w, k) == KernelClass::W_class);
    const DispersionReport r = minimize_G(w, k);
    CHECK(r.lambda_star == mu);
    CHECK(char_multiplicity(w, k, r.c_star, r) == 1);
}

TEST_CASE("speed to abscissa", "[dispersion]") {
    const Kernel1D g = k1(KernelSpec::gaussian(1.0));
    const DispersionReport r = minimize_G(canon, g);
    CHECK(speed_to_abscissa(canon, g, r.c_star) == r.lambda_star);
    const double oracle_root =
        oracle::bisect([](double l) { return 2.0 * std::exp(0.5 * l * l) - 1.0 - 3.0 * l; }, 1e-6, r.lambda_star);
    CHECK(speed_to_abscissa(canon, g, 3.0) == Approx(oracle_root).epsilon(1e-10));
    double prev = infinity;
    for (int i = 0; i < 20; ++i) {
        const double c = r.c_star * (1.0 + 2.0 * i / 19.0);
        const double l = speed_to_abscissa(canon, g, c);
        CHECK(l < prev);
        prev = l;
    }
    CHECK_THROWS_AS(speed_to_abscissa(canon, g, 0.9 * r.c_star), InvalidArgument);
}

TEST_CASE("characteristic multiplicity", "[dispersion]") {
    const Kernel1D g = k1(KernelSpec::gaussian(1.0));
    const double cs = minimize_G(canon, g).c_star;
    CHECK(char_multiplicity(canon, g, 1.2 * cs) == 1);
    CHECK(char_multiplicity(canon, g, cs) == 2);
}

TEST_CASE("means", "[dispersion]") {
    const Kernel g = make_kernel(KernelSpec::gaussian(1.0, 2));
    CHECK(directional_mean(g, std::vector<double>{0.6, 0.8}) == Approx(0.0).margin(1e-12));
    const Kernel shifted = make_kernel(KernelSpec::gaussian(1.0, 2).shifted({0.3, -0.2}));
    const auto m = global_mean(shifted);
    CHECK(m[0] == Approx(0.3).epsilon(1e-9));
    CHECK(m[1] == Approx(-0.2).epsilon(1e-9));
    const Kernel1D pt = k1(KernelSpec::power_tail(4.0));
    CHECK(directional_mean(pt) == Approx(0.0).margin(1e-12));
    // int |s| alpha / (1 + s^4) = alpha pi / 2 = 1/sqrt(2)
    CHECK(absolute_first_moment(pt) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(directional_mean(k1(KernelSpec::power_tail(1.5))), InvalidArgument);
}

TEST_CASE("front sets", "[dispersion]") {
    const Kernel g1 = make_kernel(KernelSpec::gaussian(1.0));
    const FrontSet f1 = front_set(canon, g1);
    REQUIRE(f1.speeds.size() == 2);
    CHECK(f1.speeds[0] == Approx(f1.speeds[1]).epsilon(1e-12));

    const Kernel g2 = make_kernel(KernelSpec::gaussian(1.0, 2));
    const FrontSet f2 = front_set(canon, g2, 16);
    CHECK(f2.max_speed() - f2.min_speed() <= 1e-8);
    CHECK(f2.min_speed() == Approx(2.19280384).epsilon(1e-7));

    const Kernel sh = make_kernel(KernelSpec::gaussian(1.0, 2).shifted({0.4, 0.0}));
    const FrontSet fs = front_set(canon, sh, 16);
    for (std::size_t i = 0; i < fs.directions.size(); ++i) {
        const std::size_t j = (i + 8) % 16;  // opposite direction
        CHECK(fs.speeds[i] + fs.speeds[j] > 0.0);
    }
    CHECK(fs.contains(fs.kappa_mean, 1.0 - 1e-9));
    CHECK_THROWS_AS(front_set(canon, make_kernel(KernelSpec::power_tail(4.0))), MollisonFailure);
}

TEST_CASE("Mollison failure", "[dispersion]") {
    CHECK_THROWS_AS(minimize_G(canon, k1(KernelSpec::power_tail(4.0))), MollisonFailure);
}
