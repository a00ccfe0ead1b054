#include "oracles.hpp"

#include "dnkpp/dnkpp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace dnkpp;
using Catch::Approx;

namespace {
const ModelParams canon = ModelParams::make(2.0, 1.0, 1.0);
}

TEST_CASE("theta and parameter guards", "[model_core]") {
    CHECK(canon.theta() == 1.0);
    CHECK(ModelParams::make(3.0, 2.0, 1.0).theta() == 1.0);
    CHECK_THROWS_AS(ModelParams::make(1.0, 1.0, 1.0), InvalidArgument);  // theta = 0
    CHECK_NOTHROW(ModelParams::make(1.0, 1.0, 1.0, false));
    CHECK_THROWS_AS(ModelParams::make(-1.0, 1.0, 1.0, false), InvalidArgument);
}

TEST_CASE("kernel normalizers", "[model_core]") {
    const Kernel g = make_kernel(KernelSpec::gaussian(1.0));
    CHECK(g.normalizer() == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(g.tail_class() == TailClass::exp_decay_infinite);

    // alpha * int e^{-|s|} / (1 + |s|^3) ds = 1; Simpson on [-50, 50], tail below e^{-50}.
    const Kernel e = make_kernel(KernelSpec::exp_poly(1.0, 3.0, 1.0));
    const double I = 2.0 * oracle::simpson([](double s) { return std::exp(-s) / (1.0 + s * s * s); }, 0.0, 50.0);
    CHECK(e.normalizer() == Approx(1.0 / I).epsilon(1e-9));
    CHECK(e.tail_class() == TailClass::exp_decay_finite);
    CHECK(e.abscissa() == 1.0);

    const Kernel pt = make_kernel(KernelSpec::power_tail(4.0));
    CHECK(pt.normalizer() == Approx(std::sqrt(2.0) / std::numbers::pi).epsilon(1e-10));
    CHECK(pt.tail_class() == TailClass::heavy_tail);
    CHECK(pt.abscissa() == 0.0);

    CHECK(make_kernel(KernelSpec::exp_poly(2.0, 1.0, 1.0)).tail_class() == TailClass::exp_decay_infinite);
    CHECK(make_kernel(KernelSpec::laplace(2.0)).abscissa() == 2.0);
}

TEST_CASE("2-D kernels integrate to one", "[model_core]") {
    for (const auto& spec : {KernelSpec::gaussian(1.0, 2), KernelSpec::laplace(1.5, 2), KernelSpec::exp_poly(1.0, 3.0, 1.0, 2)}) {
        const Kernel k = make_kernel(spec);
        const double mass = oracle::simpson([&](double r) { return 2.0 * std::numbers::pi * r * k.radial(r); }, 0.0, 60.0);
        CHECK(mass == Approx(1.0).epsilon(1e-9));
    }
    const Kernel u = make_kernel(KernelSpec::compact_uniform(1.0, 2));
    CHECK(u.normalizer() == Approx(1.0 / std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("non-integrable specs are rejected", "[model_core]") {
    CHECK_THROWS_AS(make_kernel(KernelSpec::power_tail(1.0)), InvalidArgument);
    CHECK_THROWS_AS(make_kernel(KernelSpec::power_tail(2.0, 2)), InvalidArgument);
    CHECK_THROWS_AS(make_kernel(KernelSpec::gaussian(-1.0)), InvalidArgument);
}

TEST_CASE("assumption report", "[model_core]") {
    const Kernel g = make_kernel(KernelSpec::gaussian(1.0));
    const AssumptionReport same = check_assumptions(canon, g, g, 6.0);
    CHECK(same.A1_kappa_gt_m);
    CHECK(same.A2_kernel_domination);
    CHECK(same.A2_witness.samples >= 10000);
    CHECK(same.A3_mollison.has_value());
    REQUIRE(same.A4_gap_positive_near_origin.has_value());
    // J_theta = m a on the ball; the witness must hold at its edge.
    const auto w = *same.A4_gap_positive_near_origin;
    CHECK(canon.mortality * g.at(w.delta) >= w.rho);

    // (2 pi 0.04)^{-1/2} > (2 pi)^{-1/2}: a- dominates at the origin.
    const Kernel narrow = make_kernel(KernelSpec::gaussian(0.2));
    CHECK(narrow.at(0.0) > g.at(0.0));
    const AssumptionReport bad = check_assumptions(canon, g, narrow, 6.0);
    CHECK_FALSE(bad.A2_kernel_domination);
    CHECK(bad.A2_witness.min_margin < 0.0);

    const Kernel pt = make_kernel(KernelSpec::power_tail(4.0));
    CHECK_FALSE(check_assumptions(canon, pt, pt, 6.0).A3_mollison.has_value());
}

TEST_CASE("competition gap kernel", "[model_core]") {
    const Kernel g = make_kernel(KernelSpec::gaussian(1.0));
    const GapKernel J = competition_gap_kernel(canon, g, g, canon.theta());
    CHECK(J.at(0.0) == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(J.integral() == Approx(canon.mortality).margin(1e-8));
    for (double x : {0.3, 1.7, 4.0}) CHECK(J.at(x) == Approx(canon.mortality * g.at(x)).epsilon(1e-12));

    const GapKernel J0 = competition_gap_kernel(canon, g, g, 1e-12);
    CHECK(J0.at(0.5) == Approx(canon.kappa_plus * g.at(0.5)).epsilon(1e-9));
    CHECK_THROWS_AS(competition_gap_kernel(canon, g, g, 1.5), InvalidArgument);
    CHECK_THROWS_AS(competition_gap_kernel(canon, g, g, 0.0), InvalidArgument);
}

TEST_CASE("directional reduction", "[model_core]") {
    const Kernel g2 = make_kernel(KernelSpec::gaussian(1.3, 2));
    const Kernel g1 = make_kernel(KernelSpec::gaussian(1.3));
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double a = ang(gen);
        const Kernel1D k = reduce_to_direction(g2, {std::cos(a), std::sin(a)});
        for (double s : {-3.0, -1.0, 0.0, 0.4, 2.5}) worst = std::max(worst, std::abs(k(s) - g1.at(s)));
    }
    CHECK(worst <= 1e-8);

    // Chord length of the unit disc: (2/pi) sqrt(1 - s^2).
    const Kernel1D disc = reduce_to_direction(make_kernel(KernelSpec::compact_uniform(1.0, 2)), {0.6, 0.8});
    for (double s : {-0.9, -0.2, 0.0, 0.5, 0.99})
        CHECK(disc(s) == Approx(2.0 / std::numbers::pi * std::sqrt(1.0 - s * s)).epsilon(1e-8));
    CHECK(disc(1.2) == 0.0);
    CHECK(oracle::simpson([&](double s) { return disc(s); }, -1.0, 1.0, 20000) == Approx(1.0).epsilon(1e-5));

    const Kernel1D e1 = as_1d(make_kernel(KernelSpec::exp_poly(1.0, 3.0, 1.0)));
    const Kernel ep = make_kernel(KernelSpec::exp_poly(1.0, 3.0, 1.0));
    for (double s : {-2.0, 0.0, 3.0}) CHECK(e1(s) == Approx(ep.at(s)).epsilon(1e-14));

    CHECK_THROWS_AS(reduce_to_direction(g2, {1.0, 1.0}), InvalidArgument);
}

TEST_CASE("reduction of the 2-D Laplace kernel has unit mass", "[model_core]") {
    const Kernel1D k = reduce_to_direction(make_kernel(KernelSpec::laplace(1.0, 2)), {1.0, 0.0});
    CHECK(oracle::simpson([&](double s) { return k(s); }, -60.0, 60.0, 24000) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("A2 transfers to the directional marginals", "[model_core]") {
    const ModelParams p = ModelParams::make(3.0, 1.0, 1.0);
    const Kernel ap = make_kernel(KernelSpec::gaussian(1.2, 2));
    const Kernel am = make_kernel(KernelSpec::gaussian(1.0, 2));
    REQUIRE(check_assumptions(p, ap, am, 6.0).A2_kernel_domination);
    const Kernel1D kp = reduce_to_direction(ap, {1.0, 0.0});
    const Kernel1D km = reduce_to_direction(am, {1.0, 0.0});
    for (double s = -8.0; s <= 8.0; s += 0.25) CHECK(p.kappa_plus * kp(s) >= (p.kappa_plus - p.mortality) * km(s));
}

TEST_CASE("discretization", "[model_core]") {
    const Grid g = Grid::make(1, 20.0, 1024);
    const KernelWeights w = discretize(make_kernel(KernelSpec::gaussian(1.0)), g);
    CHECK(w.renormalized);
    CHECK(w.sum() == 1.0);

    // Tail mass beyond 20 of alpha / (1 + s^4), alpha = sqrt(2)/pi.
    const KernelWeights pw = discretize(make_kernel(KernelSpec::power_tail(4.0)), g);
    const double alpha = std::sqrt(2.0) / std::numbers::pi;
    const double tail = 2.0 * oracle::simpson([&](double v) {
        // s = 20 / v maps (20, inf) onto (0, 1).
        if (v == 0.0) return 0.0;
        const double s = 20.0 / v;
        return alpha / (1.0 + s * s * s * s) * 20.0 / (v * v);
    }, 0.0, 1.0, 20000);
    CHECK_FALSE(pw.renormalized);
    CHECK(pw.truncated_mass > 0.0);
    CHECK(pw.truncated_mass == Approx(tail).epsilon(1e-6));

    CHECK_THROWS_AS(discretize(make_kernel(KernelSpec::gaussian(g.spacing() / 10.0)), g), InvalidArgument);
    CHECK_THROWS_AS(discretize(make_kernel(KernelSpec::gaussian(8.0)), g), InvalidArgument);
}

TEST_CASE("grid rejects bad sizes", "[model_core]") {
    CHECK_THROWS_AS(Grid::make(1, 10.0, 1000), InvalidArgument);
    CHECK_THROWS_AS(Grid::make(3, 10.0, 64), InvalidArgument);
    CHECK_THROWS_AS(Grid::make(1, -1.0, 64), InvalidArgument);
}
