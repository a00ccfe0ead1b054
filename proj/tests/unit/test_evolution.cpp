#include "oracles.hpp"

#include "dnkpp/dnkpp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace dnkpp;
using Catch::Approx;

namespace {
const ModelParams canon = ModelParams::make(2.0, 1.0, 1.0);
const Kernel gauss = make_kernel(KernelSpec::gaussian(1.0));

std::unique_ptr<Model> canon_model(double L = 20.0, std::size_t N = 256,
                                   ConvolutionBackend b = ConvolutionBackend::spectral) {
    return make_model(canon, gauss, gauss, Grid::make(1, L, N), b);
}

Field bump(const Grid& g, double h = 0.5, double w = 2.0) {
    return Field::from_function(g, [&](double x) { return std::abs(x) < w ? h * std::pow(std::cos(0.5 * std::numbers::pi * x / w), 2) : 0.0; });
}

// Circular convolution written out by hand, independent of the library's direct backend.
std::vector<double> naive_circular(const std::vector<double>& w, const std::vector<double>& u) {
    const std::size_t n = u.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < n; ++j) s += static_cast<long double>(w[j]) * u[(i + n - j) % n];
        out[i] = static_cast<double>(s);
    }
    return out;
}
}  // namespace

TEST_CASE("rhs at constant states", "[evolution]") {
    auto m = canon_model();
    const Grid& g = m->grid();
    const double theta = canon.theta();
    for (double v : m->rhs(Field(g, 0.0)).values) CHECK(std::abs(v) <= 1e-14);
    for (double v : m->rhs(Field(g, theta)).values) CHECK(std::abs(v) <= 1e-14);
    const double expect = canon.kappa_minus * theta * theta / 4.0;
    for (double v : m->rhs(Field(g, theta / 2.0)).values) CHECK(v == Approx(expect).epsilon(1e-13));
}

TEST_CASE("spectral convolution matches a hand-written circular sum", "[evolution]") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (std::size_t n : {64u, 128u, 256u}) {
        const Grid g = Grid::make(1, 10.0, n);
        const KernelWeights w = discretize(gauss, g);
        Convolver conv({w});
        for (int t = 0; t < 20; ++t) {
            std::vector<double> u(n);
            for (double& v : u) v = U(gen);
            const auto a = conv.apply_one(u);
            const auto b = naive_circular(w.w, u);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                num = std::max(num, std::abs(a[i] - b[i]));
                den = std::max(den, std::abs(b[i]));
            }
            CHECK(num / den <= 1e-10);
        }
    }
}

TEST_CASE("2-D spectral convolution matches a hand-written sum", "[evolution]") {
    const Grid g = Grid::make(2, 8.0, 32);
    const KernelWeights w = discretize(make_kernel(KernelSpec::gaussian(1.0, 2)), g);
    Convolver conv({w});
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> u(g.size());
    for (double& v : u) v = U(gen);
    const auto a = conv.apply_one(u);
    const std::size_t n = g.points;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = 0; q < n; ++q) s += w.w[p * n + q] * u[((i + n - p) % n) * n + (j + n - q) % n];
            worst = std::max(worst, std::abs(s - a[i * n + j]));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("logistic_exact", "[evolution]") {
    CHECK(logistic_exact(canon, 1.0, 3.7) == Approx(1.0).epsilon(1e-15));
    for (double t : {0.0, 0.5, 2.0}) CHECK(logistic_exact(canon, 0.5, t) == Approx(1.0 / (1.0 + std::exp(-t))).epsilon(1e-14));
    const ModelParams zero = ModelParams::make(1.0, 1.0, 1.0, false);
    CHECK(logistic_exact(zero, 1.0, 1.0) == Approx(0.5).epsilon(1e-15));
    CHECK(logistic_exact(canon, 0.1, 60.0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("RK4 steps", "[evolution]") {
    auto m = canon_model();
    const Grid& g = m->grid();
    Integrator integ(*m, StepConfig{});
    Field th(g, canon.theta());
    integ.step(th);
    for (double v : th.values) CHECK(std::abs(v - canon.theta()) <= 1e-14);

    const Field u1 = integrate(*m, Field(g, 0.5), StepConfig{}, 1.0, 1000, {});
    CHECK(u1.time == Approx(1.0).epsilon(1e-14));
    for (double v : u1.values) CHECK(std::abs(v - 1.0 / (1.0 + std::exp(-1.0))) <= 1e-6);

    StepConfig big;
    big.dt = 0.2;
    CHECK_THROWS_AS(Integrator(*m, big), InvalidArgument);
}

TEST_CASE("exponential Euler is first order on the logistic problem", "[evolution]") {
    auto m = canon_model();
    StepConfig cfg;
    cfg.method = StepMethod::exponential_euler;
    double prev = 0.0;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        cfg.dt = dt;
        const Field u = integrate(*m, Field(m->grid(), 0.5), cfg, 1.0, 100000, {});
        const double err = std::abs(u[0] - 1.0 / (1.0 + std::exp(-1.0)));
        if (prev > 0.0) CHECK(prev / err == Approx(2.0).epsilon(0.05));
        prev = err;
    }
    CHECK(prev <= 2e-4);
}

TEST_CASE("whole-cell shifts commute with a step", "[evolution]") {
    for (auto backend : {ConvolutionBackend::direct, ConvolutionBackend::spectral}) {
        auto m = canon_model(10.0, 128, backend);
        std::mt19937_64 gen(2);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        Field u(m->grid());
        for (double& v : u.values) v = U(gen);
        Integrator integ(*m, StepConfig{});
        Field a = u, b = u.shifted(17);
        integ.step(a);
        integ.step(b);
        if (backend == ConvolutionBackend::direct) CHECK(a.shifted(17).values == b.values);
        else CHECK(sup_distance(a.shifted(17), b) <= 1e-14);
    }
}

TEST_CASE("non-finite states abort", "[evolution]") {
    auto m = canon_model();
    Field u(m->grid(), 0.5);
    u[3] = std::numeric_limits<double>::infinity();
    Integrator integ(*m, StepConfig{});
    CHECK_THROWS_AS(integ.step(u), NumericalBlowup);
}

TEST_CASE("strip, positivity and monotonicity along trajectories", "[evolution]") {
    auto m = canon_model(20.0, 256, ConvolutionBackend::direct);
    const Grid& g = m->grid();
    const Trajectory tr = simulate(*m, bump(g), StepConfig{}, 3.0, 100);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(tr.mins[k] >= -1e-9);
        CHECK(tr.maxs[k] <= canon.theta() + 1e-9);
        if (tr.times[k] > 0.0) CHECK(tr.mins[k] > 0.0);
        CHECK(tr.maxs[k] <= std::exp((canon.kappa_plus - canon.mortality) * tr.times[k]) * 0.5 + 1e-9);
    }
    for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.mins[k] >= tr.mins[k - 1]);

    // A non-increasing profile stays non-increasing (away from the periodic seam).
    auto m2 = canon_model(40.0, 512);
    const Field stepped = Field::from_function(m2->grid(), [](double x) { return 0.25 * std::erfc(x); });
    const Field u = integrate(*m2, stepped, StepConfig{}, 2.0, 1000, {});
    const std::size_t lo = m2->grid().nearest(-20.0), hi = m2->grid().nearest(20.0);
    for (std::size_t i = lo; i < hi; ++i) CHECK(u[i + 1] <= u[i] + 1e-10);
}

TEST_CASE("Picard scheme", "[evolution]") {
    auto m = canon_model(20.0, 128);
    const Grid& g = m->grid();
    const Field u0 = Field::from_function(g, [](double x) { return 0.5 * std::exp(-x * x); });
    const PicardResult pr = picard_solve(*m, u0, 1.0);
    const Field rk = integrate(*m, u0, StepConfig{}, 1.0, 1000, {});
    REQUIRE(pr.trajectory.times.back() == Approx(1.0).epsilon(1e-12));
    CHECK(sup_distance(pr.trajectory.back(), rk) <= 1e-5);
    CHECK(pr.alpha > 0.0);
    for (const auto& iv : pr.intervals) CHECK(iv.final_change <= 1e-10);

    const PicardResult z = picard_solve(*m, Field(g, 0.0), 1.0);
    CHECK(z.trajectory.back().sup_norm() == 0.0);

    const PicardResult c = picard_solve(*m, Field(g, 0.3), 2.0);
    for (std::size_t k = 0; k < c.trajectory.size(); ++k)
        CHECK(c.trajectory.snapshots[k][5] == Approx(logistic_exact(canon, 0.3, c.trajectory.times[k])).margin(1e-8));

    CHECK_THROWS_AS(picard_solve(*m, Field(g, -0.1), 1.0), InvalidArgument);

    PicardOptions vb;
    vb.sizing = PicardSizing::verbatim;
    const PicardResult v = picard_solve(*m, u0, 0.5, vb);
    const Field rk_half = integrate(*m, u0, StepConfig{}, 0.5, 500, {});
    CHECK(sup_distance(v.trajectory.back(), rk_half) <= 1e-5);
    REQUIRE(v.intervals.size() >= 2);
    for (std::size_t n = 1; n < v.intervals.size(); ++n)
        CHECK(v.intervals[n].mu - v.intervals[n - 1].mu == Approx(v.alpha * canon.kappa_plus / v.C).epsilon(1e-12));
}

TEST_CASE("truncated problem", "[evolution]") {
    const Grid g = Grid::make(1, 20.0, 1024);
    const double A1 = std::erf(1.0 / std::sqrt(2.0));
    const TruncatedProblem t1 = truncated_problem(canon, gauss, gauss, g, 1.0);
    CHECK(t1.A_plus == Approx(A1).epsilon(1e-10));
    CHECK(t1.theta_R == Approx((2.0 * A1 - 1.0) / A1).epsilon(1e-10));
    CHECK(t1.theta_R == Approx(0.5352).margin(1e-4));
    CHECK(t1.theta_R <= canon.theta());
    const TruncatedProblem t8 = truncated_problem(canon, gauss, gauss, g, 8.0);
    CHECK(t8.theta_R == Approx(canon.theta()).epsilon(1e-12));
    CHECK_THROWS_AS(truncated_problem(canon, gauss, gauss, g, 0.5), InvalidArgument);
    // erf(R / sqrt 2) = 1/2 at the minimal radius
    CHECK(std::erf(minimal_truncation_radius(canon, gauss) / std::sqrt(2.0)) == Approx(0.5).epsilon(1e-10));
}

TEST_CASE("truncated solution stays below the full one", "[evolution]") {
    const Grid g = Grid::make(1, 20.0, 256);
    TruncatedProblem tp = truncated_problem(canon, gauss, gauss, g, 2.0);
    auto full = make_model(canon, gauss, gauss, g);
    const double cap = std::min(tp.theta_R, tp.theta_R_discrete);
    const Field u0 = Field::from_function(g, [&](double x) { return cap * std::exp(-x * x); });
    const Trajectory a = simulate(*tp.model, u0, StepConfig{}, 3.0, 100);
    const Trajectory b = simulate(*full, u0, StepConfig{}, 3.0, 100);
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t i = 0; i < g.points; ++i) CHECK(a.snapshots[k][i] <= b.snapshots[k][i] + 1e-9);
}

TEST_CASE("uniform bound", "[evolution]") {
    CHECK(uniform_bound(canon, gauss, gauss, 0.5).strip);
    CHECK(uniform_bound(canon, gauss, gauss, 0.5).bound == canon.theta());
    const UniformBound ub = uniform_bound(canon, gauss, gauss, 5.0);
    CHECK_FALSE(ub.strip);
    REQUIRE(std::isfinite(ub.bound));
    auto m = canon_model();
    const Trajectory tr = simulate(*m, bump(m->grid(), 5.0), StepConfig{}, 5.0, 100);
    for (double v : tr.maxs) CHECK(v <= ub.bound);
    const ModelParams decay = ModelParams::make(1.0, 1.0, 2.0, false);
    const UniformBound d = uniform_bound(decay, gauss, gauss, 3.0);
    CHECK(d.decay_regime);
    CHECK(d.bound == 3.0);
}

TEST_CASE("Gaussian subsolution", "[evolution]") {
    auto m = canon_model(40.0, 1024);
    const std::vector<double> mean{0.0};
    const Field w = gaussian_subsolution(*m, mean, 0.1, 2.0, 2.0);
    CHECK(w.max() == Approx(0.1).epsilon(1e-12));
    CHECK(w[m->grid().nearest(0.0)] == Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(gaussian_subsolution(*m, mean, 0.1, 2.0, 0.1), CertificationFailed);
    const double small = evolution_operator_on_gaussian(*m, mean, 1e-9, 2.0, 0.1).sup_norm();
    CHECK(small <= 1e-8);
}
