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

Trajectory synthetic(const Grid& g, const std::vector<double>& times, const std::function<double(double, double)>& f) {
    Trajectory tr;
    for (double t : times) tr.record(Field::from_function(g, [&](double x) { return f(x, t); }, t));
    return tr;
}

LevelTrace trace_of(const std::vector<double>& t, const std::vector<double>& x) {
    LevelTrace tr;
    tr.level = 0.5;
    tr.direction = {1.0};
    tr.times = t;
    tr.positions = x;
    return tr;
}

Field compact_bump(const Grid& g, double height, double width) {
    return Field::from_function(g, [&](double x) {
        const double r = x / width;
        return r * r < 1.0 ? height * (1.0 - r * r) : 0.0;
    });
}
}  // namespace

TEST_CASE("level tracking on a moving profile", "[front_analysis]") {
    const Grid g = Grid::make(1, 50.0, 1024);
    const double c = 2.5;
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(0.5 * k);
    const Trajectory traj = synthetic(g, times, [&](double x, double t) { return 1.0 / (1.0 + std::exp(x - c * t)); });
    const LevelTrace tr = track_level(traj, 0.5, {1.0});
    REQUIRE(tr.size() == times.size());
    CHECK_FALSE(tr.truncated);
    for (std::size_t k = 1; k < tr.size(); ++k) CHECK(std::abs(tr.positions[k] - tr.positions[k - 1] - c * 0.5) <= g.spacing());
    CHECK(std::abs(tr.positions.front()) <= g.spacing());
}

TEST_CASE("level tracking edge cases", "[front_analysis]") {
    const Grid g = Grid::make(1, 20.0, 256);
    const Trajectory flat = synthetic(g, {0.0, 1.0}, [](double, double) { return 0.5; });
    const LevelTrace a = track_level(flat, 0.5, {1.0});
    REQUIRE(a.size() == 2);
    // Direct oracle: last point of the ray x >= 0.
    double last = 0.0;
    for (std::size_t i = 0; i < g.points; ++i) last = std::max(last, g.coord(i));
    CHECK(a.positions[0] == Approx(last).margin(1e-12));

    const Trajectory none = synthetic(g, {0.0, 1.0}, [](double, double) { return 0.1; });
    CHECK(track_level(none, 0.5, {1.0}).size() == 0);

    // Bump of half width 3: level 0.5 of 1 - (x/3)^2 sits at 3 / sqrt(2).
    const Field b = compact_bump(g, 1.0, 3.0);
    double scan = 0.0;
    for (std::size_t i = 0; i + 1 < g.points; ++i)
        if (b[i] >= 0.5 && b[i + 1] < 0.5 && g.coord(i) > 0.0)
            scan = g.coord(i) + (b[i] - 0.5) / (b[i] - b[i + 1]) * g.spacing();
    const auto pos = level_position(b, 0.5, std::vector<double>{1.0});
    REQUIRE(pos.has_value());
    CHECK(*pos == Approx(scan).margin(1e-12));
    CHECK(*pos == Approx(3.0 / std::sqrt(2.0)).margin(g.spacing()));
    const auto left = level_position(b, 0.5, std::vector<double>{-1.0});
    REQUIRE(left.has_value());
    CHECK(*left == Approx(3.0 / std::sqrt(2.0)).margin(g.spacing()));

    CHECK_THROWS_AS(track_level(flat, 0.5, {2.0}), InvalidArgument);
    CHECK_THROWS_AS(track_level(flat, 0.0, {1.0}), InvalidArgument);
}

TEST_CASE("trace stops near the domain edge", "[front_analysis]") {
    const Grid g = Grid::make(1, 20.0, 256);
    const Trajectory traj = synthetic(g, {0.0, 1.0, 2.0, 3.0}, [](double x, double t) { return 1.0 / (1.0 + std::exp(x - 7.0 * t)); });
    const LevelTrace tr = track_level(traj, 0.5, {1.0});
    CHECK(tr.truncated);
    CHECK(tr.size() == 3);
}

TEST_CASE("speed of a noisy synthetic trace", "[front_analysis]") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> t, x;
    for (int k = 0; k <= 200; ++k) {
        t.push_back(0.5 * k);
        x.push_back(2.19 * t.back() + noise(gen));
    }
    const SpeedEstimate s = estimate_speed(trace_of(t, x));
    CHECK(s.c_hat == Approx(2.19).margin(0.01));
    CHECK(s.stderr_c < 1e-3);
    CHECK(s.window_begin == Approx(25.0));
    CHECK(s.window_end == 100.0);
    const SpeedEstimate w = estimate_speed(trace_of(t, x), std::make_pair(40.0, 80.0));
    CHECK(w.points == 81);
    CHECK(w.c_hat == Approx(2.19).margin(0.01));

    CHECK_THROWS_AS(estimate_speed(trace_of({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4})), InvalidArgument);
    CHECK_THROWS_AS(estimate_speed(trace_of(t, x), std::make_pair(40.0, 42.0)), InvalidArgument);
}

TEST_CASE("acceleration verdicts on synthetic traces", "[front_analysis]") {
    std::vector<double> t, sq, lin;
    for (int k = 1; k <= 100; ++k) {
        t.push_back(0.2 * k);
        sq.push_back(t.back() * t.back());
        lin.push_back(2.0 * t.back() + 0.1);
    }
    const AccelerationReport a = acceleration_test(trace_of(t, sq));
    CHECK(a.verdict == AccelerationVerdict::superlinear);
    for (double r : a.ratio) CHECK(r == Approx(4.0).epsilon(1e-2));
    CHECK(acceleration_test(trace_of(t, lin)).verdict == AccelerationVerdict::ballistic_consistent);
    // x = t^1.1: ratio 2^1.1 = 2.14 sits between the bands.
    std::vector<double> mid;
    for (double v : t) mid.push_back(std::pow(v, 1.1));
    CHECK(acceleration_test(trace_of(t, mid)).verdict == AccelerationVerdict::inconclusive);
    CHECK_THROWS_AS(acceleration_test(trace_of({1, 2, 3}, {1, 2, 3})), InvalidArgument);
}

TEST_CASE("interior convergence of constant data", "[front_analysis]") {
    const Grid g = Grid::make(1, 20.0, 256);
    auto model = make_model(canon, gauss, gauss, g);
    const FrontSet fs = front_set(canon, gauss);
    const Trajectory at_theta = simulate(*model, Field(g, canon.theta()), StepConfig{}, 2.0, 100);
    const DeviationSeries d = interior_convergence(at_theta, fs, 0.5, canon.theta());
    REQUIRE_FALSE(d.times.empty());
    for (double v : d.deviation) CHECK(std::abs(v) <= 1e-14);

    const Trajectory half = simulate(*model, Field(g, 0.3), StepConfig{}, 3.0, 100);
    const DeviationSeries h = interior_convergence(half, fs, 0.5, canon.theta());
    REQUIRE_FALSE(h.times.empty());
    for (std::size_t k = 0; k < h.times.size(); ++k)
        CHECK(h.deviation[k] == Approx(canon.theta() - logistic_exact(canon, 0.3, h.times[k])).margin(1e-9));

    // 0.5 t c* reaches the edge of [-20, 20) once t > 18.
    const Trajectory longer = simulate(*model, Field(g, 0.3), StepConfig{}, 20.0, 1000);
    CHECK(interior_convergence(longer, fs, 0.5, canon.theta()).truncated);
    CHECK_THROWS_AS(interior_convergence(half, fs, 1.0, canon.theta()), InvalidArgument);
}

TEST_CASE("exterior decay and weighted growth", "[front_analysis]") {
    const Grid g = Grid::make(1, 60.0, 1024);
    auto model = make_model(canon, gauss, gauss, g);
    StepConfig cfg;
    cfg.dt = 2e-3;
    cfg.noise_floor = 1e-14;
    const FrontSet fs = front_set(canon, gauss);
    const double ls = minimize_G(canon, as_1d(gauss)).lambda_star;
    const std::vector<double> lstar{ls, ls};

    const Trajectory zero = simulate(*model, Field(g, 0.0), cfg, 2.0, 100);
    const ExteriorDecay z = exterior_decay(zero, fs, 1.2, lstar, cfg.noise_floor);
    for (double v : z.sup_outside) CHECK(v == 0.0);

    const Trajectory traj = simulate(*model, compact_bump(g, 0.5, 2.0), cfg, 10.0, 250);
    const ExteriorDecay e = exterior_decay(traj, fs, 1.2, lstar, cfg.noise_floor);
    CHECK(e.below_bound);
    CHECK(e.delta == Approx(0.2 * fs.min_speed()));
    REQUIRE(e.times.size() == e.bound.size());
    // Oracle for the bound at the first positive snapshot: ||u0||_{lambda*} = max 0.5 (1 - x^2/4) e^{lambda* x}.
    const double n0 = oracle::scan_min([&](double x) { return -0.5 * (1.0 - x * x / 4.0) * std::exp(ls * x); }, 0.0, 2.0).second;
    const double b0 = -n0 * std::exp(-ls * e.delta * e.times.front());
    CHECK(e.bound.front() <= b0 * (1.0 + 1e-12));
    CHECK(e.bound.front() >= 0.99 * b0);

    for (double lam : {0.3, 0.6, ls}) {
        const WeightedGrowth w = weighted_growth(traj, canon, as_1d(gauss), lam, std::vector<double>{1.0}, cfg.noise_floor);
        CHECK(w.within);
        CHECK(w.p == Approx(2.0 * std::exp(0.5 * lam * lam) - 1.0).epsilon(1e-9));
    }

    // A Laplace tail e^{-0.1 |x|} is fatter than e^{-lambda* |x|}.
    const Trajectory fat = synthetic(g, {0.0, 1.0}, [](double x, double) { return 0.5 * std::exp(-0.1 * std::abs(x)); });
    CHECK_THROWS_AS(exterior_decay(fat, fs, 1.2, lstar), InvalidArgument);
    CHECK_THROWS_AS(exterior_decay(traj, fs, 1.0, lstar), InvalidArgument);
}

TEST_CASE("comparison harness", "[front_analysis]") {
    const Grid g = Grid::make(1, 20.0, 256);
    auto model = make_model(canon, gauss, gauss, g);
    const AssumptionReport ok = check_assumptions(canon, gauss, gauss, 6.0);
    const Field u0 = compact_bump(g, 0.8, 3.0);
    const ComparisonReport same = comparison_harness(*model, ok, u0, u0, 2.0, StepConfig{});
    CHECK(same.max_violation == 0.0);
    CHECK(same.strip_excess <= 1e-9);
    CHECK_FALSE(same.envelope_checked);

    const Field low(g, 0.2);
    const ComparisonReport env = comparison_harness(*model, ok, low, Field(g, canon.theta()), 2.0, StepConfig{});
    CHECK(env.envelope_checked);
    CHECK(env.envelope_violation <= 1e-9);
    CHECK(env.max_violation <= 0.0);

    CHECK_THROWS_AS(comparison_harness(*model, ok, Field(g, canon.theta()), low, 1.0, StepConfig{}), InvalidArgument);
    const AssumptionReport bad = check_assumptions(canon, gauss, make_kernel(KernelSpec::gaussian(0.2)), 6.0);
    CHECK_THROWS_AS(comparison_harness(*model, bad, low, low, 1.0, StepConfig{}), InvalidArgument);
}

TEST_CASE("separation harness", "[front_analysis]") {
    auto model = make_model(canon, gauss, gauss, Grid::make(1, 10.0, 128), ConvolutionBackend::direct);
    const Grid& g = model->grid();
    const Field bump = Field::from_function(g, [](double x) { return 0.5 * std::exp(-x * x); });
    const SeparationReport same = separation_harness(*model, bump, bump, 1.0, StepConfig{});
    CHECK(same.min_gap_final == 0.0);
    CHECK(same.min_gap_positive_t == 0.0);
    CHECK(separation_harness(*model, bump, Field(g, canon.theta()), 1.0, StepConfig{}).min_gap_positive_t > 0.0);
    CHECK(separation_harness(*model, Field(g, 0.0), bump, 1.0, StepConfig{}).min_gap_positive_t > 0.0);
    CHECK_THROWS_AS(separation_harness(*model, Field(g, 1.0), bump, 1.0, StepConfig{}), InvalidArgument);
}

TEST_CASE("stability of theta", "[front_analysis]") {
    auto model = make_model(canon, gauss, gauss, Grid::make(1, 20.0, 256));
    const StabilityReport zero = stability_perturbation(*model, 0.0, true, 2.0, StepConfig{});
    for (double d : zero.distance) CHECK(d == 0.0);

    const StabilityReport below = stability_perturbation(*model, 0.1, true, 10.0, StepConfig{});
    CHECK(below.claim);
    CHECK(below.eventually_below);
    CHECK(below.distance.back() < below.distance.front());
    // Envelope with beta = 0.9: theta - 0.9 / (0.9 + 0.1 e^{-t}).
    for (std::size_t k = 0; k < below.times.size(); ++k)
        CHECK(below.envelope[k] == Approx(1.0 - 0.9 / (0.9 + 0.1 * std::exp(-below.times[k]))).margin(1e-12));

    const StabilityReport above = stability_perturbation(*model, 0.1, false, 5.0, StepConfig{});
    CHECK_FALSE(above.claim);
    CHECK(above.envelope.empty());
    CHECK_THROWS_AS(stability_perturbation(*model, 1.0, true, 1.0, StepConfig{}), InvalidArgument);
}

TEST_CASE("scenarios keep their order", "[front_analysis]") {
    std::vector<std::function<double()>> jobs;
    for (int i = 0; i < 12; ++i)
        jobs.emplace_back([i] {
            auto model = make_model(canon, gauss, gauss, Grid::make(1, 10.0, 64));
            const Field u = integrate(*model, Field(model->grid(), 0.05 * (i + 1)), StepConfig{}, 0.5, 1000, {});
            return u.max();
        });
    const auto one = run_scenarios(jobs, 1);
    const auto four = run_scenarios(jobs, 4);
    REQUIRE(one.size() == 12);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i] == four[i]);
        CHECK(one[i] == Approx(logistic_exact(canon, 0.05 * static_cast<double>(i + 1), 0.5)).margin(1e-8));
    }
}
