#pragma once

// Scenario orchestration behind the command line: simulate, dispersion, wave,
// front and verify suites. Every run writes CSV artifacts and summary.txt.

#include "dnkpp/assumptions.hpp"
#include "dnkpp/bounds.hpp"
#include "dnkpp/config.hpp"
#include "dnkpp/convolution.hpp"
#include "dnkpp/dispersion.hpp"
#include "dnkpp/evolution.hpp"
#include "dnkpp/front_analysis.hpp"
#include "dnkpp/parallel.hpp"
#include "dnkpp/waves.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dnkpp {

/// 53-bit uniform doubles from mt19937_64 with a fixed mapping, so streams
/// are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

inline std::string fmt(double v, int digits = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

using Entries = std::vector<std::pair<std::string, std::string>>;

class Summary {
public:
    void add(const std::string& k, const std::string& v) { e_.emplace_back(k, v); }
    void add(const std::string& k, double v) { e_.emplace_back(k, fmt(v, 12)); }
    void add(const std::string& k, bool v) { e_.emplace_back(k, v ? "true" : "false"); }
    void add(const std::string& k, const char* v) { e_.emplace_back(k, v); }
    void add_int(const std::string& k, long long v) { e_.emplace_back(k, std::to_string(v)); }
    void append(const Entries& es) { e_.insert(e_.end(), es.begin(), es.end()); }
    const Entries& entries() const { return e_; }

    void write(const std::filesystem::path& file) const {
        std::ofstream out(file, std::ios::binary);
        if (!out) throw Error("cannot write " + file.string());
        for (const auto& [k, v] : e_) out << k << " = " << v << "\n";
    }

private:
    Entries e_;
};

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::string& header) : out_(file, std::ios::binary) {
        if (!out_) throw Error("cannot write " + file.string());
        out_ << header << "\n";
    }
    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!first) out_ << ',';
            out_ << fmt(v);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

struct RunContext {
    std::filesystem::path out_dir;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::ostream* log = &std::cout;
};

namespace detail {

inline double sample_radius(const Kernel& a, const Kernel& b) {
    return 4.0 * std::max(a.effective_scale(), b.effective_scale()) + std::max(a.offset_norm(), b.offset_norm());
}

inline Entries common_entries(const ScenarioConfig& c, const std::string& command, const RunContext& ctx) {
    Summary s;
    s.add("command", command);
    s.add("config", c.source);
    s.add("seed", std::to_string(ctx.seed));
    s.add("params.kappa_plus", c.params.kappa_plus);
    s.add("params.kappa_minus", c.params.kappa_minus);
    s.add("params.mortality", c.params.mortality);
    s.add("params.theta", c.params.theta());
    s.add("kernel.plus", c.kernel_plus.describe());
    s.add("kernel.minus", c.kernel_minus.describe());
    return s.entries();
}

inline std::vector<std::pair<double, double>> read_profile(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot open profile file " + file);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.find_first_of("0123456789") != 0 && line[0] != '-') continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("profile rows must be 's,psi'");
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    if (rows.size() < 2) throw InvalidArgument("profile file needs at least two rows");
    return rows;
}

inline double interp_profile(const std::vector<std::pair<double, double>>& rows, double s) {
    if (s <= rows.front().first) return rows.front().second;
    if (s >= rows.back().first) return rows.back().second;
    auto it = std::lower_bound(rows.begin(), rows.end(), s, [](const auto& r, double v) { return r.first < v; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double f = (s - a.first) / (b.first - a.first);
    return a.second + f * (b.second - a.second);
}

}  // namespace detail

/// Initial field described by the [initial] section.
inline Field build_initial(const ScenarioConfig& c, const Grid& g) {
    const double theta = c.params.theta();
    const InitialSpec& in = c.initial;
    const auto& xi = in.direction;
    switch (in.kind) {
        case InitialKind::constant:
            return Field(g, in.value);
        case InitialKind::bump: {
            const double h = in.height.value_or(0.5 * theta);
            auto bump = [&](double r) {
                return r < in.width ? h * std::pow(std::cos(0.5 * std::numbers::pi * r / in.width), 2) : 0.0;
            };
            if (g.dimension == 1) return Field::from_function(g, [&](double x) { return bump(std::abs(x - in.center[0])); });
            return Field::from_function(g, [&](double x, double y) { return bump(std::hypot(x - in.center[0], y - in.center[1])); });
        }
        case InitialKind::step: {
            if (g.dimension == 1) return Field::from_function(g, [&](double x) { return x * xi[0] < 0.0 ? theta : 0.0; });
            return Field::from_function(g, [&](double x, double y) { return x * xi[0] + y * xi[1] < 0.0 ? theta : 0.0; });
        }
        case InitialKind::profile_file:
        case InitialKind::shifted_profile: {
            const auto rows = detail::read_profile(in.file);
            Field u = g.dimension == 1
                          ? Field::from_function(g, [&](double x) { return detail::interp_profile(rows, x * xi[0]); })
                          : Field::from_function(g, [&](double x, double y) {
                                return detail::interp_profile(rows, x * xi[0] + y * xi[1]);
                            });
            if (in.kind == InitialKind::shifted_profile) u = u.shifted(in.shift_cells, 0);
            return u;
        }
    }
    throw InvalidArgument("unknown initial condition");
}

inline Kernel1D kernel_along(const KernelSpec& spec, const std::vector<double>& direction) {
    return reduce_to_direction(make_kernel(spec), direction);
}

inline void write_snapshot(CsvWriter& csv, const Field& u) {
    const Grid& g = u.grid;
    if (g.dimension == 1) {
        for (std::size_t i = 0; i < g.points; ++i) csv.row({u.time, g.coord(i), u[i]});
    } else {
        for (std::size_t i = 0; i < g.points; ++i)
            for (std::size_t j = 0; j < g.points; ++j) csv.row({u.time, g.coord(i), g.coord(j), u[i * g.points + j]});
    }
}

// ---------------------------------------------------------------- simulate

inline int run_simulate(const ScenarioConfig& c, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    Summary s;
    s.append(detail::common_entries(c, "simulate", ctx));
    const Kernel ap = make_kernel(c.kernel_plus);
    const Kernel am = make_kernel(c.kernel_minus);
    const AssumptionReport rep = check_assumptions(c.params, ap, am, detail::sample_radius(ap, am));
    s.append(rep.entries());
    auto model = make_model(c.params, ap, am, c.grid, c.backend);
    Field u0 = build_initial(c, c.grid);

    s.add_int("grid.dimension", c.grid.dimension);
    s.add("grid.half_length", c.grid.half_length);
    s.add_int("grid.points", static_cast<long long>(c.grid.points));
    s.add("grid.spacing", c.grid.spacing());
    s.add("integrator.dt", c.step.dt);
    s.add("integrator.method", std::string(to_string(c.step.method)));
    s.add("integrator.backend", c.backend == ConvolutionBackend::spectral ? "spectral" : "direct");
    s.add("integrator.noise_floor", c.step.noise_floor);
    s.add("integrator.horizon", c.horizon);
    s.add_int("integrator.stride", static_cast<long long>(c.stride));
    s.add("kernel.plus.under_resolved", model->a_plus().under_resolved_warning);
    s.add("kernel.plus.truncated_mass", model->a_plus().truncated_mass);

    const bool theta_pos = c.params.has_positive_theta();
    const double theta = c.params.theta();
    const bool strip_claim = theta_pos && rep.A1_kappa_gt_m && rep.A2_kernel_domination && u0.min() >= 0.0 &&
                             u0.max() <= theta;
    if (theta_pos) {
        const UniformBound ub = uniform_bound(c.params, ap, am, u0.sup_norm(), rep.A1_kappa_gt_m && rep.A2_kernel_domination);
        s.add("bound.uniform", ub.bound);
        s.add("bound.from_strip", ub.strip);
    }

    CsvWriter csv(ctx.out_dir / "snapshots.csv", c.grid.dimension == 1 ? "t,x1,u" : "t,x1,x2,u");
    double gmin = infinity, gmax = -infinity;
    std::size_t snaps = 0;
    const Field u = integrate(*model, u0, c.step, c.horizon, c.stride, [&](const Field& f) {
        write_snapshot(csv, f);
        gmin = std::min(gmin, f.min());
        gmax = std::max(gmax, f.max());
        ++snaps;
    });
    s.add_int("result.snapshots", static_cast<long long>(snaps));
    s.add("result.final_time", u.time);
    s.add("result.final_min", u.min());
    s.add("result.final_max", u.max());
    s.add("result.min", gmin);
    s.add("result.max", gmax);
    bool ok = true;
    if (strip_claim) {
        const bool strip_ok = gmin >= -1e-9 && gmax <= theta + 1e-9;
        s.add("check.strip", strip_ok);
        ok = ok && strip_ok;
    }
    s.add("status", ok ? "pass" : "fail");
    s.write(ctx.out_dir / "summary.txt");
    return ok ? 0 : 1;
}

// -------------------------------------------------------------- dispersion

inline int run_dispersion(const ScenarioConfig& c, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    Summary s;
    s.append(detail::common_entries(c, "dispersion", ctx));
    const Kernel ap = make_kernel(c.kernel_plus);
    const Kernel am = make_kernel(c.kernel_minus);
    s.append(check_assumptions(c.params, ap, am, detail::sample_radius(ap, am)).entries());
    const Kernel1D k = reduce_to_direction(ap, c.direction);
    const DispersionReport rep = minimize_G(c.params, k);

    std::string jstr;
    try {
        jstr = std::to_string(char_multiplicity(c.params, k, rep.c_star, rep));
    } catch (const Unsupported&) {
        jstr = "unsupported";
    }
    std::ostringstream dir;
    for (std::size_t i = 0; i < c.direction.size(); ++i) dir << (i ? "," : "") << fmt(c.direction[i], 12);
    s.add("dispersion.direction", dir.str());
    s.add("dispersion.lambda0", rep.lambda0);
    s.add("dispersion.lambda_star", rep.lambda_star);
    s.add("dispersion.c_star", rep.c_star);
    s.add("dispersion.class", std::string(to_string(rep.kernel_class)));
    s.add("dispersion.j_at_c_star", jstr);
    s.add("dispersion.m_xi", rep.m_xi);
    s.add("dispersion.t_xi_at_lambda0", rep.t_xi_at_lambda0);
    s.add("dispersion.interval_upper", rep.interval_I_xi.upper);
    s.add("dispersion.interval_upper_closed", rep.interval_I_xi.upper_closed);
    s.add("dispersion.laplace_at_lambda_star", rep.laplace_at_lambda_star);

    // Scan (lambda, G) up to the abscissa, or to 3 lambda* when it is infinite.
    const double top = std::isfinite(rep.lambda0) ? rep.lambda0 : 3.0 * rep.lambda_star;
    CsvWriter csv(ctx.out_dir / "dispersion.csv", "lambda,G");
    for (std::size_t i = 1; i <= c.scan_points; ++i) {
        const double lam = top * static_cast<double>(i) / static_cast<double>(c.scan_points);
        double G = infinity;
        try {
            G = dispersion_G(c.params, k, lam);
        } catch (const InvalidArgument&) {
            continue;
        }
        if (std::isfinite(G)) csv.row({lam, G});
    }
    if (ap.dimension() == 2) {
        const FrontSet f = front_set(c.params, ap, c.front_directions, ctx.threads);
        CsvWriter fcsv(ctx.out_dir / "front_set.csv", "xi1,xi2,c_star");
        for (std::size_t i = 0; i < f.directions.size(); ++i) fcsv.row({f.directions[i][0], f.directions[i][1], f.speeds[i]});
        s.add("front_set.min_speed", f.min_speed());
        s.add("front_set.max_speed", f.max_speed());
    }
    s.add("status", "pass");
    s.write(ctx.out_dir / "summary.txt");

    auto& log = *ctx.log;
    log << "lambda_star = " << fmt(rep.lambda_star, 12) << "\n"
        << "c_star = " << fmt(rep.c_star, 12) << "\n"
        << "class = " << to_string(rep.kernel_class) << "\n"
        << "j_at_c_star = " << jstr << "\n"
        << "m_xi = " << fmt(rep.m_xi, 12) << "\n";
    return 0;
}

// -------------------------------------------------------------------- wave

inline int run_wave(const ScenarioConfig& c, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    Summary s;
    s.append(detail::common_entries(c, "wave", ctx));
    const Kernel ap = make_kernel(c.kernel_plus);
    const Kernel am = make_kernel(c.kernel_minus);
    s.append(check_assumptions(c.params, ap, am, detail::sample_radius(ap, am)).entries());
    const Kernel1D kp = reduce_to_direction(ap, c.direction);
    const Kernel1D km = reduce_to_direction(am, c.direction);
    const DispersionReport rep = minimize_G(c.params, kp);
    const double speed = c.wave_speed.value_or(c.wave_speed_factor * rep.c_star);
    WaveOptions opt;
    opt.spacing = c.wave_spacing;
    const WaveProfile w = solve_profile(c.params, kp, km, speed, opt, c.wave_seed);
    const DecayFit f = fit_decay(w, w.tail_j);
    const DecayFit alt = fit_decay(w, w.tail_j == 1 ? 2 : 1);

    CsvWriter csv(ctx.out_dir / "profile.csv", "s,psi");
    for (std::size_t i = 0; i < w.psi.size(); ++i) csv.row({w.grid.coord(i), w.psi[i]});

    const bool ok = w.residual <= opt.residual_tolerance;
    s.add("wave.speed", speed);
    s.add("wave.c_star", rep.c_star);
    s.add("wave.points", static_cast<double>(w.grid.points));
    s.add("wave.spacing", w.grid.spacing);
    s.add("wave.residual", w.residual);
    s.add_int("wave.sweeps", w.sweeps);
    s.add_int("wave.newton_iterations", w.newton_iterations);
    s.add("wave.lambda_predicted", w.tail_lambda);
    s.add_int("wave.j", w.tail_j);
    s.add("wave.lambda_fit", f.lambda);
    s.add("wave.amplitude_fit", f.amplitude);
    s.add("wave.r_squared", f.r_squared);
    s.add("wave.r_squared_other_j", alt.r_squared);
    s.add("status", ok ? "pass" : "fail");
    s.write(ctx.out_dir / "summary.txt");
    *ctx.log << "lambda_fit = " << fmt(f.lambda, 12) << "\n"
             << "j = " << w.tail_j << "\n"
             << "r_squared = " << fmt(f.r_squared, 12) << "\n"
             << "lambda_predicted = " << fmt(w.tail_lambda, 12) << "\n";
    return ok ? 0 : 1;
}

// ------------------------------------------------------------------- front

inline int run_front(const ScenarioConfig& c, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    Summary s;
    s.append(detail::common_entries(c, "front", ctx));
    const Kernel ap = make_kernel(c.kernel_plus);
    const Kernel am = make_kernel(c.kernel_minus);
    s.append(check_assumptions(c.params, ap, am, detail::sample_radius(ap, am)).entries());
    const double theta = c.params.theta();
    auto model = make_model(c.params, ap, am, c.grid, c.backend);
    const Field u0 = build_initial(c, c.grid);
    const Trajectory traj = simulate(*model, u0, c.step, c.horizon, c.stride);

    const double level = c.level.value_or(0.5 * theta);
    const LevelTrace trace = track_level(traj, level, c.direction);
    {
        CsvWriter csv(ctx.out_dir / "trace.csv", "t,position");
        for (std::size_t i = 0; i < trace.size(); ++i) csv.row({trace.times[i], trace.positions[i]});
    }
    s.add("front.level", level);
    s.add("front.trace_points", static_cast<double>(trace.size()));
    s.add("front.trace_truncated", trace.truncated);
    bool ok = true;

    std::optional<std::pair<double, double>> window;
    if (c.window_begin || c.window_end)
        window = std::make_pair(c.window_begin.value_or(0.0), c.window_end.value_or(c.horizon));
    try {
        const SpeedEstimate se = estimate_speed(trace, window);
        s.add("front.c_hat", se.c_hat);
        s.add("front.c_hat_stderr", se.stderr_c);
        s.add("front.window_begin", se.window_begin);
        s.add("front.window_end", se.window_end);
    } catch (const InvalidArgument& e) {
        s.add("front.c_hat", std::string("unavailable: ") + e.what());
    }
    try {
        const AccelerationReport acc = acceleration_test(trace);
        s.add("front.acceleration", std::string(to_string(acc.verdict)));
    } catch (const InvalidArgument&) {
        s.add("front.acceleration", "unavailable");
    }

    const bool mollison = is_exp_decay(ap.tail_class());
    if (mollison) {
        const Kernel1D k = reduce_to_direction(ap, c.direction);
        const DispersionReport rep = minimize_G(c.params, k);
        s.add("front.c_star", rep.c_star);
        s.add("front.lambda_star", rep.lambda_star);
        const FrontSet fs = front_set(c.params, ap, c.front_directions, ctx.threads);
        const DeviationSeries dev = interior_convergence(traj, fs, c.shrink, theta);
        {
            CsvWriter csv(ctx.out_dir / "deviation.csv", "t,deviation");
            for (std::size_t i = 0; i < dev.times.size(); ++i) csv.row({dev.times[i], dev.deviation[i]});
        }
        s.add("front.shrink", c.shrink);
        if (!dev.deviation.empty()) s.add("front.final_deviation", dev.deviation.back());
        std::vector<double> lstar(fs.directions.size());
        parallel_for(fs.directions.size(), ctx.threads, [&](std::size_t i) {
            lstar[i] = minimize_G(c.params, reduce_to_direction(ap, fs.directions[i])).lambda_star;
        });
        try {
            const ExteriorDecay ex = exterior_decay(traj, fs, c.inflate, lstar, c.step.noise_floor);
            CsvWriter csv(ctx.out_dir / "exterior.csv", "t,sup_outside,bound");
            for (std::size_t i = 0; i < ex.times.size(); ++i) csv.row({ex.times[i], ex.sup_outside[i], ex.bound[i]});
            s.add("front.inflate", c.inflate);
            s.add("front.exterior_below_bound", ex.below_bound);
            s.add("front.exterior_rate", ex.nu_hat);
            ok = ok && ex.below_bound;
        } catch (const InvalidArgument& e) {
            s.add("front.exterior_below_bound", std::string("unavailable: ") + e.what());
        }
    }
    s.add("status", ok ? "pass" : "fail");
    s.write(ctx.out_dir / "summary.txt");
    return ok ? 0 : 1;
}

// ------------------------------------------------------------------ verify

struct SuiteResult {
    std::string name;
    bool passed = false;
    Entries entries;
};

namespace suites {

inline ModelParams canon() { return ModelParams::make(2.0, 1.0, 1.0); }

inline SuiteResult logistic(std::uint64_t) {
    SuiteResult r{"logistic", false, {}};
    const ModelParams p = canon();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    auto model = make_model(p, k, k, Grid::make(1, 20.0, 256));
    StepConfig cfg;
    double err = 0.0;
    integrate(*model, Field(model->grid(), 0.5), cfg, 10.0, 100, [&](const Field& f) {
        const double exact = 1.0 / (1.0 + std::exp(-f.time));
        for (double v : f.values) err = std::max(err, std::abs(v - exact));
    });
    r.passed = err <= 1e-6;
    r.entries.emplace_back("max_error", fmt(err, 6));
    return r;
}

inline SuiteResult convolution(std::uint64_t seed) {
    SuiteResult r{"convolution", false, {}};
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t n : {64u, 128u, 256u}) {
        const Grid g = Grid::make(1, 10.0, n);
        const KernelWeights w = discretize(make_kernel(KernelSpec::gaussian(1.0)), g);
        Convolver spec({w}, ConvolutionBackend::spectral);
        for (int t = 0; t < 20; ++t) {
            std::vector<double> u(n);
            for (double& v : u) v = rng.uniform(-1.0, 1.0);
            const std::vector<double> a = spec.apply_one(u, 0);
            std::vector<double> b;
            Convolver::direct(w, u, b);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                num = std::max(num, std::abs(a[i] - b[i]));
                den = std::max(den, std::abs(b[i]));
            }
            worst = std::max(worst, num / den);
        }
    }
    r.passed = worst <= 1e-10;
    r.entries.emplace_back("max_relative_difference", fmt(worst, 6));
    return r;
}

// Random ordered pairs u0 <= v0 <= theta under kernel domination.
inline SuiteResult comparison(std::uint64_t seed, unsigned threads, int pairs = 50) {
    SuiteResult r{"comparison", false, {}};
    const ModelParams p = canon();
    const double theta = p.theta();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    const Grid g = Grid::make(1, 20.0, 256);
    const AssumptionReport rep = check_assumptions(p, k, k, 6.0);
    Rng master(seed);
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(pairs));
    for (auto& s : seeds) s = master.next();
    std::vector<ComparisonReport> out(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        Rng rng(seeds[i]);
        auto model = make_model(p, k, k, g);
        Field v0(g), u0(g);
        // Smooth random fields: a few random bumps, clipped into the strip.
        const int bumps = 1 + static_cast<int>(rng.uniform() * 5.0);
        for (int b = 0; b < bumps; ++b) {
            const double c = rng.uniform(-15.0, 15.0);
            const double w = rng.uniform(0.5, 4.0);
            const double h = rng.uniform(0.1, 1.0) * theta;
            for (std::size_t j = 0; j < g.points; ++j) {
                const double x = g.coord(j);
                v0[j] = std::max(v0[j], h * std::exp(-(x - c) * (x - c) / (w * w)));
            }
        }
        const double frac = rng.uniform(0.2, 1.0);
        for (std::size_t j = 0; j < g.points; ++j) u0[j] = v0[j] * frac * rng.uniform(0.5, 1.0);
        out[i] = comparison_harness(*model, rep, u0, v0, 5.0, StepConfig{}, 50);
    });
    double viol = 0.0, strip = 0.0;
    for (const auto& o : out) {
        viol = std::max(viol, o.max_violation);
        strip = std::max(strip, o.strip_excess);
    }
    // Necessity mode: narrow competition kernel breaks domination near the origin.
    const Kernel narrow = make_kernel(KernelSpec::gaussian(0.2));
    const AssumptionReport bad = check_assumptions(p, k, narrow, 3.0);
    auto m2 = make_model(p, k, narrow, Grid::make(1, 10.0, 1024));
    const Field dented = Field::from_function(m2->grid(), [&](double x) {
        return theta * (1.0 - 0.9 * std::exp(-x * x / (0.1 * 0.1)));
    });
    const OvershootReport over = necessity_counterexample(*m2, dented, 0.5, StepConfig{}, 1);
    r.passed = viol <= 1e-9 && strip <= 1e-9 && !bad.A2_kernel_domination && over.max_excess > 1e-4;
    r.entries.emplace_back("pairs", std::to_string(pairs));
    r.entries.emplace_back("max_violation", fmt(viol, 6));
    r.entries.emplace_back("strip_excess", fmt(strip, 6));
    r.entries.emplace_back("counterexample_domination", bad.A2_kernel_domination ? "true" : "false");
    r.entries.emplace_back("counterexample_overshoot", fmt(over.max_excess, 6));
    r.entries.emplace_back("counterexample_time", fmt(over.time, 6));
    return r;
}

inline SuiteResult separation(std::uint64_t) {
    SuiteResult r{"separation", false, {}};
    const ModelParams p = canon();
    const double theta = p.theta();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    // Direct sums keep the far field positive; FFT roundoff would not.
    auto model = make_model(p, k, k, Grid::make(1, 10.0, 128), ConvolutionBackend::direct);
    StepConfig cfg;
    cfg.noise_floor = 0.0;
    const Field bump = Field::from_function(model->grid(), [&](double x) { return 0.5 * theta * std::exp(-x * x); });
    const SeparationReport a = separation_harness(*model, bump, Field(model->grid(), theta), 2.0, cfg);
    const SeparationReport b = separation_harness(*model, Field(model->grid(), 0.0), bump, 2.0, cfg);
    r.passed = a.min_gap_positive_t > 0.0 && b.min_gap_positive_t > 0.0;
    r.entries.emplace_back("gap_below_theta", fmt(a.min_gap_positive_t, 6));
    r.entries.emplace_back("gap_above_zero", fmt(b.min_gap_positive_t, 6));
    return r;
}

inline SuiteResult stability(std::uint64_t) {
    SuiteResult r{"stability", false, {}};
    const ModelParams p = canon();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    auto model = make_model(p, k, k, Grid::make(1, 20.0, 256));
    const StabilityReport below = stability_perturbation(*model, 0.1 * p.theta(), true, 10.0, StepConfig{});
    const StabilityReport above = stability_perturbation(*model, 0.1 * p.theta(), false, 10.0, StepConfig{});
    r.passed = below.eventually_below;
    r.entries.emplace_back("below_final_distance", fmt(below.distance.back(), 6));
    r.entries.emplace_back("below_final_envelope", fmt(below.envelope.back(), 6));
    r.entries.emplace_back("above_final_distance", fmt(above.distance.back(), 6));
    r.entries.emplace_back("above_claim", "none");
    return r;
}

inline SuiteResult truncation(std::uint64_t) {
    SuiteResult r{"truncation", false, {}};
    const ModelParams p = canon();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    const Grid g = Grid::make(1, 40.0, 1024);
    TruncatedProblem tp = truncated_problem(p, k, k, g, 2.0);
    auto full = make_model(p, k, k, g);
    const double cap = std::min(tp.theta_R, tp.theta_R_discrete);
    const Field u0 = Field::from_function(g, [&](double x) { return cap * std::exp(-x * x / 4.0); });
    std::vector<Field> a, b;
    integrate(*tp.model, u0, StepConfig{}, 10.0, 100, [&](const Field& f) { a.push_back(f); });
    integrate(*full, u0, StepConfig{}, 10.0, 100, [&](const Field& f) { b.push_back(f); });
    double excess = -infinity;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) excess = std::max(excess, a[i][j] - b[i][j]);
    r.passed = excess <= 1e-9;
    r.entries.emplace_back("theta_R", fmt(tp.theta_R, 12));
    r.entries.emplace_back("theta_R_discrete", fmt(tp.theta_R_discrete, 12));
    r.entries.emplace_back("max_excess", fmt(excess, 6));
    return r;
}

// Whole-cell translations commute with the flow (bitwise for the direct backend).
inline SuiteResult equivariance(std::uint64_t seed) {
    SuiteResult r{"equivariance", false, {}};
    const ModelParams p = canon();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    const Grid g = Grid::make(1, 10.0, 128);
    Rng rng(seed);
    Field u0(g);
    for (double& v : u0.values) v = rng.uniform(0.0, p.theta());
    const long shift = 1 + static_cast<long>(rng.uniform() * 60.0);
    bool bitwise = true;
    double spectral_diff = 0.0;
    for (auto backend : {ConvolutionBackend::direct, ConvolutionBackend::spectral}) {
        auto model = make_model(p, k, k, g, backend);
        StepConfig cfg;
        const Field a = integrate(*model, u0, cfg, 0.2, 1000, {}).shifted(shift);
        const Field b = integrate(*model, u0.shifted(shift), cfg, 0.2, 1000, {});
        if (backend == ConvolutionBackend::direct) {
            bitwise = a.values == b.values;
        } else {
            spectral_diff = sup_distance(a, b);
        }
    }
    r.passed = bitwise && spectral_diff <= 1e-12;
    r.entries.emplace_back("shift_cells", std::to_string(shift));
    r.entries.emplace_back("direct_bitwise", bitwise ? "true" : "false");
    r.entries.emplace_back("spectral_max_difference", fmt(spectral_diff, 6));
    return r;
}

inline SuiteResult subsolution(std::uint64_t) {
    SuiteResult r{"subsolution", false, {}};
    const ModelParams p = canon();
    const Kernel k = make_kernel(KernelSpec::gaussian(1.0));
    auto model = make_model(p, k, k, Grid::make(1, 40.0, 1024));
    const Field u0 = Field::from_function(model->grid(), [&](double x) { return 0.5 * std::exp(-x * x); });
    const Trajectory tr = simulate(*model, u0, StepConfig{}, 5.0, 100);
    const std::vector<double> mean{0.0};
    // F w <= 0 holds from T = 1 on for q = 0.1, alpha = 2 with these parameters.
    const SubsolutionOrdering o = subsolution_ordering(*model, tr, mean, 0.1, 2.0, 1e-12, 1.0);
    r.passed = o.start.has_value() && o.max_violation <= 1e-9 && o.max_operator <= 1e-12;
    r.entries.emplace_back("start_time", o.start ? fmt(tr.times[*o.start], 6) : "none");
    r.entries.emplace_back("max_violation", fmt(o.max_violation, 6));
    r.entries.emplace_back("max_operator", fmt(o.max_operator, 6));
    return r;
}

}  // namespace suites

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n{"logistic",   "convolution",  "comparison", "separation",
                                            "stability",  "truncation",   "equivariance", "subsolution"};
    return n;
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed, unsigned threads) {
    if (name == "logistic") return suites::logistic(seed);
    if (name == "convolution") return suites::convolution(seed);
    if (name == "comparison") return suites::comparison(seed, threads);
    if (name == "separation") return suites::separation(seed);
    if (name == "stability") return suites::stability(seed);
    if (name == "truncation") return suites::truncation(seed);
    if (name == "equivariance") return suites::equivariance(seed);
    if (name == "subsolution") return suites::subsolution(seed);
    std::string known;
    for (const auto& s : suite_names()) known += " " + s;
    throw InvalidArgument("unknown verify suite '" + name + "' (known: all" + known + ")");
}

inline int run_verify(const std::string& suite, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    std::vector<std::string> names = suite == "all" ? suite_names() : std::vector<std::string>{suite};
    if (suite != "all" && std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
        std::string known;
        for (const auto& n : suite_names()) known += " " + n;
        throw InvalidArgument("unknown verify suite '" + suite + "' (known: all" + known + ")");
    }
    std::vector<SuiteResult> results(names.size());
    // Suites are independent; the comparison suite also fans out internally.
    parallel_for(names.size(), ctx.threads, [&](std::size_t i) { results[i] = run_suite(names[i], ctx.seed, ctx.threads); });
    Summary s;
    s.add("command", "verify");
    s.add("suite", suite);
    s.add("seed", std::to_string(ctx.seed));
    bool ok = true;
    for (const auto& r : results) {
        s.add("verify." + r.name + ".passed", r.passed);
        for (const auto& [k, v] : r.entries) s.add("verify." + r.name + "." + k, v);
        *ctx.log << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "\n";
        ok = ok && r.passed;
    }
    s.add("status", ok ? "pass" : "fail");
    s.write(ctx.out_dir / "summary.txt");
    return ok ? 0 : 1;
}

}  // namespace dnkpp
