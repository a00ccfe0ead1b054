#pragma once

// Sectioned key = value scenario files.
//
//   # comment
//   [model]
//   kappa_plus = 2
//
// Unknown sections and keys are errors that carry the line number.

#include "dnkpp/errors.hpp"
#include "dnkpp/evolution.hpp"
#include "dnkpp/grid.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/params.hpp"
#include "dnkpp/waves.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dnkpp {

enum class InitialKind { constant, bump, step, profile_file, shifted_profile };

struct InitialSpec {
    InitialKind kind = InitialKind::bump;
    double value = 0.5;                 // constant
    std::vector<double> center;         // bump
    double width = 2.0;                 // bump half-width
    std::optional<double> height;       // bump height, default theta / 2
    std::vector<double> direction;      // step, profile
    std::string file;                   // profile CSV with columns s,psi
    long shift_cells = 0;               // shifted_profile
};

struct ScenarioConfig {
    std::string subcommand;
    ModelParams params;
    KernelSpec kernel_plus = KernelSpec::gaussian(1.0);
    KernelSpec kernel_minus = KernelSpec::gaussian(1.0);
    Grid grid{1, 20.0, 1024};
    StepConfig step;
    ConvolutionBackend backend = ConvolutionBackend::spectral;
    double horizon = 10.0;
    std::size_t stride = 100;
    InitialSpec initial;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    // dispersion
    std::vector<double> direction;      // default e_1
    std::size_t scan_points = 400;
    int front_directions = 64;

    // wave
    std::optional<double> wave_speed;
    double wave_speed_factor = 1.3;
    WaveSeed wave_seed = WaveSeed::supersolution;
    double wave_spacing = 0.1;

    // front
    std::optional<double> level;
    std::optional<double> window_begin, window_end;
    double shrink = 0.5;
    double inflate = 1.2;

    std::string source = "<defaults>";
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

class ConfigReader {
public:
    explicit ConfigReader(std::map<std::string, Section> s, std::map<std::string, int> lines)
        : sections_(std::move(s)), section_lines_(std::move(lines)) {}

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    bool has(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(k) != 0;
    }
    int line(const std::string& s, const std::string& k) const {
        return has(s, k) ? sections_.at(s).at(k).line : (section_lines_.count(s) ? section_lines_.at(s) : 0);
    }

    std::optional<std::string> str(const std::string& s, const std::string& k) {
        auto it = sections_.find(s);
        if (it == sections_.end()) return std::nullopt;
        auto e = it->second.find(k);
        if (e == it->second.end()) return std::nullopt;
        e->second.used = true;
        return e->second.value;
    }

    std::optional<double> num(const std::string& s, const std::string& k) {
        auto v = str(s, k);
        if (!v) return std::nullopt;
        return parse_double(*v, line(s, k), s + "." + k);
    }

    std::optional<long long> integer(const std::string& s, const std::string& k) {
        auto v = str(s, k);
        if (!v) return std::nullopt;
        long long out = 0;
        const auto* first = v->data();
        const auto* last = v->data() + v->size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last)
            throw ConfigError("expected an integer for " + s + "." + k + ", got '" + *v + "'", line(s, k));
        return out;
    }

    std::optional<bool> boolean(const std::string& s, const std::string& k) {
        auto v = str(s, k);
        if (!v) return std::nullopt;
        const std::string l = lower(*v);
        if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
        if (l == "false" || l == "no" || l == "0" || l == "off") return false;
        throw ConfigError("expected true/false for " + s + "." + k + ", got '" + *v + "'", line(s, k));
    }

    std::optional<std::vector<double>> vec(const std::string& s, const std::string& k) {
        auto v = str(s, k);
        if (!v) return std::nullopt;
        std::vector<double> out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line(s, k), s + "." + k));
        if (out.empty()) throw ConfigError("empty list for " + s + "." + k, line(s, k));
        return out;
    }

    /// Throws on the first key that no accessor consumed.
    void reject_unused() const {
        const Entry* worst = nullptr;
        std::string name;
        for (const auto& [sec, entries] : sections_)
            for (const auto& [k, e] : entries)
                if (!e.used && (!worst || e.line < worst->line)) {
                    worst = &e;
                    name = sec + "." + k;
                }
        if (worst) throw ConfigError("unknown key '" + name + "'", worst->line);
    }

    static double parse_double(const std::string& v, int line, const std::string& key) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("expected a number for " + key + ", got '" + v + "'", line);
        }
    }

private:
    std::map<std::string, Section> sections_;
    std::map<std::string, int> section_lines_;
};

inline const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"model",  "kernel.plus", "kernel.minus", "grid",   "integrator", "initial",
                                         "output", "dispersion",  "wave",         "front"};
    return s;
}

inline ConfigReader read_sections(const std::string& text) {
    std::map<std::string, Section> sections;
    std::map<std::string, int> section_lines;
    std::string current;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", lineno);
            current = lower(trim(line.substr(1, line.size() - 2)));
            if (!known_sections().count(current)) throw ConfigError("unknown section [" + current + "]", lineno);
            if (section_lines.count(current)) throw ConfigError("duplicate section [" + current + "]", lineno);
            section_lines[current] = lineno;
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
        if (current.empty()) throw ConfigError("key outside of any section", lineno);
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno);
        if (sections[current].count(key)) throw ConfigError("duplicate key '" + current + "." + key + "'", lineno);
        sections[current][key] = Entry{value, lineno, false};
    }
    return ConfigReader(std::move(sections), std::move(section_lines));
}

inline KernelSpec read_kernel(ConfigReader& r, const std::string& sec, int dim) {
    const auto fam_name = r.str(sec, "family");
    if (!fam_name) throw ConfigError("[" + sec + "] is missing the key 'family'", r.line(sec, "family"));
    const auto fam = family_from_string(*fam_name);
    if (!fam) throw ConfigError("unknown kernel family '" + *fam_name + "'", r.line(sec, "family"));
    std::vector<std::string> needed;
    switch (*fam) {
        case KernelFamily::gaussian: needed = {"sigma"}; break;
        case KernelFamily::laplace: needed = {"mu"}; break;
        case KernelFamily::exp_poly: needed = {"p", "q", "mu"}; break;
        case KernelFamily::compact_uniform: needed = {"radius"}; break;
        case KernelFamily::power_tail: needed = {"q"}; break;
    }
    std::vector<std::string> missing;
    for (const auto& k : needed)
        if (!r.has(sec, k)) missing.push_back(k);
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
        throw ConfigError("kernel family " + std::string(to_string(*fam)) + " in [" + sec + "] is missing: " + list,
                          r.line(sec, "family"));
    }
    KernelSpec s;
    s.family = *fam;
    s.dimension = dim;
    if (auto v = r.num(sec, "sigma")) s.sigma = *v;
    if (auto v = r.num(sec, "mu")) s.mu = *v;
    if (auto v = r.num(sec, "p")) s.p = *v;
    if (auto v = r.num(sec, "q")) s.q = *v;
    if (auto v = r.num(sec, "radius")) s.radius = *v;
    if (auto v = r.vec(sec, "offset")) {
        if (static_cast<int>(v->size()) != dim)
            throw ConfigError("kernel offset needs " + std::to_string(dim) + " components", r.line(sec, "offset"));
        s.offset = *v;
    }
    // Keys that belong to other families are still consumed but flagged.
    for (const char* k : {"sigma", "mu", "p", "q", "radius"}) {
        if (r.has(sec, k) && std::find(needed.begin(), needed.end(), k) == needed.end())
            throw ConfigError("key '" + std::string(k) + "' does not apply to kernel family " + std::string(to_string(*fam)),
                              r.line(sec, k));
    }
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), r.line(sec, "family"));
    }
    return s;
}

inline std::vector<double> unit(std::vector<double> v, int line, const std::string& what) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (!(n > 0.0)) throw ConfigError(what + " must be nonzero", line);
    for (double& x : v) x /= n;
    return v;
}

}  // namespace detail

/// Parses and validates a scenario file. `base_dir` resolves relative profile paths.
inline ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
    auto r = detail::read_sections(text);
    ScenarioConfig c;

    if (auto v = r.num("model", "kappa_plus")) c.params.kappa_plus = *v;
    if (auto v = r.num("model", "kappa_minus")) c.params.kappa_minus = *v;
    if (auto v = r.num("model", "mortality")) c.params.mortality = *v;
    try {
        c.params.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), r.line("model", "kappa_plus"));
    }

    if (auto v = r.integer("grid", "dimension")) {
        if (*v < 1 || *v > 2) throw ConfigError("grid dimension must be 1 or 2 (got " + std::to_string(*v) + ")", r.line("grid", "dimension"));
        c.grid.dimension = static_cast<int>(*v);
    }
    if (auto v = r.num("grid", "half_length")) c.grid.half_length = *v;
    if (auto v = r.integer("grid", "points")) {
        if (*v < 16 || (*v & (*v - 1)) != 0)
            throw ConfigError("grid points must be a power of two >= 16 (got " + std::to_string(*v) + ")", r.line("grid", "points"));
        c.grid.points = static_cast<std::size_t>(*v);
    }
    try {
        c.grid.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), r.line("grid", "half_length"));
    }
    const int d = c.grid.dimension;

    if (r.has_section("kernel.plus")) c.kernel_plus = detail::read_kernel(r, "kernel.plus", d);
    else c.kernel_plus = KernelSpec::gaussian(1.0, d);
    if (r.has_section("kernel.minus")) c.kernel_minus = detail::read_kernel(r, "kernel.minus", d);
    else c.kernel_minus = c.kernel_plus;

    if (auto v = r.num("integrator", "dt")) c.step.dt = *v;
    if (auto v = r.str("integrator", "method")) {
        const std::string m = detail::lower(*v);
        if (m == "rk4") c.step.method = StepMethod::rk4;
        else if (m == "exponential_euler" || m == "exponentialeuler") c.step.method = StepMethod::exponential_euler;
        else throw ConfigError("unknown integrator method '" + *v + "' (rk4 | exponential_euler)", r.line("integrator", "method"));
    }
    if (auto v = r.boolean("integrator", "clip_negative")) c.step.clip_negative = *v;
    c.step.noise_floor = 1e-14 * std::max(1.0, std::abs(c.params.theta()));
    if (auto v = r.num("integrator", "noise_floor")) c.step.noise_floor = *v;
    if (auto v = r.str("integrator", "backend")) {
        const std::string m = detail::lower(*v);
        if (m == "spectral") c.backend = ConvolutionBackend::spectral;
        else if (m == "direct") c.backend = ConvolutionBackend::direct;
        else throw ConfigError("unknown backend '" + *v + "' (spectral | direct)", r.line("integrator", "backend"));
    }
    if (auto v = r.num("integrator", "horizon")) {
        if (!(*v >= 0.0)) throw ConfigError("horizon must be nonnegative", r.line("integrator", "horizon"));
        c.horizon = *v;
    }
    if (auto v = r.integer("integrator", "stride")) {
        if (*v <= 0) throw ConfigError("stride must be positive", r.line("integrator", "stride"));
        c.stride = static_cast<std::size_t>(*v);
    }

    if (auto v = r.str("initial", "type")) {
        const std::string t = detail::lower(*v);
        const int ln = r.line("initial", "type");
        if (t == "constant") c.initial.kind = InitialKind::constant;
        else if (t == "bump") c.initial.kind = InitialKind::bump;
        else if (t == "step") c.initial.kind = InitialKind::step;
        else if (t == "profile" || t == "profile_file") c.initial.kind = InitialKind::profile_file;
        else if (t == "shifted_profile") c.initial.kind = InitialKind::shifted_profile;
        else throw ConfigError("unknown initial type '" + *v + "'", ln);
    }
    if (auto v = r.num("initial", "value")) c.initial.value = *v;
    if (auto v = r.vec("initial", "center")) {
        if (static_cast<int>(v->size()) != d) throw ConfigError("initial.center needs " + std::to_string(d) + " components", r.line("initial", "center"));
        c.initial.center = *v;
    }
    if (auto v = r.num("initial", "width")) c.initial.width = *v;
    if (auto v = r.num("initial", "height")) c.initial.height = *v;
    if (auto v = r.vec("initial", "direction")) {
        if (static_cast<int>(v->size()) != d) throw ConfigError("initial.direction needs " + std::to_string(d) + " components", r.line("initial", "direction"));
        c.initial.direction = detail::unit(*v, r.line("initial", "direction"), "initial.direction");
    }
    if (auto v = r.str("initial", "file")) {
        std::filesystem::path pth(*v);
        if (pth.is_relative() && !base_dir.empty()) pth = base_dir / pth;
        if (!std::filesystem::exists(pth)) throw ConfigError("profile file '" + pth.string() + "' does not exist", r.line("initial", "file"));
        c.initial.file = pth.string();
    }
    if (auto v = r.integer("initial", "shift_cells")) c.initial.shift_cells = static_cast<long>(*v);
    if (c.initial.center.empty()) c.initial.center.assign(static_cast<std::size_t>(d), 0.0);
    if (c.initial.direction.empty()) {
        c.initial.direction.assign(static_cast<std::size_t>(d), 0.0);
        c.initial.direction[0] = 1.0;
    }
    if ((c.initial.kind == InitialKind::profile_file || c.initial.kind == InitialKind::shifted_profile) && c.initial.file.empty())
        throw ConfigError("initial type " + std::string(c.initial.kind == InitialKind::profile_file ? "profile" : "shifted_profile") +
                              " needs the key 'file'",
                          r.line("initial", "type"));
    if (!(c.initial.width > 0.0)) throw ConfigError("initial.width must be positive", r.line("initial", "width"));

    if (auto v = r.str("output", "directory")) c.output_dir = *v;
    if (auto v = r.integer("output", "seed")) c.seed = static_cast<std::uint64_t>(*v);

    if (auto v = r.vec("dispersion", "direction")) {
        if (static_cast<int>(v->size()) != d) throw ConfigError("dispersion.direction needs " + std::to_string(d) + " components", r.line("dispersion", "direction"));
        c.direction = detail::unit(*v, r.line("dispersion", "direction"), "dispersion.direction");
    }
    if (auto v = r.integer("dispersion", "scan_points")) {
        if (*v < 2) throw ConfigError("scan_points must be at least 2", r.line("dispersion", "scan_points"));
        c.scan_points = static_cast<std::size_t>(*v);
    }
    if (auto v = r.integer("dispersion", "front_directions")) c.front_directions = static_cast<int>(*v);
    if (c.direction.empty()) {
        c.direction.assign(static_cast<std::size_t>(d), 0.0);
        c.direction[0] = 1.0;
    }

    if (auto v = r.num("wave", "speed")) c.wave_speed = *v;
    if (auto v = r.num("wave", "speed_factor")) c.wave_speed_factor = *v;
    if (c.wave_speed && r.has("wave", "speed_factor"))
        throw ConfigError("give either wave.speed or wave.speed_factor, not both", r.line("wave", "speed_factor"));
    if (auto v = r.str("wave", "seed")) {
        const std::string s = detail::lower(*v);
        if (s == "supersolution") c.wave_seed = WaveSeed::supersolution;
        else if (s == "smoothed_step" || s == "step") c.wave_seed = WaveSeed::smoothed_step;
        else throw ConfigError("unknown wave seed '" + *v + "' (supersolution | smoothed_step)", r.line("wave", "seed"));
    }
    if (auto v = r.num("wave", "spacing")) c.wave_spacing = *v;

    if (auto v = r.num("front", "level")) c.level = *v;
    if (auto v = r.num("front", "window_begin")) c.window_begin = *v;
    if (auto v = r.num("front", "window_end")) c.window_end = *v;
    if (auto v = r.num("front", "shrink")) c.shrink = *v;
    if (auto v = r.num("front", "inflate")) c.inflate = *v;

    r.reject_unused();
    return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    ScenarioConfig c = parse_config(ss.str(), path.parent_path());
    c.source = path.string();
    return c;
}

}  // namespace dnkpp
