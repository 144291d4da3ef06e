#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elsim/presets.hpp"
#include "elsim/solver.hpp"

namespace elsim {

/// Rejected configuration; the message names the violated rule.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PhiScanSpec {
    std::vector<double> radii;  // strictly decreasing; empty disables the scan
    double threshold = 0.05;
    int stride = 1;
    int time_stride = 1;
    double pressure_exponent = -2.0;
    double d_mean_bound = std::numeric_limits<double>::infinity();
};

struct DiagnosticsSpec {
    int energy_every = 1;  // steps between energy.csv rows; the last step is always written
    PhiScanSpec phi_scan;
};

struct RunConfig {
    Grid grid = Grid::cube(32);
    ModelParams params;
    SolverConfig solver;
    InitialCondition initial;
    DiagnosticsSpec diagnostics;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    /// Cross-field checks on top of the per-field ones done while parsing.
    void validate() const
    {
        try {
            params.validate();
            solver.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        if (diagnostics.energy_every < 1)
            throw ConfigError("diagnostics.energy_every must be positive");
        const PhiScanSpec& ps = diagnostics.phi_scan;
        for (std::size_t i = 0; i < ps.radii.size(); ++i) {
            if (!(ps.radii[i] >= 2.0 * grid.min_dx() * (1.0 - 1e-12)))
                throw ConfigError("phi_scan.radii entries must be >= 2 dx");
            for (int a = 0; a < 3; ++a)
                if (!(ps.radii[i] < 0.5 * grid.box_length(a)))
                    throw ConfigError("phi_scan.radii entries must be below half the box");
            if (i > 0 && !(ps.radii[i] < ps.radii[i - 1]))
                throw ConfigError("phi_scan.radii must be strictly decreasing");
        }
        if (ps.stride < 1 || ps.time_stride < 1)
            throw ConfigError("phi_scan.stride must be positive");
        for (const auto* modes : {&initial.velocity_modes, &initial.director_modes})
            for (const auto& m : *modes)
                if (m.component < 0 || m.component > 2)
                    throw ConfigError("initial_condition mode component must be 0, 1 or 2");
    }
};

namespace detail {

using nlohmann::json;

/// Walks one JSON object, remembering which keys were consumed so leftovers
/// can be reported.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    Section section(const std::string& key) { return Section(raw(key), name(key)); }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void number(const std::string& key, double& out)
    {
        if (!has(key))
            return;
        const json& v = raw(key);
        if (!v.is_number())
            throw ConfigError(name(key) + " must be a number");
        out = v.get<double>();
    }

    void integer(const std::string& key, int& out)
    {
        if (!has(key))
            return;
        const json& v = raw(key);
        if (!v.is_number_integer())
            throw ConfigError(name(key) + " must be an integer");
        out = v.get<int>();
    }

    void boolean(const std::string& key, bool& out)
    {
        if (!has(key))
            return;
        const json& v = raw(key);
        if (!v.is_boolean())
            throw ConfigError(name(key) + " must be true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out)
    {
        if (!has(key))
            return;
        const json& v = raw(key);
        if (!v.is_string())
            throw ConfigError(name(key) + " must be a string");
        out = v.get<std::string>();
    }

    /// Accepts a scalar (repeated on every axis) or a 3-element array.
    template <class T>
    void triple(const std::string& key, std::array<T, 3>& out)
    {
        if (!has(key))
            return;
        const json& v = raw(key);
        auto ok = [](const json& e) { return std::is_integral_v<T> ? e.is_number_integer() : e.is_number(); };
        const char* kind = std::is_integral_v<T> ? "an integer" : "a number";
        if (ok(v)) {
            out.fill(v.get<T>());
            return;
        }
        if (!v.is_array() || v.size() != 3 || !ok(v[0]) || !ok(v[1]) || !ok(v[2]))
            throw ConfigError(name(key) + " must be " + kind + " or an array of 3");
        for (int a = 0; a < 3; ++a)
            out[a] = v[a].get<T>();
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw ConfigError("unknown key " + name(it.key()));
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline std::vector<FourierMode> parse_modes(const json& j, const std::string& path)
{
    if (!j.is_array())
        throw ConfigError(path + " must be an array");
    std::vector<FourierMode> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Section s(j[i], path + "[" + std::to_string(i) + "]");
        FourierMode m;
        if (!s.has("component") || !s.has("k") || !s.has("amplitude"))
            throw ConfigError(s.name("component, k and amplitude are required"));
        s.integer("component", m.component);
        s.triple("k", m.k);
        s.number("amplitude", m.amplitude);
        s.number("phase", m.phase);
        s.finish();
        out.push_back(m);
    }
    return out;
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j)
{
    using detail::Section;
    RunConfig cfg;
    Section root(j, "");

    if (root.has("grid")) {
        Section s = root.section("grid");
        std::array<int, 3> n = cfg.grid.n();
        std::array<double, 3> box = cfg.grid.box_length();
        s.triple("n", n);
        s.triple("box_length", box);
        s.finish();
        try {
            cfg.grid = Grid(n, box);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    if (root.has("params")) {
        Section s = root.section("params");
        s.number("alpha", cfg.params.alpha);
        s.number("nu", cfg.params.nu);
        s.number("lambda", cfg.params.lambda);
        s.number("gamma", cfg.params.gamma);
        s.finish();
    }
    if (root.has("solver")) {
        Section s = root.section("solver");
        s.number("dt", cfg.solver.dt);
        s.number("t_end", cfg.solver.t_end);
        s.number("theta", cfg.solver.theta);
        s.number("cfl_guard", cfg.solver.cfl_guard);
        s.boolean("mollify_ericksen_gradient", cfg.solver.mollify_ericksen_gradient);
        std::string mode = to_string(cfg.solver.mode);
        std::string disc = to_string(cfg.solver.discretization);
        s.string("mode", mode);
        s.string("discretization", disc);
        s.finish();
        if (mode != "direct" && mode != "mollified")
            throw ConfigError("solver.mode must be 'direct' or 'mollified'");
        if (disc != "spectral" && disc != "fd2")
            throw ConfigError("solver.discretization must be 'spectral' or 'fd2'");
        cfg.solver.mode = solver_mode_from_string(mode);
        cfg.solver.discretization = discretization_from_string(disc);
    }
    if (root.has("initial_condition")) {
        Section s = root.section("initial_condition");
        s.string("preset", cfg.initial.preset);
        s.number("amplitude_u", cfg.initial.amplitude_u);
        s.number("amplitude_d", cfg.initial.amplitude_d);
        s.triple("director_base", cfg.initial.director_base);
        if (s.has("velocity_modes"))
            cfg.initial.velocity_modes = detail::parse_modes(s.raw("velocity_modes"), s.name("velocity_modes"));
        if (s.has("director_modes"))
            cfg.initial.director_modes = detail::parse_modes(s.raw("director_modes"), s.name("director_modes"));
        s.finish();
        const auto& names = preset_names();
        if (std::find(names.begin(), names.end(), cfg.initial.preset) == names.end())
            throw ConfigError("initial_condition.preset must be one of zero, equilibrium-unit-director, "
                              "small-smooth, random, modes");
        if (cfg.initial.preset != "modes"
            && (!cfg.initial.velocity_modes.empty() || !cfg.initial.director_modes.empty()))
            throw ConfigError("initial_condition mode lists require preset \"modes\"");
    }
    if (root.has("diagnostics")) {
        Section s = root.section("diagnostics");
        s.integer("energy_every", cfg.diagnostics.energy_every);
        s.integer("snapshot_every", cfg.solver.snapshot_every);
        if (s.has("phi_scan")) {
            Section p = s.section("phi_scan");
            PhiScanSpec& ps = cfg.diagnostics.phi_scan;
            if (p.has("radii")) {
                const auto& r = p.raw("radii");
                if (!r.is_array())
                    throw ConfigError("phi_scan.radii must be an array of numbers");
                for (const auto& e : r) {
                    if (!e.is_number())
                        throw ConfigError("phi_scan.radii must be an array of numbers");
                    ps.radii.push_back(e.get<double>());
                }
            }
            p.number("threshold", ps.threshold);
            p.integer("stride", ps.stride);
            p.integer("time_stride", ps.time_stride);
            p.number("pressure_exponent", ps.pressure_exponent);
            p.number("d_mean_bound", ps.d_mean_bound);
            p.finish();
        }
        s.finish();
    }
    root.string("output_dir", cfg.output_dir);
    if (root.has("seed")) {
        const auto& v = root.raw("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError("seed must be a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    root.finish();
    cfg.validate();
    return cfg;
}

inline RunConfig parse_run_config(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config " + path.string());
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

/// Fully resolved configuration, written next to the outputs of a run.
inline nlohmann::json to_json(const RunConfig& c)
{
    using nlohmann::json;
    auto modes = [](const std::vector<FourierMode>& ms) {
        json a = json::array();
        for (const auto& m : ms)
            a.push_back({{"component", m.component}, {"k", m.k}, {"amplitude", m.amplitude}, {"phase", m.phase}});
        return a;
    };
    json phi = {{"radii", c.diagnostics.phi_scan.radii},
                {"threshold", c.diagnostics.phi_scan.threshold},
                {"stride", c.diagnostics.phi_scan.stride},
                {"time_stride", c.diagnostics.phi_scan.time_stride},
                {"pressure_exponent", c.diagnostics.phi_scan.pressure_exponent}};
    if (std::isfinite(c.diagnostics.phi_scan.d_mean_bound))
        phi["d_mean_bound"] = c.diagnostics.phi_scan.d_mean_bound;
    return {
        {"grid", {{"n", c.grid.n()}, {"box_length", c.grid.box_length()}}},
        {"params",
         {{"alpha", c.params.alpha}, {"nu", c.params.nu}, {"lambda", c.params.lambda}, {"gamma", c.params.gamma}}},
        {"solver",
         {{"dt", c.solver.dt},
          {"t_end", c.solver.t_end},
          {"mode", to_string(c.solver.mode)},
          {"theta", c.solver.theta},
          {"discretization", to_string(c.solver.discretization)},
          {"cfl_guard", c.solver.cfl_guard},
          {"mollify_ericksen_gradient", c.solver.mollify_ericksen_gradient}}},
        {"initial_condition",
         {{"preset", c.initial.preset},
          {"amplitude_u", c.initial.amplitude_u},
          {"amplitude_d", c.initial.amplitude_d},
          {"director_base", c.initial.director_base},
          {"velocity_modes", modes(c.initial.velocity_modes)},
          {"director_modes", modes(c.initial.director_modes)}}},
        {"diagnostics",
         {{"energy_every", c.diagnostics.energy_every},
          {"snapshot_every", c.solver.snapshot_every},
          {"phi_scan", phi}}},
        {"output_dir", c.output_dir},
        {"seed", c.seed},
    };
}

} // namespace elsim
