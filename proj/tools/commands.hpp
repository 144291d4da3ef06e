#pragma once

// Subcommand implementations shared by the elsim executable and its tests.
// Each returns a process exit code and writes a machine-parsable status line
// as the last line on `err`.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elsim/config.hpp"
#include "elsim/diagnostics.hpp"
#include "elsim/io.hpp"
#include "elsim/mms.hpp"
#include "elsim/presets.hpp"
#include "elsim/solver.hpp"
#include "elsim/verify.hpp"

namespace elsim::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalAbort = 2, kCheckFailed = 3 };

inline const char* kOutputDirEnv = "ELSIM_OUTPUT_DIR";

/// Final status line: `elsim: status=<word> exit=<code> reason=<text>`.
inline int finish(std::ostream& err, int code, const std::string& reason = "")
{
    static const char* words[] = {"ok", "config-error", "numerical-abort", "check-failed"};
    std::string r = reason;
    for (char& c : r)
        if (c == '\n' || c == '\r')
            c = ' ';
    err << "elsim: status=" << words[code] << " exit=" << code;
    if (!r.empty())
        err << " reason=" << r;
    err << std::endl;
    return code;
}

/// Output directory: --output-dir flag, then the environment, then the config.
inline std::string resolve_output_dir(const std::optional<std::string>& flag, const std::string& fallback)
{
    if (flag)
        return *flag;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env)
        return env;
    return fallback;
}

inline void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string());
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<std::string> restart;
};

inline int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    SimState initial;
    fs::path dir;
    try {
        cfg = load_run_config(o.config_path);
        dir = resolve_output_dir(o.output_dir, cfg.output_dir);
        if (o.restart) {
            if (cfg.solver.mode == SolverMode::mollified)
                throw ConfigError("restart is only supported in direct mode");
            Snapshot snap = load_snapshot(*o.restart);
            const ModelParams& a = snap.state.params;
            const ModelParams& b = cfg.params;
            if (a.alpha != b.alpha || a.nu != b.nu || a.lambda != b.lambda || a.gamma != b.gamma)
                throw ConfigError("restart snapshot parameters differ from the config");
            if (snap.state.grid() != cfg.grid)
                throw ConfigError("restart snapshot grid differs from the config");
            initial = std::move(snap.state);
            step_count(initial.t, cfg.solver.t_end, cfg.solver.dt);
        } else {
            initial = make_initial_state(cfg.grid, cfg.params, cfg.initial, cfg.seed);
        }
        make_dir(dir);
        std::ofstream(dir / "config.json") << to_json(cfg).dump(2) << '\n';
    } catch (const std::exception& e) {
        return finish(err, kConfigError, e.what());
    }

    const double theta = cfg.solver.mode == SolverMode::mollified ? cfg.solver.theta : 0.0;
    const long long first = std::llround(initial.t / cfg.solver.dt);
    const long long steps = step_count(initial.t, cfg.solver.t_end, cfg.solver.dt);
    EnergyMonitor monitor(cfg.solver.discretization);
    long long snapshots = 0;
    double last_t = initial.t;
    try {
        EnergyCsvWriter csv(dir / "energy.csv");
        RunSinks sinks;
        sinks.on_state = [&](const SimState& s, long long k) {
            const EnergyRow row = monitor.add(s);
            if (k % cfg.diagnostics.energy_every == 0 || k == steps)
                csv.write(row);
            last_t = s.t;
        };
        sinks.on_snapshot = [&](const SimState& s, long long k) {
            save_snapshot(dir / snapshot_name(first + k), s, theta);
            ++snapshots;
        };
        run(initial, cfg.solver, sinks);
    } catch (const CflViolation& e) {
        return finish(err, kNumericalAbort, std::string(e.what()) + " at t=" + format_double(last_t));
    } catch (const NumericalBreakdown& e) {
        return finish(err, kNumericalAbort, std::string(e.what()) + " at t=" + format_double(last_t));
    } catch (const InsufficientHistory& e) {
        return finish(err, kNumericalAbort, e.what());
    } catch (const std::exception& e) {
        return finish(err, kConfigError, e.what());
    }
    out << "run: " << steps << " steps to t=" << format_double(cfg.solver.t_end) << ", " << snapshots
        << " snapshots in " << dir.string() << '\n';
    return finish(err, kOk);
}

// ---------------------------------------------------------------------------
// verify

struct VerifyCliOptions {
    std::optional<std::string> inject_fault;
};

inline int cmd_verify(const VerifyCliOptions& o, std::ostream& out, std::ostream& err)
{
    VerifyOptions opt;
    if (o.inject_fault) {
        if (*o.inject_fault != "transport-sign")
            return finish(err, kConfigError, "unknown fault '" + *o.inject_fault + "'");
        opt.flip_transport_sign = true;
    }
    const auto checks = run_verify(opt);
    out << std::left << std::setw(22) << "identity" << std::setw(32) << "case" << std::right << std::setw(14)
        << "residual" << std::setw(14) << "tolerance" << "  status\n";
    std::vector<std::string> failed;
    for (const auto& c : checks) {
        std::ostringstream res, tol;
        res << std::scientific << std::setprecision(3) << c.residual;
        tol << (c.at_least ? ">= " : "<= ") << std::scientific << std::setprecision(1) << c.tolerance;
        out << std::left << std::setw(22) << c.identity << std::setw(32) << c.label << std::right << std::setw(14)
            << res.str() << std::setw(14) << tol.str() << "  " << (c.passed() ? "pass" : "FAIL") << '\n';
        if (!c.passed() && std::find(failed.begin(), failed.end(), c.identity) == failed.end())
            failed.push_back(c.identity);
    }
    if (!failed.empty()) {
        std::string names;
        for (const auto& f : failed)
            names += (names.empty() ? "" : ",") + f;
        return finish(err, kCheckFailed, "identity failed: " + names);
    }
    return finish(err, kOk);
}

// ---------------------------------------------------------------------------
// mms

struct MmsCliOptions {
    std::vector<int> resolutions{16, 32, 64};
    double t_end = 0.05;
};

inline void print_study(std::ostream& out, const ConvergenceStudy& st)
{
    out << st.name << '\n';
    out << "  " << std::setw(6) << "n" << std::setw(14) << "dt" << std::setw(8) << "steps" << std::setw(14)
        << "error" << std::setw(10) << "order\n";
    for (const auto& lv : st.levels) {
        std::ostringstream dt, e, ord;
        dt << std::scientific << std::setprecision(3) << lv.dt;
        e << std::scientific << std::setprecision(3) << lv.error;
        if (std::isnan(lv.order))
            ord << "-";
        else
            ord << std::fixed << std::setprecision(3) << lv.order;
        out << "  " << std::setw(6) << lv.n << std::setw(14) << dt.str() << std::setw(8) << lv.steps
            << std::setw(14) << e.str() << std::setw(9) << ord.str() << '\n';
    }
    if (st.exact)
        out << "  observed order: exact (error at roundoff floor)\n";
    else
        out << "  observed order: " << std::fixed << std::setprecision(3) << st.observed_order << '\n';
}

inline int cmd_mms(const MmsCliOptions& o, std::ostream& out, std::ostream& err)
{
    if (o.resolutions.size() < 3)
        return finish(err, kConfigError, "mms needs at least 3 resolutions");
    for (std::size_t i = 0; i < o.resolutions.size(); ++i) {
        if (o.resolutions[i] < 12)
            return finish(err, kConfigError, "mms resolutions must be >= 12");
        if (i > 0 && o.resolutions[i] != 2 * o.resolutions[i - 1])
            return finish(err, kConfigError, "mms resolutions must double from one level to the next");
    }
    if (!(o.t_end > 0.0))
        return finish(err, kConfigError, "mms t_end must be positive");
    MmsOptions opt;
    opt.resolutions = o.resolutions;
    opt.t_end = o.t_end;
    try {
        const ConvergenceStudy spectral = mms_spectral_spatial_check(opt);
        print_study(out, spectral);
        const ConvergenceStudy temporal = mms_temporal_study(opt);
        print_study(out, temporal);
        const ConvergenceStudy fd = mms_spatial_study(opt, Discretization::fd2);
        print_study(out, fd);
        std::string why;
        if (!(fd.observed_order >= 1.8))
            why += "spatial order " + format_double(fd.observed_order) + " < 1.8";
        if (!(temporal.observed_order >= 0.8))
            why += std::string(why.empty() ? "" : "; ") + "temporal order " + format_double(temporal.observed_order)
                + " < 0.8";
        if (!why.empty())
            return finish(err, kCheckFailed, why);
    } catch (const CflViolation& e) {
        return finish(err, kNumericalAbort, e.what());
    } catch (const NumericalBreakdown& e) {
        return finish(err, kNumericalAbort, e.what());
    }
    return finish(err, kOk);
}

// ---------------------------------------------------------------------------
// phi-scan

struct PhiScanCliOptions {
    std::string snapshot_glob;
    std::optional<std::string> config_path;
    std::vector<double> radii;
    std::optional<double> threshold;
    std::optional<int> stride;
    std::optional<int> time_stride;
    std::optional<double> pressure_exponent;
    std::string discretization = "spectral";
    std::optional<std::string> output_dir;
};

inline int cmd_phi_scan(const PhiScanCliOptions& o, std::ostream& out, std::ostream& err)
{
    Trajectory traj;
    PhiScanSpec spec;
    CandidateOptions copt;
    fs::path dir;
    try {
        std::string fallback = fs::path(o.snapshot_glob).parent_path().string();
        if (fallback.empty())
            fallback = ".";
        if (o.config_path) {
            const RunConfig cfg = load_run_config(*o.config_path);
            spec = cfg.diagnostics.phi_scan;
            fallback = cfg.output_dir;
        }
        if (!o.radii.empty())
            spec.radii = o.radii;
        if (o.threshold)
            spec.threshold = *o.threshold;
        if (o.stride)
            spec.stride = *o.stride;
        if (o.time_stride)
            spec.time_stride = *o.time_stride;
        if (o.pressure_exponent)
            spec.pressure_exponent = *o.pressure_exponent;
        if (spec.radii.empty())
            throw ConfigError("phi_scan.radii must not be empty");
        if (o.discretization != "spectral" && o.discretization != "fd2")
            throw ConfigError("discretization must be 'spectral' or 'fd2'");
        traj = load_trajectory(expand_glob(o.snapshot_glob));
        // Reuse the config rules for radii against the snapshot grid.
        RunConfig check;
        check.grid = traj.grid();
        check.diagnostics.phi_scan = spec;
        check.validate();
        copt.stride = spec.stride;
        copt.time_stride = spec.time_stride;
        copt.d_mean_bound = spec.d_mean_bound;
        copt.phi.pressure_exponent = spec.pressure_exponent;
        copt.phi.discretization = discretization_from_string(o.discretization);
        const double window = traj.end_time() - traj.start_time();
        if (!(spec.radii.front() * spec.radii.front() <= window * (1.0 + 1e-12)))
            throw ConfigError("snapshots do not cover a cylinder of the largest radius");
        dir = resolve_output_dir(o.output_dir, fallback);
        make_dir(dir);
    } catch (const std::exception& e) {
        return finish(err, kConfigError, e.what());
    }

    std::ofstream phi_csv(dir / "phi.csv", std::ios::trunc);
    phi_csv << "x,y,z,t,r,term_velocity,term_pressure,term_oscillation,d_mean,phi\n";
    const PhiEvaluator eval(traj, copt.phi);
    std::vector<Candidate> cands;
    try {
        cands = phi_scan(eval, spec.radii, spec.threshold, copt, [&](const PhiReport& r) {
            const auto& c = r.cylinder;
            const char* sep = "";
            for (double v : {c.x[0], c.x[1], c.x[2], c.t, c.r, r.term_velocity, r.term_pressure, r.term_oscillation,
                             std::sqrt(dot3(r.d_mean, r.d_mean)), r.phi}) {
                phi_csv << sep << format_double(v);
                sep = ",";
            }
            phi_csv << '\n';
        });
    } catch (const std::exception& e) {
        return finish(err, kConfigError, e.what());
    }
    nlohmann::json j;
    j["threshold"] = spec.threshold;
    j["radii"] = spec.radii;
    j["count"] = cands.size();
    j["candidates"] = nlohmann::json::array();
    for (const auto& c : cands)
        j["candidates"].push_back({{"x", c.point.x},
                                   {"y", c.point.y},
                                   {"z", c.point.z},
                                   {"t", c.point.t},
                                   {"min_phi", c.min_phi},
                                   {"max_d_mean", c.max_d_mean}});
    std::ofstream(dir / "candidates.json", std::ios::trunc) << j.dump(2) << '\n';
    out << "phi-scan: " << traj.size() << " snapshots, " << cands.size() << " candidates, reports in "
        << dir.string() << '\n';
    return finish(err, kOk);
}

// ---------------------------------------------------------------------------
// dim-estimate

struct DimCliOptions {
    std::string candidates_path;
    double r_min = 0.0;
    double r_max = 0.0;
    int scales = 10;
    std::optional<std::string> output_dir;
};

inline std::vector<SpaceTimePoint> read_candidates(const fs::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + " is not a candidates file: " + e.what());
    }
    if (!j.is_object() || !j.contains("candidates") || !j["candidates"].is_array())
        throw ConfigError(path.string() + " has no candidates array");
    std::vector<SpaceTimePoint> pts;
    for (const auto& c : j["candidates"]) {
        try {
            pts.push_back({c.at("x").get<double>(), c.at("y").get<double>(), c.at("z").get<double>(),
                           c.at("t").get<double>()});
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path.string() + ": candidate entries need numeric x, y, z, t");
        }
    }
    return pts;
}

inline int cmd_dim_estimate(const DimCliOptions& o, std::ostream& out, std::ostream& err)
{
    std::optional<DimensionReport> rep;
    fs::path dir;
    std::size_t count = 0;
    try {
        const auto pts = read_candidates(o.candidates_path);
        count = pts.size();
        rep = parabolic_dimension_estimate(pts, o.r_min, o.r_max, o.scales);
        dir = resolve_output_dir(o.output_dir, fs::path(o.candidates_path).parent_path().string());
        if (dir.empty())
            dir = ".";
        make_dir(dir);
    } catch (const std::exception& e) {
        return finish(err, kConfigError, e.what());
    }
    nlohmann::json j;
    j["points"] = count;
    j["r_min"] = o.r_min;
    j["r_max"] = o.r_max;
    if (!rep) {
        j["dimension"] = nullptr;
        out << "dim-estimate: empty candidate set, no report\n";
    } else {
        j["dimension"] = rep->slope;
        j["intercept"] = rep->intercept;
        j["residual"] = rep->residual;
        j["scales"] = rep->scales;
        j["counts"] = rep->counts;
        out << "dim-estimate: slope " << format_double(rep->slope) << ", residual " << format_double(rep->residual)
            << ", " << rep->scales.size() << " scales\n";
        out << "  scale                 boxes\n";
        for (std::size_t i = 0; i < rep->scales.size(); ++i)
            out << "  " << std::setw(22) << std::left << format_double(rep->scales[i]) << rep->counts[i] << '\n';
    }
    std::ofstream(dir / "dimension.json", std::ios::trunc) << j.dump(2) << '\n';
    return finish(err, kOk);
}

} // namespace elsim::cli
