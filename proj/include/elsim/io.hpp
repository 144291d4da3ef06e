#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "elsim/diagnostics.hpp"
#include "elsim/state.hpp"

namespace elsim {

/// Malformed or unreadable snapshot file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 7> kSnapshotMagic{'E', 'L', 'S', 'I', 'M', '1', '\0'};
inline constexpr std::uint16_t kSnapshotVersion = 1;
// magic + version + dims + box + time + 4 params + theta
inline constexpr std::size_t kSnapshotHeaderBytes = 7 + 2 + 3 * 4 + 3 * 8 + 8 + 4 * 8 + 8;

/// A state as stored on disk. theta is 0 for direct-mode runs.
struct Snapshot {
    SimState state;
    double theta = 0.0;
};

namespace detail {

class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void bytes(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

private:
    void put(std::uint64_t v, int n)
    {
        for (int i = 0; i < n; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t>& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::size_t remaining() const { return in_.size() - pos_; }
    void bytes(char* p, std::size_t n)
    {
        need(n);
        std::copy_n(in_.data() + pos_, n, reinterpret_cast<std::uint8_t*>(p));
        pos_ += n;
    }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    double f64() { return std::bit_cast<double>(get(8)); }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n)
            throw FormatError("snapshot: truncated file");
    }
    std::uint64_t get(int n)
    {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<std::uint8_t> encode_snapshot(const SimState& s, double theta)
{
    const Grid& g = s.grid();
    std::vector<std::uint8_t> out;
    out.reserve(kSnapshotHeaderBytes + 7 * g.size() * 8);
    detail::ByteWriter w(out);
    w.bytes(kSnapshotMagic.data(), kSnapshotMagic.size());
    w.u16(kSnapshotVersion);
    for (int a = 0; a < 3; ++a)
        w.u32(static_cast<std::uint32_t>(g.n(a)));
    for (int a = 0; a < 3; ++a)
        w.f64(g.box_length(a));
    w.f64(s.t);
    w.f64(s.params.alpha);
    w.f64(s.params.nu);
    w.f64(s.params.lambda);
    w.f64(s.params.gamma);
    w.f64(theta);
    for (int a = 0; a < 3; ++a)
        for (double v : s.u[a].raw())
            w.f64(v);
    for (int a = 0; a < 3; ++a)
        for (double v : s.d[a].raw())
            w.f64(v);
    for (double v : s.p.raw())
        w.f64(v);
    return out;
}

inline Snapshot decode_snapshot(std::span<const std::uint8_t> bytes)
{
    detail::ByteReader r(bytes);
    std::array<char, 7> magic{};
    r.bytes(magic.data(), magic.size());
    if (magic != kSnapshotMagic)
        throw FormatError("snapshot: bad magic");
    const std::uint16_t version = r.u16();
    if (version != kSnapshotVersion)
        throw FormatError("snapshot: unsupported version " + std::to_string(version));
    std::array<int, 3> n{};
    for (int a = 0; a < 3; ++a) {
        const std::uint32_t v = r.u32();
        if (v < 4 || v > (1u << 16))
            throw FormatError("snapshot: grid dimension out of range");
        n[a] = static_cast<int>(v);
    }
    std::array<double, 3> box{};
    for (int a = 0; a < 3; ++a)
        box[a] = r.f64();
    Snapshot snap;
    const double t = r.f64();
    ModelParams prm;
    prm.alpha = r.f64();
    prm.nu = r.f64();
    prm.lambda = r.f64();
    prm.gamma = r.f64();
    snap.theta = r.f64();

    Grid g;
    try {
        g = Grid(n, box);
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("snapshot: ") + e.what());
    }
    const std::size_t payload = 7 * g.size() * 8;
    if (r.remaining() != payload)
        throw FormatError("snapshot: payload length does not match header dims");
    auto read_scalar = [&] {
        ScalarField f(g);
        for (double& v : f.raw())
            v = r.f64();
        return f;
    };
    auto read_vector = [&] {
        ScalarField x = read_scalar();
        ScalarField y = read_scalar();
        ScalarField z = read_scalar();
        return VectorField(std::move(x), std::move(y), std::move(z));
    };
    VectorField u = read_vector();
    VectorField d = read_vector();
    ScalarField p = read_scalar();
    snap.state = SimState(std::move(u), std::move(d), std::move(p), t, prm);
    return snap;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw std::runtime_error("write failed for " + path.string());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw FormatError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

inline void save_snapshot(const std::filesystem::path& path, const SimState& s, double theta)
{
    write_file(path, encode_snapshot(s, theta));
}

inline Snapshot load_snapshot(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try {
        return decode_snapshot(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

/// File name used for the snapshot taken after `step` steps.
inline std::string snapshot_name(long long step)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06lld.bin", step);
    return buf;
}

// ---------------------------------------------------------------------------
// Energy trace

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kEnergyCsvHeader = "t,kinetic,elastic,potential,total,diss_visc,diss_dir,cum_diss,slack";

inline std::string energy_csv_row(const EnergyRow& row)
{
    const EnergyReport& e = row.report;
    std::string s;
    for (double v : {e.t, e.kinetic, e.elastic, e.potential, e.total, e.diss_visc, e.diss_dir, row.cum_diss, row.slack}) {
        if (!s.empty())
            s += ',';
        s += format_double(v);
    }
    return s;
}

/// Writes energy.csv, flushing after every row so an aborted run keeps its
/// trace.
class EnergyCsvWriter {
public:
    explicit EnergyCsvWriter(const std::filesystem::path& path) : f_(path, std::ios::trunc)
    {
        if (!f_)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        f_ << kEnergyCsvHeader << '\n';
        f_.flush();
    }

    void write(const EnergyRow& row)
    {
        f_ << energy_csv_row(row) << '\n';
        f_.flush();
    }

private:
    std::ofstream f_;
};

/// Parsed energy.csv; each row holds the nine columns in header order.
inline std::vector<std::array<double, 9>> read_energy_csv(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw FormatError("cannot open " + path.string());
    std::string line;
    std::getline(f, line);
    if (line != kEnergyCsvHeader)
        throw FormatError(path.string() + ": unexpected energy.csv header");
    std::vector<std::array<double, 9>> rows;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::array<double, 9> row{};
        std::size_t pos = 0;
        for (int c = 0; c < 9; ++c) {
            std::size_t used = 0;
            row[c] = std::stod(line.substr(pos), &used);
            pos += used + 1;
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Snapshot sets

namespace detail {

inline std::string glob_to_regex(const std::string& pattern)
{
    std::string re;
    for (char c : pattern) {
        if (c == '*')
            re += "[^/]*";
        else if (c == '?')
            re += "[^/]";
        else if (std::string("\\^$.|+()[]{}").find(c) != std::string::npos)
            re += std::string("\\") + c;
        else
            re += c;
    }
    return re;
}

} // namespace detail

/// Files matching a glob whose wildcards (* and ?) appear only in the last
/// path component, in lexicographic order.
inline std::vector<std::filesystem::path> expand_glob(const std::string& pattern)
{
    namespace fs = std::filesystem;
    const fs::path p(pattern);
    fs::path dir = p.parent_path();
    const std::string leaf = p.filename().string();
    if (dir.string().find_first_of("*?") != std::string::npos)
        throw InvalidArgument("snapshot glob: wildcards are only supported in the file name");
    if (dir.empty())
        dir = ".";
    std::vector<fs::path> out;
    if (!fs::is_directory(dir))
        return out;
    const std::regex re(detail::glob_to_regex(leaf));
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && std::regex_match(e.path().filename().string(), re))
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

/// Loads snapshots into a trajectory ordered by time and checks that they
/// share one grid and are evenly spaced.
inline Trajectory load_trajectory(const std::vector<std::filesystem::path>& files)
{
    if (files.empty())
        throw InvalidArgument("snapshots: no files matched");
    std::vector<SimState> states;
    for (const auto& f : files)
        states.push_back(load_snapshot(f).state);
    std::sort(states.begin(), states.end(), [](const SimState& a, const SimState& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < states.size(); ++i)
        if (states[i].grid() != states[0].grid())
            throw InvalidArgument("snapshots: grid mismatch");
    if (states.size() > 2) {
        const double dt = states[1].t - states[0].t;
        for (std::size_t i = 1; i < states.size(); ++i) {
            const double gap = states[i].t - states[i - 1].t;
            if (!(std::abs(gap - dt) <= 1e-6 * dt))
                throw InvalidArgument("snapshots: not contiguous, gap at t = " + format_double(states[i - 1].t));
        }
    }
    if (states.size() > 1 && !(states[1].t > states[0].t))
        throw InvalidArgument("snapshots: duplicate times");
    Trajectory traj;
    traj.states = std::move(states);
    return traj;
}

} // namespace elsim
