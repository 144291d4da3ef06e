#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "elsim/io.hpp"
#include "test_support.hpp"

using namespace elsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("elsim_test_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

SimState random_state(const Grid& g, std::uint64_t seed, double t)
{
    std::mt19937_64 rng(seed);
    SimState s(elsim::test::random_samples_vector(g, rng), elsim::test::random_samples_vector(g, rng),
               elsim::test::random_samples(g, rng), t, {0.3, 1.5, 0.7, 2.0});
    return s;
}

bool same_bits(const ScalarField& a, const ScalarField& b)
{
    return a.size() == b.size() && std::memcmp(a.raw().data(), b.raw().data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST(Snapshot, HeaderLayoutIsExact)
{
    const Grid g({4, 5, 6}, {1.0, 2.0, 3.0});
    SimState s = SimState::zero(g, {0.25, 1.0, 2.0, 3.0});
    s.t = 0.5;
    s.u[0][1] = 1.0;  // second value of the first payload array
    const auto bytes = encode_snapshot(s, 0.125);
    ASSERT_EQ(bytes.size(), kSnapshotHeaderBytes + 7 * g.size() * 8);
    EXPECT_EQ(kSnapshotHeaderBytes, 93u);
    EXPECT_EQ(std::memcmp(bytes.data(), "ELSIM1\0", 7), 0);
    EXPECT_EQ(bytes[7], 1);  // version, little-endian u16
    EXPECT_EQ(bytes[8], 0);
    EXPECT_EQ(bytes[9], 4);  // n0
    EXPECT_EQ(bytes[13], 5);
    EXPECT_EQ(bytes[17], 6);
    auto f64_at = [&](std::size_t off) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes[off + i]) << (8 * i);
        return std::bit_cast<double>(v);
    };
    EXPECT_EQ(f64_at(21), 1.0);
    EXPECT_EQ(f64_at(29), 2.0);
    EXPECT_EQ(f64_at(37), 3.0);
    EXPECT_EQ(f64_at(45), 0.5);    // time
    EXPECT_EQ(f64_at(53), 0.25);   // alpha
    EXPECT_EQ(f64_at(61), 1.0);    // nu
    EXPECT_EQ(f64_at(69), 2.0);    // lambda
    EXPECT_EQ(f64_at(77), 3.0);    // gamma
    EXPECT_EQ(f64_at(85), 0.125);  // theta
    EXPECT_EQ(f64_at(93), 0.0);
    EXPECT_EQ(f64_at(101), 1.0);
}

TEST(Snapshot, RoundTripIsBitExact)
{
    const Grid g({6, 4, 5}, {1.0, 0.5, 2.0});
    const SimState s = random_state(g, 11, 0.1 + 0.2);
    const auto first = encode_snapshot(s, 0.3);
    const Snapshot back = decode_snapshot(first);
    EXPECT_EQ(back.theta, 0.3);
    EXPECT_EQ(back.state.t, s.t);
    EXPECT_EQ(back.state.grid(), g);
    EXPECT_EQ(back.state.params.alpha, 0.3);
    EXPECT_EQ(back.state.params.gamma, 2.0);
    for (int a = 0; a < 3; ++a) {
        EXPECT_TRUE(same_bits(back.state.u[a], s.u[a]));
        EXPECT_TRUE(same_bits(back.state.d[a], s.d[a]));
    }
    EXPECT_TRUE(same_bits(back.state.p, s.p));
    EXPECT_EQ(encode_snapshot(back.state, back.theta), first);

    const fs::path dir = scratch_dir("roundtrip");
    save_snapshot(dir / "a.bin", s, 0.3);
    const Snapshot loaded = load_snapshot(dir / "a.bin");
    save_snapshot(dir / "b.bin", loaded.state, loaded.theta);
    EXPECT_EQ(read_file(dir / "a.bin"), read_file(dir / "b.bin"));
}

TEST(Snapshot, PreservesSpecialValues)
{
    const Grid g = Grid::cube(4);
    SimState s = SimState::zero(g);
    s.u[0][0] = -0.0;
    s.u[1][0] = std::numeric_limits<double>::denorm_min();
    s.d[2][3] = std::numeric_limits<double>::max();
    const auto bytes = encode_snapshot(s, 0.0);
    EXPECT_EQ(encode_snapshot(decode_snapshot(bytes).state, 0.0), bytes);
    EXPECT_TRUE(std::signbit(decode_snapshot(bytes).state.u[0][0]));
}

TEST(Snapshot, RejectsCorruptFiles)
{
    const Grid g = Grid::cube(4);
    const auto good = encode_snapshot(SimState::zero(g), 0.0);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_snapshot(bad_magic), FormatError);

    auto bad_version = good;
    bad_version[7] = 2;
    try {
        decode_snapshot(bad_version);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
    }

    auto short_payload = good;
    short_payload.pop_back();
    EXPECT_THROW(decode_snapshot(short_payload), FormatError);

    auto long_payload = good;
    long_payload.push_back(0);
    EXPECT_THROW(decode_snapshot(long_payload), FormatError);

    const std::vector<std::uint8_t> truncated(good.begin(), good.begin() + 20);
    EXPECT_THROW(decode_snapshot(truncated), FormatError);

    auto small_dims = good;
    small_dims[9] = 2;
    EXPECT_THROW(decode_snapshot(small_dims), FormatError);

    EXPECT_THROW(load_snapshot("/nonexistent/elsim.bin"), FormatError);
}

TEST(EnergyCsv, SeventeenDigitsRoundTrip)
{
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(0.0), "0");

    const fs::path dir = scratch_dir("csv");
    std::mt19937_64 rng(4);
    std::vector<EnergyRow> rows;
    {
        EnergyCsvWriter w(dir / "energy.csv");
        for (int i = 0; i < 20; ++i) {
            EnergyRow r;
            r.report.t = 0.001 * i;
            r.report.kinetic = elsim::test::uniform(rng);
            r.report.elastic = elsim::test::uniform(rng) * 1e-300;
            r.report.potential = elsim::test::uniform(rng) * 1e300;
            r.report.total = 1.0 / 3.0;
            r.report.diss_visc = std::nextafter(1.0, 2.0);
            r.report.diss_dir = -0.0;
            r.cum_diss = elsim::test::uniform(rng);
            r.slack = -1e-17;
            rows.push_back(r);
            w.write(r);
        }
    }
    const auto back = read_energy_csv(dir / "energy.csv");
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& e = rows[i].report;
        const std::array<double, 9> want{e.t, e.kinetic, e.elastic, e.potential, e.total,
                                         e.diss_visc, e.diss_dir, rows[i].cum_diss, rows[i].slack};
        for (int c = 0; c < 9; ++c)
            EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i][c]), std::bit_cast<std::uint64_t>(want[c]))
                << "row " << i << " col " << c;
    }
    std::ifstream f(dir / "energy.csv");
    std::string header;
    std::getline(f, header);
    EXPECT_EQ(header, "t,kinetic,elastic,potential,total,diss_visc,diss_dir,cum_diss,slack");
}

TEST(SnapshotSet, GlobAndContiguity)
{
    const fs::path dir = scratch_dir("glob");
    const Grid g = Grid::cube(4);
    for (int k = 0; k < 5; ++k) {
        SimState s = SimState::zero(g);
        s.t = 0.1 * k;
        save_snapshot(dir / snapshot_name(k), s, 0.0);
    }
    std::ofstream(dir / "notes.txt") << "x";
    const auto files = expand_glob((dir / "snap_*.bin").string());
    ASSERT_EQ(files.size(), 5u);
    EXPECT_EQ(files[0].filename(), "snap_000000.bin");
    EXPECT_EQ(expand_glob((dir / "snap_00000?.bin").string()).size(), 5u);
    EXPECT_EQ(expand_glob((dir / "snap_1*.bin").string()).size(), 0u);

    const Trajectory traj = load_trajectory(files);
    EXPECT_EQ(traj.size(), 5u);
    EXPECT_NEAR(traj.end_time(), 0.4, 1e-15);

    fs::remove(dir / snapshot_name(2));
    try {
        load_trajectory(expand_glob((dir / "snap_*.bin").string()));
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("not contiguous"), std::string::npos);
    }
    EXPECT_THROW(load_trajectory({}), InvalidArgument);

    SimState other = SimState::zero(Grid::cube(8));
    other.t = 0.5;
    save_snapshot(dir / snapshot_name(5), other, 0.0);
    fs::remove(dir / snapshot_name(3));
    fs::remove(dir / snapshot_name(4));
    EXPECT_THROW(load_trajectory(expand_glob((dir / "snap_*.bin").string())), InvalidArgument);
}
