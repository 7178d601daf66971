#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "rdmd/snapshot.hpp"
#include "rdmd/synth.hpp"
#include "test_util.hpp"

using namespace rdmd;
using rdmd::test::Gen;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected rdmd::Error";
    return ErrorCode::NumericalFailure;
}

bool same_bits(const RMat& a, const RMat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

} // namespace

TEST(FromTrajectory, ShiftsOneRowSeries) {
    RMat s(1, 3);
    s << 1, 2, 4;
    const auto p = from_trajectory(s);
    ASSERT_EQ(p.n_snapshots(), 2);
    EXPECT_EQ(p.x(0, 0), 1.0);
    EXPECT_EQ(p.x(0, 1), 2.0);
    EXPECT_EQ(p.y(0, 0), 2.0);
    EXPECT_EQ(p.y(0, 1), 4.0);
}

TEST(FromTrajectory, TwoByTwoGivesSingleColumns) {
    RMat s(2, 2);
    s << 1, 2, 3, 4;
    const auto p = from_trajectory(s);
    ASSERT_EQ(p.n_features(), 2);
    ASSERT_EQ(p.n_snapshots(), 1);
    EXPECT_EQ(p.x(0, 0), 1.0);
    EXPECT_EQ(p.x(1, 0), 3.0);
    EXPECT_EQ(p.y(0, 0), 2.0);
    EXPECT_EQ(p.y(1, 0), 4.0);
}

TEST(FromTrajectory, LogisticTrajectoryOf301PointsGives300Snapshots) {
    LogisticConfig cfg;
    cfg.n_init = 4;
    cfg.burn_in = 100;
    const RMat traj = logistic_trajectories(cfg);
    ASSERT_EQ(traj.cols(), 301);
    EXPECT_EQ(from_trajectory(traj).n_snapshots(), 300);
}

TEST(FromTrajectory, Errors) {
    EXPECT_EQ(code_of([] { from_trajectory(RMat::Ones(3, 1)); }), ErrorCode::InsufficientSnapshots);
    RMat bad = RMat::Ones(2, 4);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_EQ(code_of([&] { from_trajectory(bad); }), ErrorCode::InvalidData);
    bad(1, 2) = std::numeric_limits<double>::infinity();
    EXPECT_EQ(code_of([&] { from_trajectory(bad); }), ErrorCode::InvalidData);
}

TEST(FromTrajectory, PropertyShiftRelation) {
    Gen g(11);
    for (int trial = 0; trial < 25; ++trial) {
        const RMat s = g.matrix(g.index(1, 12), g.index(2, 30));
        const auto p = from_trajectory(s);
        for (Index j = 1; j < p.n_snapshots(); ++j) EXPECT_EQ(p.x.data().col(j), p.y.data().col(j - 1));
    }
}

TEST(SnapshotMatrix, RejectsEmptyAndNonFinite) {
    EXPECT_EQ(code_of([] { SnapshotMatrix(RMat(0, 3)); }), ErrorCode::InvalidData);
    RMat m = RMat::Zero(2, 2);
    m(0, 1) = -std::numeric_limits<double>::infinity();
    EXPECT_EQ(code_of([&] { SnapshotMatrix{m}; }), ErrorCode::InvalidData);
    EXPECT_EQ(code_of([] { SnapshotPair(SnapshotMatrix(RMat::Ones(2, 3)), SnapshotMatrix(RMat::Ones(2, 4))); }),
              ErrorCode::ShapeMismatch);
}

TEST(StackChannels, TwoChannelsInOrder) {
    Gen g(3);
    const SnapshotMatrix a(g.matrix(3, 5)), b(g.matrix(3, 5));
    const auto s = stack_channels(std::vector{a, b});
    ASSERT_EQ(s.n_features(), 6);
    ASSERT_EQ(s.n_snapshots(), 5);
    EXPECT_EQ(s.data().topRows(3), a.data());
    EXPECT_EQ(s.data().bottomRows(3), b.data());
}

TEST(StackChannels, SingleChannelIsIdentity) {
    Gen g(4);
    const SnapshotMatrix a(g.matrix(7, 3));
    EXPECT_EQ(stack_channels(std::vector{a}).data(), a.data());
}

TEST(StackChannels, VelocityComponentDimensions) {
    // Two channels of a 541 x 347 grid stack to 375454 rows; two snapshots
    // keep the check cheap.
    const Index grid = 541 * 347;
    const SnapshotMatrix u(RMat::Constant(grid, 2, 1.0)), v(RMat::Constant(grid, 2, -1.0));
    const auto s = stack_channels(std::vector{u, v});
    EXPECT_EQ(s.n_features(), 375454);
    EXPECT_EQ(s(grid - 1, 1), 1.0);
    EXPECT_EQ(s(grid, 1), -1.0);
}

TEST(StackChannels, Errors) {
    EXPECT_EQ(code_of([] {
                  stack_channels(std::vector{SnapshotMatrix(RMat::Ones(2, 3)), SnapshotMatrix(RMat::Ones(2, 4))});
              }),
              ErrorCode::ShapeMismatch);
    EXPECT_EQ(code_of([] { stack_channels(std::vector<SnapshotMatrix>{}); }), ErrorCode::InvalidParameter);
}

TEST(StackChannels, PropertyAssociative) {
    Gen g(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Index m = g.index(1, 8);
        const SnapshotMatrix a(g.matrix(g.index(1, 6), m)), b(g.matrix(g.index(1, 6), m)),
            c(g.matrix(g.index(1, 6), m));
        const auto flat = stack_channels(std::vector{a, b, c});
        const auto nested = stack_channels(std::vector{stack_channels(std::vector{a, b}), c});
        EXPECT_EQ(flat.data(), nested.data());
    }
}

TEST(ComplexChannels, StackRoundTrip) {
    Gen g(6);
    const ComplexSnapshotMatrix z(g.cmatrix(5, 4));
    const auto back = to_complex(to_stacked(z));
    EXPECT_EQ(back.data(), z.data());
    EXPECT_EQ(code_of([] { to_complex(SnapshotMatrix(RMat::Ones(3, 2))); }), ErrorCode::ShapeMismatch);
}

TEST(Persistence, BinaryIdentityRoundTrip) {
    const auto dir = rdmd::test::scratch_dir("snap_identity");
    save(SnapshotMatrix(RMat::Identity(2, 2)), dir / "i.rdmd");
    EXPECT_TRUE(same_bits(load(dir / "i.rdmd").data(), RMat::Identity(2, 2)));
}

TEST(Persistence, BinaryHeaderLayout) {
    const auto dir = rdmd::test::scratch_dir("snap_header");
    RMat m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    save_binary(m, dir / "m.rdmd");
    std::ifstream is(dir / "m.rdmd", std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), {});
    ASSERT_EQ(bytes.size(), 24u + 6u * 8u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RDMD");
    EXPECT_EQ(bytes[4], 1);   // version, little-endian
    EXPECT_EQ(bytes[8], 2);   // n_features
    EXPECT_EQ(bytes[16], 3);  // n_snapshots
    double second;
    std::memcpy(&second, bytes.data() + 24 + 8, 8);
    EXPECT_EQ(second, 4.0);   // column-major: (1,0) follows (0,0)
}

TEST(Persistence, CsvParseExample) {
    const RMat m = parse_csv("1.5,2.0\n3.0,4.0");
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 2);
    EXPECT_EQ(m(0, 0), 1.5);
    EXPECT_EQ(m(0, 1), 2.0);
    EXPECT_EQ(m(1, 0), 3.0);
    EXPECT_EQ(m(1, 1), 4.0);
}

TEST(Persistence, CsvErrors) {
    EXPECT_EQ(code_of([] { parse_csv("1,2\n3"); }), ErrorCode::FormatError);
    EXPECT_EQ(code_of([] { parse_csv("1,abc"); }), ErrorCode::FormatError);
    EXPECT_EQ(code_of([] { parse_csv("1,nan"); }), ErrorCode::InvalidData);
    EXPECT_EQ(code_of([] { parse_csv(""); }), ErrorCode::FormatError);
}

TEST(Persistence, PropertyRoundTripRandomSizes) {
    const auto dir = rdmd::test::scratch_dir("snap_roundtrip");
    Gen g(7);
    std::vector<std::pair<Index, Index>> sizes{{1, 1}, {1000, 100}, {3, 1000}};
    for (int k = 0; k < 6; ++k) sizes.emplace_back(g.index(1, 300), g.index(1, 60));
    for (const auto& [n, m] : sizes) {
        RMat a = g.matrix(n, m);
        // Spread magnitudes to exercise the decimal formatter.
        for (Index i = 0; i < a.size(); ++i) a.data()[i] *= std::pow(10.0, g.uniform(-30.0, 30.0));
        save(SnapshotMatrix(a), dir / "a.rdmd");
        EXPECT_TRUE(same_bits(load(dir / "a.rdmd").data(), a)) << n << "x" << m;
        save(SnapshotMatrix(a), dir / "a.csv");
        const RMat c = load(dir / "a.csv").data();
        ASSERT_EQ(c.rows(), n);
        ASSERT_EQ(c.cols(), m);
        double worst = 0.0;
        for (Index i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(c.data()[i] - a.data()[i]) / std::abs(a.data()[i]));
        EXPECT_LE(worst, 1e-15);
    }
}

TEST(Persistence, BinaryErrors) {
    const auto dir = rdmd::test::scratch_dir("snap_errors");
    Gen g(8);
    save_binary(g.matrix(4, 5), dir / "ok.rdmd");
    std::ifstream is(dir / "ok.rdmd", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), {});

    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream os(dir / name, std::ios::binary);
        os << content;
        return dir / name;
    };
    EXPECT_EQ(code_of([&] { load(write("trunc.rdmd", bytes.substr(0, bytes.size() - 3))); }),
              ErrorCode::FormatError);
    EXPECT_EQ(code_of([&] { load(write("extra.rdmd", bytes + "x")); }), ErrorCode::FormatError);
    std::string magic = bytes;
    magic[0] = 'X';
    EXPECT_EQ(code_of([&] { load(write("magic.rdmd", magic)); }), ErrorCode::FormatError);
    std::string version = bytes;
    version[4] = 2;
    EXPECT_EQ(code_of([&] { load(write("version.rdmd", version)); }), ErrorCode::FormatError);
    EXPECT_EQ(code_of([&] { load(write("short.rdmd", "RDM")); }), ErrorCode::FormatError);
    std::string nan_payload = bytes;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(nan_payload.data() + 24, &nan, 8);
    EXPECT_EQ(code_of([&] { load(write("nan.rdmd", nan_payload)); }), ErrorCode::InvalidData);
    EXPECT_EQ(code_of([&] { load(dir / "missing.rdmd"); }), ErrorCode::PathError);
}

TEST(Persistence, ColumnReaderMatchesLoad) {
    const auto dir = rdmd::test::scratch_dir("snap_reader");
    Gen g(9);
    const RMat a = g.matrix(17, 9);
    save_binary(a, dir / "a.rdmd");
    BinaryColumnReader reader(dir / "a.rdmd");
    ASSERT_EQ(reader.n_features(), 17);
    ASSERT_EQ(reader.n_snapshots(), 9);
    for (Index j : {8, 0, 3}) EXPECT_EQ(reader.column(j), a.col(j));
    EXPECT_EQ(code_of([&] { reader.column(9); }), ErrorCode::InvalidParameter);
}
