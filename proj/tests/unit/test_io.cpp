#include "scanopt/errors.hpp"
#include "scanopt/io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace scanopt {
namespace {

TEST(Io, FormatDoubleRoundTripsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> exponent(-300.0, 300.0);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = mantissa(rng) * std::pow(10.0, exponent(rng));
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(2.0), "2");
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
}

TEST(Io, PgmRoundTripWithinQuantization) {
  const auto dir = testing::scratch_dir("io_pgm");
  Raster r(7, 5);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& v : r.data()) v = unit(rng);
  io::write_pgm(dir / "a.pgm", r);
  const Raster back = io::read_pgm(dir / "a.pgm");
  ASSERT_EQ(back.width(), 7u);
  ASSERT_EQ(back.height(), 5u);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LE(std::abs(back.data()[i] - r.data()[i]), 0.5 / 65535.0 + 1e-15);
  }
}

TEST(Io, PgmClampsAndUsesBigEndian) {
  const auto dir = testing::scratch_dir("io_pgm_clamp");
  io::write_pgm(dir / "c.pgm", Raster(2, 1, std::vector<double>{-0.5, 2.0}));
  std::ifstream in(dir / "c.pgm", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n2 1\n65535\n";
  ASSERT_EQ(bytes.size(), header.size() + 4);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 2]), 0xff);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 3]), 0xff);
}

TEST(Io, ReadsEightBitPgmWithComments) {
  const auto dir = testing::scratch_dir("io_pgm8");
  {
    std::ofstream f(dir / "b.pgm", std::ios::binary);
    f << "P5\n# comment\n2 2\n255\n";
    const unsigned char px[] = {0, 255, 51, 102};
    f.write(reinterpret_cast<const char*>(px), 4);
  }
  const Raster r = io::read_pgm(dir / "b.pgm");
  EXPECT_EQ(r(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.2);
}

TEST(Io, MalformedPgmIsRejected) {
  const auto dir = testing::scratch_dir("io_pgm_bad");
  {
    std::ofstream f(dir / "p2.pgm");
    f << "P2\n2 2\n255\n0 1 2 3\n";
  }
  {
    std::ofstream f(dir / "short.pgm", std::ios::binary);
    f << "P5\n4 4\n255\n";
    f.write("abc", 3);
  }
  EXPECT_THROW(io::read_pgm(dir / "p2.pgm"), IoError);
  EXPECT_THROW(io::read_pgm(dir / "short.pgm"), IoError);
  EXPECT_THROW(io::read_pgm(dir / "missing.pgm"), IoError);
}

TEST(Io, CaptureSetRoundTrip) {
  const auto dir = testing::scratch_dir("io_capture");
  const Raster scene = synth_scene(SceneKind::Terrain, 32, 1);
  const CaptureSet cs = capture_set(scene, {{0, 0}, {0.25, -1.5}, {1, 1}}, 2, 0.0, 0);
  const auto files = io::write_capture_set(dir, cs);
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(files.back().filename(), "manifest.csv");
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f));
  const CaptureSet back = io::read_capture_set(dir, 2);
  ASSERT_EQ(back.frames.size(), 3u);
  EXPECT_EQ(back.shifts[1], (Shift{0.25, -1.5}));
  EXPECT_LE(rmse(back.frames[2], cs.frames[2]), 1.0 / 65535.0);
}

TEST(Io, HistoryAndTrajectoryCsv) {
  IterationHistory h;
  h.records.push_back({0, {Eigen::VectorXd::Zero(2), 0.01}, 0.5, Phase::Model});
  h.records.push_back({1, {Eigen::VectorXd::Zero(2), 0.01}, 0.25, Phase::Hardware});
  std::ostringstream out;
  io::write_history_csv(out, h);
  EXPECT_EQ(out.str(), "iter,phase,rms_error\n0,model,0.5\n1,hardware,0.25\n");

  std::ostringstream traj;
  const Trajectory u{Eigen::Vector2d(1.0, 2.0), 0.01};
  const Trajectory yd{Eigen::Vector2d(0.5, 0.75), 0.01};
  const Trajectory y{Eigen::Vector2d(0.25, 0.75), 0.01};
  io::write_trajectory_csv(traj, u, yd, y);
  EXPECT_EQ(traj.str(), "k,u,y_d,y,e\n0,1,0.5,0.25,0.25\n1,2,0.75,0.75,0\n");
  EXPECT_THROW(io::write_trajectory_csv(traj, u, yd, {Eigen::VectorXd::Zero(3), 0.01}),
               ConfigError);
}

}  // namespace
}  // namespace scanopt
