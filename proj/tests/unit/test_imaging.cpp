#include "scanopt/errors.hpp"
#include "scanopt/imaging.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace scanopt {
namespace {

Raster random_raster(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Raster r(w, h);
  for (auto& v : r.data()) v = unit(rng);
  return r;
}

double max_abs_diff(const Raster& a, const Raster& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double dot(const Raster& a, const Raster& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

TEST(Imaging, RasterRejectsBadData) {
  EXPECT_THROW(Raster(2, 2, std::vector<double>(3)), ConfigError);
  EXPECT_THROW(Raster(1, 1, std::vector<double>{std::nan("")}), ConfigError);
}

TEST(Imaging, BarsLowestBlockHasFullContrast) {
  const Raster bars = synth_scene(SceneKind::Bars, 128, 0);
  const BarTarget t = bar_target(128);
  double lo = 1.0, hi = 0.0;
  for (std::size_t y = t.row_begin[0]; y < t.row_end[0]; ++y) {
    for (std::size_t x = 0; x < 128; ++x) {
      lo = std::min(lo, bars(x, y));
      hi = std::max(hi, bars(x, y));
    }
  }
  EXPECT_NEAR((hi - lo) / (hi + lo), 1.0, 1e-9);
}

TEST(Imaging, ScenesAreDeterministicAndNormalized) {
  for (auto kind : {SceneKind::Bars, SceneKind::Terrain}) {
    const Raster a = synth_scene(kind, 64, 17);
    EXPECT_EQ(a, synth_scene(kind, 64, 17));
    EXPECT_GE(a.min(), 0.0);
    EXPECT_LE(a.max(), 1.0);
  }
  EXPECT_NE(synth_scene(SceneKind::Terrain, 64, 1), synth_scene(SceneKind::Terrain, 64, 2));
  EXPECT_THROW(synth_scene(SceneKind::Bars, 48, 0), ConfigError);
}

TEST(Imaging, BarTargetLayout) {
  const BarTarget t = bar_target(256);
  ASSERT_EQ(t.frequencies.size(), 6u);
  for (std::size_t b = 0; b < 6; ++b) {
    EXPECT_EQ(t.row_begin[b], b * 256 / 6);
    EXPECT_EQ(t.row_end[b], (b + 1) * 256 / 6);
  }
  EXPECT_EQ(t.margin, (256 / 6) / 4);
}

TEST(Imaging, IdentityCapture) {
  const Raster s = random_raster(32, 32, 1);
  EXPECT_EQ(capture(s, {}, 1, 0.0, 0), s);
}

TEST(Imaging, ConstantSceneStaysConstant) {
  const Raster s(32, 32, 0.375);
  for (Shift sh : {Shift{0.3, -1.7}, Shift{5.0, 0.5}}) {
    const Raster f = capture(s, sh, 2, 0.0, 0);
    for (double v : f.data()) EXPECT_NEAR(v, 0.375, 1e-14);
  }
}

TEST(Imaging, CaptureMatchesBlockMeanOracle) {
  const Raster s = random_raster(32, 32, 2);
  const Raster f = capture(s, {}, 2, 0.0, 0);
  ASSERT_EQ(f.width(), 16u);
  for (std::size_t j = 0; j < 16; ++j) {
    for (std::size_t i = 0; i < 16; ++i) {
      const double oracle =
          (s(2 * i, 2 * j) + s(2 * i + 1, 2 * j) + s(2 * i, 2 * j + 1) + s(2 * i + 1, 2 * j + 1)) / 4;
      EXPECT_NEAR(f(i, j), oracle, 1e-12);
    }
  }
}

TEST(Imaging, CaptureIsLinear) {
  const Raster a = random_raster(32, 32, 3), b = random_raster(32, 32, 4);
  Raster sum(32, 32);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] = 2.0 * a.data()[i] - 0.5 * b.data()[i];
  const Shift sh{0.37, 1.61};
  const Raster fa = capture(a, sh, 2, 0.0, 0), fb = capture(b, sh, 2, 0.0, 0);
  const Raster fs = capture(sum, sh, 2, 0.0, 0);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    EXPECT_NEAR(fs.data()[i], 2.0 * fa.data()[i] - 0.5 * fb.data()[i], 1e-10);
  }
}

TEST(Imaging, NoiseIsSeededAndHasRequestedSpread) {
  const Raster s(64, 64, 0.5);
  const Raster a = capture(s, {}, 1, 0.1, 7), b = capture(s, {}, 1, 0.1, 7);
  const Raster c = capture(s, {}, 1, 0.1, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NEAR(rmse(a, s), 0.1, 0.005);
}

TEST(Imaging, IntegerFourierShiftEqualsCircularShift) {
  const Raster s = random_raster(32, 16, 5);
  for (auto [dx, dy] : {std::pair{1L, 0L}, {0L, 3L}, {-5L, 7L}, {31L, -16L}}) {
    const Raster f = fourier_shift(s, {static_cast<double>(dx), static_cast<double>(dy)});
    EXPECT_LE(max_abs_diff(f, circular_shift(s, dx, dy)), 1e-10);
  }
  // Camera translation semantics: out(x) = in(x + s).
  const Raster one = circular_shift(s, 1, 0);
  EXPECT_EQ(one(0, 0), s(1, 0));
}

// Removes the (-1)^x and (-1)^y components of an even-sized raster.
Raster without_nyquist(Raster r) {
  const std::size_t w = r.width(), h = r.height();
  for (std::size_t y = 0; y < h; ++y) {
    double c = 0.0;
    for (std::size_t x = 0; x < w; ++x) c += (x % 2 ? -1.0 : 1.0) * r(x, y);
    for (std::size_t x = 0; x < w; ++x) r(x, y) -= (x % 2 ? -1.0 : 1.0) * c / static_cast<double>(w);
  }
  for (std::size_t x = 0; x < w; ++x) {
    double c = 0.0;
    for (std::size_t y = 0; y < h; ++y) c += (y % 2 ? -1.0 : 1.0) * r(x, y);
    for (std::size_t y = 0; y < h; ++y) r(x, y) -= (y % 2 ? -1.0 : 1.0) * c / static_cast<double>(h);
  }
  return r;
}

TEST(Imaging, FourierShiftsComposeAndHaveAdjoint) {
  const Raster s = without_nyquist(random_raster(32, 32, 6)), t = random_raster(32, 32, 7);
  const Shift a{0.3, -0.45}, b{0.5, 0.2};
  // Composition holds away from the real-valued Nyquist bin.
  const Raster ab = fourier_shift(fourier_shift(s, a), b);
  EXPECT_LE(max_abs_diff(ab, fourier_shift(s, {a.dx + b.dx, a.dy + b.dy})), 1e-12);
  // <S_a x, y> = <x, S_-a y>, including the Nyquist bin at half-pixel shifts.
  for (Shift sh : {a, b, Shift{0.5, 0.5}}) {
    EXPECT_NEAR(dot(fourier_shift(s, sh), t), dot(s, fourier_shift(t, {-sh.dx, -sh.dy})), 1e-10);
  }
}

Raster direct_interleave_oracle(const CaptureSet& cs) {
  const std::size_t w = cs.frames[0].width(), h = cs.frames[0].height();
  Raster out(2 * w, 2 * h);
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t ox = static_cast<std::size_t>(cs.shifts[k].dx);
    const std::size_t oy = static_cast<std::size_t>(cs.shifts[k].dy);
    for (std::size_t y = oy; y < 2 * h; y += 2) {
      for (std::size_t x = ox; x < 2 * w; x += 2) out(x, y) = cs.frames[k]((x - ox) / 2, (y - oy) / 2);
    }
  }
  return out;
}

TEST(Imaging, ShiftAddMatchesDirectIndexingOracle) {
  const Raster scene = synth_scene(SceneKind::Terrain, 32, 3);
  const CaptureSet cs = capture_set(scene, interleave_shifts(2), 2, 0.0, 0);
  const Raster recon = shift_add_recon(cs);
  EXPECT_LE(max_abs_diff(recon, direct_interleave_oracle(cs)), 1e-12);
  double frame_mean = 0.0;
  for (const auto& f : cs.frames) frame_mean += f.mean() / 4.0;
  EXPECT_NEAR(recon.mean(), frame_mean, 1e-12);
}

TEST(Imaging, ShiftAddSingleFrameIsIdentity) {
  const Raster s = random_raster(16, 16, 9);
  const CaptureSet cs = capture_set(s, {{0.0, 0.0}}, 1, 0.0, 0);
  EXPECT_EQ(shift_add_recon(cs), s);
}

TEST(Imaging, ShiftAddRejectsNonInterleavingShifts) {
  const Raster s = random_raster(16, 16, 10);
  EXPECT_THROW(shift_add_recon(capture_set(s, {{0, 0}, {0.5, 0}, {0, 1}, {1, 1}}, 2, 0.0, 0)),
               ContractError);
  EXPECT_THROW(shift_add_recon(capture_set(s, {{0, 0}, {1, 0}, {0, 1}}, 2, 0.0, 0)), ContractError);
  EXPECT_THROW(shift_add_recon(capture_set(s, {{0, 0}, {0, 0}, {0, 1}, {1, 1}}, 2, 0.0, 0)),
               ContractError);
}

TEST(Imaging, ShiftAddIsConsistentWithTheObservationModel) {
  const Raster scene = synth_scene(SceneKind::Terrain, 32, 4);
  const CaptureSet cs = capture_set(scene, interleave_shifts(2), 2, 0.0, 0);
  const Raster recon = shift_add_recon(cs);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LE(max_abs_diff(observe(recon, cs.shifts[k], 2), cs.frames[k]), 1e-10);
  }
}

TEST(Imaging, LsReconOfZeroFramesIsZero) {
  const CaptureSet cs = capture_set(Raster(16, 16, 0.0), interleave_shifts(2), 2, 0.0, 0);
  for (double lambda : {0.0, 1.0}) {
    const auto r = ls_recon(cs, lambda, 50);
    for (double v : r.image.data()) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(r.converged);
  }
}

TEST(Imaging, LsReconWithoutRegularizationEqualsShiftAdd) {
  const Raster scene = synth_scene(SceneKind::Terrain, 32, 5);
  const CaptureSet cs = capture_set(scene, interleave_shifts(2), 2, 0.0, 0);
  const auto r = ls_recon(cs, 0.0, 200);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(rmse(r.image, shift_add_recon(cs)), 1e-6);
}

TEST(Imaging, LsReconResidualIsMonotoneAndMeanPreserved) {
  const Raster scene = synth_scene(SceneKind::Terrain, 64, 6);
  const std::vector<Shift> shifts{{0.0, 0.0}, {0.37, 0.1}, {1.2, 0.8}, {0.6, 1.45}, {-0.3, 0.55}};
  const CaptureSet cs = capture_set(scene, shifts, 2, 0.0, 1);
  for (double lambda : {0.0, 1e-3, 0.1}) {
    const auto r = ls_recon(cs, lambda, 300);
    ASSERT_GE(r.residual_norms.size(), 2u);
    for (std::size_t i = 1; i < r.residual_norms.size(); ++i) {
      EXPECT_LE(r.residual_norms[i], r.residual_norms[i - 1] * (1.0 + 1e-12));
    }
    EXPECT_LE(r.residual_norms.back(), r.residual_norms.front());
    if (lambda == 0.0) {
      EXPECT_NEAR(r.image.mean(), scene.mean(), 1e-6);
    }
  }
}

TEST(Imaging, RegularizedInterleaveReconstructionPreservesMean) {
  const Raster scene = synth_scene(SceneKind::Terrain, 64, 7);
  const CaptureSet cs = capture_set(scene, interleave_shifts(2), 2, 0.0, 0);
  for (double lambda : {0.0, 1e-2, 1.0}) {
    EXPECT_NEAR(ls_recon(cs, lambda, 300).image.mean(), scene.mean(), 1e-6) << lambda;
  }
}

TEST(Imaging, LsReconHandlesIrregularShifts) {
  // Noiseless frames from the decimation model itself are reproduced.
  const Raster fine = synth_scene(SceneKind::Terrain, 32, 8);
  const std::vector<Shift> shifts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}};
  CaptureSet cs{{}, shifts, 2, 0.0, 0};
  for (const auto& s : shifts) cs.frames.push_back(observe(fine, s, 2));
  const auto r = ls_recon(cs, 0.0, 400);
  EXPECT_LE(rmse(r.image, fine), 1e-6);
}

TEST(Imaging, ContrastOfPureBars) {
  const BarTarget t = bar_target(128);
  const auto c = bar_contrast(synth_scene(SceneKind::Bars, 128, 0), t);
  for (std::size_t b = 0; b + 1 < c.size(); ++b) EXPECT_NEAR(c[b], 1.0, 1e-9);
  EXPECT_NEAR(resolvable_cutoff(c, t), 0.5, 0.0);
}

TEST(Imaging, MeasureImprovementIdentityIsOne) {
  const Raster bars = synth_scene(SceneKind::Bars, 64, 0);
  const Raster single = upsample_replicate(capture(bars, {}, 2, 0.0, 0), 2);
  const auto rep = measure_improvement(single, single, bar_target(64));
  EXPECT_EQ(rep.factor, 1.0);
  EXPECT_EQ(rep.rmse_recon, rep.rmse_single);
}

TEST(Imaging, ConstantImageHasNoResolvableFrequency) {
  const Raster flat(64, 64, 0.5);
  EXPECT_THROW(measure_improvement(flat, flat, bar_target(64)), NoResolvableFrequencyError);
}

TEST(Imaging, BlockHelpers) {
  const Raster s = random_raster(8, 8, 12);
  const Raster up = upsample_replicate(block_mean(s, 2), 2);
  EXPECT_NEAR(up.mean(), s.mean(), 1e-14);
  EXPECT_EQ(decimate(s, 2)(1, 2), s(2, 4));
  EXPECT_THROW(block_mean(Raster(6, 6), 4), ConfigError);
}

}  // namespace
}  // namespace scanopt
