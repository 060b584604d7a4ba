#pragma once

#include "scanopt/scan.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace scanopt {

/// Row-major grid of intensities. Scenes are normalized to [0, 1]; captures
/// with noise may leave that range.
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t width, std::size_t height, double fill = 0.0);
  Raster(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  double mean() const;
  double min() const;
  double max() const;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// sqrt(mean((a - b)^2)); throws ConfigError on size mismatch.
double rmse(const Raster& a, const Raster& b);

enum class SceneKind { Terrain, Bars };
std::string_view to_string(SceneKind kind);
std::optional<SceneKind> parse_scene_kind(std::string_view text);

/// Spatial frequencies of the bar target in cycles per high-resolution pixel.
inline constexpr double kBarLadder[] = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 3.0 / 8, 1.0 / 2};
inline constexpr double kDefaultContrastThreshold = 0.2;

/// Layout of the bar target: one horizontal block of rows per ladder
/// frequency, lowest frequency on top.
struct BarTarget {
  std::size_t size = 0;
  std::vector<double> frequencies;
  std::vector<std::size_t> row_begin;  // per block
  std::vector<std::size_t> row_end;    // per block, exclusive
  std::size_t margin = 0;              // rows trimmed at each block edge
  double threshold = kDefaultContrastThreshold;
};

BarTarget bar_target(std::size_t size, double threshold = kDefaultContrastThreshold);

/// Test scenes on a periodic size x size grid (size a power of two, >= 32).
///  - Terrain: crater-like radial bumps plus band-limited noise, min-max normalized.
///  - Bars: per block, 0.5 + 0.5 cos(2 pi f x) with f from kBarLadder.
Raster synth_scene(SceneKind kind, std::size_t size, std::uint64_t seed);

/// Circular translation: out(x, y) = in(x + dx, y + dy), by the DFT shift
/// theorem applied along each axis.
Raster fourier_shift(const Raster& image, Shift shift);

/// Circular rotation by integer offsets, out(x, y) = in(x + dx, y + dy).
Raster circular_shift(const Raster& image, long dx, long dy);

/// Mean of each q x q block.
Raster block_mean(const Raster& image, std::size_t q);

/// Every q-th sample starting at (0, 0).
Raster decimate(const Raster& image, std::size_t q);

/// Nearest-neighbour upsampling by pixel replication.
Raster upsample_replicate(const Raster& image, std::size_t q);

/// Low-resolution capture: Fourier shift, q x q block mean, then additive
/// Gaussian noise with standard deviation noise_sigma (seeded).
Raster capture(const Raster& scene, Shift shift, std::size_t q, double noise_sigma,
               std::uint64_t seed);

struct CaptureSet {
  std::vector<Raster> frames;
  std::vector<Shift> shifts;  // high-resolution pixels
  std::size_t q = 1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Per-frame seed derived from a set seed and frame index.
std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame);

CaptureSet capture_set(const Raster& scene, const std::vector<Shift>& shifts, std::size_t q,
                       double noise_sigma, std::uint64_t seed);

/// The q^2 integer offsets {0..q-1} x {0..q-1} in row-major order.
std::vector<Shift> interleave_shifts(std::size_t q);

/// Exact interleaving of q^2 frames whose shifts are the distinct integer
/// offsets {0..q-1}^2: frame sample (I, J) lands on fine site (qI + dx, qJ + dy).
/// Throws ContractError for any other shift set.
Raster shift_add_recon(const CaptureSet& cs);

/// Forward model used by least-squares reconstruction: decimate(shift(x)).
Raster observe(const Raster& fine, Shift shift, std::size_t q);

struct LsReconstruction {
  Raster image;
  std::size_t iterations = 0;
  bool converged = false;
  /// Norm of the full (data + regularization) residual before the first and
  /// after every iteration; its square is the objective value.
  std::vector<double> residual_norms;
  /// ||A^T r|| / ||A^T b|| after every iteration.
  std::vector<double> relative_gradients;
};

/// Minimizes sum_k ||frame_k - observe(x, s_k)||^2 + lambda ||grad x||^2
/// (periodic forward differences) by conjugate gradients on the normal
/// equations (CGLS), stopping at relative gradient < 1e-8 or max_iters.
LsReconstruction ls_recon(const CaptureSet& cs, double lambda, std::size_t max_iters);

struct ImprovementReport {
  double single_frame_cutoff = 0.0;  // cycles per high-resolution pixel
  double recon_cutoff = 0.0;
  double factor = 0.0;
  double rmse_single = 0.0;
  double rmse_recon = 0.0;
  std::vector<double> single_contrast;  // per ladder frequency
  std::vector<double> recon_contrast;
};

/// Modulation of each bar block at its own frequency: a least-squares fit of
/// a + b cos(2 pi f x) + c sin(2 pi f x) over the block interior gives
/// contrast sqrt(b^2 + c^2) / a, which equals (max - min) / (max + min) for a
/// clean sinusoid and ignores aliased energy at other frequencies.
std::vector<double> bar_contrast(const Raster& image, const BarTarget& target);

/// Highest ladder frequency whose contrast reaches the threshold; throws
/// NoResolvableFrequencyError when none does.
double resolvable_cutoff(const std::vector<double>& contrast, const BarTarget& target);

/// Compares a reconstruction with a single frame upsampled to the same size.
/// RMSE is measured against the bars scene of the target's size.
ImprovementReport measure_improvement(const Raster& recon, const Raster& single,
                                      const BarTarget& target);

}  // namespace scanopt
