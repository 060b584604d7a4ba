#include "scanopt/imaging.hpp"

#include "scanopt/errors.hpp"
#include "scanopt/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>

namespace scanopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kShiftTolerance = 1e-12;
constexpr double kCgTolerance = 1e-8;

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

bool is_integer(double v) { return std::abs(v - std::round(v)) <= kShiftTolerance; }

void check_divides(const Raster& image, std::size_t q) {
  if (q < 1) throw ConfigError("imaging.q", "downsample factor must be >= 1");
  if (image.width() % q != 0 || image.height() % q != 0) {
    throw ConfigError("imaging.q", "factor " + std::to_string(q) + " does not divide " +
                                       std::to_string(image.width()) + "x" +
                                       std::to_string(image.height()));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Signed periodic distance on a ring of length n.
double wrap_delta(double a, double b, double n) {
  double d = std::fmod(a - b, n);
  if (d > n / 2) d -= n;
  if (d < -n / 2) d += n;
  return d;
}

Raster terrain_scene(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double n = static_cast<double>(size);
  Raster img(size, size);

  const int craters = 10 + static_cast<int>(unit(rng) * 10);
  for (int c = 0; c < craters; ++c) {
    const double cx = unit(rng) * n;
    const double cy = unit(rng) * n;
    const double radius = n * (0.03 + 0.12 * unit(rng));
    const double depth = 0.5 + unit(rng);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double dx = wrap_delta(static_cast<double>(x), cx, n);
        const double dy = wrap_delta(static_cast<double>(y), cy, n);
        const double rho = std::hypot(dx, dy) / radius;
        double profile = 0.3 * std::exp(-std::pow((rho - 1.0) / 0.25, 2));  // rim
        if (rho < 1.0) profile -= 1.0 - rho * rho;                           // bowl
        img(x, y) += depth * profile;
      }
    }
  }

  // Band-limited noise: random low-order Fourier modes with 1/|k| amplitudes.
  constexpr int kMaxMode = 6;
  for (int ky = -kMaxMode; ky <= kMaxMode; ++ky) {
    for (int kx = 0; kx <= kMaxMode; ++kx) {
      if (kx == 0 && ky <= 0) continue;
      const double amp = 0.15 * unit(rng) / std::hypot(kx, ky);
      const double phase = kTwoPi * unit(rng);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          img(x, y) += amp * std::cos(kTwoPi * (kx * static_cast<double>(x) +
                                                 ky * static_cast<double>(y)) / n + phase);
        }
      }
    }
  }

  const double lo = img.min();
  const double span = img.max() - lo;
  for (auto& v : img.data()) v = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.5;
  return img;
}

Raster bars_scene(std::size_t size) {
  const BarTarget target = bar_target(size);
  Raster img(size, size);
  for (std::size_t b = 0; b < target.frequencies.size(); ++b) {
    const double f = target.frequencies[b];
    for (std::size_t y = target.row_begin[b]; y < target.row_end[b]; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        // Reduce the phase so samples are exactly periodic in x.
        const double cycles = std::fmod(f * static_cast<double>(x), 1.0);
        img(x, y) = 0.5 + 0.5 * std::cos(kTwoPi * cycles);
      }
    }
  }
  return img;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const Raster& r) {
  return {r.data().data(), static_cast<Eigen::Index>(r.size())};
}

Raster from_vector(const Eigen::VectorXd& v, std::size_t width, std::size_t height) {
  return Raster(width, height, std::vector<double>(v.data(), v.data() + v.size()));
}

// Transpose of observe(): scatter coarse samples onto the fine grid, then shift back.
Raster observe_adjoint(const Raster& coarse, Shift shift, std::size_t q, std::size_t width,
                       std::size_t height) {
  Raster fine(width, height);
  if (is_integer(shift.dx) && is_integer(shift.dy)) {
    const auto sx = std::lround(shift.dx);
    const auto sy = std::lround(shift.dy);
    const auto w = static_cast<long>(width);
    const auto h = static_cast<long>(height);
    for (std::size_t j = 0; j < coarse.height(); ++j) {
      for (std::size_t i = 0; i < coarse.width(); ++i) {
        const long x = ((static_cast<long>(q * i) + sx) % w + w) % w;
        const long y = ((static_cast<long>(q * j) + sy) % h + h) % h;
        fine(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) += coarse(i, j);
      }
    }
    return fine;
  }
  for (std::size_t j = 0; j < coarse.height(); ++j) {
    for (std::size_t i = 0; i < coarse.width(); ++i) fine(q * i, q * j) = coarse(i, j);
  }
  return fourier_shift(fine, {-shift.dx, -shift.dy});
}

// Stacked operator [observe(., s_1); ...; observe(., s_K); sqrt(lambda) Dx; sqrt(lambda) Dy].
class StackedOperator {
 public:
  StackedOperator(const CaptureSet& cs, double lambda)
      : cs_(cs),
        q_(cs.q),
        coarse_w_(cs.frames.front().width()),
        coarse_h_(cs.frames.front().height()),
        fine_w_(coarse_w_ * cs.q),
        fine_h_(coarse_h_ * cs.q),
        sqrt_lambda_(std::sqrt(lambda)) {}

  Eigen::Index coarse_size() const { return static_cast<Eigen::Index>(coarse_w_ * coarse_h_); }
  Eigen::Index fine_size() const { return static_cast<Eigen::Index>(fine_w_ * fine_h_); }
  bool regularized() const { return sqrt_lambda_ > 0.0; }
  Eigen::Index rows() const {
    return static_cast<Eigen::Index>(cs_.frames.size()) * coarse_size() +
           (regularized() ? 2 * fine_size() : 0);
  }
  std::size_t fine_width() const { return fine_w_; }
  std::size_t fine_height() const { return fine_h_; }

  Eigen::VectorXd data() const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows());
    for (std::size_t k = 0; k < cs_.frames.size(); ++k) {
      b.segment(static_cast<Eigen::Index>(k) * coarse_size(), coarse_size()) =
          as_vector(cs_.frames[k]);
    }
    return b;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(rows());
    const Raster fine = from_vector(x, fine_w_, fine_h_);
    for (std::size_t k = 0; k < cs_.frames.size(); ++k) {
      out.segment(static_cast<Eigen::Index>(k) * coarse_size(), coarse_size()) =
          as_vector(observe(fine, cs_.shifts[k], q_));
    }
    if (regularized()) {
      const Eigen::Index base = static_cast<Eigen::Index>(cs_.frames.size()) * coarse_size();
      for (std::size_t y = 0; y < fine_h_; ++y) {
        for (std::size_t x = 0; x < fine_w_; ++x) {
          const auto idx = static_cast<Eigen::Index>(y * fine_w_ + x);
          const double v = fine(x, y);
          out[base + idx] = sqrt_lambda_ * (fine((x + 1) % fine_w_, y) - v);
          out[base + fine_size() + idx] = sqrt_lambda_ * (fine(x, (y + 1) % fine_h_) - v);
        }
      }
    }
    return out;
  }

  Eigen::VectorXd adjoint(const Eigen::VectorXd& r) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fine_size());
    for (std::size_t k = 0; k < cs_.frames.size(); ++k) {
      const Eigen::VectorXd seg =
          r.segment(static_cast<Eigen::Index>(k) * coarse_size(), coarse_size());
      const Raster coarse = from_vector(seg, coarse_w_, coarse_h_);
      out += as_vector(observe_adjoint(coarse, cs_.shifts[k], q_, fine_w_, fine_h_));
    }
    if (regularized()) {
      const Eigen::Index base = static_cast<Eigen::Index>(cs_.frames.size()) * coarse_size();
      for (std::size_t y = 0; y < fine_h_; ++y) {
        for (std::size_t x = 0; x < fine_w_; ++x) {
          const auto idx = static_cast<Eigen::Index>(y * fine_w_ + x);
          const auto left = static_cast<Eigen::Index>(y * fine_w_ + (x + fine_w_ - 1) % fine_w_);
          const auto up = static_cast<Eigen::Index>(((y + fine_h_ - 1) % fine_h_) * fine_w_ + x);
          out[idx] += sqrt_lambda_ * (r[base + left] - r[base + idx]);
          out[idx] += sqrt_lambda_ * (r[base + fine_size() + up] - r[base + fine_size() + idx]);
        }
      }
    }
    return out;
  }

 private:
  const CaptureSet& cs_;
  std::size_t q_;
  std::size_t coarse_w_;
  std::size_t coarse_h_;
  std::size_t fine_w_;
  std::size_t fine_h_;
  double sqrt_lambda_;
};

void check_capture_set(const CaptureSet& cs) {
  if (cs.frames.empty()) throw ConfigError("captures", "capture set has no frames");
  if (cs.frames.size() != cs.shifts.size()) {
    throw ConfigError("captures", "frame and shift counts differ");
  }
  if (cs.q < 1) throw ConfigError("imaging.q", "downsample factor must be >= 1");
  for (const auto& f : cs.frames) {
    if (f.width() != cs.frames.front().width() || f.height() != cs.frames.front().height()) {
      throw ConfigError("captures", "frames differ in size");
    }
  }
  for (const auto& s : cs.shifts) {
    if (!std::isfinite(s.dx) || !std::isfinite(s.dy)) {
      throw ConfigError("captures", "shifts must be finite");
    }
  }
}

}  // namespace

Raster::Raster(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

Raster::Raster(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw ConfigError("raster", "data length does not match width * height");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ConfigError("raster", "contains non-finite values");
  }
}

double Raster::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double Raster::min() const { return *std::min_element(data_.begin(), data_.end()); }

double Raster::max() const { return *std::max_element(data_.begin(), data_.end()); }

double rmse(const Raster& a, const Raster& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ConfigError("raster", "size mismatch in rmse");
  }
  return std::sqrt((as_vector(a) - as_vector(b)).squaredNorm() / static_cast<double>(a.size()));
}

std::string_view to_string(SceneKind kind) { return kind == SceneKind::Bars ? "bars" : "terrain"; }

std::optional<SceneKind> parse_scene_kind(std::string_view text) {
  if (text == "bars") return SceneKind::Bars;
  if (text == "terrain") return SceneKind::Terrain;
  return std::nullopt;
}

BarTarget bar_target(std::size_t size, double threshold) {
  if (!is_power_of_two(size) || size < 32) {
    throw ConfigError("imaging.size", "scene size must be a power of two >= 32");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("imaging.contrast_threshold", "must lie in (0, 1]");
  }
  BarTarget t;
  t.size = size;
  t.frequencies.assign(std::begin(kBarLadder), std::end(kBarLadder));
  const std::size_t blocks = t.frequencies.size();
  for (std::size_t b = 0; b < blocks; ++b) {
    t.row_begin.push_back(b * size / blocks);
    t.row_end.push_back((b + 1) * size / blocks);
  }
  t.margin = (size / blocks) / 4;
  t.threshold = threshold;
  return t;
}

Raster synth_scene(SceneKind kind, std::size_t size, std::uint64_t seed) {
  if (!is_power_of_two(size) || size < 32) {
    throw ConfigError("imaging.size", "scene size must be a power of two >= 32");
  }
  return kind == SceneKind::Bars ? bars_scene(size) : terrain_scene(size, seed);
}

Raster fourier_shift(const Raster& image, Shift shift) {
  Raster out = image;
  const auto w = static_cast<Eigen::Index>(image.width());
  const auto h = static_cast<Eigen::Index>(image.height());
  if (shift.dx != 0.0) {
    for (std::size_t y = 0; y < image.height(); ++y) {
      Eigen::Map<Eigen::VectorXd> row(out.data().data() + y * image.width(), w);
      row = spectral::fourier_shift(Eigen::VectorXd(row), shift.dx);
    }
  }
  if (shift.dy != 0.0) {
    Eigen::VectorXd col(h);
    for (std::size_t x = 0; x < image.width(); ++x) {
      for (std::size_t y = 0; y < image.height(); ++y) col[static_cast<Eigen::Index>(y)] = out(x, y);
      col = spectral::fourier_shift(col, shift.dy);
      for (std::size_t y = 0; y < image.height(); ++y) out(x, y) = col[static_cast<Eigen::Index>(y)];
    }
  }
  return out;
}

Raster circular_shift(const Raster& image, long dx, long dy) {
  Raster out(image.width(), image.height());
  const auto w = static_cast<long>(image.width());
  const auto h = static_cast<long>(image.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const long sx = ((x + dx) % w + w) % w;
      const long sy = ((y + dy) % h + h) % h;
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
          image(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
    }
  }
  return out;
}

Raster block_mean(const Raster& image, std::size_t q) {
  check_divides(image, q);
  const std::size_t w = image.width() / q;
  const std::size_t h = image.height() / q;
  Raster out(w, h);
  const double norm = 1.0 / static_cast<double>(q * q);
  for (std::size_t j = 0; j < h; ++j) {
    for (std::size_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (std::size_t b = 0; b < q; ++b) {
        for (std::size_t a = 0; a < q; ++a) acc += image(q * i + a, q * j + b);
      }
      out(i, j) = acc * norm;
    }
  }
  return out;
}

Raster decimate(const Raster& image, std::size_t q) {
  check_divides(image, q);
  Raster out(image.width() / q, image.height() / q);
  for (std::size_t j = 0; j < out.height(); ++j) {
    for (std::size_t i = 0; i < out.width(); ++i) out(i, j) = image(q * i, q * j);
  }
  return out;
}

Raster upsample_replicate(const Raster& image, std::size_t q) {
  if (q < 1) throw ConfigError("imaging.q", "factor must be >= 1");
  Raster out(image.width() * q, image.height() * q);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) out(x, y) = image(x / q, y / q);
  }
  return out;
}

Raster capture(const Raster& scene, Shift shift, std::size_t q, double noise_sigma,
               std::uint64_t seed) {
  check_divides(scene, q);
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("imaging.noise_sigma", "must be finite and >= 0");
  }
  Raster frame = block_mean(fourier_shift(scene, shift), q);
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (auto& v : frame.data()) v += noise(rng);
  }
  return frame;
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(frame) + 1));
}

CaptureSet capture_set(const Raster& scene, const std::vector<Shift>& shifts, std::size_t q,
                       double noise_sigma, std::uint64_t seed) {
  CaptureSet cs{{}, shifts, q, noise_sigma, seed};
  cs.frames.reserve(shifts.size());
  for (std::size_t k = 0; k < shifts.size(); ++k) {
    cs.frames.push_back(capture(scene, shifts[k], q, noise_sigma, frame_seed(seed, k)));
  }
  return cs;
}

std::vector<Shift> interleave_shifts(std::size_t q) {
  std::vector<Shift> shifts;
  for (std::size_t dy = 0; dy < q; ++dy) {
    for (std::size_t dx = 0; dx < q; ++dx) {
      shifts.push_back({static_cast<double>(dx), static_cast<double>(dy)});
    }
  }
  return shifts;
}

Raster shift_add_recon(const CaptureSet& cs) {
  check_capture_set(cs);
  const std::size_t q = cs.q;
  if (cs.frames.size() != q * q) {
    throw ContractError("shift_add_recon needs exactly q^2 = " + std::to_string(q * q) +
                        " frames; use ls_recon for other capture sets");
  }
  std::set<std::pair<long, long>> seen;
  for (const auto& s : cs.shifts) {
    const bool ok = is_integer(s.dx) && is_integer(s.dy) && std::lround(s.dx) >= 0 &&
                    std::lround(s.dy) >= 0 && std::lround(s.dx) < static_cast<long>(q) &&
                    std::lround(s.dy) < static_cast<long>(q) &&
                    seen.insert({std::lround(s.dx), std::lround(s.dy)}).second;
    if (!ok) {
      throw ContractError("shift set is not an exact interleave of {0.." + std::to_string(q - 1) +
                          "}^2; use ls_recon for arbitrary shifts");
    }
  }
  const auto& first = cs.frames.front();
  Raster out(first.width() * q, first.height() * q);
  for (std::size_t k = 0; k < cs.frames.size(); ++k) {
    const auto dx = static_cast<std::size_t>(std::lround(cs.shifts[k].dx));
    const auto dy = static_cast<std::size_t>(std::lround(cs.shifts[k].dy));
    for (std::size_t j = 0; j < first.height(); ++j) {
      for (std::size_t i = 0; i < first.width(); ++i) {
        out(q * i + dx, q * j + dy) = cs.frames[k](i, j);
      }
    }
  }
  return out;
}

Raster observe(const Raster& fine, Shift shift, std::size_t q) {
  check_divides(fine, q);
  if (is_integer(shift.dx) && is_integer(shift.dy)) {
    return decimate(circular_shift(fine, std::lround(shift.dx), std::lround(shift.dy)), q);
  }
  return decimate(fourier_shift(fine, shift), q);
}

LsReconstruction ls_recon(const CaptureSet& cs, double lambda, std::size_t max_iters) {
  check_capture_set(cs);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("imaging.lambda", "must be finite and >= 0");
  }
  const StackedOperator op(cs, lambda);
  LsReconstruction result;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(op.fine_size());
  Eigen::VectorXd r = op.data();
  Eigen::VectorXd s = op.adjoint(r);
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  const double gamma0 = gamma;
  result.residual_norms.push_back(r.norm());

  if (gamma0 == 0.0) {
    result.converged = true;
  } else {
    for (std::size_t it = 0; it < max_iters; ++it) {
      const Eigen::VectorXd ap = op.apply(p);
      const double denom = ap.squaredNorm();
      if (denom == 0.0) break;
      const double alpha = gamma / denom;
      x += alpha * p;
      r -= alpha * ap;
      s = op.adjoint(r);
      const double gamma_next = s.squaredNorm();
      ++result.iterations;
      result.residual_norms.push_back(r.norm());
      const double rel = std::sqrt(gamma_next / gamma0);
      result.relative_gradients.push_back(rel);
      if (rel < kCgTolerance) {
        result.converged = true;
        break;
      }
      p = s + (gamma_next / gamma) * p;
      gamma = gamma_next;
    }
  }
  result.image = from_vector(x, op.fine_width(), op.fine_height());
  return result;
}

std::vector<double> bar_contrast(const Raster& image, const BarTarget& target) {
  if (image.width() != target.size || image.height() != target.size) {
    throw ConfigError("raster", "image size does not match the bar target");
  }
  std::vector<double> contrast;
  contrast.reserve(target.frequencies.size());
  for (std::size_t b = 0; b < target.frequencies.size(); ++b) {
    const double f = target.frequencies[b];
    double sum = 0.0, sum_c = 0.0, sum_s = 0.0, norm_c = 0.0, norm_s = 0.0;
    std::size_t count = 0;
    for (std::size_t y = target.row_begin[b] + target.margin;
         y < target.row_end[b] - target.margin; ++y) {
      for (std::size_t x = 0; x < image.width(); ++x) {
        const double phase = kTwoPi * std::fmod(f * static_cast<double>(x), 1.0);
        const double c = std::cos(phase);
        const double s = std::sin(phase);
        const double v = image(x, y);
        sum += v;
        sum_c += v * c;
        sum_s += v * s;
        norm_c += c * c;
        norm_s += s * s;
        ++count;
      }
    }
    // f * width is an integer, so {1, cos, sin} are orthogonal over full rows.
    const double a = sum / static_cast<double>(count);
    const double bc = norm_c > 1e-9 * static_cast<double>(count) ? sum_c / norm_c : 0.0;
    const double bs = norm_s > 1e-9 * static_cast<double>(count) ? sum_s / norm_s : 0.0;
    contrast.push_back(a > 0.0 ? std::hypot(bc, bs) / a : 0.0);
  }
  return contrast;
}

double resolvable_cutoff(const std::vector<double>& contrast, const BarTarget& target) {
  double cutoff = 0.0;
  for (std::size_t b = 0; b < contrast.size(); ++b) {
    if (contrast[b] >= target.threshold) cutoff = std::max(cutoff, target.frequencies[b]);
  }
  if (cutoff == 0.0) {
    throw NoResolvableFrequencyError("no resolvable frequency: no bar block reaches contrast " +
                                     std::to_string(target.threshold));
  }
  return cutoff;
}

ImprovementReport measure_improvement(const Raster& recon, const Raster& single,
                                      const BarTarget& target) {
  ImprovementReport report;
  report.recon_contrast = bar_contrast(recon, target);
  report.single_contrast = bar_contrast(single, target);
  report.recon_cutoff = resolvable_cutoff(report.recon_contrast, target);
  report.single_frame_cutoff = resolvable_cutoff(report.single_contrast, target);
  report.factor = report.recon_cutoff / report.single_frame_cutoff;
  const Raster truth = synth_scene(SceneKind::Bars, target.size, 0);
  report.rmse_recon = rmse(recon, truth);
  report.rmse_single = rmse(single, truth);
  return report;
}

}  // namespace scanopt
