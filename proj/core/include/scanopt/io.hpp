#pragma once

#include "scanopt/ilc.hpp"
#include "scanopt/imaging.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace scanopt::io {

/// Locale-independent decimal text with 17 significant digits.
std::string format_double(double value);

/// Columns: iter, phase, rms_error.
void write_history_csv(std::ostream& out, const IterationHistory& history);

/// Columns: k, u, y_d, y, e (k zero-based).
void write_trajectory_csv(std::ostream& out, const Trajectory& command, const Trajectory& desired,
                          const Trajectory& output);

/// Binary PGM (P5), maxval 65535, big-endian samples. Values are clamped to
/// [0, 1] and scaled to the 16-bit range.
void write_pgm(const std::filesystem::path& path, const Raster& image);
Raster read_pgm(const std::filesystem::path& path);

/// Writes frame_NNN.pgm files plus manifest.csv (frame, dx, dy) into `dir`.
/// Returns the paths written, manifest last.
std::vector<std::filesystem::path> write_capture_set(const std::filesystem::path& dir,
                                                     const CaptureSet& cs);

/// Reads a directory produced by write_capture_set. The downsample factor is
/// not stored on disk and must be supplied.
CaptureSet read_capture_set(const std::filesystem::path& dir, std::size_t q);

/// Opens a file for writing or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace scanopt::io
