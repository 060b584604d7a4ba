#include "scanopt/io.hpp"

#include "scanopt/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scanopt::io {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("failed to format number");
  return std::string(buf.data(), ptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_history_csv(std::ostream& out, const IterationHistory& history) {
  out << "iter,phase,rms_error\n";
  for (const auto& r : history.records) {
    out << r.index << ',' << to_string(r.phase) << ',' << format_double(r.rms_error) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& command, const Trajectory& desired,
                          const Trajectory& output) {
  if (command.size() != desired.size() || output.size() != desired.size()) {
    throw ConfigError("trajectory", "command, desired and output lengths differ");
  }
  out << "k,u,y_d,y,e\n";
  for (Eigen::Index k = 0; k < desired.size(); ++k) {
    out << k << ',' << format_double(command[k]) << ',' << format_double(desired[k]) << ','
        << format_double(output[k]) << ',' << format_double(desired[k] - output[k]) << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const Raster& image) {
  auto out = open_output(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n65535\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(image.size() * 2);
  for (double v : image.data()) {
    const auto level = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
    bytes.push_back(static_cast<unsigned char>(level >> 8));
    bytes.push_back(static_cast<unsigned char>(level & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

std::size_t parse_size(const std::string& token, const std::filesystem::path& path) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  return v;
}

}  // namespace

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  const std::size_t width = parse_size(next_token(in), path);
  const std::size_t height = parse_size(next_token(in), path);
  const std::size_t maxval = parse_size(next_token(in), path);
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    throw IoError(path.string() + ": unsupported PGM dimensions or maxval");
  }
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> bytes(width * height * bytes_per_sample);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw IoError(path.string() + ": truncated PGM data");
  }
  std::vector<double> data(width * height);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const unsigned level = bytes_per_sample == 2
                               ? (static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1]
                               : bytes[i];
    data[i] = static_cast<double>(level) / static_cast<double>(maxval);
  }
  return Raster(width, height, std::move(data));
}

std::vector<std::filesystem::path> write_capture_set(const std::filesystem::path& dir,
                                                     const CaptureSet& cs) {
  std::vector<std::filesystem::path> written;
  std::ostringstream manifest;
  manifest << "frame,dx,dy\n";
  for (std::size_t k = 0; k < cs.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.pgm", k);
    const auto path = dir / name;
    write_pgm(path, cs.frames[k]);
    written.push_back(path);
    manifest << k << ',' << format_double(cs.shifts[k].dx) << ','
             << format_double(cs.shifts[k].dy) << '\n';
  }
  const auto manifest_path = dir / "manifest.csv";
  auto out = open_output(manifest_path);
  out << manifest.str();
  written.push_back(manifest_path);
  return written;
}

CaptureSet read_capture_set(const std::filesystem::path& dir, std::size_t q) {
  std::ifstream in(dir / "manifest.csv");
  if (!in) throw IoError("cannot open " + (dir / "manifest.csv").string());
  CaptureSet cs;
  cs.q = q;
  std::string line;
  std::getline(in, line);
  if (line.rfind("frame,dx,dy", 0) != 0) throw IoError("manifest.csv: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string frame, dx, dy;
    if (!std::getline(row, frame, ',') || !std::getline(row, dx, ',') ||
        !std::getline(row, dy, ',')) {
      throw IoError("manifest.csv: malformed row '" + line + "'");
    }
    Shift s;
    auto parse = [&](const std::string& t, double& v) {
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc()) throw IoError("manifest.csv: bad number '" + t + "'");
    };
    parse(dx, s.dx);
    parse(dy, s.dy);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.pgm", parse_size(frame, dir / "manifest.csv"));
    cs.frames.push_back(read_pgm(dir / name));
    cs.shifts.push_back(s);
  }
  return cs;
}

}  // namespace scanopt::io
