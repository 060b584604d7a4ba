#include "scanopt/config.hpp"

#include "scanopt/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace scanopt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  return static_cast<std::size_t>(parse_u64(key, text));
}

// Angle literal: a number, or [coef]pi[/den] such as "2pi/3".
double parse_angle(const std::string& key, const std::string& text) {
  const auto pi_pos = text.find("pi");
  if (pi_pos == std::string::npos) return parse_double(key, text);
  const std::string coef = trim(text.substr(0, pi_pos));
  const std::string rest = trim(text.substr(pi_pos + 2));
  double value = std::numbers::pi;
  if (!coef.empty()) value *= coef == "-" ? -1.0 : parse_double(key, coef);
  if (!rest.empty()) {
    if (rest.front() != '/') throw ConfigError(key, "malformed angle '" + text + "'");
    value /= parse_double(key, trim(rest.substr(1)));
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(key, part));
  return out;
}

Eigen::MatrixXd parse_matrix(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(text, ';')) rows.push_back(parse_list(key, row));
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigError(key, "matrix rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Eigen::VectorXd parse_vector(const std::string& key, const std::string& text) {
  // Accept either "1, 2, 3" or "1; 2; 3".
  std::string flat = text;
  std::replace(flat.begin(), flat.end(), ';', ',');
  const auto values = parse_list(key, flat);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

void add_plant_keys(std::map<std::string, Setter>& keys, const std::string& prefix,
                    PlantConfig ExperimentConfig::*member) {
  auto plant = [member](ExperimentConfig& c) -> PlantConfig& { return c.*member; };
  keys[prefix + ".kind"] = [plant](ExperimentConfig& c, const std::string& k, const std::string& v) {
    if (v == "servo") plant(c).discrete = false;
    else if (v == "discrete") plant(c).discrete = true;
    else throw ConfigError(k, "expected 'servo' or 'discrete', got '" + v + "'");
  };
  keys[prefix + ".dt"] = [plant](ExperimentConfig& c, const std::string& k, const std::string& v) {
    plant(c).dt = parse_double(k, v);
  };
  const std::pair<const char*, double ServoParams::*> servo_fields[] = {
      {".gain", &ServoParams::gain},         {".lag_tau", &ServoParams::lag_tau},
      {".wn", &ServoParams::wn},             {".zeta", &ServoParams::zeta},
      {".extra_wn", &ServoParams::extra_wn}, {".extra_zeta", &ServoParams::extra_zeta}};
  for (const auto& [suffix, field] : servo_fields) {
    keys[prefix + suffix] = [plant, field](ExperimentConfig& c, const std::string& k,
                                           const std::string& v) {
      plant(c).servo.*field = parse_double(k, v);
    };
  }
  keys[prefix + ".a"] = [plant](ExperimentConfig& c, const std::string& k, const std::string& v) {
    plant(c).a = parse_matrix(k, v);
  };
  keys[prefix + ".b"] = [plant](ExperimentConfig& c, const std::string& k, const std::string& v) {
    plant(c).b = parse_vector(k, v);
  };
  keys[prefix + ".c"] = [plant](ExperimentConfig& c, const std::string& k, const std::string& v) {
    plant(c).c = parse_vector(k, v).transpose();
  };
}

const std::map<std::string, Setter>& model_keys() {
  static const auto keys = [] {
    std::map<std::string, Setter> k;
    add_plant_keys(k, "plant", &ExperimentConfig::model);
    return k;
  }();
  return keys;
}

const std::map<std::string, Setter>& other_keys() {
  static const auto keys = [] {
    std::map<std::string, Setter> k;
    add_plant_keys(k, "world", &ExperimentConfig::world);
    using C = ExperimentConfig;
    using S = const std::string&;
    auto real = [](double C::*field) {
      return [field](C& c, S key, S v) { c.*field = parse_double(key, v); };
    };
    auto count = [](std::size_t C::*field) {
      return [field](C& c, S key, S v) { c.*field = parse_count(key, v); };
    };

    k["world.saturation"] = [](C& c, S key, S v) { c.saturation = parse_double(key, v); };

    k["ilc.law"] = [](C& c, S key, S v) {
      const auto kind = parse_law_kind(v);
      if (!kind) {
        throw ConfigError(key, "unknown law '" + v +
                                   "' (transpose, partial_isometry, inverse, norm_optimal, "
                                   "circulant_inverse)");
      }
      c.law.kind = *kind;
    };
    k["ilc.gain"] = [](C& c, S key, S v) { c.law.gain = parse_double(key, v); };
    k["ilc.gain_fraction"] = [](C& c, S key, S v) { c.gain_fraction = parse_double(key, v); };
    k["ilc.weight"] = [](C& c, S key, S v) { c.law.weight = parse_double(key, v); };
    k["ilc.cutoff"] = [](C& c, S key, S v) { c.law.cutoff = parse_double(key, v); };
    k["ilc.filter_cutoff"] = [](C& c, S key, S v) {
      c.ilc.filter_cutoff = parse_double(key, v);
    };
    k["ilc.tol"] = [](C& c, S key, S v) { c.ilc.tol = parse_double(key, v); };
    k["ilc.max_model_iters"] = [](C& c, S key, S v) { c.ilc.max_model_iters = parse_count(key, v); };
    k["ilc.max_hw_iters"] = [](C& c, S key, S v) { c.ilc.max_hw_iters = parse_count(key, v); };

    k["scan.amplitude"] = real(&C::amplitude);
    k["scan.period"] = count(&C::period);
    k["scan.periods"] = count(&C::periods);
    k["scan.captures"] = count(&C::captures);
    k["scan.capture_indices"] = [](C& c, S key, S v) {
      c.capture_indices.clear();
      for (const auto& part : split(v, ',')) c.capture_indices.push_back(parse_count(key, part));
    };
    k["scan.trajectory_file"] = [](C& c, S, S v) { c.trajectory_file = v; };

    k["geometry.shift_gain"] = [](C& c, S key, S v) {
      c.geometry.shift_gain = parse_double(key, v);
    };
    k["geometry.axis"] = [](C& c, S key, S v) {
      const auto axis = parse_axis(v);
      if (!axis) throw ConfigError(key, "expected 'horizontal' or 'vertical'");
      c.geometry.axis = *axis;
    };

    k["limits.max_velocity"] = [](C& c, S key, S v) { c.limits.max_velocity = parse_double(key, v); };
    k["limits.max_acceleration"] = [](C& c, S key, S v) {
      c.limits.max_acceleration = parse_double(key, v);
    };
    k["limits.time_budget"] = [](C& c, S key, S v) { c.limits.time_budget = parse_double(key, v); };

    k["imaging.scene"] = [](C& c, S key, S v) {
      const auto kind = parse_scene_kind(v);
      if (!kind) throw ConfigError(key, "expected 'bars' or 'terrain'");
      c.scene = *kind;
    };
    k["imaging.size"] = count(&C::size);
    k["imaging.q"] = count(&C::q);
    k["imaging.noise_sigma"] = real(&C::noise_sigma);
    k["imaging.lambda"] = real(&C::lambda);
    k["imaging.max_cg_iters"] = count(&C::max_cg_iters);
    k["imaging.contrast_threshold"] = real(&C::contrast_threshold);
    k["imaging.shift_error_std"] = real(&C::shift_error_std);
    k["imaging.shifts"] = [](C& c, S key, S v) {
      c.shifts.clear();
      for (const auto& pair : split(v, ';')) {
        const auto xy = parse_list(key, pair);
        if (xy.size() != 2) throw ConfigError(key, "each shift needs 'dx, dy'");
        c.shifts.push_back({xy[0], xy[1]});
      }
    };

    k["optimize.amplitudes"] = [](C& c, S key, S v) { c.amplitudes = parse_list(key, v); };
    k["optimize.periods"] = [](C& c, S key, S v) {
      c.period_grid.clear();
      for (const auto& part : split(v, ',')) c.period_grid.push_back(parse_count(key, part));
    };
    k["optimize.threads"] = count(&C::threads);

    k["sim.samples"] = count(&C::sim_samples);
    k["sim.f0"] = [](C& c, S key, S v) { c.sim.f0 = parse_double(key, v); };
    k["sim.fc"] = [](C& c, S key, S v) { c.sim.fc = parse_double(key, v); };
    k["sim.m"] = [](C& c, S key, S v) { c.sim.modulation = parse_double(key, v); };
    k["sim.phases"] = [](C& c, S key, S v) {
      const auto parts = split(v, ',');
      if (parts.size() != 3) throw ConfigError(key, "expected exactly three phases");
      for (std::size_t i = 0; i < 3; ++i) c.sim.phases[i] = parse_angle(key, parts[i]);
    };

    k["seed"] = [](C& c, S key, S v) { c.seed = parse_u64(key, v); };
    k["output.dir"] = [](C& c, S, S v) { c.output_dir = v; };
    return k;
  }();
  return keys;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.world = c.model;
  c.sim.phases = {0.0, 2.0 * std::numbers::pi / 3.0, 4.0 * std::numbers::pi / 3.0};
  c.ilc.tol = 1e-5;
  c.ilc.max_model_iters = 50;
  c.ilc.max_hw_iters = 20;
  return c;
}

}  // namespace

StateSpaceModel PlantConfig::build() const {
  if (!discrete) return servo_model(servo, dt);
  if (a.size() == 0 || b.size() == 0 || c.size() == 0) {
    throw ConfigError("plant.a", "discrete plant needs a, b and c");
  }
  return StateSpaceModel(a, b, c, dt);
}

std::vector<std::string> known_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : model_keys()) keys.push_back(k);
  for (const auto& [k, _] : other_keys()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (!model_keys().count(key) && !other_keys().count(key)) {
      throw ConfigError(key, "unknown configuration key (line " + std::to_string(line_no) + ")");
    }
    if (value.empty()) throw ConfigError(key, "missing value");
    if (!entries.emplace(key, value).second) throw ConfigError(key, "key given more than once");
  }

  ExperimentConfig config = default_config();
  // Model first, so the world plant inherits every model setting it does not override.
  for (const auto& [key, value] : entries) {
    if (auto it = model_keys().find(key); it != model_keys().end()) it->second(config, key, value);
  }
  config.world = config.model;
  for (const auto& [key, value] : entries) {
    if (auto it = other_keys().find(key); it != other_keys().end()) it->second(config, key, value);
  }
  if (config.trajectory_file && config.trajectory_file->is_relative() && !base_dir.empty()) {
    config.trajectory_file = base_dir / *config.trajectory_file;
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read config file " + path.string());
  return parse_config(in, path.parent_path());
}

Trajectory ExperimentConfig::desired_trajectory() const {
  if (trajectory_file) return read_angle_list(*trajectory_file, model.dt);
  return gen_periodic_trajectory(scan_params(), periods * period);
}

ScanParams ExperimentConfig::scan_params() const {
  ScanParams p{amplitude, period, capture_indices, model.dt};
  if (p.capture_indices.empty() && period >= 2 && periods >= 1) {
    p.capture_indices = default_capture_indices(period, periods, captures == 0 ? q * q : captures);
  }
  return p;
}

Scenario ExperimentConfig::scenario() const {
  Scenario s(model.build(), world.build());
  s.law = law;
  s.gain_fraction = gain_fraction;
  s.ilc = ilc;
  s.ilc.saturation = saturation;
  s.limits = limits;
  s.geometry = geometry;
  s.periods = periods;
  s.captures = captures;
  s.scene_size = size;
  s.q = q;
  s.noise_sigma = noise_sigma;
  s.lambda = lambda;
  s.max_cg_iters = max_cg_iters;
  s.contrast_threshold = contrast_threshold;
  s.shift_error_std = shift_error_std;
  s.seed = seed;
  s.threads = threads;
  return s;
}

void validate(const ExperimentConfig& c) {
  const StateSpaceModel model = c.model.build();
  const StateSpaceModel world = c.world.build();
  if (model.dt() != world.dt()) {
    throw ConfigError("world.dt", "model and world must share the sample period");
  }
  if (c.saturation && !(*c.saturation > 0.0)) {
    throw ConfigError("world.saturation", "must be positive");
  }

  validate(c.law);
  if (c.gain_fraction) {
    if (!(*c.gain_fraction > 0.0)) throw ConfigError("ilc.gain_fraction", "must be positive");
    if (c.law.kind != LawKind::Transpose && c.law.kind != LawKind::PartialIsometry) {
      throw ConfigError("ilc.gain_fraction", "only applies to transpose and partial_isometry");
    }
  }
  if (!(c.ilc.tol > 0.0)) throw ConfigError("ilc.tol", "must be positive");
  if (c.ilc.filter_cutoff && !(*c.ilc.filter_cutoff > 0.0 && *c.ilc.filter_cutoff <= 0.5)) {
    throw ConfigError("ilc.filter_cutoff", "must lie in (0, 0.5]");
  }

  if (c.period < 2) throw ConfigError("scan.period", "must be >= 2 samples, got " +
                                                         std::to_string(c.period));
  if (c.periods < 1) throw ConfigError("scan.periods", "must be >= 1");
  if (!(c.amplitude >= 0.0)) throw ConfigError("scan.amplitude", "must be >= 0");
  if (c.q < 1) throw ConfigError("imaging.q", "must be >= 1");
  validate(c.scan_params(), c.periods * c.period);
  if (c.trajectory_file) {
    const Trajectory t = read_angle_list(*c.trajectory_file, c.model.dt);
    (void)t;
  }
  validate(c.geometry);
  validate(c.limits);

  bar_target(c.size, c.contrast_threshold);
  if (c.size % c.q != 0) throw ConfigError("imaging.q", "must divide imaging.size");
  if (!(c.noise_sigma >= 0.0)) throw ConfigError("imaging.noise_sigma", "must be >= 0");
  if (!(c.lambda >= 0.0)) throw ConfigError("imaging.lambda", "must be >= 0");
  if (!(c.shift_error_std >= 0.0)) throw ConfigError("imaging.shift_error_std", "must be >= 0");

  if (c.amplitudes.empty()) throw ConfigError("optimize.amplitudes", "must not be empty");
  for (double a : c.amplitudes) {
    if (!(a >= 0.0)) throw ConfigError("optimize.amplitudes", "amplitudes must be >= 0");
  }
  if (c.period_grid.empty()) throw ConfigError("optimize.periods", "must not be empty");
  for (std::size_t p : c.period_grid) {
    if (p < 2) throw ConfigError("optimize.periods", "every period must be >= 2 samples");
  }

  // Range checks only; degenerate mixing (m = 0, repeated phases) surfaces when
  // the demodulation runs.
  if (c.sim_samples < 4) throw ConfigError("sim.samples", "must be >= 4");
  if (!(c.sim.modulation >= 0.0)) throw ConfigError("sim.m", "must be >= 0");
  SimPattern probe = c.sim;
  probe.modulation = 1.0;
  probe.phases = {0.0, 1.0, 2.0};
  validate(probe, static_cast<Eigen::Index>(c.sim_samples));
}

}  // namespace scanopt
