#include "commands.hpp"

#include "scanopt/config.hpp"
#include "scanopt/errors.hpp"
#include "scanopt/io.hpp"
#include "scanopt/spectral.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace scanopt::cli {

namespace fs = std::filesystem;

namespace {

ExperimentConfig load(const GlobalOptions& opts) {
  ExperimentConfig config;
  if (opts.config) {
    config = load_config(*opts.config);
  } else {
    std::istringstream empty;
    config = parse_config(empty);
  }
  if (opts.out) config.output_dir = *opts.out;
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

void print_manifest(std::ostream& out, const std::vector<fs::path>& files) {
  out << "manifest:";
  for (const auto& f : files) out << ' ' << f.generic_string();
  out << '\n';
}

// Maps library errors onto the documented exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kBadInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const DivergenceError& e) {
    err << "error: divergence: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const EmptyFeasibleSetError& e) {
    err << "error: empty feasible set: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InfeasibleError& e) {
    err << "error: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kInternal;
  }
}

LearningLaw resolved_law(const ExperimentConfig& c, Eigen::Index n) {
  LearningLaw law = c.law;
  if (c.gain_fraction) {
    law.gain = *c.gain_fraction * monotonic_gain_bound(lift(c.model.build(), n), law.kind);
  }
  return law;
}

// Real test signal with random cosine content on bins 1..max_bin.
Eigen::VectorXd demo_signal(Eigen::Index n, Eigen::Index max_bin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.2, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, 1.0);
  for (Eigen::Index k = 1; k <= max_bin; ++k) {
    const double a = amp(rng) / static_cast<double>(max_bin);
    const double th = phase(rng);
    for (Eigen::Index x = 0; x < n; ++x) {
      s[x] += a * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * x) /
                               static_cast<double>(n) + th);
    }
  }
  return s;
}

}  // namespace

int cmd_ilc(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load(opts);
    const Trajectory desired = c.desired_trajectory();
    const StateSpaceModel model = c.model.build();
    const StateSpaceModel world = c.world.build();
    IlcSettings settings = c.ilc;
    settings.saturation = c.saturation;
    const LearningLaw law = resolved_law(c, desired.size());

    const IterationHistory history = run_ilc(law, model, world, desired, settings);
    const Trajectory achieved = trial_response(world, history.final_command(), c.saturation);

    const fs::path history_path = c.output_dir / "ilc_history.csv";
    const fs::path trajectory_path = c.output_dir / "ilc_trajectory.csv";
    {
      auto f = io::open_output(history_path);
      io::write_history_csv(f, history);
    }
    {
      auto f = io::open_output(trajectory_path);
      io::write_trajectory_csv(f, history.final_command(), desired, achieved);
    }

    out << "law: " << to_string(law.kind);
    switch (law.kind) {
      case LawKind::Transpose:
      case LawKind::PartialIsometry: out << " (gain " << io::format_double(law.gain) << ")"; break;
      case LawKind::NormOptimal: out << " (weight " << io::format_double(law.weight) << ")"; break;
      case LawKind::CirculantInverse:
        out << " (cutoff " << io::format_double(law.cutoff) << ")";
        break;
      case LawKind::Inverse: break;
    }
    out << '\n';
    out << "samples: " << desired.size() << '\n';
    out << "final rms error: " << io::format_double(history.records.back().rms_error) << '\n';
    if (history.converged) {
      out << "iterations to tolerance: " << history.hardware_iterations << " hardware\n";
    } else {
      out << "iterations to tolerance: not reached after " << history.hardware_iterations
          << " hardware iterations\n";
    }
    print_manifest(out, {history_path, trajectory_path});
    return static_cast<int>(kOk);
  });
}

int cmd_optimize(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load(opts);
    const OptResult result = optimize(c.scenario(), c.amplitudes, c.period_grid);

    const fs::path table_path = c.output_dir / "optimize_table.csv";
    const fs::path recon_path = c.output_dir / "best_recon.pgm";
    const fs::path summary_path = c.output_dir / "summary.txt";
    {
      auto f = io::open_output(table_path);
      write_table_csv(f, result);
    }
    io::write_pgm(recon_path, result.best.recon);

    std::size_t feasible = 0;
    for (const auto& row : result.table) feasible += row.feasible() ? 1 : 0;
    const CandidateScore& b = result.best;
    std::ostringstream summary;
    summary << "candidates: " << result.table.size() << " (" << feasible << " feasible)\n"
            << "best amplitude: " << io::format_double(b.params.amplitude) << " rad\n"
            << "best period: " << b.params.period << " samples\n"
            << "improvement factor: " << io::format_double(b.factor) << '\n'
            << "single-frame cutoff: " << io::format_double(b.report.single_frame_cutoff) << '\n'
            << "reconstruction cutoff: " << io::format_double(b.report.recon_cutoff) << '\n'
            << "reconstruction rmse: " << io::format_double(b.rmse_recon) << '\n'
            << "tracking rms at captures: " << io::format_double(b.tracking_rms) << " rad\n"
            << "hardware iterations: " << b.hw_iters << '\n';
    if (!b.flags().empty()) summary << "flags: " << b.flags() << '\n';
    {
      auto f = io::open_output(summary_path);
      f << summary.str();
    }
    out << summary.str();
    print_manifest(out, {table_path, recon_path, summary_path});
    return static_cast<int>(kOk);
  });
}

int cmd_simdemo(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load(opts);
    const auto n = static_cast<Eigen::Index>(c.sim_samples);
    const SimPattern& p = c.sim;
    validate(p, n);
    const auto max_bin = static_cast<Eigen::Index>(std::llround((p.fc + p.f0) * n));
    const auto cut_bin = static_cast<Eigen::Index>(std::llround(p.fc * n));

    const Eigen::VectorXd s = demo_signal(n, max_bin, c.seed);
    const auto y = sim_observe(s, p);
    const SimReconstruction r = sim_demodulate_1d(y[0], y[1], y[2], p);

    Eigen::VectorXcd wide_spec = spectral::forward(s);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(spectral::signed_bin(k, n)) > cut_bin) wide_spec[k] = 0.0;
    }
    const Eigen::VectorXd widefield = spectral::inverse_real(wide_spec);
    const Eigen::VectorXcd true_spec = spectral::forward(s);

    const fs::path signals_path = c.output_dir / "sim_signals.csv";
    const fs::path spectra_path = c.output_dir / "sim_spectra.csv";
    {
      auto f = io::open_output(signals_path);
      f << "k,signal,y0,y1,y2,widefield,recovered\n";
      for (Eigen::Index k = 0; k < n; ++k) {
        f << k << ',' << io::format_double(s[k]) << ',' << io::format_double(y[0][k]) << ','
          << io::format_double(y[1][k]) << ',' << io::format_double(y[2][k]) << ','
          << io::format_double(widefield[k]) << ',' << io::format_double(r.signal[k]) << '\n';
      }
    }
    {
      auto f = io::open_output(spectra_path);
      f << "bin,frequency,signal,widefield,recovered\n";
      for (Eigen::Index k = 0; k < n; ++k) {
        f << k << ',' << io::format_double(spectral::bin_frequency(k, n)) << ','
          << io::format_double(std::abs(true_spec[k])) << ','
          << io::format_double(std::abs(wide_spec[k])) << ','
          << io::format_double(std::abs(r.spectrum[k])) << '\n';
      }
    }

    out << "passband: " << io::format_double(r.passband) << " cycles/sample\n";
    out << "recovered support: " << io::format_double(r.support) << " cycles/sample\n";
    out << "max abs error: " << io::format_double((r.signal - s).cwiseAbs().maxCoeff()) << '\n';
    out << "widefield max abs error: " << io::format_double((widefield - s).cwiseAbs().maxCoeff())
        << '\n';
    out << "extension factor: " << io::format_double(r.extension_factor) << '\n';
    print_manifest(out, {signals_path, spectra_path});
    return static_cast<int>(kOk);
  });
}

int cmd_reconstruct(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load(opts);
    const Raster scene = synth_scene(c.scene, c.size, c.seed);
    const std::vector<Shift> shifts = c.shifts.empty() ? interleave_shifts(c.q) : c.shifts;
    const CaptureSet cs = capture_set(scene, shifts, c.q, c.noise_sigma, c.seed);
    const LsReconstruction recon = ls_recon(cs, c.lambda, c.max_cg_iters);

    std::vector<fs::path> files;
    const fs::path scene_path = c.output_dir / "scene.pgm";
    io::write_pgm(scene_path, scene);
    files.push_back(scene_path);
    for (auto& f : io::write_capture_set(c.output_dir / "frames", cs)) files.push_back(f);
    const fs::path recon_path = c.output_dir / "recon.pgm";
    io::write_pgm(recon_path, recon.image);
    files.push_back(recon_path);

    out << "frames: " << cs.frames.size() << " at " << cs.frames.front().width() << 'x'
        << cs.frames.front().height() << '\n';
    out << "cg iterations: " << recon.iterations << (recon.converged ? "" : " (not converged)")
        << '\n';
    out << "rmse vs scene: " << io::format_double(rmse(recon.image, scene)) << '\n';
    if (c.scene == SceneKind::Bars) {
      const Raster single =
          upsample_replicate(capture(scene, {}, c.q, c.noise_sigma, frame_seed(c.seed, shifts.size())), c.q);
      try {
        const auto report = measure_improvement(recon.image, single, bar_target(c.size, c.contrast_threshold));
        out << "improvement factor: " << io::format_double(report.factor) << '\n';
      } catch (const NoResolvableFrequencyError& e) {
        out << "improvement factor: undefined (" << e.what() << ")\n";
      }
    }
    print_manifest(out, files);
    return static_cast<int>(kOk);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scan-trajectory learning and multi-frame super-resolution toolkit", "scanopt"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opts;
  std::string config, out_dir;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config, "Experiment config file (key = value)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides seed)");

  std::function<int(const GlobalOptions&, std::ostream&, std::ostream&)> command;
  auto add = [&](const char* name, const char* help, auto fn) {
    app.add_subcommand(name, help)->callback([&command, fn] { command = fn; });
  };
  add("ilc", "Run iterative learning control for the configured scan", cmd_ilc);
  add("optimize", "Grid-search scan amplitude and period", cmd_optimize);
  add("simdemo", "One-dimensional structured-illumination demodulation demo", cmd_simdemo);
  add("reconstruct", "Capture a synthetic scene and run least-squares reconstruction",
      cmd_reconstruct);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
  if (*config_opt) opts.config = config;
  if (*out_opt) opts.out = out_dir;
  if (*seed_opt) opts.seed = seed;
  return command(opts, out, err);
}

}  // namespace scanopt::cli
