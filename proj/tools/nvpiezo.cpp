// nvpiezo: command-line front end. Exit codes: 0 ok, 1 physics or
// validation failure, 2 usage or input error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nvpiezo/app/commands.hpp"

namespace {

using namespace nvpiezo;
using units::Dimension;

constexpr int exit_ok = 0;
constexpr int exit_physics = 1;
constexpr int exit_usage = 2;

/// Accepts "0.2 MPa" style quantities or plain SI numbers.
double quantity(const std::string& text, Dimension dim, const char* flag) {
  try {
    return units::parse_quantity(text, dim);
  } catch (const Error& e) {
    throw DomainError(std::string(flag) + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Piezomagnetic NV-center stress sensor simulator"};
  cli.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  app::CommonOptions common;
  std::string out_dir = "out";
  cli.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
  cli.add_option("--seed", seed, "override environment.seed");
  cli.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  cli.add_option("--workers", common.workers, "worker threads (0 = hardware concurrency)")->capture_default_str();

  auto* sweep = cli.add_subcommand("sweep-stress", "ODMR resonances versus applied stress");
  std::string sigma_min = "0 MPa", sigma_max = "0.2 MPa";
  std::size_t points = 5;
  sweep->add_option("--sigma-min", sigma_min)->capture_default_str();
  sweep->add_option("--sigma-max", sigma_max)->capture_default_str();
  sweep->add_option("--points", points)->capture_default_str();

  auto* noise = cli.add_subcommand("characterize-noise", "stray-field noise correlation and spectrum");
  std::optional<std::string> duration;
  std::optional<int> seeds;
  noise->add_option("--duration", duration, "record length per seed (default run.noise_duration)");
  noise->add_option("--seeds", seeds, "number of independent seeds (default run.n_seeds)");

  auto* sens = cli.add_subcommand("sensitivity", "shot-noise-limited sensitivity versus interrogation time");
  app::SensitivityOptions so;
  std::optional<std::string> s_noise, s_grad;
  std::string ta_min = "10 ns", ta_max = "10 us";
  sens->add_option("--noise-fit", s_noise, "noise_fit.json from characterize-noise");
  sens->add_option("--gradient", s_grad, "gradient.json from sweep-stress");
  sens->add_flag("--noiseless", so.noiseless, "ignore magnetic noise");
  sens->add_option("--ta-min", ta_min)->capture_default_str();
  sens->add_option("--ta-max", ta_max)->capture_default_str();
  sens->add_option("--ta-points", so.ta_points)->capture_default_str();

  auto* force = cli.add_subcommand("force-trace", "fluorescence record of a force trace");
  app::ForceOptions fo;
  std::optional<std::string> f_trace, f_noise, f_grad;
  std::string velocity = "100e-9", stiffness = "1e-3", unbind = "50 pN", f_duration = "1 s", delay = "0.2 s",
              resolution = "0.5 nm";
  force->add_option("--trace", f_trace, "CSV with columns t (s), F (N)");
  force->add_option("--velocity", velocity, "pulling speed, m/s")->capture_default_str();
  force->add_option("--stiffness", stiffness, "linker stiffness, N/m")->capture_default_str();
  force->add_option("--unbind-force", unbind)->capture_default_str();
  force->add_option("--duration", f_duration)->capture_default_str();
  force->add_option("--start-delay", delay)->capture_default_str();
  force->add_option("--resolution", resolution, "spatial resolution delta_d")->capture_default_str();
  force->add_option("--noise-fit", f_noise, "noise_fit.json from characterize-noise");
  force->add_option("--gradient", f_grad, "gradient.json from sweep-stress");
  force->add_flag("--noiseless", fo.noiseless, "ignore magnetic noise");

  auto* validate = cli.add_subcommand("validate", "fast invariant self-checks");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    common.out_dir = out_dir;
    const auto model = app::load_config(config_path, seed);
    if (*sweep) {
      app::SweepOptions o;
      o.sigma_min = quantity(sigma_min, Dimension::stress, "--sigma-min");
      o.sigma_max = quantity(sigma_max, Dimension::stress, "--sigma-max");
      o.n_points = points;
      app::cmd_sweep_stress(model, o, common);
    } else if (*noise) {
      app::NoiseOptions o;
      if (duration) o.duration = quantity(*duration, Dimension::time, "--duration");
      o.n_seeds = seeds;
      app::cmd_characterize_noise(model, o, common);
    } else if (*sens) {
      if (s_noise) so.noise_fit_file = *s_noise;
      if (s_grad) so.gradient_file = *s_grad;
      so.ta_min = quantity(ta_min, Dimension::time, "--ta-min");
      so.ta_max = quantity(ta_max, Dimension::time, "--ta-max");
      app::cmd_sensitivity(model, so, common);
    } else if (*force) {
      if (f_trace) fo.trace_file = *f_trace;
      if (f_noise) fo.noise_fit_file = *f_noise;
      if (f_grad) fo.gradient_file = *f_grad;
      fo.velocity = quantity(velocity, Dimension::dimensionless, "--velocity");
      fo.stiffness = quantity(stiffness, Dimension::dimensionless, "--stiffness");
      fo.unbind_force = quantity(unbind, Dimension::force, "--unbind-force");
      fo.duration = quantity(f_duration, Dimension::time, "--duration");
      fo.start_delay = quantity(delay, Dimension::time, "--start-delay");
      fo.resolution = quantity(resolution, Dimension::length, "--resolution");
      app::cmd_force_trace(model, fo, common);
    } else if (*validate) {
      const auto checks = app::cmd_validate(model, common, std::cout);
      for (const auto& c : checks)
        if (!c.passed) return exit_physics;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_physics;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_physics;
  }
  return exit_ok;
}
