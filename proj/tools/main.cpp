#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"
#include "dephaskit/parallel.hpp"
#include "dephaskit/version.hpp"

namespace app = dephaskit::app;

int main(int argc, char** argv) {
  CLI::App cli{"Dephasing dynamics of photon polarization and their non-Markovianity"};
  cli.set_version_flag("--version", dephaskit::kVersion);
  cli.set_config("--config", "", "Read options from a 'key = value' file ('#' starts a comment)");
  cli.allow_config_extras(CLI::config_extras_mode::error);
  cli.require_subcommand(1);

  app::RunConfig rc;
  rc.out_dir = app::default_out_dir();
  rc.jobs = dephaskit::default_jobs();
  app::SweepConfig sweep;
  app::FitConfig fit;
  std::vector<std::string> quantities;
  std::string spectrum_file;
  double center = 0.0;
  double sigma = 0.0;

  const std::string model = "Model";
  cli.add_option("--delta-n", rc.delta_n, "Birefringence of the crystal")->capture_default_str()->group(model);
  cli.add_option("--lambda0", rc.lambda0_nm, "Reference wavelength in nm; s is in units of it")
      ->capture_default_str()
      ->group(model);
  cli.add_option("--s-max", rc.s_max, "Last s on the evaluation grid")->capture_default_str()->group(model);
  cli.add_option("--step", rc.step, "Spacing of the s grid")->capture_default_str()->group(model);
  cli.add_option("--t1-fraction", rc.t1_fraction, "Split point t1 = fraction * t for the N measures")
      ->capture_default_str()
      ->group(model);
  cli.add_option("--resolution", rc.resolution, "Threshold below which N counts as zero")
      ->capture_default_str()
      ->group(model);
  cli.add_option("--formulation", rc.formulation, "Classical process set: measure-prepare-ppt or incoherent-stochastic")
      ->capture_default_str()
      ->group(model);

  const std::string input = "Input";
  cli.add_option("--preset", rc.presets, "Tilt-angle preset(s), e.g. 6.0; default all")
      ->delimiter(',')
      ->group(input);
  cli.add_option("--spectrum", spectrum_file, "Measured spectrum CSV (wavelength_nm,intensity)")->group(input);
  cli.add_option("--components", fit.components, "Gaussian components to fit to --spectrum")
      ->capture_default_str()
      ->check(CLI::Range(1, 2))
      ->group(input);
  auto* center_opt = cli.add_option("--center", center, "Single-component spectrum center in nm")->group(input);
  auto* sigma_opt = cli.add_option("--sigma", sigma, "Single-component spectrum sigma in nm")->group(input);
  center_opt->needs(sigma_opt);
  sigma_opt->needs(center_opt);

  const std::string sweep_group = "Sigma sweep";
  cli.add_option("--sweep-center", sweep.center_nm, "Center wavelength of the swept spectrum")
      ->capture_default_str()
      ->group(sweep_group);
  cli.add_option("--sigma-min", sweep.sigma_min_nm)->capture_default_str()->group(sweep_group);
  cli.add_option("--sigma-max", sweep.sigma_max_nm)->capture_default_str()->group(sweep_group);
  cli.add_option("--sigma-step", sweep.sigma_step_nm)->capture_default_str()->group(sweep_group);
  cli.add_option("--probe-sigma", sweep.probe_sigma_nm, "Sigma whose alpha/beta trajectories are written")
      ->capture_default_str()
      ->group(sweep_group);

  cli.add_option("--quantities", quantities, "Trajectory quantities (default all): kappa, alpha, beta, "
                                             "trace_distance, concurrence, mutual_information")
      ->delimiter(',')
      ->group("Trajectory");

  const std::string output = "Output";
  cli.add_option("--out-dir", rc.out_dir, "Output directory (default $DEPHASKIT_OUT or .)")->group(output);
  cli.add_option("--jobs", rc.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber)->group(output);

  auto* classify = cli.add_subcommand("classify", "Evaluate every criterion for each preset");
  auto* sweep_cmd = cli.add_subcommand("sweep-sigma", "Sweep the width of a single-peak spectrum");
  auto* fit_cmd = cli.add_subcommand("fit", "Fit a Gaussian mixture to --spectrum");
  auto* trajectory = cli.add_subcommand("trajectory", "Write time series of kappa and derived quantities");
  for (auto* sub : {classify, sweep_cmd, fit_cmd, trajectory}) sub->fallthrough();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kOk : app::kUsage;
  }

  if (!spectrum_file.empty()) rc.spectrum_file = spectrum_file;
  rc.spectrum_components = fit.components;
  if (*center_opt) {
    rc.center_nm = center;
    rc.sigma_nm = sigma;
  }

  try {
    if (*classify) return app::cmd_classify(rc, std::cerr);
    if (*sweep_cmd) return app::cmd_sweep_sigma(rc, sweep, std::cerr);
    if (*fit_cmd) {
      if (!rc.spectrum_file) {
        std::cerr << "error: fit needs --spectrum\n";
        return app::kUsage;
      }
      fit.input = *rc.spectrum_file;
      return app::cmd_fit(rc, fit, std::cerr);
    }
    return app::cmd_trajectory(rc, quantities, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_code_for(e);
  }
}
