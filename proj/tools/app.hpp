#pragma once

// Command implementations behind the dephaskit executable. Each command
// writes its data files under the configured output directory and returns a
// process exit code: 0 success, 1 usage or I/O error, 2 numerical failure.

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dephaskit/criteria.hpp"
#include "dephaskit/spectra.hpp"

namespace dephaskit::app {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

struct RunConfig {
  double delta_n = 0.0115;
  double lambda0_nm = 702.0;
  double s_max = 160.0;
  double step = 0.1;
  double t1_fraction = 0.5;
  double resolution = 0.01;
  std::string formulation = "measure-prepare-ppt";
  std::filesystem::path out_dir = ".";
  std::vector<std::string> presets;  // empty: every tabulated preset
  std::optional<std::filesystem::path> spectrum_file;
  int spectrum_components = 2;
  // Single-component synthetic spectrum; takes precedence over presets.
  std::optional<double> center_nm;
  std::optional<double> sigma_nm;
  int jobs = 1;

  void validate() const;  // throws ValidationError
  EvolutionParams params() const;
};

// $DEPHASKIT_OUT when set, else the current directory.
std::filesystem::path default_out_dir();

struct LabeledSpectrum {
  std::string label;
  Spectrum spectrum;
};

// Spectrum file (fitted), synthetic single component, or presets, in that
// order of precedence.
std::vector<LabeledSpectrum> resolve_spectra(const RunConfig& config, std::ostream& log);

struct SweepConfig {
  double center_nm = 702.672;
  double sigma_min_nm = 0.0;
  double sigma_max_nm = 0.25;
  double sigma_step_nm = 0.001;
  double probe_sigma_nm = 0.1092;  // sigma whose alpha/beta trajectories are also written
};

struct SweepResult {
  std::vector<double> sigma;
  std::vector<double> n_alpha;
  std::vector<double> n_beta;
  std::optional<double> threshold_sigma;
  bool monotone = true;
};

// N_alpha(sigma), N_beta(sigma) at s_max; the threshold is the largest grid
// sigma at and below which both stay under the resolution.
SweepResult sweep_sigma(const RunConfig& config, const SweepConfig& sweep);

struct FitConfig {
  std::filesystem::path input;
  int components = 2;
  // Relative RMS residual (to the sample maximum) above which a warning is
  // printed.
  double warn_relative_residual = 0.05;
};

inline const std::vector<std::string>& trajectory_quantities() {
  static const std::vector<std::string> q = {"kappa", "alpha", "beta", "trace_distance", "concurrence",
                                             "mutual_information"};
  return q;
}

int cmd_classify(const RunConfig& config, std::ostream& log);
int cmd_sweep_sigma(const RunConfig& config, const SweepConfig& sweep, std::ostream& log);
int cmd_fit(const RunConfig& config, const FitConfig& fit, std::ostream& log);
int cmd_trajectory(const RunConfig& config, const std::vector<std::string>& quantities, std::ostream& log);

// Maps library exceptions onto exit codes.
int exit_code_for(const std::exception& e);

// Two-column `s,<name>` series as written by cmd_trajectory. Throws
// ParseError or ValidationError (values must be finite, s increasing, and
// inside [lo, hi]).
struct Series {
  std::string name;
  std::vector<double> s;
  std::vector<double> values;
};
Series read_series_csv(const std::filesystem::path& path, double lo, double hi);

std::string format_number(double v);  // %.12g

}  // namespace dephaskit::app
