#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "dephaskit/errors.hpp"
#include "dephaskit/parallel.hpp"
#include "dephaskit/version.hpp"

namespace dephaskit::app {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

json header(const RunConfig& c, const char* command) {
  json j;
  j["tool"] = "dephaskit";
  j["version"] = kVersion;
  j["command"] = command;
  j["delta_n"] = c.delta_n;
  j["lambda0_nm"] = c.lambda0_nm;
  j["formulation"] = classical_set_by_name(c.formulation)->name();
  return j;
}

std::string verdict(bool non_markovian) {
  return non_markovian ? "non-Markovian" : "Markovian";
}

DynamicsFamily family_of(const RunConfig& c, const Spectrum& spectrum) {
  return DynamicsFamily{spectrum, c.params(), c.s_max, c.step};
}

bool nonincreasing(const std::vector<double>& v, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + tol) return false;
  return true;
}

std::string series_csv(const std::string& name, const std::vector<double>& s, const std::vector<double>& v) {
  std::string out = "s," + name + "\n";
  for (std::size_t i = 0; i < s.size(); ++i) out += format_number(s[i]) + "," + format_number(v[i]) + "\n";
  return out;
}

// Splits worker threads between an outer loop of `n` tasks and the work
// inside each task.
std::pair<int, int> split_jobs(int jobs, std::size_t n) {
  const int total = std::max(1, jobs);
  const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(total), std::max<std::size_t>(n, 1)));
  return {outer, std::max(1, total / outer)};
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

fs::path default_out_dir() {
  const char* env = std::getenv("DEPHASKIT_OUT");
  return env && *env ? fs::path(env) : fs::path(".");
}

void RunConfig::validate() const {
  params().validate();
  if (!(step > 0.0)) throw ValidationError("step must be positive");
  if (!(s_max >= step)) throw ValidationError("s-max must be at least one step");
  if (!(t1_fraction > 0.0 && t1_fraction < 1.0)) throw ValidationError("t1-fraction must lie in (0, 1)");
  if (!(resolution >= 0.0 && resolution < 1.0)) throw ValidationError("resolution must lie in [0, 1)");
  if (spectrum_components != 1 && spectrum_components != 2) throw ValidationError("components must be 1 or 2");
  if (center_nm.has_value() != sigma_nm.has_value()) throw ValidationError("center and sigma must be given together");
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  classical_set_by_name(formulation);
}

EvolutionParams RunConfig::params() const {
  EvolutionParams p;
  p.delta_n = delta_n;
  p.lambda0_nm = lambda0_nm;
  return p;
}

std::vector<LabeledSpectrum> resolve_spectra(const RunConfig& c, std::ostream& log) {
  if (c.spectrum_file) {
    const SpectrumSample sample = load_spectrum(*c.spectrum_file);
    if (sample.resorted) log << "note: " << c.spectrum_file->string() << " rows were sorted by wavelength\n";
    const FitReport fit = fit_mixture(sample, c.spectrum_components);
    if (!fit.converged) throw FitError("spectrum fit did not converge for " + c.spectrum_file->string());
    log << "fitted " << c.spectrum_file->filename().string() << ": rms residual " << format_number(fit.residual_rms)
        << "\n";
    return {{c.spectrum_file->stem().string(), fit.spectrum}};
  }
  if (c.center_nm) {
    return {{"single", Spectrum::single(*c.center_nm, *c.sigma_nm)}};
  }
  std::vector<LabeledSpectrum> out;
  const std::vector<std::string>& names = c.presets.empty() ? preset_names() : c.presets;
  for (const std::string& n : names) out.push_back({n, tilt_preset(n)});
  return out;
}

// ---------------------------------------------------------------------------

int cmd_classify(const RunConfig& c, std::ostream& log) {
  c.validate();
  const auto set = classical_set_by_name(c.formulation);
  const std::vector<LabeledSpectrum> spectra = resolve_spectra(c, log);

  struct Row {
    std::optional<CriteriaReport> report;
    std::string error;
    int code = kOk;
  };
  std::vector<Row> rows(spectra.size());
  const auto [outer, inner] = split_jobs(c.jobs, spectra.size());
  std::mutex log_mu;
  parallel_for(spectra.size(), outer, [&](std::size_t i) {
    CriteriaOptions opt;
    opt.t1_fraction = c.t1_fraction;
    opt.thresholds.hcl_n = c.resolution;
    opt.jobs = inner;
    try {
      rows[i].report = evaluate_criteria(family_of(c, spectra[i].spectrum), *set, opt);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
      rows[i].code = exit_code_for(e);
      std::lock_guard lock(log_mu);
      log << "error: preset " << spectra[i].label << ": " << e.what() << "\n";
    }
  });

  std::string csv =
      "theta,W_alpha,W_beta,N_alpha,N_beta,N_blp,N_rhp,N_lfs,verdict_blp,verdict_rhp,verdict_lfs,verdict_hcl_w,"
      "verdict_hcl_n\n";
  json j = header(c, "classify");
  j["s_max"] = c.s_max;
  j["step"] = c.step;
  j["t1_fraction"] = c.t1_fraction;
  j["resolution"] = c.resolution;
  const Thresholds t{.hcl_n = c.resolution};
  j["thresholds"] = {{"blp", t.blp}, {"rhp", t.rhp}, {"lfs", t.lfs}, {"hcl_w", t.hcl_w}, {"hcl_n", t.hcl_n}};
  json results = json::array();
  int code = kOk;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string& label = spectra[i].label;
    json r;
    r["theta"] = label;
    if (!rows[i].report) {
      csv += label + ",nan,nan,nan,nan,nan,nan,nan,error,error,error,error,error\n";
      r["error"] = rows[i].error;
      results.push_back(r);
      code = std::max(code, rows[i].code);
      continue;
    }
    const CriteriaReport& q = *rows[i].report;
    const Verdicts& v = q.verdicts;
    csv += label;
    for (double x : {q.w_alpha, q.w_beta, q.n_alpha, q.n_beta, q.n_blp, q.n_rhp, q.n_lfs}) csv += "," + format_number(x);
    for (bool b : {v.blp, v.rhp, v.lfs, v.hcl_w, v.hcl_n}) csv += "," + verdict(b);
    csv += "\n";

    r["w_alpha"] = q.w_alpha;
    r["w_beta"] = q.w_beta;
    r["n_alpha"] = q.n_alpha;
    r["n_beta"] = q.n_beta;
    r["n_blp"] = q.n_blp;
    r["n_rhp"] = q.n_rhp;
    r["n_lfs"] = q.n_lfs;
    r["verdicts"] = {{"blp", verdict(v.blp)},
                     {"rhp", verdict(v.rhp)},
                     {"lfs", verdict(v.lfs)},
                     {"hcl_w", verdict(v.hcl_w)},
                     {"hcl_n", verdict(v.hcl_n)}};
    r["blp_pair_bloch"] = {q.blp_bloch.x(), q.blp_bloch.y(), q.blp_bloch.z()};
    r["max_solver_gap"] = q.max_solver_gap;
    results.push_back(r);
  }
  j["results"] = results;

  write_file(c.out_dir / "classify.csv", csv);
  write_file(c.out_dir / "classify.json", j.dump(2) + "\n");

  log << "theta     BLP  RHP  LFS  HCL-W  HCL-N\n";
  auto mark = [](bool b) { return b ? "NM " : "M  "; };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char label[16];
    std::snprintf(label, sizeof label, "%-9s ", spectra[i].label.c_str());
    log << label;
    if (!rows[i].report) {
      log << "error\n";
      continue;
    }
    const Verdicts& v = rows[i].report->verdicts;
    log << mark(v.blp) << "  " << mark(v.rhp) << "  " << mark(v.lfs) << "  " << mark(v.hcl_w) << "    "
        << mark(v.hcl_n) << "\n";
  }
  log << "wrote " << (c.out_dir / "classify.csv").string() << " and classify.json\n";
  return code;
}

// ---------------------------------------------------------------------------

SweepResult sweep_sigma(const RunConfig& c, const SweepConfig& sw) {
  c.validate();
  if (!(sw.sigma_step_nm > 0.0) || !(sw.sigma_max_nm >= sw.sigma_min_nm) || sw.sigma_min_nm < 0.0) {
    throw ValidationError("sigma range must satisfy 0 <= min <= max with a positive step");
  }
  const auto n = static_cast<std::size_t>(std::floor((sw.sigma_max_nm - sw.sigma_min_nm) / sw.sigma_step_nm + 1e-9)) + 1;
  if (n > 100000) throw ValidationError("sigma grid has more than 1e5 points");
  const auto set = classical_set_by_name(c.formulation);

  SweepResult r;
  r.sigma.resize(n);
  r.n_alpha.resize(n);
  r.n_beta.resize(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const double sigma = sw.sigma_min_nm + static_cast<double>(i) * sw.sigma_step_nm;
    const DynamicsFamily f = family_of(c, Spectrum::single(sw.center_nm, sigma));
    r.sigma[i] = sigma;
    r.n_alpha[i] = hcl_n(f, c.s_max, c.t1_fraction, Quantity::kAlpha, *set);
    r.n_beta[i] = hcl_n(f, c.s_max, c.t1_fraction, Quantity::kBeta, *set);
  });
  for (std::size_t i = 1; i < n; ++i) {
    if (r.n_alpha[i] < r.n_alpha[i - 1] - 1e-9 || r.n_beta[i] < r.n_beta[i - 1] - 1e-9) r.monotone = false;
  }
  for (std::size_t i = 0; i < n && r.n_alpha[i] < c.resolution && r.n_beta[i] < c.resolution; ++i) {
    r.threshold_sigma = r.sigma[i];
  }
  return r;
}

int cmd_sweep_sigma(const RunConfig& c, const SweepConfig& sw, std::ostream& log) {
  const SweepResult r = sweep_sigma(c, sw);
  const auto set = classical_set_by_name(c.formulation);

  std::string csv = "sigma_nm,N_alpha,N_beta\n";
  for (std::size_t i = 0; i < r.sigma.size(); ++i) {
    csv += format_number(r.sigma[i]) + "," + format_number(r.n_alpha[i]) + "," + format_number(r.n_beta[i]) + "\n";
  }

  // Trajectories at the probe width.
  const DynamicsFamily probe = family_of(c, Spectrum::single(sw.center_nm, sw.probe_sigma_nm));
  const QuantumnessTrajectory qt = quantumness_trajectory(probe, *set, c.jobs);
  std::string probe_csv = "s,alpha,beta\n";
  for (std::size_t i = 0; i < qt.s.size(); ++i) {
    probe_csv += format_number(qt.s[i]) + "," + format_number(qt.alpha[i]) + "," + format_number(qt.beta[i]) + "\n";
  }
  const double probe_na = hcl_n(probe, c.s_max, c.t1_fraction, Quantity::kAlpha, *set);
  const double probe_nb = hcl_n(probe, c.s_max, c.t1_fraction, Quantity::kBeta, *set);

  json j = header(c, "sweep-sigma");
  j["center_nm"] = sw.center_nm;
  j["s"] = c.s_max;
  j["t1_fraction"] = c.t1_fraction;
  j["resolution"] = c.resolution;
  j["sigma_grid"] = {{"min_nm", sw.sigma_min_nm}, {"max_nm", sw.sigma_max_nm}, {"step_nm", sw.sigma_step_nm}};
  j["threshold_sigma_nm"] = r.threshold_sigma ? json(*r.threshold_sigma) : json(nullptr);
  j["monotone_nondecreasing"] = r.monotone;
  j["probe"] = {{"sigma_nm", sw.probe_sigma_nm},
                {"n_alpha", probe_na},
                {"n_beta", probe_nb},
                {"below_resolution", probe_na < c.resolution && probe_nb < c.resolution},
                {"alpha_nonincreasing", nonincreasing(qt.alpha, 1e-9)},
                {"beta_nonincreasing", nonincreasing(qt.beta, 1e-9)}};
  // Published values obtained with a different, unspecified classical set;
  // listed for side-by-side reading only.
  j["reference_values"] = {{"comparable", false},
                           {"threshold_sigma_nm", 0.1093},
                           {"n_alpha_at_sigma_0_1092", 0.0099},
                           {"n_beta_at_sigma_0_1092", 0.0073}};

  write_file(c.out_dir / "sweep_sigma.csv", csv);
  write_file(c.out_dir / "sweep_probe.csv", probe_csv);
  write_file(c.out_dir / "sweep_sigma.json", j.dump(2) + "\n");

  if (r.threshold_sigma)
    log << "threshold sigma " << format_number(*r.threshold_sigma) << " nm at resolution " << format_number(c.resolution)
        << "\n";
  else
    log << "no sigma on the grid stays below resolution " << format_number(c.resolution) << "\n";
  if (!r.monotone) {
    log << "error: N(sigma) is not monotone on the grid\n";
    return kNumerical;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_fit(const RunConfig& c, const FitConfig& fc, std::ostream& log) {
  const SpectrumSample sample = load_spectrum(fc.input);
  if (sample.resorted) log << "note: rows were sorted by wavelength\n";
  const FitReport fit = fit_mixture(sample, fc.components);

  double peak = 0.0;
  for (const auto& p : sample.points) peak = std::max(peak, p.intensity);
  const double relative = peak > 0.0 ? fit.residual_rms / peak : 0.0;

  json j;
  j["tool"] = "dephaskit";
  j["version"] = kVersion;
  j["command"] = "fit";
  j["delta_n"] = c.delta_n;
  j["lambda0_nm"] = c.lambda0_nm;
  j["formulation"] = classical_set_by_name(c.formulation)->name();
  j["input"] = fc.input.filename().string();
  j["n_components"] = fc.components;
  json comps = json::array();
  const auto& cs = fit.spectrum.components();
  for (std::size_t k = 0; k < cs.size(); ++k) {
    comps.push_back({{"weight", cs[k].weight},
                     {"center_nm", cs[k].center_nm},
                     {"sigma_nm", cs[k].sigma_nm},
                     {"fwhm_nm", fwhm_of_sigma(cs[k].sigma_nm)},
                     {"peak_height", k < fit.peak_heights.size() ? fit.peak_heights[k] : 0.0}});
  }
  j["components"] = comps;
  j["residual_rms"] = fit.residual_rms;
  j["relative_residual"] = relative;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  write_file(c.out_dir / "fit.json", j.dump(2) + "\n");

  if (!fit.converged) {
    log << "error: fit did not converge after " << fit.iterations << " iterations\n";
    return kNumerical;
  }
  if (relative > fc.warn_relative_residual) {
    log << "warning: residual is " << format_number(100.0 * relative)
        << "% of the peak intensity; the sample may need more components\n";
  }
  log << "wrote " << (c.out_dir / "fit.json").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_trajectory(const RunConfig& c, const std::vector<std::string>& quantities, std::ostream& log) {
  c.validate();
  const auto& known = trajectory_quantities();
  for (const auto& q : quantities) {
    if (std::find(known.begin(), known.end(), q) == known.end()) throw ValidationError("unknown quantity '" + q + "'");
  }
  auto wants = [&](const char* q) {
    return quantities.empty() || std::find(quantities.begin(), quantities.end(), q) != quantities.end();
  };
  const auto set = classical_set_by_name(c.formulation);

  for (const LabeledSpectrum& ls : resolve_spectra(c, log)) {
    const DynamicsFamily f = family_of(c, ls.spectrum);
    const std::vector<double> s = f.grid();
    const std::string stem = "trajectory_" + ls.label + "_";
    if (wants("kappa")) {
      std::ostringstream out;
      write_trajectory_csv(out, kappa_trajectory(ls.spectrum, c.params(), s));
      write_file(c.out_dir / (stem + "kappa.csv"), out.str());
    }
    if (wants("alpha") || wants("beta")) {
      const QuantumnessTrajectory q = quantumness_trajectory(f, *set, c.jobs);
      if (wants("alpha")) write_file(c.out_dir / (stem + "alpha.csv"), series_csv("alpha", s, q.alpha));
      if (wants("beta")) write_file(c.out_dir / (stem + "beta.csv"), series_csv("beta", s, q.beta));
    }
    if (wants("trace_distance")) {
      const std::vector<double> d = trace_distance_trajectory(f, Eigen::Vector3d::UnitX());
      write_file(c.out_dir / (stem + "trace_distance.csv"), series_csv("trace_distance", s, d));
    }
    if (wants("concurrence")) {
      write_file(c.out_dir / (stem + "concurrence.csv"), series_csv("concurrence", s, concurrence_trajectory(f)));
    }
    if (wants("mutual_information")) {
      write_file(c.out_dir / (stem + "mutual_information.csv"),
                 series_csv("mutual_information", s, mutual_information_trajectory(f)));
    }
    log << "wrote " << (c.out_dir / (stem + "*.csv")).string() << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const FitError*>(&e) ||
      dynamic_cast<const NonPhysicalChannelError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
    return kNumerical;
  }
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const IoError*>(&e) || dynamic_cast<const UnknownPresetError*>(&e) ||
      dynamic_cast<const InsufficientDataError*>(&e) || dynamic_cast<const ContractViolation*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kUsage;
  }
  return kNumerical;
}

Series read_series_csv(const fs::path& path, double lo, double hi) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Series out;
  std::string line;
  if (!std::getline(in, line) || line.rfind("s,", 0) != 0) throw ParseError(1, "expected header 's,<name>'");
  out.name = line.substr(2);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(line_no, "expected two columns");
    char* end = nullptr;
    const double s = std::strtod(line.c_str(), &end);
    const double v = std::strtod(line.c_str() + comma + 1, &end);
    if (!std::isfinite(s) || !std::isfinite(v) || *end != '\0') throw ParseError(line_no, "malformed number");
    if (!out.s.empty() && !(s > out.s.back())) throw ValidationError("line " + std::to_string(line_no) + ": s not increasing");
    if (v < lo || v > hi) throw ValidationError("line " + std::to_string(line_no) + ": value outside its range");
    out.s.push_back(s);
    out.values.push_back(v);
  }
  return out;
}

}  // namespace dephaskit::app
