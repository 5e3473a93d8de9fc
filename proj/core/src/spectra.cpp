#include "dephaskit/spectra.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "dephaskit/errors.hpp"

namespace dephaskit {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

struct PresetRow {
  const char* name;
  double center1, center2, a1, a2, sigma1, sigma2;  // center2 <= 0: single component
};

// Fabry-Perot tilt angle presets: centers (nm), amplitudes a_j, widths (nm).
constexpr std::array<PresetRow, 9> kPresets{{
    {"1.5", 700.608, 704.286, 0.787, 1.455, 0.185, 0.212},
    {"2.5", 700.476, 704.153, 0.545, 1.636, 0.212, 0.225},
    {"3.5", 700.238, 703.836, 0.182, 1.787, 0.172, 0.225},
    {"4.0", 700.079, 703.651, 0.901, 1.848, 0.172, 0.212},
    {"6.0", 702.672, 0.0, 1.848, 0.0, 0.198, 0.0},
    {"7.5", 701.720, 0.0, 1.909, 0.0, 0.185, 0.0},
    {"8.0", 701.349, 704.788, 1.636, 0.273, 0.212, 0.212},
    {"8.5", 701.005, 704.603, 1.333, 0.758, 0.185, 0.212},
    {"9.0", 700.635, 704.286, 0.667, 1.545, 0.185, 0.212},
}};

// ---------------------------------------------------------------------------
// Levenberg-Marquardt on a sum of unnormalized Gaussian peaks.
// Parameter layout per peak: height, center, sigma.

struct Peak {
  double height, center, sigma;
};

double peaks_at(const std::vector<Peak>& peaks, double x) {
  double f = 0.0;
  for (const Peak& p : peaks) {
    const double u = (x - p.center) / p.sigma;
    f += p.height * std::exp(-0.5 * u * u);
  }
  return f;
}

std::vector<Peak> unpack(const Eigen::VectorXd& p) {
  std::vector<Peak> peaks(static_cast<std::size_t>(p.size() / 3));
  for (std::size_t j = 0; j < peaks.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(3 * j);
    peaks[j] = {p(k), p(k + 1), p(k + 2)};
  }
  return peaks;
}

struct Bounds {
  Eigen::VectorXd lo, hi;
};

void project(Eigen::VectorXd& p, const Bounds& b) {
  p = p.cwiseMax(b.lo).cwiseMin(b.hi);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
  std::vector<std::size_t> idx;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || y[i] >= y[i - 1];
    const bool right_ok = i + 1 == n || y[i] > y[i + 1];
    const bool strict = (i > 0 && y[i] > y[i - 1]) || (i + 1 < n && y[i] > y[i + 1]);
    if (left_ok && right_ok && strict) idx.push_back(i);
  }
  // Highest first; equal heights resolve to the lower wavelength.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
  return idx;
}

double half_max_sigma(const std::vector<double>& x, const std::vector<double>& y, std::size_t peak) {
  const double half = 0.5 * y[peak];
  std::size_t l = peak, r = peak;
  while (l > 0 && y[l] > half) --l;
  while (r + 1 < y.size() && y[r] > half) ++r;
  const double width = x[r] - x[l];
  return width / kFwhmPerSigma;
}

}  // namespace

// ---------------------------------------------------------------------------

Spectrum Spectrum::make(std::vector<GaussianComponent> components) {
  if (components.empty() || components.size() > 2) {
    throw ValidationError("spectrum must have one or two components");
  }
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) throw ValidationError("component weight must be in (0, 1]");
    if (!(c.center_nm > 0.0) || !std::isfinite(c.center_nm)) {
      throw ValidationError("component center must be positive");
    }
    if (!(c.sigma_nm >= 0.0) || !std::isfinite(c.sigma_nm)) {
      throw ValidationError("component sigma must be nonnegative");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("component weights must sum to 1");
  if (components.size() == 2 && components[0].center_nm == components[1].center_nm) {
    throw ValidationError("two-component spectrum needs distinct centers");
  }
  return Spectrum(std::move(components));
}

Spectrum Spectrum::from_amplitudes(const std::vector<double>& amplitudes,
                                   const std::vector<double>& centers_nm,
                                   const std::vector<double>& sigmas_nm) {
  if (amplitudes.size() != centers_nm.size() || amplitudes.size() != sigmas_nm.size()) {
    throw ValidationError("amplitude, center and sigma lists differ in length");
  }
  double sum = 0.0;
  for (double a : amplitudes) {
    if (!(a > 0.0)) throw ValidationError("amplitudes must be positive");
    sum += a;
  }
  std::vector<GaussianComponent> comps;
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    comps.push_back({amplitudes[j] / sum, centers_nm[j], sigmas_nm[j]});
  }
  if (comps.size() == 2) comps[1].weight = 1.0 - comps[0].weight;
  return make(std::move(comps));
}

Spectrum Spectrum::single(double center_nm, double sigma_nm) {
  return make({{1.0, center_nm, sigma_nm}});
}

double Spectrum::density(double wavelength_nm) const {
  double f = 0.0;
  for (const auto& c : components_) {
    if (c.sigma_nm == 0.0) continue;
    const double u = (wavelength_nm - c.center_nm) / c.sigma_nm;
    f += c.weight * std::exp(-0.5 * u * u) / (c.sigma_nm * std::sqrt(2.0 * std::numbers::pi));
  }
  return f;
}

bool Spectrum::has_broadening() const {
  return std::any_of(components_.begin(), components_.end(), [](const auto& c) { return c.sigma_nm > 0.0; });
}

// ---------------------------------------------------------------------------

void validate(const SpectrumSample& sample) {
  if (sample.points.size() < 8) {
    throw InsufficientDataError("spectrum needs at least 8 points, got " + std::to_string(sample.points.size()));
  }
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const auto& p = sample.points[i];
    if (!std::isfinite(p.wavelength_nm) || !std::isfinite(p.intensity)) {
      throw ValidationError("non-finite value at point " + std::to_string(i));
    }
    if (p.intensity < 0.0) throw ValidationError("negative intensity at " + std::to_string(p.wavelength_nm) + " nm");
    if (i > 0 && !(p.wavelength_nm > sample.points[i - 1].wavelength_nm)) {
      throw ValidationError("wavelengths must be strictly increasing (duplicate at " +
                            std::to_string(p.wavelength_nm) + " nm)");
    }
  }
}

SpectrumSample parse_spectrum_csv(std::istream& in) {
  SpectrumSample sample;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    if (!header_seen) {
      const auto comma = view.find(',');
      if (comma == std::string_view::npos || trim(view.substr(0, comma)) != "wavelength_nm" ||
          trim(view.substr(comma + 1)) != "intensity") {
        throw ParseError(line_no, "expected header 'wavelength_nm,intensity'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected exactly two columns");
    }
    SpectrumPoint p;
    if (!parse_double(view.substr(0, comma), p.wavelength_nm)) {
      throw ParseError(line_no, "wavelength is not a number");
    }
    if (!parse_double(view.substr(comma + 1), p.intensity)) {
      throw ParseError(line_no, "intensity is not a number");
    }
    if (p.intensity < 0.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": negative intensity");
    }
    sample.points.push_back(p);
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header 'wavelength_nm,intensity'");

  auto by_wavelength = [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.wavelength_nm < b.wavelength_nm; };
  if (!std::is_sorted(sample.points.begin(), sample.points.end(), by_wavelength)) {
    std::stable_sort(sample.points.begin(), sample.points.end(), by_wavelength);
    sample.resorted = true;
  }
  validate(sample);
  return sample;
}

SpectrumSample load_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum file " + path.string());
  return parse_spectrum_csv(in);
}

void write_spectrum_csv(std::ostream& out, const SpectrumSample& sample) {
  out << "wavelength_nm,intensity\n";
  char buf[64];
  for (const auto& p : sample.points) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p.wavelength_nm, p.intensity);
    out << buf;
  }
}

SpectrumSample sample_spectrum(const Spectrum& spectrum, double lo_nm, double hi_nm, int n_points) {
  if (n_points < 2 || !(hi_nm > lo_nm)) throw ContractViolation("sample_spectrum: invalid grid");
  SpectrumSample s;
  s.points.reserve(static_cast<std::size_t>(n_points));
  const double step = (hi_nm - lo_nm) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    const double x = lo_nm + step * i;
    s.points.push_back({x, spectrum.density(x)});
  }
  return s;
}

SpectrumSample sample_spectrum(const Spectrum& spectrum, int n_points) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : spectrum.components()) {
    const double half = std::max(5.0 * c.sigma_nm, 1.0);
    lo = std::min(lo, c.center_nm - half);
    hi = std::max(hi, c.center_nm + half);
  }
  return sample_spectrum(spectrum, lo, hi, n_points);
}

// ---------------------------------------------------------------------------

FitReport fit_mixture(const SpectrumSample& sample, int n_components, const FitOptions& options) {
  if (n_components != 1 && n_components != 2) throw ContractViolation("fit_mixture: n_components must be 1 or 2");
  validate(sample);

  const std::size_t n = sample.points.size();
  std::vector<double> x(n), y(n);
  double scale = 0.0, floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = sample.points[i].wavelength_nm;
    scale = std::max(scale, sample.points[i].intensity);
    floor = std::min(floor, sample.points[i].intensity);
  }
  const double x_lo = x.front(), x_hi = x.back();

  auto rms_of = [&](const std::vector<Peak>& peaks) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = peaks_at(peaks, x[i]) * scale - sample.points[i].intensity;
      ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(n));
  };

  // Zero contrast: nothing to locate.
  if (!(scale > 0.0) || (scale - floor) <= 1e-12 * scale) {
    const std::vector<Peak> flat{{scale > 0.0 ? 1.0 : 0.0, 0.5 * (x_lo + x_hi), options.sigma_max_nm}};
    return FitReport{Spectrum::single(0.5 * (x_lo + x_hi), options.sigma_max_nm), rms_of(flat), 0, false,
                     {scale}};
  }
  for (std::size_t i = 0; i < n; ++i) y[i] = sample.points[i].intensity / scale;

  // Initial guess from the highest local maxima.
  const auto maxima = local_maxima(y);
  std::vector<std::size_t> picks;
  for (std::size_t idx : maxima) {
    if (picks.size() == static_cast<std::size_t>(n_components)) break;
    const bool far = std::all_of(picks.begin(), picks.end(), [&](std::size_t q) {
      return (idx > q ? idx - q : q - idx) >= static_cast<std::size_t>(options.min_peak_separation);
    });
    if (far) picks.push_back(idx);
  }
  if (picks.empty()) {
    picks.push_back(static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin()));
  }
  std::vector<Peak> init;
  for (std::size_t idx : picks) {
    const double sig = std::clamp(half_max_sigma(x, y, idx), options.sigma_min_nm, options.sigma_max_nm);
    init.push_back({y[idx], x[idx], sig});
  }
  if (static_cast<int>(init.size()) < n_components) {
    // Single-peaked data asked for two peaks: seed a weak shoulder.
    const Peak& p = init.front();
    double c = p.center + 3.0 * p.sigma;
    if (c > x_hi) c = p.center - 3.0 * p.sigma;
    init.push_back({0.05 * p.height, std::clamp(c, x_lo, x_hi), p.sigma});
  }
  std::sort(init.begin(), init.end(), [](const Peak& a, const Peak& b) { return a.center < b.center; });

  const auto dim = static_cast<Eigen::Index>(3 * init.size());
  Eigen::VectorXd p(dim);
  Bounds bounds{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
  for (std::size_t j = 0; j < init.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(3 * j);
    p.segment(k, 3) << init[j].height, init[j].center, init[j].sigma;
    bounds.lo.segment(k, 3) << 0.0, x_lo, options.sigma_min_nm;
    bounds.hi.segment(k, 3) << std::numeric_limits<double>::infinity(), x_hi, options.sigma_max_nm;
  }
  project(p, bounds);

  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), dim);
  auto evaluate = [&](const Eigen::VectorXd& q, bool with_jacobian) {
    const auto peaks = unpack(q);
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      for (std::size_t j = 0; j < peaks.size(); ++j) {
        const Peak& pk = peaks[j];
        const double d = x[i] - pk.center;
        const double u = d / pk.sigma;
        const double g = std::exp(-0.5 * u * u);
        f += pk.height * g;
        if (with_jacobian) {
          const auto row = static_cast<Eigen::Index>(i);
          const auto k = static_cast<Eigen::Index>(3 * j);
          jac(row, k) = g;
          jac(row, k + 1) = pk.height * g * d / (pk.sigma * pk.sigma);
          jac(row, k + 2) = pk.height * g * d * d / (pk.sigma * pk.sigma * pk.sigma);
        }
      }
      r(static_cast<Eigen::Index>(i)) = f - y[i];
    }
    return 0.5 * r.squaredNorm();
  };

  auto projected_gradient_norm = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& g) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index k = 0; k < dim; ++k) {
      if ((q(k) <= bounds.lo(k) && g(k) > 0.0) || (q(k) >= bounds.hi(k) && g(k) < 0.0)) pg(k) = 0.0;
    }
    return pg.norm();
  };

  double cost = evaluate(p, true);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  const double tiny_cost = 1e-30 * static_cast<double>(n);
  for (; iter < options.max_iterations; ++iter) {
    if (!std::isfinite(cost)) throw FitError("fit diverged: cost is not finite");
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (cost <= tiny_cost || projected_gradient_norm(p, grad) < options.gradient_tolerance) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal() += lambda * diag;
      Eigen::VectorXd trial = p - lhs.ldlt().solve(grad);
      project(trial, bounds);
      const Eigen::VectorXd saved_r = r;
      const double trial_cost = evaluate(trial, false);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double rel = (cost - trial_cost) / cost;
        p = trial;
        cost = evaluate(p, true);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < options.relative_cost_tolerance) converged = true;
        break;
      }
      if (!std::isfinite(trial_cost) && !std::isfinite(cost)) throw FitError("fit diverged: cost is not finite");
      r = saved_r;
      lambda *= 4.0;
    }
    if (!accepted) {
      // No descent direction left at working precision.
      converged = projected_gradient_norm(p, jac.transpose() * r) < 1e-6;
      break;
    }
    if (converged) {
      ++iter;
      break;
    }
  }
  if (!std::isfinite(cost)) throw FitError("fit diverged: cost is not finite");

  auto peaks = unpack(p);
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.center < b.center; });
  std::vector<double> areas, centers, sigmas, heights;
  for (const Peak& pk : peaks) {
    if (!(pk.height > 0.0)) continue;
    if (!centers.empty() && pk.center == centers.back()) continue;
    areas.push_back(pk.height * pk.sigma);
    centers.push_back(pk.center);
    sigmas.push_back(pk.sigma);
    heights.push_back(pk.height * scale);
  }
  if (areas.empty()) throw FitError("fit collapsed: every peak amplitude reached zero");

  return FitReport{Spectrum::from_amplitudes(areas, centers, sigmas), rms_of(peaks), iter, converged, heights};
}

// ---------------------------------------------------------------------------

Spectrum tilt_preset(std::string_view theta) {
  for (const auto& row : kPresets) {
    if (theta != row.name) continue;
    if (row.center2 <= 0.0) return Spectrum::make({{1.0, row.center1, row.sigma1}});
    return Spectrum::from_amplitudes({row.a1, row.a2}, {row.center1, row.center2}, {row.sigma1, row.sigma2});
  }
  std::string valid;
  for (const auto& row : kPresets) valid += (valid.empty() ? "" : ", ") + std::string(row.name);
  throw UnknownPresetError("unknown preset '" + std::string(theta) + "'; valid presets: " + valid);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& row : kPresets) v.emplace_back(row.name);
    return v;
  }();
  return names;
}

double fwhm_of_sigma(double sigma_nm) {
  if (sigma_nm < 0.0) throw DomainError("fwhm_of_sigma: sigma must be nonnegative");
  return kFwhmPerSigma * sigma_nm;
}

double sigma_of_fwhm(double fwhm_nm) {
  if (fwhm_nm < 0.0) throw DomainError("sigma_of_fwhm: FWHM must be nonnegative");
  return fwhm_nm / kFwhmPerSigma;
}

}  // namespace dephaskit
