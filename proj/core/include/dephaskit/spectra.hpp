#pragma once

// Photon spectra: the Gaussian-mixture wavelength distribution that plays the
// role of the environment's initial state, measured samples, mixture fitting,
// and the tabulated tilt-angle presets.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dephaskit {

struct GaussianComponent {
  double weight = 1.0;     // in (0, 1]
  double center_nm = 0.0;  // > 0
  double sigma_nm = 0.0;   // >= 0; zero means a single sharp line
};

// One or two Gaussian components over wavelength with weights summing to 1.
class Spectrum {
 public:
  // Validates the invariants; throws ValidationError.
  static Spectrum make(std::vector<GaussianComponent> components);
  // Weights are a_j / sum(a).
  static Spectrum from_amplitudes(const std::vector<double>& amplitudes,
                                  const std::vector<double>& centers_nm,
                                  const std::vector<double>& sigmas_nm);
  static Spectrum single(double center_nm, double sigma_nm);

  const std::vector<GaussianComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  // Normalized density |f|^2 at a wavelength. Components with sigma == 0 are
  // delta lines and contribute nothing pointwise.
  double density(double wavelength_nm) const;

  bool has_broadening() const;

 private:
  explicit Spectrum(std::vector<GaussianComponent> c) : components_(std::move(c)) {}
  std::vector<GaussianComponent> components_;
};

struct SpectrumPoint {
  double wavelength_nm = 0.0;
  double intensity = 0.0;
};

struct SpectrumSample {
  std::vector<SpectrumPoint> points;
  bool resorted = false;  // input rows arrived out of wavelength order
};

// Checks >= 8 points, strictly increasing wavelengths, nonnegative finite
// intensities.
void validate(const SpectrumSample& sample);

// CSV with header `wavelength_nm,intensity`. Throws ParseError (with the
// 1-based line number), InsufficientDataError or ValidationError.
SpectrumSample parse_spectrum_csv(std::istream& in);
SpectrumSample load_spectrum(const std::filesystem::path& path);
void write_spectrum_csv(std::ostream& out, const SpectrumSample& sample);

// Evaluates the spectrum density on an equally spaced grid [lo, hi].
SpectrumSample sample_spectrum(const Spectrum& spectrum, double lo_nm, double hi_nm, int n_points);
// Grid spanning every component's center +- 5 sigma (at least +- 1 nm).
SpectrumSample sample_spectrum(const Spectrum& spectrum, int n_points);

struct FitOptions {
  int max_iterations = 500;
  double relative_cost_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  double sigma_min_nm = 0.01;
  double sigma_max_nm = 5.0;
  int min_peak_separation = 5;  // grid points
};

struct FitReport {
  Spectrum spectrum;
  double residual_rms = 0.0;  // in the sample's intensity units
  int iterations = 0;
  bool converged = false;
  // Fitted per-component peak heights in the sample's intensity units.
  std::vector<double> peak_heights;
};

// Levenberg-Marquardt fit of 1 or 2 Gaussian peaks (amplitude, center, width
// free), initialized from the highest local maxima. Throws FitError when the
// cost becomes non-finite.
FitReport fit_mixture(const SpectrumSample& sample, int n_components, const FitOptions& options = {});

// Tabulated fits for the Fabry-Perot tilt angles (degrees) "1.5" ... "9.0".
// Throws UnknownPresetError listing the valid identifiers.
Spectrum tilt_preset(std::string_view theta);
const std::vector<std::string>& preset_names();

// Gaussian full width at half maximum, 2 sqrt(2 ln 2) sigma. Throw DomainError
// on negative input.
double fwhm_of_sigma(double sigma_nm);
double sigma_of_fwhm(double fwhm_nm);

}  // namespace dephaskit
