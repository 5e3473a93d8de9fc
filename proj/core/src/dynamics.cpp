#include "dephaskit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dephaskit/errors.hpp"

namespace dephaskit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kWindowSigmas = 8.0;

// Columns are (I ⊗ M_m)|Phi+>; orthonormal, so chi <-> Choi is a unitary
// change of basis.
const Matrix4& choi_basis() {
  static const Matrix4 v = [] {
    Matrix4 out;
    const Vector4 phi = kets::phi_plus();
    for (int m = 0; m < 4; ++m) {
      out.col(m) = kron(pauli::identity(), process_basis()[static_cast<std::size_t>(m)]) * phi;
    }
    return out;
  }();
  return v;
}

Matrix4 hermitian_part(const Matrix4& m) {
  return 0.5 * (m + m.adjoint());
}

// Choi matrix (input ⊗ output, trace one) of a column-stacking superoperator.
Matrix4 choi_from_transfer(const Matrix4& t) {
  Matrix4 j;
  for (int i = 0; i < 2; ++i)
    for (int jj = 0; jj < 2; ++jj)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) j(2 * i + k, 2 * jj + l) = 0.5 * t(k + 2 * l, i + 2 * jj);
  return j;
}

Matrix2 output_marginal_input(const Matrix4& choi) {
  // Trace over the output factor (second).
  return partial_trace(choi, Subsystem::kFirst);
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void EvolutionParams::validate() const {
  if (!(delta_n > 0.0 && delta_n < 1.0)) throw ValidationError("delta_n must lie in (0, 1)");
  if (!(lambda0_nm > 0.0)) throw ValidationError("lambda0_nm must be positive");
  if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("s must be finite and nonnegative");
}

const std::array<Matrix2, 4>& process_basis() {
  static const std::array<Matrix2, 4> basis = {pauli::identity(), pauli::x(), Complex(0, -1) * pauli::y(),
                                               pauli::z()};
  return basis;
}

// ---------------------------------------------------------------------------

ProcessMatrix ProcessMatrix::from_matrix(const Matrix4& chi) {
  const double defect = hermiticity_defect(chi);
  if (defect > tol::kHermitian) {
    throw ValidationError("process matrix is not Hermitian (deviation " + std::to_string(defect) + ")");
  }
  const Matrix4 choi = chi_to_choi_matrix(hermitian_part(chi));
  const double min_eig = hermitian_eig(choi).values.minCoeff();
  if (min_eig < -tol::kEigenClamp) {
    throw ValidationError("process is not completely positive (Choi eigenvalue " + std::to_string(min_eig) + ")");
  }
  const double tp_defect = max_abs(output_marginal_input(choi) - 0.5 * Matrix2::Identity());
  if (tp_defect > 1e-10) {
    throw ValidationError("process is not trace preserving (deviation " + std::to_string(tp_defect) + ")");
  }
  return ProcessMatrix(hermitian_part(chi));
}

ProcessMatrix ProcessMatrix::identity() {
  Matrix4 chi = Matrix4::Zero();
  chi(0, 0) = 1.0;
  return ProcessMatrix(chi);
}

ChoiMatrix ChoiMatrix::from_matrix(const Matrix4& choi) {
  const double defect = hermiticity_defect(choi);
  if (defect > tol::kHermitian) throw ValidationError("Choi matrix is not Hermitian");
  const double min_eig = hermitian_eig(choi).values.minCoeff();
  if (min_eig < -tol::kEigenClamp) {
    throw ValidationError("Choi matrix is not PSD (eigenvalue " + std::to_string(min_eig) + ")");
  }
  if (std::abs(choi.trace() - 1.0) > 1e-10) throw ValidationError("Choi matrix must have unit trace");
  if (max_abs(output_marginal_input(choi) - 0.5 * Matrix2::Identity()) > 1e-10) {
    throw ValidationError("Choi matrix is not trace preserving");
  }
  return ChoiMatrix(hermitian_part(choi));
}

// ---------------------------------------------------------------------------

Complex kappa(const Spectrum& spectrum, const EvolutionParams& params) {
  params.validate();
  Complex k = 0.0;
  for (const auto& c : spectrum.components()) {
    // phase(lambda) = phi0 - a x + b x^2 + O(x^3), x = lambda - center
    const double phi0 = kTwoPi * params.s * params.lambda0_nm / c.center_nm;
    const double a = phi0 / c.center_nm;
    const double b = a / c.center_nm;
    const double var = c.sigma_nm * c.sigma_nm;
    const Complex z(1.0, -2.0 * b * var);
    const Complex gauss = std::exp(-a * a * var / (2.0 * z)) / std::sqrt(z);
    k += c.weight * std::polar(1.0, phi0) * gauss;
  }
  return k;
}

Complex kappa_quadrature(const Spectrum& spectrum, const EvolutionParams& params) {
  params.validate();
  using boost::math::quadrature::gauss_kronrod;
  constexpr int kPieces = 8;
  Complex k = 0.0;
  for (const auto& c : spectrum.components()) {
    const double scale = kTwoPi * params.s * params.lambda0_nm;
    if (c.sigma_nm == 0.0) {
      k += c.weight * std::polar(1.0, scale / c.center_nm);
      continue;
    }
    const double norm = 1.0 / (c.sigma_nm * std::sqrt(kTwoPi));
    auto density = [&](double lam) {
      const double u = (lam - c.center_nm) / c.sigma_nm;
      return norm * std::exp(-0.5 * u * u);
    };
    auto re = [&](double lam) { return density(lam) * std::cos(scale / lam); };
    auto im = [&](double lam) { return density(lam) * std::sin(scale / lam); };
    const double lo = c.center_nm - kWindowSigmas * c.sigma_nm;
    const double width = 2.0 * kWindowSigmas * c.sigma_nm / kPieces;
    double sum_re = 0.0, sum_im = 0.0;
    for (int p = 0; p < kPieces; ++p) {
      const double a = lo + p * width, b = a + width;
      sum_re += gauss_kronrod<double, 31>::integrate(re, a, b, 10, 1e-10);
      sum_im += gauss_kronrod<double, 31>::integrate(im, a, b, 10, 1e-10);
    }
    k += c.weight * Complex(sum_re, sum_im);
  }
  return k;
}

KappaTrajectory kappa_trajectory(const Spectrum& spectrum, const EvolutionParams& params,
                                 const std::vector<double>& s_grid) {
  KappaTrajectory t;
  t.s_grid = s_grid;
  t.values.reserve(s_grid.size());
  for (double s : s_grid) t.values.push_back(kappa(spectrum, params.at(s)));
  return t;
}

void write_trajectory_csv(std::ostream& out, const KappaTrajectory& trajectory) {
  out << "s,re_kappa,im_kappa,abs_kappa\n";
  for (std::size_t i = 0; i < trajectory.s_grid.size(); ++i) {
    const Complex k = trajectory.values[i];
    out << fmt12(trajectory.s_grid[i]) << ',' << fmt12(k.real()) << ',' << fmt12(k.imag()) << ','
        << fmt12(std::abs(k)) << '\n';
  }
}

KappaTrajectory read_trajectory_csv(std::istream& in) {
  KappaTrajectory t;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || (++line_no, line.rfind("s,re_kappa,im_kappa,abs_kappa", 0) != 0)) {
    throw ParseError(1, "expected header 's,re_kappa,im_kappa,abs_kappa'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    double v[4];
    char comma;
    if (!(row >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3])) {
      throw ParseError(line_no, "malformed trajectory row");
    }
    if (!t.s_grid.empty() && !(v[0] > t.s_grid.back())) throw ValidationError("line " + std::to_string(line_no) + ": s grid is not increasing");
    if (std::hypot(v[1], v[2]) > 1.0 + 1e-9) throw ValidationError("line " + std::to_string(line_no) + ": |kappa| > 1");
    t.s_grid.push_back(v[0]);
    t.values.emplace_back(v[1], v[2]);
  }
  return t;
}

// ---------------------------------------------------------------------------

ProcessMatrix process_from_kappa(Complex k) {
  const double mod = std::abs(k);
  if (!std::isfinite(mod) || mod > 1.0 + 1e-9) {
    throw DomainError("process_from_kappa: |kappa| = " + std::to_string(mod) + " exceeds 1");
  }
  if (mod > 1.0) k /= mod;
  const Complex kc = std::conj(k);
  Matrix4 chi = Matrix4::Zero();
  chi(0, 0) = 0.25 * (2.0 + k + kc);
  chi(0, 3) = 0.25 * (k - kc);
  chi(3, 0) = 0.25 * (kc - k);
  chi(3, 3) = 0.25 * (2.0 - k - kc);
  return ProcessMatrix(chi);
}

Matrix2 apply_process(const ProcessMatrix& chi, const Matrix2& rho) {
  const auto& m = process_basis();
  Matrix2 out = Matrix2::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Complex c = chi(a, b);
      if (c == 0.0) continue;
      out += c * m[static_cast<std::size_t>(a)] * rho * m[static_cast<std::size_t>(b)].adjoint();
    }
  return out;
}

DensityMatrix apply_process(const ProcessMatrix& chi, const DensityMatrix& rho) {
  if (rho.dim() != 2) throw ContractViolation("apply_process: expected a qubit state");
  const Matrix2 out = apply_process(chi, Matrix2(rho.matrix()));
  return DensityMatrix::from_matrix(0.5 * (out + out.adjoint()));
}

DensityMatrix apply_process_to_system(const ProcessMatrix& chi, const DensityMatrix& rho) {
  if (rho.dim() != 4) throw ContractViolation("apply_process_to_system: expected a two-qubit state");
  const auto& m = process_basis();
  const Matrix4 r = rho.matrix();
  Matrix4 out = Matrix4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Complex c = chi(a, b);
      if (c == 0.0) continue;
      const Matrix4 ma = kron(m[static_cast<std::size_t>(a)], pauli::identity());
      const Matrix4 mb = kron(m[static_cast<std::size_t>(b)], pauli::identity());
      out += c * ma * r * mb.adjoint();
    }
  return DensityMatrix::from_matrix(hermitian_part(out));
}

Matrix4 transfer_matrix(const ProcessMatrix& chi) {
  const auto& m = process_basis();
  Matrix4 t = Matrix4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Complex c = chi(a, b);
      if (c == 0.0) continue;
      t += c * kron(m[static_cast<std::size_t>(b)].conjugate(), m[static_cast<std::size_t>(a)]);
    }
  return t;
}

ProcessMatrix compose(const ProcessMatrix& chi_b, const ProcessMatrix& chi_a) {
  const Matrix4 t = transfer_matrix(chi_b) * transfer_matrix(chi_a);
  return ProcessMatrix::from_matrix(hermitian_part(choi_to_chi_matrix(choi_from_transfer(t))));
}

Matrix4 chi_to_choi_matrix(const Matrix4& chi) {
  const Matrix4& v = choi_basis();
  return v * chi * v.adjoint();
}

Matrix4 choi_to_chi_matrix(const Matrix4& choi) {
  const Matrix4& v = choi_basis();
  return v.adjoint() * choi * v;
}

ChoiMatrix chi_to_choi(const ProcessMatrix& chi) {
  return ChoiMatrix::from_matrix(hermitian_part(chi_to_choi_matrix(chi.matrix())));
}

ProcessMatrix choi_to_chi(const ChoiMatrix& choi) {
  return ProcessMatrix::from_matrix(hermitian_part(choi_to_chi_matrix(choi.matrix())));
}

// ---------------------------------------------------------------------------

DensityMatrix simulate_environment(const Spectrum& spectrum, const EvolutionParams& params,
                                   const DensityMatrix& rho0, int n_samples) {
  params.validate();
  if (n_samples < 16) throw ContractViolation("simulate_environment: n_samples must be >= 16");
  if (rho0.dim() != 2) throw ContractViolation("simulate_environment: expected a qubit state");

  struct Bin {
    double mass;
    double wavelength;
  };
  std::vector<Bin> bins;
  const auto& comps = spectrum.components();
  const auto broadened = std::count_if(comps.begin(), comps.end(), [](const auto& c) { return c.sigma_nm > 0.0; });
  const int per_component = broadened > 0 ? std::max(1, n_samples / static_cast<int>(broadened)) : 1;
  for (const auto& c : comps) {
    if (c.sigma_nm == 0.0) {
      bins.push_back({c.weight, c.center_nm});
      continue;
    }
    // Equal-width bins over +-8 sigma; each bin carries its exact Gaussian
    // mass and sits at its conditional mean wavelength.
    const double lo = -kWindowSigmas, width = 2.0 * kWindowSigmas / per_component;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const double inv_sqrt2pi = 1.0 / std::sqrt(kTwoPi);
    double total = 0.0;
    std::vector<Bin> local;
    for (int i = 0; i < per_component; ++i) {
      const double u0 = lo + i * width, u1 = u0 + width;
      const double mass = 0.5 * (std::erf(u1 * inv_sqrt2) - std::erf(u0 * inv_sqrt2));
      if (mass <= 0.0) continue;
      const double pdf0 = inv_sqrt2pi * std::exp(-0.5 * u0 * u0);
      const double pdf1 = inv_sqrt2pi * std::exp(-0.5 * u1 * u1);
      const double mean_u = (pdf0 - pdf1) / mass;
      local.push_back({mass, c.center_nm + c.sigma_nm * mean_u});
      total += mass;
    }
    for (auto& b : local) bins.push_back({c.weight * b.mass / total, b.wavelength});
  }

  // Per bin: U = diag(1, e^{i phi}) on the polarization; U rho U^dagger only
  // rephases the off-diagonal entries, diagonal factors are exactly 1.
  Complex lower = 0.0;  // factor on rho(1, 0)
  double mass = 0.0;
  for (const Bin& b : bins) {
    const double phi = kTwoPi * params.s * params.lambda0_nm / b.wavelength;
    lower += b.mass * std::polar(1.0, phi);
    mass += b.mass;
  }
  lower /= mass;

  Matrix2 out = rho0.matrix();
  out(1, 0) *= lower;
  out(0, 1) *= std::conj(lower);
  return DensityMatrix::from_matrix(out);
}

ProcessMatrix simulate_tomography(const Channel& channel) {
  const Matrix2 eh = channel(DensityMatrix::pure(kets::h())).matrix();
  const Matrix2 ev = channel(DensityMatrix::pure(kets::v())).matrix();
  const Matrix2 ep = channel(DensityMatrix::pure(kets::plus())).matrix();
  const Matrix2 er = channel(DensityMatrix::pure(kets::r())).matrix();
  const Complex i(0.0, 1.0);

  // Images of the matrix units |a><b| by linearity.
  std::array<std::array<Matrix2, 2>, 2> unit;
  unit[0][0] = eh;
  unit[1][1] = ev;
  unit[0][1] = ep + i * er - 0.5 * (1.0 + i) * (eh + ev);
  unit[1][0] = ep - i * er - 0.5 * (1.0 - i) * (eh + ev);

  Matrix4 choi;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) choi.block(2 * a, 2 * b, 2, 2) = 0.5 * unit[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  choi = hermitian_part(choi);

  const double min_eig = hermitian_eig(choi).values.minCoeff();
  if (min_eig < -1e-8) {
    throw NonPhysicalChannelError("tomography: reconstructed Choi matrix has eigenvalue " + std::to_string(min_eig));
  }
  return ProcessMatrix::from_matrix(hermitian_part(choi_to_chi_matrix(choi)));
}

}  // namespace dephaskit
