#pragma once

// Polarization dephasing in a birefringent plate.
//
// The evolution variable is the effective path difference s = dn * L / lambda0
// (in units of lambda0), so a wavelength component lambda picks up the phase
// 2 pi s lambda0 / lambda. Process matrices are written in the operator basis
// M = {I, X, -iY, Z}; Choi matrices are trace-one operators on input ⊗ output
// in the |HH>, |HV>, |VH>, |VV> ordering.

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dephaskit/qcore.hpp"
#include "dephaskit/spectra.hpp"

namespace dephaskit {

struct EvolutionParams {
  double delta_n = 0.0115;
  double lambda0_nm = 702.0;
  double s = 0.0;

  void validate() const;  // throws ValidationError
  // Plate thickness that realizes s, L = s lambda0 / dn.
  double plate_thickness_nm() const { return s * lambda0_nm / delta_n; }
  EvolutionParams at(double s_value) const {
    EvolutionParams p = *this;
    p.s = s_value;
    return p;
  }
};

// The operator basis {I, X, -iY, Z}.
const std::array<Matrix2, 4>& process_basis();

class ChoiMatrix;

class ProcessMatrix {
 public:
  // Validates Hermiticity (1e-12), PSD Choi (-1e-10) and trace preservation
  // (1e-10); throws ValidationError.
  static ProcessMatrix from_matrix(const Matrix4& chi);
  static ProcessMatrix identity();

  const Matrix4& matrix() const { return chi_; }
  Complex operator()(int r, int c) const { return chi_(r, c); }

 private:
  explicit ProcessMatrix(const Matrix4& chi) : chi_(chi) {}
  Matrix4 chi_;
  friend ProcessMatrix process_from_kappa(Complex);
};

class ChoiMatrix {
 public:
  // Validates Hermiticity, PSD within 1e-10, unit trace and an output-traced
  // marginal of I/2 within 1e-10.
  static ChoiMatrix from_matrix(const Matrix4& choi);

  const Matrix4& matrix() const { return j_; }

 private:
  explicit ChoiMatrix(const Matrix4& j) : j_(j) {}
  Matrix4 j_;
};

struct KappaTrajectory {
  std::vector<double> s_grid;
  std::vector<Complex> values;
};

// Decoherence factor from the closed-form Gaussian integral of the phase
// expanded to second order in (lambda - center) about each component.
Complex kappa(const Spectrum& spectrum, const EvolutionParams& params);

// Same quantity by adaptive Gauss-Kronrod quadrature over each component's
// +-8 sigma window (relative tolerance 1e-9).
Complex kappa_quadrature(const Spectrum& spectrum, const EvolutionParams& params);

// Closed-form kappa on every point of s_grid. Grid points are independent.
KappaTrajectory kappa_trajectory(const Spectrum& spectrum, const EvolutionParams& params,
                                 const std::vector<double>& s_grid);

// Writes `s,re_kappa,im_kappa,abs_kappa` with 12 significant digits.
void write_trajectory_csv(std::ostream& out, const KappaTrajectory& trajectory);
// Reads the same format back; validates |kappa| <= 1 + 1e-9 and increasing s.
KappaTrajectory read_trajectory_csv(std::istream& in);

// Dephasing process matrix for a decoherence factor. |k| in (1, 1 + 1e-9] is
// rescaled onto the unit circle; larger values throw DomainError.
ProcessMatrix process_from_kappa(Complex k);

// Operator-sum action sum_mn chi_mn M_m rho M_n^dagger.
Matrix2 apply_process(const ProcessMatrix& chi, const Matrix2& rho);
DensityMatrix apply_process(const ProcessMatrix& chi, const DensityMatrix& rho);
// (chi ⊗ identity) on a two-qubit state whose first factor is the system.
DensityMatrix apply_process_to_system(const ProcessMatrix& chi, const DensityMatrix& rho);

// Column-stacking superoperator: vec(E(rho)) = T vec(rho).
Matrix4 transfer_matrix(const ProcessMatrix& chi);

// chi_b ∘ chi_a (chi_a acts first).
ProcessMatrix compose(const ProcessMatrix& chi_b, const ProcessMatrix& chi_a);

ChoiMatrix chi_to_choi(const ProcessMatrix& chi);
ProcessMatrix choi_to_chi(const ChoiMatrix& choi);
// Raw basis changes without validation.
Matrix4 chi_to_choi_matrix(const Matrix4& chi);
Matrix4 choi_to_chi_matrix(const Matrix4& choi);

// Environment-level model: the wavelength distribution is cut into n_samples
// bins (exact Gaussian mass per bin), each bin applies the plate unitary to
// system ⊗ |lambda>, and the environment is traced out.
DensityMatrix simulate_environment(const Spectrum& spectrum, const EvolutionParams& params,
                                   const DensityMatrix& rho0, int n_samples);

using Channel = std::function<DensityMatrix(const DensityMatrix&)>;

// Process tomography from the probe states H, V, +, R. Throws
// NonPhysicalChannelError when the reconstructed Choi matrix has an
// eigenvalue below -1e-8.
ProcessMatrix simulate_tomography(const Channel& channel);

}  // namespace dephaskit
