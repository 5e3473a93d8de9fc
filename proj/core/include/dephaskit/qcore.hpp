#pragma once

// Dense complex linear algebra and qubit quantum-information primitives.
//
// Two-qubit objects use the fixed basis ordering |HH>, |HV>, |VH>, |VV>
// (first factor is the more significant index). H is |0>, V is |1>.

#include <complex>

#include <Eigen/Dense>

namespace dephaskit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
// Eigenvalues above -kEigenClamp count as nonnegative; roundoff on nearly
// pure states lands just below zero.
inline constexpr double kEigenClamp = 1e-10;
inline constexpr double kEigInput = 1e-10;
}  // namespace tol

enum class Subsystem { kFirst, kSecond };

struct HermitianEigen {
  Eigen::VectorXd values;  // descending
  Matrix vectors;          // column k pairs with values[k]
};

// Throws ContractViolation if `a` is not square or deviates from Hermitian by
// more than 1e-10 in any entry.
HermitianEigen hermitian_eig(const Matrix& a);

double max_abs(const Matrix& a);
double hermiticity_defect(const Matrix& a);
Matrix kron(const Matrix& a, const Matrix& b);

namespace pauli {
Matrix2 identity();
Matrix2 x();
Matrix2 y();
Matrix2 z();
}  // namespace pauli

namespace kets {
Vector2 h();
Vector2 v();
Vector2 plus();
Vector2 minus();
Vector2 r();
Vector2 l();
// (|HH> + |VV>)/sqrt(2)
Vector4 phi_plus();
}  // namespace kets

// A normalized, positive semidefinite qubit (dim 2) or two-qubit (dim 4) state.
class DensityMatrix {
 public:
  // Validates dimension, Hermiticity (1e-12), unit trace (1e-12) and
  // eigenvalues >= -1e-10. Throws ValidationError otherwise.
  static DensityMatrix from_matrix(const Matrix& m);
  static DensityMatrix pure(const Vector& ket);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Half the trace norm of the difference, clamped to [0, 1].
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Reduced state of the subsystem `keep` of a two-qubit state.
DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep);
Matrix2 partial_trace(const Matrix4& m, Subsystem keep);

// Transpose on one tensor factor of a 4x4 operator (default: the second).
Matrix4 partial_transpose(const Matrix4& m, Subsystem which = Subsystem::kSecond);

// Entropy in bits; eigenvalues are clamped into [0, 1] and 0 log 0 := 0.
double von_neumann_entropy(const DensityMatrix& rho);

// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

// S(A) + S(B) - S(AB) in bits.
double mutual_information(const DensityMatrix& rho);

double binary_entropy(double p);

}  // namespace dephaskit
