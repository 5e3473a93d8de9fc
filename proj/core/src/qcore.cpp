#include "dephaskit/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dephaskit/errors.hpp"

namespace dephaskit {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Matrix4 yy() {
  return kron(pauli::y(), pauli::y());
}

double entropy_of(const Eigen::VectorXd& eigenvalues) {
  double s = 0.0;
  for (double p : eigenvalues) {
    p = std::clamp(p, 0.0, 1.0);
    if (p > 0.0) s -= p * std::log2(p);
  }
  return s;
}

}  // namespace

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Matrix& a) {
  return max_abs(a - a.adjoint());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianEigen hermitian_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw ContractViolation("hermitian_eig: matrix is not square");
  const double defect = hermiticity_defect(a);
  if (defect > tol::kEigInput) {
    throw ContractViolation("hermitian_eig: input is not Hermitian (max deviation " +
                            std::to_string(defect) + ")");
  }
  const Matrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("hermitian_eig: eigensolver failed");
  // Eigen sorts ascending.
  HermitianEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

namespace pauli {
Matrix2 identity() { return Matrix2::Identity(); }
Matrix2 x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}
Matrix2 y() {
  Matrix2 m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
Matrix2 z() {
  Matrix2 m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

namespace kets {
Vector2 h() { return Vector2(1, 0); }
Vector2 v() { return Vector2(0, 1); }
Vector2 plus() { return Vector2(kInvSqrt2, kInvSqrt2); }
Vector2 minus() { return Vector2(kInvSqrt2, -kInvSqrt2); }
Vector2 r() { return Vector2(kInvSqrt2, Complex(0, kInvSqrt2)); }
Vector2 l() { return Vector2(kInvSqrt2, Complex(0, -kInvSqrt2)); }
Vector4 phi_plus() { return Vector4(kInvSqrt2, 0, 0, kInvSqrt2); }
}  // namespace kets

DensityMatrix DensityMatrix::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
    throw ValidationError("density matrix must be 2x2 or 4x4");
  }
  const double defect = hermiticity_defect(m);
  if (defect > tol::kHermitian) {
    throw ValidationError("density matrix is not Hermitian (deviation " + std::to_string(defect) + ")");
  }
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > tol::kTrace || std::abs(m.trace().imag()) > tol::kTrace) {
    throw ValidationError("density matrix trace is " + std::to_string(tr) + ", expected 1");
  }
  const double min_eig = hermitian_eig(m).values.minCoeff();
  if (min_eig < -tol::kEigenClamp) {
    throw ValidationError("density matrix has negative eigenvalue " + std::to_string(min_eig));
  }
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::pure(const Vector& ket) {
  const double n = ket.norm();
  if (n == 0.0) throw ValidationError("zero state vector");
  const Vector k = ket / n;
  return from_matrix(k * k.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim != 2 && dim != 4) throw ValidationError("density matrix must be 2x2 or 4x4");
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != 2 || b.dim() != 2) throw ContractViolation("tensor: both factors must be qubits");
  return DensityMatrix::from_matrix(kron(a.matrix(), b.matrix()));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ContractViolation("trace_distance: dimension mismatch");
  const HermitianEigen e = hermitian_eig(a.matrix() - b.matrix());
  return std::clamp(0.5 * e.values.cwiseAbs().sum(), 0.0, 1.0);
}

Matrix2 partial_trace(const Matrix4& m, Subsystem keep) {
  Matrix2 out = Matrix2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        if (keep == Subsystem::kFirst)
          out(i, j) += m(2 * i + k, 2 * j + k);
        else
          out(i, j) += m(2 * k + i, 2 * k + j);
      }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
  if (rho.dim() != 4) throw ContractViolation("partial_trace: expected a two-qubit state");
  Matrix2 reduced = partial_trace(Matrix4(rho.matrix()), keep);
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  return DensityMatrix::from_matrix(reduced);
}

Matrix4 partial_transpose(const Matrix4& m, Subsystem which) {
  Matrix4 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          // m(|a b><c d|)
          if (which == Subsystem::kSecond)
            out(2 * a + d, 2 * c + b) = m(2 * a + b, 2 * c + d);
          else
            out(2 * c + b, 2 * a + d) = m(2 * a + b, 2 * c + d);
        }
  return out;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of(hermitian_eig(rho.matrix()).values);
}

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw ContractViolation("concurrence: expected a two-qubit state");
  // rho = W W^dagger; the square roots of the eigenvalues of rho*rho~ are the
  // singular values of W^dagger (Y⊗Y) W^*. Working with W keeps the small
  // roots accurate where sqrt(eigenvalue) would amplify roundoff.
  const HermitianEigen e = hermitian_eig(rho.matrix());
  const double cut = 1e-14 * std::max(1.0, e.values(0));
  Matrix w = e.vectors;
  for (int k = 0; k < 4; ++k) {
    const double lam = e.values(k);
    w.col(k) *= lam > cut ? std::sqrt(lam) : 0.0;
  }
  const Matrix tau = w.adjoint() * yy() * w.conjugate();
  Eigen::JacobiSVD<Matrix> svd(tau);
  const Eigen::VectorXd s = svd.singularValues();  // descending
  return std::max(0.0, s(0) - s(1) - s(2) - s(3));
}

double mutual_information(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw ContractViolation("mutual_information: expected a two-qubit state");
  const Matrix4 m = rho.matrix();
  const Matrix2 a = partial_trace(m, Subsystem::kFirst);
  const Matrix2 b = partial_trace(m, Subsystem::kSecond);
  auto herm = [](const Matrix& x) { return Matrix(0.5 * (x + x.adjoint())); };
  return entropy_of(hermitian_eig(herm(a)).values) + entropy_of(hermitian_eig(herm(b)).values) -
         entropy_of(hermitian_eig(m).values);
}

double binary_entropy(double p) {
  return entropy_of(Eigen::Vector2d(p, 1.0 - p));
}

}  // namespace dephaskit
