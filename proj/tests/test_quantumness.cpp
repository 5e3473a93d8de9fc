#include <doctest.h>

#include "dephaskit/errors.hpp"
#include "dephaskit/quantumness.hpp"
#include "support.hpp"

using namespace dephaskit;
using testsupport::Rng;

namespace {

Matrix4 choi(Complex k) { return chi_to_choi(process_from_kappa(k)).matrix(); }

bool is_valid_choi(const Matrix4& m, double tol) {
  return std::abs(m.trace() - 1.0) < tol && testsupport::min_eig(m) > -tol &&
         max_abs(testsupport::input_marginal(m) - Matrix2::Identity() / 2.0) < tol;
}

bool is_ppt(const Matrix4& m, double tol) { return testsupport::min_eig(testsupport::pt_second(m)) > -tol; }

// Re-checks an alpha split without the solver.
void check_alpha_certificate(const Matrix4& j, const QuantumnessReport& r) {
  const double a = r.alpha;
  const auto& c = r.alpha_certificate;
  CHECK(max_abs((1.0 - a) * c.classical_part + a * c.quantum_part - j) < 1e-7);
  if (a < 1.0 - 1e-6) {
    CHECK(is_valid_choi(c.classical_part, 1e-7 / (1.0 - a)));
    CHECK(is_ppt(c.classical_part, 1e-7 / (1.0 - a)));
  }
  if (a > 1e-6) CHECK(is_valid_choi(c.quantum_part, 1e-7 / a));
}

void check_beta_certificate(const Matrix4& j, const QuantumnessReport& r) {
  const Matrix4& n = r.beta_certificate.noise;
  CHECK(is_valid_choi(n, 1e-7));
  CHECK(is_ppt((j + r.beta * n) / (1.0 + r.beta), 1e-7));
}

// Witness bounds for the PPT set: with P the projector on the most negative
// eigenvector of PT(J), alpha >= -lambda_min / (-min eig PT(Q)) >= -2 lambda_min
// and beta >= -lambda_min / lambda_max(PT(P)).
struct WitnessBound {
  double alpha;
  double beta;
};
WitnessBound witness_bound(const Matrix4& j) {
  Eigen::SelfAdjointEigenSolver<Matrix4> es(testsupport::pt_second(j));
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return {0.0, 0.0};
  const Vector4 v = es.eigenvectors().col(0);
  const Matrix4 ptp = testsupport::pt_second(Matrix4(v * v.adjoint()));
  Eigen::SelfAdjointEigenSolver<Matrix4> ep(ptp);
  return {-2.0 * lmin, -lmin / ep.eigenvalues()(3)};
}

// Explicit feasible points for a dephasing Choi: the split
// J = |k| J_U + (1 - |k|) J_0 with J_U the phase unitary, and the bit-flip
// noise that restores a PPT mixture at beta = |k|.
double explicit_alpha_upper(Complex k) {
  const Matrix4 ju = choi(std::polar(1.0, std::arg(k)));
  const Matrix4 j0 = choi(0.0);
  const double a = std::abs(k);
  REQUIRE(max_abs(a * ju + (1.0 - a) * j0 - choi(k)) < 1e-14);
  REQUIRE(is_ppt(j0, 1e-14));
  return a;
}
double explicit_beta_upper(Complex k) {
  const Matrix4 flip = testsupport::choi_of([](const Matrix2& m) -> Matrix2 { return pauli::x() * m * pauli::x(); });
  const double b = std::abs(k);
  REQUIRE(is_ppt((choi(k) + b * flip) / (1.0 + b), 1e-14));
  return b;
}

// A user-defined set forwarding to the built-in PPT test.
class ForwardingSet final : public ClassicalSet {
 public:
  ClassicalSetFormulation tag() const override { return ClassicalSetFormulation::kPluggable; }
  std::string name() const override { return "forwarding"; }
  Membership membership(const Matrix4& c) const override { return inner_.membership(c); }
  void constrain(ConeProblem& p, VarId v, const Matrix& e) const override { inner_.constrain(p, v, e); }

 private:
  MeasurePreparePpt inner_;
};

}  // namespace

TEST_CASE("membership examples") {
  CHECK(is_classical(chi_to_choi(process_from_kappa(0.0))).member);
  const Membership id = is_classical(chi_to_choi(ProcessMatrix::identity()));
  CHECK_FALSE(id.member);
  CHECK(id.violation == doctest::Approx(0.5).epsilon(1e-12));
  const Matrix4 mixed = Matrix4::Identity() / 4.0;
  CHECK(is_classical(ChoiMatrix::from_matrix(mixed)).member);
  CHECK(is_classical(ChoiMatrix::from_matrix(mixed)).violation == 0.0);

  IncoherentStochastic inc;
  CHECK(inc.membership(choi(0.0)).member);
  CHECK_FALSE(inc.membership(choi(0.3)).member);
  CHECK(inc.membership(choi(0.3)).violation > 0.0);

  CHECK(classical_set_by_name("ppt")->name() == "measure-prepare-ppt");
  CHECK(classical_set_by_name("incoherent")->tag() == ClassicalSetFormulation::kPluggable);
  CHECK_THROWS_AS(classical_set_by_name("ref30"), ValidationError);
  CHECK(std::string(to_string(ClassicalSetFormulation::kMeasurePreparePpt)) == "MEASURE_PREPARE_PPT");
}

TEST_CASE("unitary anchor") {
  for (double phase : {0.0, 0.4, 2.0, -1.3}) {
    const Complex k = std::polar(1.0, phase);
    const auto r = quantumness(process_from_kappa(k));
    CHECK(std::abs(r.alpha - 1.0) < 1e-6);
    CHECK(std::abs(r.beta - 1.0) < 1e-5);
    check_alpha_certificate(choi(k), r);
    check_beta_certificate(choi(k), r);
  }
  const auto zero = quantumness(process_from_kappa(0.0));
  CHECK(zero.alpha == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(zero.beta) < 1e-9);
}

TEST_CASE("alpha and beta equal |kappa| with matching witness and explicit bounds") {
  double prev_a = -1.0, prev_b = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double m = 0.1 * i;
    const Complex k = std::polar(m, 0.7 * i);
    const auto r = quantumness(process_from_kappa(k));
    const WitnessBound lb = witness_bound(choi(k));
    CAPTURE(m);
    CHECK(lb.alpha == doctest::Approx(m).epsilon(1e-12));
    CHECK(lb.beta == doctest::Approx(m).epsilon(1e-12));
    CHECK(std::abs(r.alpha - m) < 1e-6);
    CHECK(std::abs(r.beta - m) < 1e-5);
    CHECK(r.alpha >= lb.alpha - 1e-7);
    CHECK(r.alpha <= explicit_alpha_upper(k) + 1e-7);
    CHECK(r.beta >= lb.beta - 1e-7);
    CHECK(r.beta <= explicit_beta_upper(k) + 1e-7);
    CHECK(r.alpha >= prev_a - 1e-9);
    CHECK(r.beta >= prev_b - 1e-9);
    CHECK(r.solver_gap < 1e-6);
    check_alpha_certificate(choi(k), r);
    check_beta_certificate(choi(k), r);
    prev_a = r.alpha;
    prev_b = r.beta;
  }
}

TEST_CASE("phase invariance") {
  Rng rng(51);
  for (double m : {0.3, 0.7}) {
    const auto base = quantumness(process_from_kappa(m));
    for (int i = 0; i < 20; ++i) {
      const auto r = quantumness(process_from_kappa(std::polar(m, rng.uniform(-3.14159, 3.14159))));
      CHECK(std::abs(r.alpha - base.alpha) < 1e-6);
      CHECK(std::abs(r.beta - base.beta) < 1e-6);
    }
  }
}

TEST_CASE("alpha is convex under Choi mixtures") {
  Rng rng(52);
  for (int i = 0; i < 20; ++i) {
    const Complex ka = rng.in_disk(), kb = rng.in_disk();
    const double w = rng.uniform();
    const Matrix4 mix = w * choi(ka) + (1.0 - w) * choi(kb);
    const double am = alpha(choi_to_chi(ChoiMatrix::from_matrix(mix))).alpha;
    const double aa = alpha(process_from_kappa(ka)).alpha;
    const double ab = alpha(process_from_kappa(kb)).alpha;
    CHECK(am <= w * aa + (1.0 - w) * ab + 1e-6);
  }
}

TEST_CASE("near-unitary dephasing keeps its full quantum weight") {
  for (double eps : {1e-13, 1e-10, 1.6e-8, 1e-6}) {
    const double m = 1.0 - eps;
    const auto r = alpha(process_from_kappa(std::polar(m, 1.0)));
    CAPTURE(eps);
    CHECK(std::abs(r.alpha - m) < 1e-6);
  }
}

TEST_CASE("general channels satisfy the witness bounds") {
  Rng rng(53);
  for (int i = 0; i < 15; ++i) {
    // Channel from a random Stinespring isometry C^2 -> C^2 ⊗ C^2.
    Eigen::HouseholderQR<Matrix> qr(rng.gaussian(4));
    const Matrix q = Matrix(qr.householderQ()).leftCols(2);
    const Matrix4 j = testsupport::choi_of([&](const Matrix2& m) -> Matrix2 {
      const Matrix big = q * m * q.adjoint();
      Matrix2 out;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out(a, b) = big(2 * a, 2 * b) + big(2 * a + 1, 2 * b + 1);
      return out;
    });
    const ProcessMatrix chi = choi_to_chi(ChoiMatrix::from_matrix(j));
    const auto r = quantumness(chi);
    const WitnessBound lb = witness_bound(j);
    CHECK(r.alpha >= lb.alpha - 1e-6);
    CHECK(r.beta >= lb.beta - 1e-6);
    CHECK(r.alpha <= 1.0);
    check_alpha_certificate(j, r);
    check_beta_certificate(j, r);
  }
}

TEST_CASE("measure-prepare channels are classical") {
  Rng rng(54);
  for (int i = 0; i < 10; ++i) {
    // POVM {E, I - E} followed by preparing sigma_0 or sigma_1.
    const Matrix2 u = rng.unitary(2);
    Matrix2 d = Matrix2::Zero();
    d(0, 0) = rng.uniform();
    d(1, 1) = rng.uniform();
    const Matrix2 e = u * d * u.adjoint();
    const Matrix2 s0 = rng.density(2), s1 = rng.density(2);
    const Matrix4 j = testsupport::choi_of([&](const Matrix2& m) -> Matrix2 {
      return (e * m).trace() * s0 + ((Matrix2::Identity() - e) * m).trace() * s1;
    });
    CHECK(is_classical(ChoiMatrix::from_matrix(j)).member);
    const auto r = quantumness(choi_to_chi(ChoiMatrix::from_matrix(j)));
    CHECK(r.alpha < 1e-6);
    CHECK(r.beta < 1e-6);
  }
}

TEST_CASE("pluggable sets") {
  const ForwardingSet fwd;
  for (double m : {0.0, 0.45, 1.0}) {
    const auto a = quantumness(process_from_kappa(m));
    const auto b = quantumness(process_from_kappa(m), fwd);
    CHECK(b.formulation == "forwarding");
    CHECK(b.formulation_tag == ClassicalSetFormulation::kPluggable);
    CHECK(std::abs(a.alpha - b.alpha) < 1e-7);
    CHECK(std::abs(a.beta - b.beta) < 1e-7);
  }

  // Diagonal (incoherent) classical set: the split |k| J_U + (1-|k|) J_0 is
  // still available and the coherence forces the same bound.
  const IncoherentStochastic inc;
  for (double m : {0.0, 0.3, 0.8}) {
    const auto r = quantumness(process_from_kappa(std::polar(m, 0.5)), inc);
    CHECK(r.formulation == "incoherent-stochastic");
    CHECK(r.alpha == doctest::Approx(m).epsilon(1e-6));
    CHECK(r.alpha >= -1e-9);
    CHECK(r.beta >= r.alpha - 1e-6);
    CHECK(inc.membership((choi(std::polar(m, 0.5)) + r.beta * r.beta_certificate.noise) / (1.0 + r.beta)).violation <
          1e-6);
  }
}
