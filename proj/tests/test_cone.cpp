#include <doctest.h>

#include "dephaskit/cone.hpp"
#include "dephaskit/errors.hpp"
#include "support.hpp"

using namespace dephaskit;
using testsupport::Rng;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("scalar lower bound") {
  // min x subject to x >= 3, written as x - t = 3 with x, t >= 0.
  ConeProblem p;
  const VarId x = p.add_variable(1, Cone::kPsd, "x");
  const VarId t = p.add_variable(1, Cone::kPsd, "slack");
  p.add_constraint({{x, scalar(1.0)}, {t, scalar(-1.0)}}, 3.0);
  p.set_objective({{x, scalar(1.0)}});
  const auto sol = solve_cone(p);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(sol.value(x)(0, 0).real() == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(sol.primal_residual < 1e-8);
  CHECK(sol.gap < 1e-6);
}

TEST_CASE("infeasible and unbounded problems are reported") {
  ConeProblem infeasible;
  const VarId a = infeasible.add_variable(1);
  const VarId b = infeasible.add_variable(1);
  infeasible.add_constraint({{a, scalar(1.0)}, {b, scalar(1.0)}}, -1.0);
  infeasible.set_objective({{a, scalar(1.0)}});
  CHECK(solve_cone(infeasible).status == ConeStatus::kPrimalInfeasible);

  ConeProblem unbounded;
  const VarId x = unbounded.add_variable(1);
  const VarId t = unbounded.add_variable(1);
  unbounded.add_constraint({{x, scalar(1.0)}, {t, scalar(-1.0)}}, 0.0);
  unbounded.set_objective({{x, scalar(-1.0)}});
  CHECK(solve_cone(unbounded).status == ConeStatus::kDualInfeasible);

  // Inconsistent equalities are caught before iterating.
  ConeProblem clash;
  const VarId y = clash.add_variable(2);
  clash.add_constraint({{y, Matrix::Identity(2, 2)}}, 1.0);
  clash.add_constraint({{y, Matrix::Identity(2, 2)}}, 2.0);
  CHECK(solve_cone(clash).status == ConeStatus::kPrimalInfeasible);
}

TEST_CASE("trace-one minimization gives the smallest eigenvalue") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 8;
    const Matrix c = rng.hermitian(n);
    ConeProblem p;
    const VarId x = p.add_variable(n);
    p.add_constraint({{x, Matrix::Identity(n, n)}}, 1.0);
    p.set_objective({{x, c}});
    const auto sol = solve_cone(p);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(testsupport::min_eig(c)).epsilon(1e-7));
    CHECK(testsupport::min_eig(sol.value(x)) > -1e-9);
  }
}

TEST_CASE("partial-transpose cone") {
  // Largest overlap of a PPT state with a maximally entangled one is 1/2.
  const Vector4 phi = kets::phi_plus();
  ConeProblem p;
  const VarId x = p.add_variable(4, Cone::kPsd | Cone::kPsdAfterPartialTranspose, "state");
  p.add_constraint({{x, Matrix::Identity(4, 4)}}, 1.0);
  p.set_objective({{x, Matrix(-(phi * phi.adjoint()))}});
  const auto sol = solve_cone(p);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(testsupport::min_eig(testsupport::pt_second(sol.value(x))) > -1e-8);

  // Fixed diagonal point is inside.
  Matrix4 d = Matrix4::Zero();
  d(0, 0) = d(3, 3) = 0.5;
  ConeProblem fixed;
  const VarId y = fixed.add_variable(4, Cone::kPsd | Cone::kPsdAfterPartialTranspose);
  fixed.add_matrix_constraint({{y, Matrix::Identity(4, 4)}}, d);
  fixed.set_objective({});
  const auto f = solve_cone(fixed);
  CHECK(f.optimal());
  CHECK(max_abs(f.value(y) - d) < 1e-8);

  // The Bell projector is not.
  ConeProblem bell;
  const VarId z = bell.add_variable(4, Cone::kPsd | Cone::kPsdAfterPartialTranspose);
  bell.add_matrix_constraint({{z, Matrix::Identity(4, 4)}}, Matrix(phi * phi.adjoint()));
  CHECK(solve_cone(bell).status == ConeStatus::kPrimalInfeasible);

  // Only the transposed cone: PT(X) PSD with X itself free to be indefinite.
  ConeProblem pt_only;
  const VarId w = pt_only.add_variable(4, Cone::kPsdAfterPartialTranspose);
  pt_only.add_constraint({{w, Matrix::Identity(4, 4)}}, 1.0);
  pt_only.set_objective({{w, Matrix(phi * phi.adjoint())}});
  const auto s = solve_cone(pt_only);
  REQUIRE(s.optimal());
  // <phi|X|phi> = tr(PT(X) PT(phi phi^dag)) and PT(phi phi^dag) = SWAP/2 has
  // smallest eigenvalue -1/2.
  CHECK(s.objective == doctest::Approx(-0.5).epsilon(1e-7));
}

TEST_CASE("embedded matrix constraints") {
  // X (2x2) placed in the top-left corner of a 3x3 target with the remaining
  // corner entry carried by a 1x1 variable.
  Matrix e1 = Matrix::Zero(3, 2);
  e1(0, 0) = e1(1, 1) = 1.0;
  Matrix e2 = Matrix::Zero(3, 1);
  e2(2, 0) = 1.0;
  Matrix target = Matrix::Zero(3, 3);
  target(0, 0) = 0.4;
  target(1, 1) = 0.6;
  target(0, 1) = Complex(0.1, 0.2);
  target(1, 0) = Complex(0.1, -0.2);
  target(2, 2) = 2.0;
  ConeProblem p;
  const VarId x = p.add_variable(2);
  const VarId y = p.add_variable(1);
  p.add_matrix_constraint({{x, e1}, {y, e2, 2.0}}, target);
  p.set_objective({{y, scalar(1.0)}});
  const auto sol = solve_cone(p);
  REQUIRE(sol.optimal());
  CHECK(max_abs(sol.value(x) - target.topLeftCorner(2, 2)) < 1e-8);
  CHECK(sol.value(y)(0, 0).real() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("problem validation") {
  ConeProblem p;
  CHECK_THROWS_AS(p.add_variable(0), ContractViolation);
  CHECK_THROWS_AS(p.add_variable(17), ContractViolation);
  CHECK_THROWS_AS(p.add_variable(2, Cone::kPsdAfterPartialTranspose), ContractViolation);
  const VarId x = p.add_variable(2);
  Matrix nonherm = Matrix::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  CHECK_THROWS_AS(p.add_constraint({{x, nonherm}}, 0.0), ContractViolation);
  CHECK_THROWS_AS(p.add_constraint({{x, Matrix::Identity(3, 3)}}, 0.0), ContractViolation);
  CHECK_THROWS_AS(p.add_constraint({{VarId{7}, Matrix::Identity(2, 2)}}, 0.0), ContractViolation);
  CHECK(p.dim(x) == 2);
  CHECK(p.num_constraints() == 0);
  CHECK(std::string(to_string(ConeStatus::kOptimal)) == "optimal");
}

TEST_CASE("random feasible problems reach the contract tolerances") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    // Constraints generated from a strictly feasible point so the problem is
    // feasible, with a PSD cost so it is bounded.
    const Matrix x0 = rng.density(n);
    ConeProblem p;
    const VarId x = p.add_variable(n);
    for (int k = 0; k < n; ++k) {
      const Matrix a = rng.hermitian(n);
      p.add_constraint({{x, a}}, (a * x0).trace().real());
    }
    const Matrix g = rng.gaussian(n);
    p.set_objective({{x, Matrix(g * g.adjoint())}});
    const auto sol = solve_cone(p);
    REQUIRE(sol.optimal());
    CHECK(sol.primal_residual < 1e-8);
    CHECK(sol.gap < 1e-6);
    CHECK(testsupport::min_eig(sol.value(x)) > -1e-9);
    // The generating point is feasible, so the optimum cannot exceed its cost.
    CHECK(sol.objective <= (g * g.adjoint() * x0).trace().real() + 1e-8);
  }
}
