#include "dephaskit/quantumness.hpp"

#include <algorithm>
#include <cmath>

#include "dephaskit/errors.hpp"

namespace dephaskit {

namespace {

// Eigenvalues of a trace-one Choi matrix at or below this are treated as zero
// when restricting the alpha problem to the range of J.
constexpr double kRangeCut = 1e-12;

Matrix4 herm4(const Matrix4& m) {
  return 0.5 * (m + m.adjoint());
}

Matrix4 normalized(const Matrix4& m, const Matrix4& fallback) {
  const double t = m.trace().real();
  return t > kRangeCut ? Matrix4(herm4(m) / t) : fallback;
}

Matrix4 maximally_mixed_channel() {
  return Matrix4::Identity() / 4.0;
}

// E X E^dagger has input marginal proportional to I/2.
void add_trace_preserving_cone(ConeProblem& p, VarId var, const Matrix& e) {
  for (const Matrix2& sigma : {pauli::x(), pauli::y(), pauli::z()}) {
    const Matrix op = kron(sigma, pauli::identity());
    p.add_constraint({{var, Matrix(e.adjoint() * op * e)}}, 0.0);
  }
}

Matrix trace_objective(int n) {
  return Matrix::Identity(n, n);
}

[[noreturn]] void fail(const char* what, const ConeSolution& s) {
  throw SolverError(std::string(what) + ": cone solver stopped (" + to_string(s.status) + ") after " +
                        std::to_string(s.iterations) + " iterations",
                    s.primal_residual, s.dual_residual, s.gap);
}

}  // namespace

const char* to_string(ClassicalSetFormulation f) {
  switch (f) {
    case ClassicalSetFormulation::kMeasurePreparePpt: return "MEASURE_PREPARE_PPT";
    case ClassicalSetFormulation::kPluggable: return "PLUGGABLE";
  }
  return "UNKNOWN";
}

// ---------------------------------------------------------------------------

Membership MeasurePreparePpt::membership(const Matrix4& choi) const {
  const double lo = hermitian_eig(partial_transpose(choi)).values.minCoeff();
  const double violation = std::max(0.0, -lo);
  return {violation <= kMembershipTolerance, violation};
}

void MeasurePreparePpt::constrain(ConeProblem& p, VarId var, const Matrix& e) const {
  // A basis vector outside the image of E has a zero diagonal entry in
  // PT(E X E^dagger) (the transpose keeps the diagonal), so that row and
  // column must vanish. Dropping them keeps the PT block strictly feasible.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < 4; ++k)
    if (e.row(k).norm() > 1e-9) kept.push_back(k);
  Matrix select = Matrix::Zero(4, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) select(kept[j], static_cast<Eigen::Index>(j)) = 1.0;

  const VarId y = p.add_variable(static_cast<int>(kept.size()), Cone::kPsd, "partial transpose");
  p.add_matrix_constraint({{var, e, 1.0, true}, {y, select, -1.0, false}}, Matrix::Zero(4, 4));
}

Membership IncoherentStochastic::membership(const Matrix4& choi) const {
  double off = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (r != c) off = std::max(off, std::abs(choi(r, c)));
  return {off <= kMembershipTolerance, off};
}

void IncoherentStochastic::constrain(ConeProblem& p, VarId var, const Matrix& e) const {
  for (int r = 0; r < 4; ++r)
    for (int c = r + 1; c < 4; ++c) {
      Matrix re = Matrix::Zero(4, 4), im = Matrix::Zero(4, 4);
      re(r, c) = re(c, r) = 1.0;
      im(r, c) = Complex(0, 1);
      im(c, r) = Complex(0, -1);
      p.add_constraint({{var, Matrix(e.adjoint() * re * e)}}, 0.0);
      p.add_constraint({{var, Matrix(e.adjoint() * im * e)}}, 0.0);
    }
}

const ClassicalSet& default_classical_set() {
  static const MeasurePreparePpt set;
  return set;
}

std::shared_ptr<const ClassicalSet> classical_set_by_name(const std::string& name) {
  if (name == "measure-prepare-ppt" || name == "ppt") return std::make_shared<MeasurePreparePpt>();
  if (name == "incoherent-stochastic" || name == "incoherent") return std::make_shared<IncoherentStochastic>();
  throw ValidationError("unknown formulation '" + name + "' (expected measure-prepare-ppt or incoherent-stochastic)");
}

Membership is_classical(const ChoiMatrix& choi, const ClassicalSet& set) {
  return set.membership(choi.matrix());
}

// ---------------------------------------------------------------------------

QuantumnessReport alpha(const ProcessMatrix& chi, const ClassicalSet& set, const ConeOptions& options) {
  QuantumnessReport rep;
  rep.formulation = set.name();
  rep.formulation_tag = set.tag();
  const Matrix4 j = herm4(chi_to_choi_matrix(chi.matrix()));

  // Restrict to the range of J: both parts of any split live there. Zero
  // rows are split off first so that a small eigenvalue cannot rotate the
  // basis into coordinates that J does not touch.
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < 4; ++k)
    if (j.row(k).norm() > 1e-14) support.push_back(k);
  Matrix sub(support.size(), support.size());
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = 0; b < support.size(); ++b) sub(a, b) = j(support[a], support[b]);
  const HermitianEigen eig = hermitian_eig(sub);
  Eigen::Index rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > kRangeCut) ++rank;
  Matrix range = Matrix::Zero(4, rank);
  for (std::size_t a = 0; a < support.size(); ++a) range.row(support[a]) = eig.vectors.row(a).head(rank);

  if (rank <= 1) {
    // Any split of a rank-one J is J itself.
    const bool member = set.membership(j).member;
    rep.alpha = member ? 0.0 : 1.0;
    rep.alpha_certificate = {member ? j : maximally_mixed_channel(), j};
    return rep;
  }

  const int r = static_cast<int>(rank);
  ConeProblem p;
  const VarId c = p.add_variable(r, Cone::kPsd, "classical part");
  const VarId q = p.add_variable(r, Cone::kPsd, "quantum part");
  const Matrix id = Matrix::Identity(r, r);
  p.add_matrix_constraint({{c, id}, {q, id}}, Matrix(eig.values.head(rank).cast<Complex>().asDiagonal()));
  add_trace_preserving_cone(p, c, range);
  set.constrain(p, c, range);
  p.set_objective({{q, trace_objective(r)}});

  const ConeSolution sol = solve_cone(p, options);
  if (!sol.optimal()) fail("alpha", sol);

  const Matrix4 cpart = range * sol.value(c) * range.adjoint();
  const Matrix4 qpart = range * sol.value(q) * range.adjoint();
  rep.alpha = std::clamp(sol.objective, 0.0, 1.0);
  rep.alpha_certificate = {normalized(cpart, maximally_mixed_channel()), normalized(qpart, j)};
  rep.solver_gap = sol.gap;
  return rep;
}

QuantumnessReport beta(const ProcessMatrix& chi, const ClassicalSet& set, const ConeOptions& options) {
  QuantumnessReport rep;
  rep.formulation = set.name();
  rep.formulation_tag = set.tag();
  const Matrix4 j = herm4(chi_to_choi_matrix(chi.matrix()));

  ConeProblem p;
  const VarId noise = p.add_variable(4, Cone::kPsd, "noise");
  const VarId mix = p.add_variable(4, Cone::kPsd, "classical mixture");
  const Matrix id = Matrix::Identity(4, 4);
  p.add_matrix_constraint({{mix, id}, {noise, id, -1.0}}, j);
  add_trace_preserving_cone(p, noise, id);
  set.constrain(p, mix, id);
  p.set_objective({{noise, trace_objective(4)}});

  const ConeSolution sol = solve_cone(p, options);
  if (!sol.optimal()) fail("beta", sol);

  rep.beta = std::max(0.0, sol.objective);
  rep.beta_certificate = {normalized(sol.value(noise), maximally_mixed_channel())};
  rep.solver_gap = sol.gap;
  return rep;
}

QuantumnessReport quantumness(const ProcessMatrix& chi, const ClassicalSet& set, const ConeOptions& options) {
  QuantumnessReport a = alpha(chi, set, options);
  const QuantumnessReport b = beta(chi, set, options);
  a.beta = b.beta;
  a.beta_certificate = b.beta_certificate;
  a.solver_gap = std::max(a.solver_gap, b.solver_gap);
  return a;
}

}  // namespace dephaskit
