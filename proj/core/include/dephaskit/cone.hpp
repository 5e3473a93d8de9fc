#pragma once

// Small dense semidefinite programs over complex Hermitian matrix variables.
//
//   minimize    sum_v Re tr(C_v X_v)
//   subject to  sum_v Re tr(A_iv X_v) = b_i
//               X_v >= 0 and/or X_v^T_B >= 0 (partial transpose, 2x2 ⊗ 2x2)
//
// Solved by an infeasible-start primal-dual interior-point method (HKM
// direction, Mehrotra predictor-corrector). Linearly dependent equality rows
// are removed before the first iteration.

#include <string>
#include <vector>

#include "dephaskit/qcore.hpp"

namespace dephaskit {

enum class Cone : unsigned {
  kPsd = 1u,
  kPsdAfterPartialTranspose = 2u,
};

constexpr Cone operator|(Cone a, Cone b) {
  return static_cast<Cone>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool has_cone(Cone set, Cone c) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(c)) != 0;
}

struct VarId {
  int index = -1;
};

class ConeProblem {
 public:
  // Re tr(coefficient * X_var); the coefficient must be Hermitian.
  struct Term {
    VarId var;
    Matrix coefficient;
  };
  // scale * PT?(embedding * X_var * embedding^dagger). The partial transpose
  // (on the second factor) needs a 4x4 image.
  struct MapTerm {
    VarId var;
    Matrix embedding;
    double scale = 1.0;
    bool partial_transpose = false;
  };

  // Hermitian dim x dim variable. Variables carrying the partial-transpose
  // cone must be 4x4.
  VarId add_variable(int dim, Cone cones = Cone::kPsd, std::string label = {});

  void add_constraint(std::vector<Term> lhs, double rhs);
  // One real equality per real degree of freedom of the Hermitian rhs.
  void add_matrix_constraint(const std::vector<MapTerm>& lhs, const Matrix& rhs);
  void set_objective(std::vector<Term> terms);  // minimized

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int dim(VarId v) const;
  Cone cones(VarId v) const;
  const std::string& label(VarId v) const;

  // Throws ContractViolation on unknown variables, dimension mismatches or
  // non-Hermitian coefficients.
  void validate() const;

 private:
  struct Variable {
    int dim;
    Cone cones;
    std::string label;
  };
  struct Row {
    std::vector<Term> terms;
    double rhs;
  };
  void check_term(const Term& t) const;

  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<Term> objective_;

  friend class ConeLowering;
};

struct ConeOptions {
  int max_iterations = 100;
  double feasibility_tolerance = 1e-12;  // relative primal/dual residual
  double gap_tolerance = 1e-12;          // absolute complementarity
  bool trace = false;                    // per-iteration residuals on stderr
};

enum class ConeStatus {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kIterationLimit,
};

const char* to_string(ConeStatus s);

struct ConeSolution {
  ConeStatus status = ConeStatus::kIterationLimit;
  std::vector<Matrix> values;  // indexed by VarId
  double objective = 0.0;
  double gap = 0.0;               // max(<X,S>, |primal - dual objective|)
  double primal_residual = 0.0;   // max |A x - b| over all original rows
  double dual_residual = 0.0;
  int iterations = 0;

  const Matrix& value(VarId v) const { return values.at(static_cast<std::size_t>(v.index)); }
  bool optimal() const { return status == ConeStatus::kOptimal; }
};

// Never throws for numerical reasons; inspect `status`. A solution is
// reported optimal when the primal residual is below 1e-8 and the gap below
// 1e-6 at the best iterate, even if the tighter option tolerances were not
// reached.
ConeSolution solve_cone(const ConeProblem& problem, const ConeOptions& options = {});

}  // namespace dephaskit
