#pragma once

// Quantum content of a qubit process relative to a set of classical
// processes: the composition alpha (least quantum weight in a split
// J = a Q + (1 - a) C) and the robustness beta (least noise weight b with
// (J + b N) / (1 + b) classical).

#include <memory>
#include <string>

#include "dephaskit/cone.hpp"
#include "dephaskit/dynamics.hpp"

namespace dephaskit {

enum class ClassicalSetFormulation {
  kMeasurePreparePpt,
  kPluggable,
};

const char* to_string(ClassicalSetFormulation f);

struct Membership {
  bool member = false;
  double violation = 0.0;  // >= 0, zero for members
};

// A convex set of classical channels. Implementations must be stateless (or
// immutable) so one instance can serve concurrent callers.
class ClassicalSet {
 public:
  virtual ~ClassicalSet() = default;

  virtual ClassicalSetFormulation tag() const = 0;
  virtual std::string name() const = 0;

  // `choi` is a trace-one input ⊗ output matrix; PSD and trace preservation
  // are checked by the caller.
  virtual Membership membership(const Matrix4& choi) const = 0;

  // Adds constraints placing E X E^dagger (E is 4 x dim(var)) in the cone
  // generated by the set. Positivity of X and the trace-preservation
  // proportionality are added by the caller.
  virtual void constrain(ConeProblem& problem, VarId var, const Matrix& embedding) const = 0;
};

// Measure-and-prepare channels: PSD Choi with PSD partial transpose.
class MeasurePreparePpt final : public ClassicalSet {
 public:
  ClassicalSetFormulation tag() const override { return ClassicalSetFormulation::kMeasurePreparePpt; }
  std::string name() const override { return "measure-prepare-ppt"; }
  Membership membership(const Matrix4& choi) const override;
  void constrain(ConeProblem& problem, VarId var, const Matrix& embedding) const override;
};

// Stochastic maps between the H/V basis states: Choi diagonal in
// |HH>, |HV>, |VH>, |VV>.
class IncoherentStochastic final : public ClassicalSet {
 public:
  ClassicalSetFormulation tag() const override { return ClassicalSetFormulation::kPluggable; }
  std::string name() const override { return "incoherent-stochastic"; }
  Membership membership(const Matrix4& choi) const override;
  void constrain(ConeProblem& problem, VarId var, const Matrix& embedding) const override;
};

const ClassicalSet& default_classical_set();

// Looks up "measure-prepare-ppt" (alias "ppt") or "incoherent-stochastic"
// (alias "incoherent"); throws ValidationError otherwise.
std::shared_ptr<const ClassicalSet> classical_set_by_name(const std::string& name);

inline constexpr double kMembershipTolerance = 1e-9;

Membership is_classical(const ChoiMatrix& choi, const ClassicalSet& set = default_classical_set());

struct AlphaCertificate {
  Matrix4 classical_part;  // trace-one Choi of C
  Matrix4 quantum_part;    // trace-one Choi of Q
};

struct BetaCertificate {
  Matrix4 noise;  // trace-one Choi of N
};

struct QuantumnessReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::string formulation;
  ClassicalSetFormulation formulation_tag = ClassicalSetFormulation::kMeasurePreparePpt;
  AlphaCertificate alpha_certificate;
  BetaCertificate beta_certificate;
  double solver_gap = 0.0;
};

// Both throw SolverError when the cone solver does not reach its contract.
QuantumnessReport alpha(const ProcessMatrix& chi, const ClassicalSet& set = default_classical_set(),
                        const ConeOptions& options = {});
QuantumnessReport beta(const ProcessMatrix& chi, const ClassicalSet& set = default_classical_set(),
                       const ConeOptions& options = {});
// alpha and beta together; solver_gap is the larger of the two.
QuantumnessReport quantumness(const ProcessMatrix& chi, const ClassicalSet& set = default_classical_set(),
                              const ConeOptions& options = {});

}  // namespace dephaskit
