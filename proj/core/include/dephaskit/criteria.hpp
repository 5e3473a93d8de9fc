#pragma once

// Non-Markovianity measures over a one-parameter dephasing family chi_s:
// positive variation of the quantum composition or robustness (HCL-W),
// failure of the half-time semigroup split (HCL-N), trace-distance revivals
// (BLP), concurrence revivals with an ancilla (RHP) and mutual-information
// revivals (LFS).

#include <string>
#include <vector>

#include "dephaskit/dynamics.hpp"
#include "dephaskit/quantumness.hpp"

namespace dephaskit {

struct DynamicsFamily {
  Spectrum spectrum;
  EvolutionParams params;  // s is ignored
  double s_max = 160.0;
  double step = 0.1;

  void validate() const;  // throws ValidationError
  // {0, step, 2 step, ...} up to s_max; points are i * step.
  std::vector<double> grid() const;
  Complex kappa_at(double s) const;
  ProcessMatrix process_at(double s) const;
};

enum class Quantity { kAlpha, kBeta };

// Sum of positive increments; increments not above `floor` are dropped.
// Throws InsufficientDataError for fewer than 2 samples.
double positive_variation(const std::vector<double>& series, double floor = 0.0);

// Per-step floor applied to alpha/beta series in hcl_w and evaluate_criteria.
// Cone solutions carry ~1e-11 absolute error, which would otherwise add up
// over a long grid into a spurious positive W.
inline constexpr double kQuantumnessIncrementFloor = 1e-10;

struct QuantumnessTrajectory {
  std::vector<double> s;
  std::vector<double> alpha;
  std::vector<double> beta;
  double max_solver_gap = 0.0;
};

QuantumnessTrajectory quantumness_trajectory(const DynamicsFamily& family,
                                             const ClassicalSet& set = default_classical_set(), int jobs = 1);

double hcl_w(const DynamicsFamily& family, Quantity which, const ClassicalSet& set = default_classical_set(),
             int jobs = 1);

struct SplitComparison {
  double direct = 0.0;     // quantity of chi_s
  double composite = 0.0;  // quantity of chi_{(1-f)s} ∘ chi_{f s}
  double difference() const;
};

// |Q(chi_s) - Q(chi_{(1-f)s} ∘ chi_{f s})|, f = t1_fraction in (0, 1).
double hcl_n(const DynamicsFamily& family, double s, double t1_fraction, Quantity which,
             const ClassicalSet& set = default_classical_set());
SplitComparison hcl_n_split(const DynamicsFamily& family, double s, double t1_fraction, Quantity which,
                            const ClassicalSet& set = default_classical_set());

struct BlpSearch {
  int polar_points = 32;      // theta = i pi / polar_points
  int azimuth_points = 16;    // phi = j pi / azimuth_points (antipodes cover the rest)
  bool refine = true;         // Nelder-Mead from the best grid candidates
  int refine_starts = 3;
  int jobs = 1;
};

struct BlpResult {
  double value = 0.0;
  Eigen::Vector3d bloch;  // rho_1 = (I + n.sigma)/2, rho_2 = (I - n.sigma)/2
};

BlpResult blp_search(const DynamicsFamily& family, const BlpSearch& search = {});
double blp(const DynamicsFamily& family, const BlpSearch& search = {});
double rhp(const DynamicsFamily& family);
double lfs(const DynamicsFamily& family);

// Max-entry distance between the transfer matrices of chi_s and of
// chi_{s/2} ∘ chi_{s/2}; for dephasing this is |kappa(s) - kappa(s/2)^2|.
double divisibility_gap(const DynamicsFamily& family, double s);

// Trajectories on the family grid.
std::vector<double> trace_distance_trajectory(const DynamicsFamily& family, const Eigen::Vector3d& bloch);
std::vector<double> concurrence_trajectory(const DynamicsFamily& family);
std::vector<double> mutual_information_trajectory(const DynamicsFamily& family);

struct Thresholds {
  double blp = 1e-9;
  double rhp = 1e-9;
  double lfs = 1e-9;
  double hcl_w = 1e-9;
  double hcl_n = 0.01;  // experimental resolution
};

struct CriteriaOptions {
  double t1_fraction = 0.5;
  Thresholds thresholds;
  BlpSearch blp;
  int jobs = 1;
};

struct Verdicts {
  bool blp = false;  // true means non-Markovian
  bool rhp = false;
  bool lfs = false;
  bool hcl_w = false;
  bool hcl_n = false;
};

struct CriteriaReport {
  double w_alpha = 0.0;
  double w_beta = 0.0;
  double n_alpha = 0.0;  // at s_max
  double n_beta = 0.0;
  double n_blp = 0.0;
  double n_rhp = 0.0;
  double n_lfs = 0.0;
  Verdicts verdicts;
  Thresholds thresholds;
  std::string formulation;
  Eigen::Vector3d blp_bloch = Eigen::Vector3d::Zero();
  double max_solver_gap = 0.0;
};

CriteriaReport evaluate_criteria(const DynamicsFamily& family, const ClassicalSet& set = default_classical_set(),
                                 const CriteriaOptions& options = {});

}  // namespace dephaskit
