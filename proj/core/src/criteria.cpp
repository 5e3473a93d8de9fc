#include "dephaskit/criteria.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dephaskit/errors.hpp"
#include "dephaskit/parallel.hpp"

namespace dephaskit {

namespace {

constexpr double kPi = std::numbers::pi;

Matrix2 bloch_difference(const Eigen::Vector3d& n) {
  // rho_1 - rho_2 = n . sigma
  return n.x() * pauli::x() + n.y() * pauli::y() + n.z() * pauli::z();
}

Eigen::Vector3d bloch_of(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double half_trace_norm(const Matrix2& h) {
  const Eigen::SelfAdjointEigenSolver<Matrix2> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<ProcessMatrix> processes(const DynamicsFamily& family) {
  std::vector<ProcessMatrix> out;
  for (double s : family.grid()) out.push_back(family.process_at(s));
  return out;
}

double pair_variation(const std::vector<ProcessMatrix>& chis, const Eigen::Vector3d& n) {
  const Matrix2 diff = bloch_difference(n);
  double total = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < chis.size(); ++i) {
    const double d = half_trace_norm(apply_process(chis[i], diff));
    if (i > 0 && d > prev) total += d - prev;
    prev = d;
  }
  return total;
}

// Maximizes f over (theta, phi) from `start` with a small Nelder-Mead simplex.
template <class F>
std::pair<Eigen::Vector2d, double> nelder_mead_max(F f, Eigen::Vector2d start, double size) {
  std::array<Eigen::Vector2d, 3> p = {start, start + Eigen::Vector2d(size, 0), start + Eigen::Vector2d(0, size)};
  std::array<double, 3> v = {f(p[0]), f(p[1]), f(p[2])};
  for (int it = 0; it < 200; ++it) {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    if ((p[best] - p[worst]).norm() < 1e-7 && (p[best] - p[mid]).norm() < 1e-7) break;
    const Eigen::Vector2d centroid = 0.5 * (p[best] + p[mid]);
    const Eigen::Vector2d refl = centroid + (centroid - p[worst]);
    const double fr = f(refl);
    if (fr > v[best]) {
      const Eigen::Vector2d exp = centroid + 2.0 * (centroid - p[worst]);
      const double fe = f(exp);
      if (fe > fr) {
        p[worst] = exp, v[worst] = fe;
      } else {
        p[worst] = refl, v[worst] = fr;
      }
    } else if (fr > v[mid]) {
      p[worst] = refl, v[worst] = fr;
    } else {
      const Eigen::Vector2d con = centroid + 0.5 * (p[worst] - centroid);
      const double fc = f(con);
      if (fc > v[worst]) {
        p[worst] = con, v[worst] = fc;
      } else {
        for (int k : {mid, worst}) {
          p[k] = p[best] + 0.5 * (p[k] - p[best]);
          v[k] = f(p[k]);
        }
      }
    }
  }
  const auto it = std::max_element(v.begin(), v.end());
  return {p[static_cast<std::size_t>(it - v.begin())], *it};
}

double quantity(const QuantumnessReport& r, Quantity which) {
  return which == Quantity::kAlpha ? r.alpha : r.beta;
}

QuantumnessReport measure(const ProcessMatrix& chi, Quantity which, const ClassicalSet& set) {
  return which == Quantity::kAlpha ? alpha(chi, set) : beta(chi, set);
}

}  // namespace

void DynamicsFamily::validate() const {
  params.validate();
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("step must be positive");
  if (!(s_max >= step) || !std::isfinite(s_max)) throw ValidationError("s_max must be at least one step");
  if (s_max / step > 1e7) throw ValidationError("grid has more than 1e7 points");
}

std::vector<double> DynamicsFamily::grid() const {
  validate();
  const auto n = static_cast<std::size_t>(std::floor(s_max / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) * step;
  return g;
}

Complex DynamicsFamily::kappa_at(double s) const {
  return kappa(spectrum, params.at(s));
}

ProcessMatrix DynamicsFamily::process_at(double s) const {
  return process_from_kappa(kappa_at(s));
}

double positive_variation(const std::vector<double>& series, double floor) {
  if (series.size() < 2) throw InsufficientDataError("positive_variation needs at least 2 samples");
  double total = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double d = series[i] - series[i - 1];
    if (d > floor) total += d;
  }
  return total;
}

QuantumnessTrajectory quantumness_trajectory(const DynamicsFamily& family, const ClassicalSet& set, int jobs) {
  QuantumnessTrajectory t;
  t.s = family.grid();
  t.alpha.resize(t.s.size());
  t.beta.resize(t.s.size());
  std::vector<double> gaps(t.s.size());
  parallel_for(t.s.size(), jobs, [&](std::size_t i) {
    const QuantumnessReport r = quantumness(family.process_at(t.s[i]), set);
    t.alpha[i] = r.alpha;
    t.beta[i] = r.beta;
    gaps[i] = r.solver_gap;
  });
  t.max_solver_gap = *std::max_element(gaps.begin(), gaps.end());
  return t;
}

double hcl_w(const DynamicsFamily& family, Quantity which, const ClassicalSet& set, int jobs) {
  const std::vector<double> s = family.grid();
  std::vector<double> q(s.size());
  parallel_for(s.size(), jobs, [&](std::size_t i) { q[i] = quantity(measure(family.process_at(s[i]), which, set), which); });
  return positive_variation(q, kQuantumnessIncrementFloor);
}

double SplitComparison::difference() const {
  return std::abs(direct - composite);
}

SplitComparison hcl_n_split(const DynamicsFamily& family, double s, double t1_fraction, Quantity which,
                            const ClassicalSet& set) {
  family.validate();
  if (!(t1_fraction > 0.0 && t1_fraction < 1.0)) throw ValidationError("t1_fraction must lie in (0, 1)");
  if (!(s >= 0.0)) throw ValidationError("s must be nonnegative");
  const ProcessMatrix first = family.process_at(t1_fraction * s);
  const ProcessMatrix second = family.process_at((1.0 - t1_fraction) * s);
  SplitComparison out;
  out.direct = quantity(measure(family.process_at(s), which, set), which);
  out.composite = quantity(measure(compose(second, first), which, set), which);
  return out;
}

double hcl_n(const DynamicsFamily& family, double s, double t1_fraction, Quantity which, const ClassicalSet& set) {
  return hcl_n_split(family, s, t1_fraction, which, set).difference();
}

std::vector<double> trace_distance_trajectory(const DynamicsFamily& family, const Eigen::Vector3d& bloch) {
  if (std::abs(bloch.norm() - 1.0) > 1e-9) throw ContractViolation("Bloch vector of a pure pair must be a unit vector");
  const Matrix2 diff = bloch_difference(bloch);
  std::vector<double> out;
  for (double s : family.grid()) out.push_back(half_trace_norm(apply_process(family.process_at(s), diff)));
  return out;
}

BlpResult blp_search(const DynamicsFamily& family, const BlpSearch& search) {
  if (search.polar_points < 1 || search.azimuth_points < 1) throw ValidationError("BLP grid must be non-empty");
  const std::vector<ProcessMatrix> chis = processes(family);

  const std::size_t np = static_cast<std::size_t>(search.polar_points);
  const std::size_t na = static_cast<std::size_t>(search.azimuth_points);
  std::vector<double> values(np * na);
  parallel_for(values.size(), search.jobs, [&](std::size_t k) {
    const double theta = kPi * static_cast<double>(k / na) / static_cast<double>(np);
    const double phi = kPi * static_cast<double>(k % na) / static_cast<double>(na);
    values[k] = pair_variation(chis, bloch_of(theta, phi));
  });

  // Larger value first. Values within roundoff of the maximum count as ties
  // and keep grid order, so symmetric optima resolve to the first grid point.
  const double top = *std::max_element(values.begin(), values.end());
  const double tie = 1e-12 * std::max(1.0, top);
  auto key = [&](std::size_t k) { return values[k] >= top - tie ? top : values[k]; };
  std::vector<std::size_t> order(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });

  auto angles = [&](std::size_t k) {
    return Eigen::Vector2d(kPi * static_cast<double>(k / na) / static_cast<double>(np),
                           kPi * static_cast<double>(k % na) / static_cast<double>(na));
  };
  BlpResult best{values[order[0]], bloch_of(angles(order[0])(0), angles(order[0])(1))};
  if (search.refine && best.value > 0.0) {
    const auto starts = std::min<std::size_t>(static_cast<std::size_t>(std::max(search.refine_starts, 0)), order.size());
    const double size = 0.5 * kPi / static_cast<double>(np);
    for (std::size_t r = 0; r < starts; ++r) {
      const auto [x, v] = nelder_mead_max(
          [&](const Eigen::Vector2d& a) { return pair_variation(chis, bloch_of(a(0), a(1))); }, angles(order[r]), size);
      // Only a clear improvement replaces the grid optimum.
      if (v > best.value * (1.0 + 1e-9) + 1e-12) best = {v, bloch_of(x(0), x(1))};
    }
  }
  return best;
}

double blp(const DynamicsFamily& family, const BlpSearch& search) {
  return blp_search(family, search).value;
}

std::vector<double> concurrence_trajectory(const DynamicsFamily& family) {
  const DensityMatrix bell = DensityMatrix::pure(kets::phi_plus());
  std::vector<double> out;
  for (double s : family.grid()) out.push_back(concurrence(apply_process_to_system(family.process_at(s), bell)));
  return out;
}

std::vector<double> mutual_information_trajectory(const DynamicsFamily& family) {
  const DensityMatrix bell = DensityMatrix::pure(kets::phi_plus());
  std::vector<double> out;
  for (double s : family.grid()) out.push_back(mutual_information(apply_process_to_system(family.process_at(s), bell)));
  return out;
}

double rhp(const DynamicsFamily& family) {
  return positive_variation(concurrence_trajectory(family));
}

double lfs(const DynamicsFamily& family) {
  return positive_variation(mutual_information_trajectory(family));
}

double divisibility_gap(const DynamicsFamily& family, double s) {
  family.validate();
  const double k = s / family.step;
  if (s < 0.0 || s > family.s_max + 1e-9 * family.step || std::abs(k - std::round(k)) > 1e-6) {
    throw ContractViolation("divisibility_gap: s is not on the family grid");
  }
  const ProcessMatrix half = family.process_at(0.5 * s);
  return max_abs(transfer_matrix(family.process_at(s)) - transfer_matrix(compose(half, half)));
}

CriteriaReport evaluate_criteria(const DynamicsFamily& family, const ClassicalSet& set, const CriteriaOptions& options) {
  CriteriaReport rep;
  rep.thresholds = options.thresholds;
  rep.formulation = set.name();

  const QuantumnessTrajectory q = quantumness_trajectory(family, set, options.jobs);
  rep.w_alpha = positive_variation(q.alpha, kQuantumnessIncrementFloor);
  rep.w_beta = positive_variation(q.beta, kQuantumnessIncrementFloor);
  rep.max_solver_gap = q.max_solver_gap;

  rep.n_alpha = hcl_n(family, family.s_max, options.t1_fraction, Quantity::kAlpha, set);
  rep.n_beta = hcl_n(family, family.s_max, options.t1_fraction, Quantity::kBeta, set);

  BlpSearch search = options.blp;
  search.jobs = options.jobs;
  const BlpResult b = blp_search(family, search);
  rep.n_blp = b.value;
  rep.blp_bloch = b.bloch;
  rep.n_rhp = rhp(family);
  rep.n_lfs = lfs(family);

  const Thresholds& t = options.thresholds;
  rep.verdicts.blp = rep.n_blp > t.blp;
  rep.verdicts.rhp = rep.n_rhp > t.rhp;
  rep.verdicts.lfs = rep.n_lfs > t.lfs;
  rep.verdicts.hcl_w = rep.w_alpha > t.hcl_w || rep.w_beta > t.hcl_w;
  rep.verdicts.hcl_n = rep.n_alpha > t.hcl_n || rep.n_beta > t.hcl_n;
  return rep;
}

}  // namespace dephaskit
