#include <doctest.h>

#include "dephaskit/criteria.hpp"
#include "dephaskit/errors.hpp"
#include "dephaskit/parallel.hpp"
#include "support.hpp"

using namespace dephaskit;
using testsupport::Rng;

namespace {

DynamicsFamily family(const Spectrum& s, double s_max = 160.0, double step = 0.1) {
  return DynamicsFamily{s, EvolutionParams{}, s_max, step};
}

DynamicsFamily preset(const std::string& name, double s_max = 160.0, double step = 0.1) {
  return family(tilt_preset(name), s_max, step);
}

// |kappa| on the family grid from the Simpson oracle.
std::vector<double> oracle_modulus(const DynamicsFamily& f) {
  std::vector<double> out;
  for (double s : f.grid()) out.push_back(std::abs(testsupport::kappa_simpson(f.spectrum, 702.0, s, 1000)));
  return out;
}

}  // namespace

TEST_CASE("positive variation") {
  CHECK(positive_variation({1.0, 0.9, 0.5, 0.1}) == 0.0);
  CHECK(positive_variation({1.0, 0.5, 0.8, 0.3}) == doctest::Approx(0.3));
  CHECK(positive_variation({0.0, 1.0}) == 1.0);
  CHECK(positive_variation({1.0, 1.0 + 5e-11, 1.0, 1.0 + 3e-10}, 1e-10) == doctest::Approx(3e-10).epsilon(1e-6));
  CHECK(positive_variation({1.0, 1.0 + 5e-11, 1.0, 1.0 + 3e-10}) == doctest::Approx(3.5e-10).epsilon(1e-6));
  CHECK_THROWS_AS(positive_variation({1.0}), InsufficientDataError);
  CHECK_THROWS_AS(positive_variation({}), InsufficientDataError);

  Rng rng(61);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(2 + i);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const double pv = positive_variation(v);
    CHECK(pv >= 0.0);
    // Rises minus falls equals the net change.
    double falls = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) falls += std::max(0.0, v[k - 1] - v[k]);
    CHECK(pv - falls == doctest::Approx(v.back() - v.front()).epsilon(1e-12));
  }
}

TEST_CASE("family validation and grid") {
  CHECK_THROWS_AS(family(Spectrum::single(702.0, 0.1), 160.0, 0.0).validate(), ValidationError);
  CHECK_THROWS_AS(family(Spectrum::single(702.0, 0.1), 0.05, 0.1).validate(), ValidationError);
  const auto g = preset("6.0").grid();
  CHECK(g.size() == 1601);
  CHECK(g.front() == 0.0);
  CHECK(g[37] == 37 * 0.1);
  CHECK(g.back() == doctest::Approx(160.0).epsilon(1e-14));
}

TEST_CASE("state-based trajectories match the |kappa| identities") {
  for (const auto& name : preset_names()) {
    const DynamicsFamily f = preset(name);
    const std::vector<double> m = oracle_modulus(f);
    const auto d = trace_distance_trajectory(f, Eigen::Vector3d::UnitX());
    const auto c = concurrence_trajectory(f);
    const auto mi = mutual_information_trajectory(f);
    double worst_d = 0.0, worst_c = 0.0, worst_i = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double ck = std::abs(f.kappa_at(f.grid()[i]));
      worst_d = std::max(worst_d, std::abs(d[i] - ck));
      worst_c = std::max(worst_c, std::abs(c[i] - ck));
      worst_i = std::max(worst_i, std::abs(mi[i] - (2.0 - testsupport::binary_entropy_bits((1.0 + ck) / 2.0))));
      CHECK(std::abs(ck - m[i]) < 1e-6);
    }
    CAPTURE(name);
    CHECK(worst_d < 1e-9);
    CHECK(worst_c < 1e-9);
    CHECK(worst_i < 1e-9);
    CHECK(mi.front() == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("mutual information of the fully dephased pair is one bit") {
  const DynamicsFamily f = family(Spectrum::single(702.0, 5.0), 160.0, 10.0);
  const auto mi = mutual_information_trajectory(f);
  CHECK(std::abs(f.kappa_at(160.0)) < 1e-9);
  CHECK(mi.back() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("BLP, RHP and LFS against the oracle positive variations") {
  for (const auto& name : preset_names()) {
    const DynamicsFamily f = preset(name);
    const std::vector<double> m = oracle_modulus(f);
    std::vector<double> info;
    for (double x : m) info.push_back(2.0 - testsupport::binary_entropy_bits((1.0 + x) / 2.0));
    const double want = testsupport::positive_increments(m);
    const BlpResult b = blp_search(f);
    const double r = rhp(f);
    const double l = lfs(f);
    CAPTURE(name);
    CHECK(std::abs(r - want) < 1e-5);
    CHECK(std::abs(l - testsupport::positive_increments(info)) < 1e-5);
    CHECK(std::abs(b.value - r) < 1e-9);
    CHECK(((b.value > 1e-9) == (r > 1e-9)));
    CHECK(((l > 1e-9) == (r > 1e-9)));
    CHECK(std::abs(b.bloch.norm() - 1.0) < 1e-12);
    if (r > 1e-9) CHECK(std::abs(b.bloch.z()) < 1e-6);
  }
  CHECK(rhp(preset("9.0")) > 0.0);
  CHECK(rhp(preset("1.5")) > 0.0);
  CHECK(blp(preset("6.0")) < 1e-9);
  CHECK(blp(preset("7.5")) < 1e-9);
  CHECK(lfs(preset("6.0")) < 1e-9);
  CHECK(lfs(preset("7.5")) < 1e-9);
}

TEST_CASE("BLP without refinement still finds the equatorial pair") {
  BlpSearch coarse;
  coarse.refine = false;
  coarse.polar_points = 8;
  coarse.azimuth_points = 4;
  const auto r = blp_search(preset("9.0"), coarse);
  CHECK(r.value == doctest::Approx(rhp(preset("9.0"))).epsilon(1e-9));
}

TEST_CASE("state criteria are stable under grid refinement") {
  for (const auto& name : {"1.5", "4.0", "9.0"}) {
    const double coarse = rhp(preset(name));
    const double fine = rhp(preset(name, 160.0, 0.05));
    const double lc = lfs(preset(name));
    const double lf = lfs(preset(name, 160.0, 0.05));
    CAPTURE(name);
    CHECK(std::abs(fine - coarse) < 1e-3 * coarse);
    CHECK(std::abs(lf - lc) < 1e-3 * lc);
  }
}

TEST_CASE("HCL-W follows the |kappa| variation") {
  const DynamicsFamily f4 = preset("4.0");
  const auto traj = quantumness_trajectory(f4, default_classical_set(), default_jobs());
  const std::vector<double> m = oracle_modulus(f4);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    worst = std::max(worst, std::abs(traj.alpha[i] - m[i]));
    worst = std::max(worst, std::abs(traj.beta[i] - m[i]));
  }
  CHECK(worst < 1e-5);
  CHECK(traj.max_solver_gap < 1e-6);
  const double w = positive_variation(traj.alpha, kQuantumnessIncrementFloor);
  CHECK(w == doctest::Approx(testsupport::positive_increments(m)).epsilon(1e-4));
  CHECK(w > 1e-3);

  CHECK(hcl_w(preset("6.0"), Quantity::kAlpha, default_classical_set(), default_jobs()) < 1e-9);
  CHECK(hcl_w(family(Spectrum::single(702.672, 0.0), 20.0), Quantity::kBeta) < 1e-9);
  CHECK(hcl_w(family(Spectrum::single(702.672, 0.0), 160.0), Quantity::kBeta) < 1e-9);
}

TEST_CASE("trajectory results do not depend on the worker count") {
  const DynamicsFamily f = preset("8.5", 30.0);
  const auto a = quantumness_trajectory(f, default_classical_set(), 1);
  const auto b = quantumness_trajectory(f, default_classical_set(), 4);
  CHECK(a.alpha == b.alpha);
  CHECK(a.beta == b.beta);
}

TEST_CASE("HCL-N") {
  const Spectrum line = Spectrum::single(702.672, 0.0);
  // Zero up to cone solver accuracy.
  CHECK(hcl_n(family(line), 160.0, 0.5, Quantity::kAlpha) < 1e-9);
  CHECK(hcl_n(family(line), 160.0, 0.5, Quantity::kBeta) < 1e-9);

  const double n6 = testsupport::single_peak_n(702.672, 0.198, 702.0, 160.0);
  CHECK(hcl_n(preset("6.0"), 160.0, 0.5, Quantity::kAlpha) == doctest::Approx(n6).epsilon(1e-4));
  CHECK(hcl_n(preset("6.0"), 160.0, 0.5, Quantity::kBeta) == doctest::Approx(n6).epsilon(1e-4));

  const double n_probe = testsupport::single_peak_n(702.672, 0.1092, 702.0, 160.0);
  CHECK(n_probe == doctest::Approx(0.0062).epsilon(0.03));
  CHECK(hcl_n(family(Spectrum::single(702.672, 0.1092)), 160.0, 0.5, Quantity::kAlpha) ==
        doctest::Approx(n_probe).epsilon(1e-4));

  for (const auto& name : preset_names()) CHECK(hcl_n(preset(name), 160.0, 0.5, Quantity::kAlpha) > 1e-4);

  // Uneven split: the composite carries kappa(f s) kappa((1 - f) s).
  const DynamicsFamily f = preset("2.5");
  const auto split = hcl_n_split(f, 120.0, 0.3, Quantity::kAlpha);
  CHECK(split.direct == doctest::Approx(std::abs(f.kappa_at(120.0))).epsilon(1e-6));
  CHECK(split.composite == doctest::Approx(std::abs(f.kappa_at(36.0) * f.kappa_at(84.0))).epsilon(1e-6));
  CHECK(split.difference() == doctest::Approx(std::abs(split.direct - split.composite)));
  CHECK_THROWS_AS(hcl_n(f, 120.0, 1.0, Quantity::kAlpha), ValidationError);
}

TEST_CASE("divisibility gap") {
  CHECK(divisibility_gap(family(Spectrum::single(702.672, 0.0)), 160.0) < 1e-12);
  CHECK(divisibility_gap(preset("6.0"), 160.0) ==
        doctest::Approx(testsupport::single_peak_n(702.672, 0.198, 702.0, 160.0)).epsilon(1e-4));
  CHECK(divisibility_gap(preset("6.0"), 160.0) == doctest::Approx(0.01942).epsilon(1e-3));
  double prev = 0.0;
  for (int i = 1; i <= 30; ++i) {
    const double g = divisibility_gap(family(Spectrum::single(702.672, 0.01 * i)), 160.0);
    CHECK(g > prev);
    prev = g;
  }
  for (const auto& name : preset_names()) CHECK(divisibility_gap(preset(name), 160.0) > 1e-4);
  CHECK_THROWS_AS(divisibility_gap(preset("6.0"), 160.05), ContractViolation);
}

TEST_CASE("criteria report is consistent with its thresholds") {
  CriteriaOptions opt;
  opt.jobs = default_jobs();
  const auto r = evaluate_criteria(preset("7.5", 40.0), default_classical_set(), opt);
  CHECK(r.formulation == "measure-prepare-ppt");
  CHECK(r.verdicts.blp == (r.n_blp > r.thresholds.blp));
  CHECK(r.verdicts.rhp == (r.n_rhp > r.thresholds.rhp));
  CHECK(r.verdicts.lfs == (r.n_lfs > r.thresholds.lfs));
  CHECK(r.verdicts.hcl_w == (std::max(r.w_alpha, r.w_beta) > r.thresholds.hcl_w));
  CHECK(r.verdicts.hcl_n == (std::max(r.n_alpha, r.n_beta) > r.thresholds.hcl_n));
  for (double v : {r.w_alpha, r.w_beta, r.n_alpha, r.n_beta, r.n_blp, r.n_rhp, r.n_lfs}) CHECK(v >= 0.0);

  const auto flat = evaluate_criteria(family(Spectrum::single(702.672, 0.0), 20.0));
  CHECK_FALSE(flat.verdicts.blp);
  CHECK_FALSE(flat.verdicts.rhp);
  CHECK_FALSE(flat.verdicts.lfs);
  CHECK_FALSE(flat.verdicts.hcl_w);
  CHECK_FALSE(flat.verdicts.hcl_n);
}
