#include "dephaskit/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <utility>

#include "dephaskit/errors.hpp"

namespace dephaskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix pt(const Matrix& m) {
  return partial_transpose(Matrix4(m), Subsystem::kSecond);
}

Matrix herm(const Matrix& m) {
  return 0.5 * (m + m.adjoint());
}

// Real coordinates of a Hermitian matrix, orthonormal for Re tr(A B):
// diagonal entries, then sqrt(2) Re and sqrt(2) Im of each upper entry.
void pack(const Matrix& h, double* out) {
  const Eigen::Index n = h.rows();
  for (Eigen::Index k = 0; k < n; ++k) *out++ = h(k, k).real();
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = k + 1; l < n; ++l) {
      *out++ = std::numbers::sqrt2 * h(k, l).real();
      *out++ = std::numbers::sqrt2 * h(k, l).imag();
    }
}

Matrix unpack(const double* in, Eigen::Index n) {
  Matrix h(n, n);
  for (Eigen::Index k = 0; k < n; ++k) h(k, k) = *in++;
  const double r = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = k + 1; l < n; ++l) {
      const Complex z(r * in[0], r * in[1]);
      in += 2;
      h(k, l) = z;
      h(l, k) = std::conj(z);
    }
  return h;
}

// Orthonormal basis element `j` of the n x n Hermitian matrices.
Matrix basis_element(Eigen::Index n, Eigen::Index j) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n * n);
  e(j) = 1.0;
  return unpack(e.data(), n);
}

struct Layout {
  std::vector<Eigen::Index> dims;
  std::vector<Eigen::Index> offsets;
  Eigen::Index size = 0;   // total real coordinates
  Eigen::Index order = 0;  // sum of block dimensions

  Eigen::Index add(Eigen::Index n) {
    dims.push_back(n);
    offsets.push_back(size);
    size += n * n;
    order += n;
    return static_cast<Eigen::Index>(dims.size()) - 1;
  }
  std::size_t blocks() const { return dims.size(); }

  std::vector<Matrix> mats(const Eigen::VectorXd& v) const {
    std::vector<Matrix> out;
    out.reserve(dims.size());
    for (std::size_t b = 0; b < dims.size(); ++b) out.push_back(unpack(v.data() + offsets[b], dims[b]));
    return out;
  }
  Eigen::VectorXd vec(const std::vector<Matrix>& m) const {
    Eigen::VectorXd v(size);
    for (std::size_t b = 0; b < dims.size(); ++b) pack(m[b], v.data() + offsets[b]);
    return v;
  }
  Eigen::VectorXd identity() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
    for (std::size_t b = 0; b < dims.size(); ++b) v.segment(offsets[b], dims[b]).setOnes();
    return v;
  }
};

// Largest t with X + t dX still PSD (infinite if dX is PSD). Returns 0 when
// X itself is not numerically positive definite.
double max_step(const std::vector<Matrix>& x, const std::vector<Matrix>& dx) {
  double t = kInf;
  for (std::size_t b = 0; b < x.size(); ++b) {
    Eigen::LLT<Matrix> llt(x[b]);
    if (llt.info() != Eigen::Success) return 0.0;
    const Matrix& l = llt.matrixL();
    Matrix w = l.triangularView<Eigen::Lower>().solve(dx[b]);
    w = l.triangularView<Eigen::Lower>().solve(Matrix(w.adjoint()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm(w), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < 0.0) t = std::min(t, -1.0 / lo);
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

VarId ConeProblem::add_variable(int dim, Cone cones, std::string label) {
  if (dim < 1 || dim > 16) throw ContractViolation("add_variable: dimension must be in [1, 16]");
  if (has_cone(cones, Cone::kPsdAfterPartialTranspose) && dim != 4) {
    throw ContractViolation("add_variable: the partial-transpose cone needs a 4x4 variable");
  }
  if (!has_cone(cones, Cone::kPsd) && !has_cone(cones, Cone::kPsdAfterPartialTranspose)) {
    throw ContractViolation("add_variable: a cone is required");
  }
  vars_.push_back({dim, cones, std::move(label)});
  return VarId{static_cast<int>(vars_.size()) - 1};
}

void ConeProblem::check_term(const Term& t) const {
  if (t.var.index < 0 || t.var.index >= num_variables()) throw ContractViolation("cone problem: unknown variable");
  const int n = vars_[static_cast<std::size_t>(t.var.index)].dim;
  if (t.coefficient.rows() != n || t.coefficient.cols() != n) {
    throw ContractViolation("cone problem: coefficient dimension does not match variable '" +
                            label(t.var) + "'");
  }
  if (hermiticity_defect(t.coefficient) > 1e-12) throw ContractViolation("cone problem: coefficient is not Hermitian");
}

void ConeProblem::add_constraint(std::vector<Term> lhs, double rhs) {
  for (const Term& t : lhs) check_term(t);
  rows_.push_back({std::move(lhs), rhs});
}

void ConeProblem::add_matrix_constraint(const std::vector<MapTerm>& lhs, const Matrix& rhs) {
  const Eigen::Index d = rhs.rows();
  if (rhs.cols() != d) throw ContractViolation("add_matrix_constraint: rhs must be square");
  if (hermiticity_defect(rhs) > 1e-12) throw ContractViolation("add_matrix_constraint: rhs must be Hermitian");
  for (const MapTerm& t : lhs) {
    if (t.var.index < 0 || t.var.index >= num_variables()) throw ContractViolation("cone problem: unknown variable");
    if (t.embedding.rows() != d || t.embedding.cols() != dim(t.var)) {
      throw ContractViolation("add_matrix_constraint: embedding has the wrong shape");
    }
    if (t.partial_transpose && d != 4) throw ContractViolation("add_matrix_constraint: partial transpose needs 4x4");
  }
  Eigen::VectorXd rhs_coords(d * d);
  pack(rhs, rhs_coords.data());
  // <B, s PT(L X L^dagger)> = <s L^dagger PT(B) L, X>
  for (Eigen::Index j = 0; j < d * d; ++j) {
    const Matrix bj = basis_element(d, j);
    std::vector<Term> terms;
    terms.reserve(lhs.size());
    for (const MapTerm& t : lhs) {
      const Matrix b = t.partial_transpose ? pt(bj) : bj;
      terms.push_back({t.var, herm(t.scale * t.embedding.adjoint() * b * t.embedding)});
    }
    rows_.push_back({std::move(terms), rhs_coords(j)});
  }
}

void ConeProblem::set_objective(std::vector<Term> terms) {
  for (const Term& t : terms) check_term(t);
  objective_ = std::move(terms);
}

int ConeProblem::dim(VarId v) const {
  return vars_.at(static_cast<std::size_t>(v.index)).dim;
}
Cone ConeProblem::cones(VarId v) const {
  return vars_.at(static_cast<std::size_t>(v.index)).cones;
}
const std::string& ConeProblem::label(VarId v) const {
  return vars_.at(static_cast<std::size_t>(v.index)).label;
}

void ConeProblem::validate() const {
  for (const Row& r : rows_)
    for (const Term& t : r.terms) check_term(t);
  for (const Term& t : objective_) check_term(t);
  if (vars_.empty()) throw ContractViolation("cone problem has no variables");
}

const char* to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::kOptimal: return "optimal";
    case ConeStatus::kPrimalInfeasible: return "primal infeasible";
    case ConeStatus::kDualInfeasible: return "dual infeasible";
    case ConeStatus::kIterationLimit: return "iteration limit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

// Standard-form data: block-diagonal PSD variable x, rows A x = b, cost c.
class ConeLowering {
 public:
  explicit ConeLowering(const ConeProblem& p) : p_(p) {
    p.validate();
    for (const auto& v : p.vars_) {
      const bool psd = has_cone(v.cones, Cone::kPsd);
      const bool ptc = has_cone(v.cones, Cone::kPsdAfterPartialTranspose);
      direct_.push_back(psd ? layout_.add(v.dim) : -1);
      transposed_.push_back(ptc ? layout_.add(v.dim) : -1);
    }
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (const auto& r : p.rows_) {
      rows.push_back(coords(r.terms));
      rhs.push_back(r.rhs);
    }
    // Variables with both cones: PT(X) - Y = 0.
    for (std::size_t v = 0; v < p.vars_.size(); ++v) {
      if (direct_[v] < 0 || transposed_[v] < 0) continue;
      for (Eigen::Index j = 0; j < 16; ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(layout_.size);
        const Matrix bj = basis_element(4, j);
        pack(pt(bj), row.data() + layout_.offsets[static_cast<std::size_t>(direct_[v])]);
        row(layout_.offsets[static_cast<std::size_t>(transposed_[v])] + j) = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back(0.0);
      }
    }
    a_.resize(static_cast<Eigen::Index>(rows.size()), layout_.size);
    b_.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      a_.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
      b_(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    c_ = coords(p.objective_);
  }

  const Layout& layout() const { return layout_; }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& c() const { return c_; }

  std::vector<Matrix> values(const Eigen::VectorXd& x) const {
    const std::vector<Matrix> blocks = layout_.mats(x);
    std::vector<Matrix> out;
    for (std::size_t v = 0; v < p_.vars_.size(); ++v) {
      if (direct_[v] >= 0)
        out.push_back(blocks[static_cast<std::size_t>(direct_[v])]);
      else
        out.push_back(pt(blocks[static_cast<std::size_t>(transposed_[v])]));
    }
    return out;
  }

 private:
  // A coefficient on X lands on the direct block, or as PT(C) on the
  // transposed block when X only lives there: Re tr(C X) = Re tr(PT(C) PT(X)).
  Eigen::VectorXd coords(const std::vector<ConeProblem::Term>& terms) const {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(layout_.size);
    for (const auto& t : terms) {
      const auto v = static_cast<std::size_t>(t.var.index);
      const Matrix c = herm(t.coefficient);
      Eigen::VectorXd local(c.rows() * c.rows());
      if (direct_[v] >= 0) {
        pack(c, local.data());
        row.segment(layout_.offsets[static_cast<std::size_t>(direct_[v])], local.size()) += local;
      } else {
        pack(pt(c), local.data());
        row.segment(layout_.offsets[static_cast<std::size_t>(transposed_[v])], local.size()) += local;
      }
    }
    return row;
  }

  const ConeProblem& p_;
  Layout layout_;
  std::vector<Eigen::Index> direct_, transposed_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_, c_;
};

namespace {

struct Presolved {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  bool consistent = true;
};

// Keeps a maximal linearly independent subset of the rows and checks that the
// dropped rows are implied.
Presolved remove_dependent_rows(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Presolved out;
  if (a.rows() == 0) {
    out.a = a;
    out.b = b;
    return out;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < rank; ++k) keep.push_back(qr.colsPermutation().indices()(k));
  std::sort(keep.begin(), keep.end());
  out.a.resize(rank, a.cols());
  out.b.resize(rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    out.a.row(k) = a.row(keep[static_cast<std::size_t>(k)]);
    out.b(k) = b(keep[static_cast<std::size_t>(k)]);
  }
  if (rank > 0) {
    const Eigen::MatrixXd gram = out.a * out.a.transpose();
    const Eigen::VectorXd x0 = out.a.transpose() * gram.ldlt().solve(out.b);
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    out.consistent = (a * x0 - b).cwiseAbs().maxCoeff() <= 1e-9 * scale;
  } else {
    out.consistent = b.cwiseAbs().maxCoeff() <= 1e-9;
  }
  return out;
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

ConeSolution solve_cone(const ConeProblem& problem, const ConeOptions& options) {
  const ConeLowering low(problem);
  const Layout& lay = low.layout();
  const Presolved pre = remove_dependent_rows(low.a(), low.b());

  ConeSolution sol;
  const Eigen::VectorXd& c = low.c();
  auto finish = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& s, double dual_obj, double dres, ConeStatus st,
                    int iters) {
    sol.status = st;
    sol.values = low.values(x);
    sol.objective = c.dot(x);
    sol.primal_residual = low.a().rows() ? inf_norm(low.a() * x - low.b()) : 0.0;
    sol.dual_residual = dres;
    sol.gap = std::max(std::abs(x.dot(s)), std::abs(sol.objective - dual_obj));
    sol.iterations = iters;
    return sol;
  };

  if (!pre.consistent) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(lay.size);
    return finish(zero, zero, 0.0, 0.0, ConeStatus::kPrimalInfeasible, 0);
  }

  const Eigen::MatrixXd& a = pre.a;
  const Eigen::VectorXd& b = pre.b;
  const Eigen::Index m = a.rows();
  const auto n_order = static_cast<double>(lay.order);
  const double b_norm = inf_norm(b), c_norm = inf_norm(c);

  // Scaled identity start.
  double xi = 1.0, eta = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) xi = std::max(xi, (1.0 + std::abs(b(i))) / (1.0 + a.row(i).norm()));
  for (Eigen::Index i = 0; i < m; ++i) eta = std::max(eta, a.row(i).norm());
  eta = std::max(eta, c.norm()) / std::max(1.0, std::sqrt(n_order));
  eta = std::max(eta, 1.0);
  Eigen::VectorXd x = xi * lay.identity();
  Eigen::VectorXd s = eta * lay.identity();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  Eigen::VectorXd best_x = x, best_s = s;
  double best_score = kInf, best_dual_obj = 0.0, best_dres = kInf;
  int stalls = 0, iter = 0;
  ConeStatus status = ConeStatus::kIterationLimit;

  for (; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd rp = b - a * x;
    const Eigen::VectorXd rd = c - a.transpose() * y - s;
    const double pinf = inf_norm(rp) / (1.0 + b_norm);
    const double dinf = inf_norm(rd) / (1.0 + c_norm);
    const double complementarity = x.dot(s);
    const double pobj = c.dot(x), dobj = b.dot(y);
    const double gap = std::max(std::abs(complementarity), std::abs(pobj - dobj));

    if (options.trace)
      std::fprintf(stderr, "it %d pinf %.3e dinf %.3e gap %.3e pobj %.15g\n", iter, pinf, dinf, gap, pobj);
    const double score = std::max({pinf / options.feasibility_tolerance, dinf / options.feasibility_tolerance,
                                   gap / options.gap_tolerance});
    if (score < best_score) {
      if (score < 0.5 * best_score) stalls = 0;
      best_score = score;
      best_x = x;
      best_s = s;
      best_dual_obj = dobj;
      best_dres = inf_norm(rd);
    } else if (++stalls >= 8) {
      break;
    }
    if (score <= 1.0) {
      status = ConeStatus::kOptimal;
      break;
    }
    // Diverging iterates that approximate a Farkas ray.
    if (dobj > 0.0 && inf_norm(a.transpose() * y + s) <= 1e-8 * dobj && dobj > 1e6) {
      status = ConeStatus::kPrimalInfeasible;
      break;
    }
    if (pobj < 0.0 && inf_norm(a * x) <= -1e-8 * pobj && -pobj > 1e6) {
      status = ConeStatus::kDualInfeasible;
      break;
    }

    const std::vector<Matrix> xm = lay.mats(x), sm = lay.mats(s), rdm = lay.mats(rd);
    std::vector<Matrix> sinv(lay.blocks());
    bool ok = true;
    for (std::size_t k = 0; k < lay.blocks(); ++k) {
      Eigen::LLT<Matrix> llt(sm[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      sinv[k] = llt.solve(Matrix::Identity(lay.dims[k], lay.dims[k]));
    }
    if (!ok) break;

    // Schur complement M_ij = Re tr(A_i X A_j S^-1).
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < lay.blocks(); ++k) {
      const Eigen::Index nb = lay.dims[k], sz = nb * nb;
      Eigen::MatrixXd op(sz, sz);
      for (Eigen::Index j = 0; j < sz; ++j) {
        const Matrix g = herm(xm[k] * basis_element(nb, j) * sinv[k]);
        pack(g, op.col(j).data());
      }
      const auto ab = a.middleCols(lay.offsets[k], sz);
      schur.noalias() += ab * op * ab.transpose();
    }
    schur = 0.5 * (schur + schur.transpose()).eval();
    // M loses definiteness to roundoff as mu -> 0; nudge the diagonal.
    Eigen::LLT<Eigen::MatrixXd> fact(schur);
    for (double shift = 1e-14; fact.info() != Eigen::Success && shift < 1e-6; shift *= 100.0) {
      fact.compute(schur + shift * schur.diagonal().cwiseAbs().maxCoeff() * Eigen::MatrixXd::Identity(m, m));
    }
    if (fact.info() != Eigen::Success) break;

    auto direction = [&](const std::vector<Matrix>& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                         Eigen::VectorXd& ds) {
      std::vector<Matrix> t(lay.blocks());
      for (std::size_t k = 0; k < lay.blocks(); ++k) t[k] = herm((rc[k] - xm[k] * rdm[k]) * sinv[k]);
      dy = fact.solve(rp - a * lay.vec(t));
      ds = rd - a.transpose() * dy;
      const std::vector<Matrix> dsm = lay.mats(ds);
      for (std::size_t k = 0; k < lay.blocks(); ++k) t[k] = herm((rc[k] - xm[k] * dsm[k]) * sinv[k]);
      dx = lay.vec(t);
    };
    auto step_pair = [&](const Eigen::VectorXd& dx, const Eigen::VectorXd& ds, double fraction) {
      const double tp = max_step(xm, lay.mats(dx));
      const double td = max_step(sm, lay.mats(ds));
      return std::make_pair(std::min(1.0, fraction * tp), std::min(1.0, fraction * td));
    };

    const double mu = complementarity / n_order;
    std::vector<Matrix> rc(lay.blocks());
    for (std::size_t k = 0; k < lay.blocks(); ++k) rc[k] = -xm[k] * sm[k];
    Eigen::VectorXd dx, dy, ds;
    direction(rc, dx, dy, ds);
    const auto [ap, ad] = step_pair(dx, ds, 1.0);
    const double mu_aff = (x + ap * dx).dot(s + ad * ds) / n_order;
    const double sigma = mu > 0.0 ? std::clamp(std::pow(mu_aff / mu, 3), 0.0, 1.0) : 0.0;

    const std::vector<Matrix> dxa = lay.mats(dx), dsa = lay.mats(ds);
    for (std::size_t k = 0; k < lay.blocks(); ++k) {
      rc[k] = sigma * mu * Matrix::Identity(lay.dims[k], lay.dims[k]) - xm[k] * sm[k] - dxa[k] * dsa[k];
    }
    direction(rc, dx, dy, ds);
    const auto [tp, td] = step_pair(dx, ds, 0.98);
    if (tp < 1e-12 && td < 1e-12) break;
    x += tp * dx;
    y += td * dy;
    s += td * ds;
  }

  if (status == ConeStatus::kOptimal || status == ConeStatus::kIterationLimit) {
    ConeSolution out = finish(best_x, best_s, best_dual_obj, best_dres, ConeStatus::kIterationLimit, iter);
    if (out.primal_residual < 1e-8 && out.gap < 1e-6 && out.dual_residual < 1e-6) out.status = ConeStatus::kOptimal;
    return out;
  }
  return finish(x, s, b.dot(y), inf_norm(c - a.transpose() * y - s), status, iter);
}

}  // namespace dephaskit
