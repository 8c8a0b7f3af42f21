#include <Eigen/SVD>
#include <cmath>
#include <memory>
#include <sstream>

#include "conic.hpp"
#include "qdisc/sdp.hpp"

namespace qdisc::sdp {

using detail::ConicProblem;
using detail::ConicResult;
using detail::ConicStatus;
using detail::smat;
using detail::svec;
using detail::svec_dim;

RMat realify(const CMat& h) {
  const int d = static_cast<int>(h.rows());
  if (h.cols() != d) throw DimensionMismatchError("realify: square input required");
  RMat r(2 * d, 2 * d);
  r.topLeftCorner(d, d) = h.real();
  r.topRightCorner(d, d) = -h.imag();
  r.bottomLeftCorner(d, d) = h.imag();
  r.bottomRightCorner(d, d) = h.real();
  return r;
}

CMat derealify(const RMat& s) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) {
    throw DimensionMismatchError("derealify: even square input required");
  }
  const int d = static_cast<int>(s.rows()) / 2;
  CMat h =
      0.5 * (s.topLeftCorner(d, d) + s.bottomRightCorner(d, d)) +
      Complex(0, 0.5) * (s.bottomLeftCorner(d, d) - s.topRightCorner(d, d));
  return h;
}

MatExpr::MatExpr(std::vector<int> block_dims) : blocks(std::move(block_dims)) {
  offsets.resize(blocks.size());
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i] < 1) throw DimensionMismatchError("MatExpr: block dims must be >= 1");
    offsets[i] = dim_;
    dim_ += blocks[i];
  }
  constant = CMat::Zero(dim_, dim_);
}

MatExpr& MatExpr::add_constant(int bi, int bj, const CMat& k) {
  if (k.rows() != blocks.at(bi) || k.cols() != blocks.at(bj)) {
    throw DimensionMismatchError("MatExpr constant shape");
  }
  constant.block(offsets[bi], offsets[bj], k.rows(), k.cols()) += k;
  if (bi != bj) {
    constant.block(offsets[bj], offsets[bi], k.cols(), k.rows()) += k.adjoint();
  }
  return *this;
}

MatExpr& MatExpr::add_term(VarId v, int bi, int bj, Complex alpha) {
  if (bi == bj && std::abs(alpha.imag()) > 0) {
    throw DomainError("diagonal-block coefficient must be real");
  }
  Term t;
  t.var = v;
  t.bi = bi;
  t.bj = bj;
  t.alpha = alpha;
  terms.push_back(std::move(t));
  return *this;
}

MatExpr& MatExpr::add_partial_trace_term(VarId v, int bi, int bj, int dim_a,
                                         int dim_b, Subsystem keep, double alpha) {
  Term t;
  t.var = v;
  t.bi = bi;
  t.bj = bj;
  t.alpha = alpha;
  t.is_partial_trace = true;
  t.dim_a = dim_a;
  t.dim_b = dim_b;
  t.keep = keep;
  terms.push_back(std::move(t));
  return *this;
}

MatExpr& MatExpr::add_scalar_term(VarId v, int bi, int bj, const CMat& g) {
  Term t;
  t.var = v;
  t.bi = bi;
  t.bj = bj;
  t.alpha = 1.0;
  t.is_scalar = true;
  t.g = g;
  terms.push_back(std::move(t));
  return *this;
}

struct SdpProblem::Impl {
  struct Var {
    std::string name;
    enum Kind { psd, herm, scalar_nonneg, scalar_free } kind;
    int dim;
    int y_off, y_cnt;
  };
  std::vector<Var> vars;
  Sense sense = Sense::minimize;
  ScalarExpr objective;
  struct MatCon {
    MatExpr expr;
    std::string name;
  };
  std::vector<MatCon> psd_cons, eq_cons;
  struct ScalCon {
    ScalarExpr expr;
    std::string name;
  };
  std::vector<ScalCon> scal_ineqs, scal_eqs;
  int y_dim = 0;

  const Var& var(VarId v) const {
    if (v.v < 0 || v.v >= static_cast<int>(vars.size())) {
      throw SolverError("constraint references an undeclared variable");
    }
    return vars[v.v];
  }

  void check_mat_expr(const MatExpr& e) const {
    if ((e.constant - e.constant.adjoint().eval()).cwiseAbs().maxCoeff() > 1e-9) {
      throw NonHermitianError("constraint constant is not Hermitian");
    }
    for (const auto& t : e.terms) {
      const Var& v = var(t.var);
      const int out_rows = e.blocks.at(t.bi);
      const int out_cols = e.blocks.at(t.bj);
      if (t.is_scalar) {
        if (v.kind != Var::scalar_nonneg && v.kind != Var::scalar_free) {
          throw DomainError("add_scalar_term requires a scalar variable");
        }
        if (t.g.rows() != out_rows || t.g.cols() != out_cols) {
          throw DimensionMismatchError("scalar-term coefficient shape");
        }
        if (t.bi == t.bj &&
            (t.g - t.g.adjoint().eval()).cwiseAbs().maxCoeff() > 1e-9) {
          throw NonHermitianError("diagonal scalar-term coefficient not Hermitian");
        }
        continue;
      }
      if (v.kind == Var::scalar_nonneg || v.kind == Var::scalar_free) {
        throw DomainError("matrix term requires a matrix variable");
      }
      int term_dim = v.dim;
      if (t.is_partial_trace) {
        if (t.dim_a * t.dim_b != v.dim) {
          throw DimensionMismatchError("partial-trace factor dims");
        }
        term_dim = t.keep == Subsystem::A ? t.dim_a : t.dim_b;
      }
      if (term_dim != out_rows || out_rows != out_cols) {
        throw DimensionMismatchError("term does not fit target block");
      }
    }
  }
};

SdpProblem::SdpProblem() : impl_(std::make_unique<Impl>()) {}
SdpProblem::~SdpProblem() = default;
SdpProblem::SdpProblem(SdpProblem&&) noexcept = default;
SdpProblem& SdpProblem::operator=(SdpProblem&&) noexcept = default;

VarId SdpProblem::add_psd_var(const std::string& name, int dim) {
  if (dim < 1) throw DimensionMismatchError("variable dim must be >= 1");
  Impl::Var v{name, Impl::Var::psd, dim, impl_->y_dim, dim * dim};
  impl_->y_dim += v.y_cnt;
  impl_->vars.push_back(v);
  return VarId{static_cast<int>(impl_->vars.size()) - 1};
}

VarId SdpProblem::add_herm_var(const std::string& name, int dim) {
  if (dim < 1) throw DimensionMismatchError("variable dim must be >= 1");
  Impl::Var v{name, Impl::Var::herm, dim, impl_->y_dim, dim * dim};
  impl_->y_dim += v.y_cnt;
  impl_->vars.push_back(v);
  return VarId{static_cast<int>(impl_->vars.size()) - 1};
}

VarId SdpProblem::add_scalar_var(const std::string& name, bool nonneg) {
  Impl::Var v{name, nonneg ? Impl::Var::scalar_nonneg : Impl::Var::scalar_free, 1,
              impl_->y_dim, 1};
  impl_->y_dim += 1;
  impl_->vars.push_back(v);
  return VarId{static_cast<int>(impl_->vars.size()) - 1};
}

int SdpProblem::var_dim(VarId v) const { return impl_->var(v).dim; }
bool SdpProblem::var_is_scalar(VarId v) const {
  auto k = impl_->var(v).kind;
  return k == Impl::Var::scalar_nonneg || k == Impl::Var::scalar_free;
}

void SdpProblem::set_objective(Sense sense, ScalarExpr objective) {
  impl_->sense = sense;
  impl_->objective = std::move(objective);
  for (const auto& [v, c] : impl_->objective.mat_terms) {
    const auto& var = impl_->var(v);
    if (c.rows() != var.dim || c.cols() != var.dim) {
      throw DimensionMismatchError("objective coefficient shape");
    }
  }
  for (const auto& [v, c] : impl_->objective.scalar_terms) {
    (void)c;
    if (!var_is_scalar(v)) throw DomainError("scalar objective term on matrix var");
  }
}

void SdpProblem::add_psd_constraint(MatExpr expr, const std::string& name) {
  impl_->check_mat_expr(expr);
  impl_->psd_cons.push_back(
      {std::move(expr), name.empty()
                            ? "psd" + std::to_string(impl_->psd_cons.size())
                            : name});
}

void SdpProblem::add_eq_constraint(MatExpr expr, const std::string& name) {
  impl_->check_mat_expr(expr);
  impl_->eq_cons.push_back(
      {std::move(expr),
       name.empty() ? "eq" + std::to_string(impl_->eq_cons.size()) : name});
}

void SdpProblem::add_scalar_ineq(ScalarExpr expr, const std::string& name) {
  impl_->scal_ineqs.push_back(
      {std::move(expr), name.empty()
                            ? "ineq" + std::to_string(impl_->scal_ineqs.size())
                            : name});
}

void SdpProblem::add_scalar_eq(ScalarExpr expr, const std::string& name) {
  impl_->scal_eqs.push_back(
      {std::move(expr),
       name.empty() ? "seq" + std::to_string(impl_->scal_eqs.size()) : name});
}

namespace {

using Impl = SdpProblem::Impl;

struct ConeBlockInfo {
  std::string name;
  int complex_dim;   // 0 for plain scalar rows
  double ref_scale;  // 1 + norm of the constant part
};

struct Assembled {
  ConicProblem cone;  // pre-elimination, columns over the full y space
  std::vector<ConeBlockInfo> info;
  RMat E;  // equality rows
  RVec f;
  RVec b_user;  // user-sense objective gradient over y
  double c0 = 0.0;
};

// Images of each y coordinate under the linear part of a matrix expression.
std::vector<CMat> coordinate_images(const Impl& im, const MatExpr& e) {
  std::vector<CMat> img;
  // collect touched coordinates lazily: full map var coord -> image
  std::map<int, CMat> by_coord;
  auto image_at = [&](int coord) -> CMat& {
    auto it = by_coord.find(coord);
    if (it == by_coord.end()) {
      it = by_coord.emplace(coord, CMat::Zero(e.dim(), e.dim())).first;
    }
    return it->second;
  };
  auto place = [&](CMat& target, const MatExpr::Term& t, const CMat& sub) {
    target.block(e.offsets[t.bi], e.offsets[t.bj], sub.rows(), sub.cols()) += sub;
    if (t.bi != t.bj) {
      target.block(e.offsets[t.bj], e.offsets[t.bi], sub.cols(), sub.rows()) +=
          sub.adjoint();
    }
  };
  for (const auto& t : e.terms) {
    const auto& v = im.vars[t.var.v];
    if (t.is_scalar) {
      place(image_at(v.y_off), t, t.g);
      continue;
    }
    auto basis = linalg::hermitian_basis(v.dim);
    for (int r = 0; r < v.y_cnt; ++r) {
      CMat contrib = t.alpha * basis[r];
      if (t.is_partial_trace) {
        contrib = linalg::partial_trace(contrib, t.dim_a, t.dim_b, t.keep);
      }
      place(image_at(v.y_off + r), t, contrib);
    }
  }
  img.assign(im.y_dim, CMat());
  for (auto& [coord, mat] : by_coord) img[coord] = std::move(mat);
  return img;
}

// Row over y for a scalar expression, plus its constant.
RVec scalar_row(const Impl& im, const ScalarExpr& e) {
  RVec row = RVec::Zero(im.y_dim);
  for (const auto& [v, c] : e.mat_terms) {
    const auto& var = im.vars[v.v];
    auto basis = linalg::hermitian_basis(var.dim);
    for (int r = 0; r < var.y_cnt; ++r) {
      row[var.y_off + r] += (c * basis[r]).trace().real();
    }
  }
  for (const auto& [v, c] : e.scalar_terms) row[im.vars[v.v].y_off] += c;
  return row;
}

Assembled assemble(const Impl& im) {
  Assembled a;
  const int m = im.y_dim;
  auto& cone = a.cone;

  auto push_matrix_block = [&](const std::string& name, const CMat& constant,
                               const std::vector<CMat>& images) {
    const int dc = static_cast<int>(constant.rows());
    const int n = 2 * dc;
    cone.block_dims.push_back(n);
    cone.c.push_back(svec(realify(constant)));
    RMat at = RMat::Zero(svec_dim(n), m);
    for (int j = 0; j < m; ++j) {
      if (images[j].size() != 0) at.col(j) = -svec(realify(images[j]));
    }
    cone.At.push_back(std::move(at));
    a.info.push_back({name, dc, 1.0 + linalg::operator_norm(constant)});
  };

  // PSD variables enter the cone directly.
  for (size_t i = 0; i < im.vars.size(); ++i) {
    const auto& v = im.vars[i];
    if (v.kind != Impl::Var::psd) continue;
    MatExpr e({v.dim});
    e.add_term(VarId{static_cast<int>(i)}, 0, 0);
    push_matrix_block("var:" + v.name, CMat::Zero(v.dim, v.dim),
                      coordinate_images(im, e));
  }
  // Nonnegative scalar variables.
  for (size_t i = 0; i < im.vars.size(); ++i) {
    const auto& v = im.vars[i];
    if (v.kind != Impl::Var::scalar_nonneg) continue;
    cone.block_dims.push_back(1);
    cone.c.push_back(RVec::Zero(1));
    RMat at = RMat::Zero(1, m);
    at(0, v.y_off) = -1.0;
    cone.At.push_back(std::move(at));
    a.info.push_back({"var:" + v.name, 0, 1.0});
  }
  // Matrix inequalities.
  for (const auto& con : im.psd_cons) {
    push_matrix_block(con.name, con.expr.constant, coordinate_images(im, con.expr));
  }
  // Scalar inequalities.
  for (const auto& con : im.scal_ineqs) {
    cone.block_dims.push_back(1);
    RVec c1(1);
    c1[0] = con.expr.constant;
    cone.c.push_back(c1);
    RMat at = -scalar_row(im, con.expr).transpose();
    cone.At.push_back(at);
    a.info.push_back({con.name, 0, 1.0 + std::abs(con.expr.constant)});
  }

  // Equalities: matrix ones expand over a Hermitian basis of the target.
  std::vector<RVec> rows;
  std::vector<double> rhs;
  for (const auto& con : im.eq_cons) {
    auto images = coordinate_images(im, con.expr);
    auto target_basis = linalg::hermitian_basis(con.expr.dim());
    for (const auto& eb : target_basis) {
      RVec row = RVec::Zero(m);
      bool nonzero = false;
      for (int j = 0; j < m; ++j) {
        if (images[j].size() == 0) continue;
        row[j] = (eb * images[j]).trace().real();
        nonzero = nonzero || row[j] != 0.0;
      }
      double r = -(eb * con.expr.constant).trace().real();
      if (nonzero || r != 0.0) {
        rows.push_back(std::move(row));
        rhs.push_back(r);
      }
    }
  }
  for (const auto& con : im.scal_eqs) {
    rows.push_back(scalar_row(im, con.expr));
    rhs.push_back(-con.expr.constant);
  }
  a.E = RMat::Zero(static_cast<int>(rows.size()), m);
  a.f = RVec::Zero(static_cast<int>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    a.E.row(static_cast<int>(i)) = rows[i].transpose();
    a.f[static_cast<int>(i)] = rhs[i];
  }

  a.b_user = scalar_row(im, im.objective);
  a.c0 = im.objective.constant;
  a.cone.b = a.b_user;  // placeholder; solve() orients and compresses
  return a;
}

// Reconstruct variable values from a full y vector.
void fill_solution_blocks(const Impl& im, const RVec& y, SdpSolution& sol) {
  for (const auto& v : im.vars) {
    if (v.kind == Impl::Var::scalar_nonneg || v.kind == Impl::Var::scalar_free) {
      sol.scalars[v.name] = y[v.y_off];
      continue;
    }
    auto basis = linalg::hermitian_basis(v.dim);
    CMat x = CMat::Zero(v.dim, v.dim);
    for (int r = 0; r < v.y_cnt; ++r) x += y[v.y_off + r] * basis[r];
    sol.blocks[v.name] = x;
  }
}

double evaluate_objective(const Impl& im, const SdpSolution& sol) {
  double val = im.objective.constant;
  for (const auto& [v, c] : im.objective.mat_terms) {
    val += (c * sol.blocks.at(im.vars[v.v].name)).trace().real();
  }
  for (const auto& [v, c] : im.objective.scalar_terms) {
    val += c * sol.scalars.at(im.vars[v.v].name);
  }
  return val;
}

CMat evaluate_mat_expr(const Impl& im, const MatExpr& e, const SdpSolution& sol) {
  CMat out = e.constant;
  auto place = [&](const MatExpr::Term& t, const CMat& sub) {
    out.block(e.offsets[t.bi], e.offsets[t.bj], sub.rows(), sub.cols()) += sub;
    if (t.bi != t.bj) {
      out.block(e.offsets[t.bj], e.offsets[t.bi], sub.cols(), sub.rows()) +=
          sub.adjoint();
    }
  };
  for (const auto& t : e.terms) {
    const auto& v = im.vars[t.var.v];
    if (t.is_scalar) {
      place(t, CMat(sol.scalars.at(v.name) * t.g));
      continue;
    }
    CMat contrib = t.alpha * sol.blocks.at(v.name);
    if (t.is_partial_trace) {
      contrib = linalg::partial_trace(contrib, t.dim_a, t.dim_b, t.keep);
    }
    place(t, contrib);
  }
  return out;
}

double evaluate_scalar_expr(const Impl& im, const ScalarExpr& e,
                            const SdpSolution& sol) {
  double val = e.constant;
  for (const auto& [v, c] : e.mat_terms) {
    val += (c * sol.blocks.at(im.vars[v.v].name)).trace().real();
  }
  for (const auto& [v, c] : e.scalar_terms) val += c * sol.scalars.at(im.vars[v.v].name);
  return val;
}

double kkt_residual_at(const Impl& im, const SdpSolution& sol) {
  double worst = 0.0;
  auto min_eig = [](const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };
  for (const auto& v : im.vars) {
    if (v.kind == Impl::Var::psd) {
      worst = std::max(worst, -min_eig(sol.blocks.at(v.name)));
    } else if (v.kind == Impl::Var::scalar_nonneg) {
      worst = std::max(worst, -sol.scalars.at(v.name));
    }
  }
  for (const auto& con : im.psd_cons) {
    double scale = 1.0 + linalg::operator_norm(con.expr.constant);
    worst = std::max(worst, -min_eig(evaluate_mat_expr(im, con.expr, sol)) / scale);
  }
  for (const auto& con : im.eq_cons) {
    double scale = 1.0 + linalg::operator_norm(con.expr.constant);
    worst = std::max(
        worst, evaluate_mat_expr(im, con.expr, sol).cwiseAbs().maxCoeff() / scale);
  }
  for (const auto& con : im.scal_ineqs) {
    double scale = 1.0 + std::abs(con.expr.constant);
    worst = std::max(worst, -evaluate_scalar_expr(im, con.expr, sol) / scale);
  }
  for (const auto& con : im.scal_eqs) {
    double scale = 1.0 + std::abs(con.expr.constant);
    worst = std::max(worst, std::abs(evaluate_scalar_expr(im, con.expr, sol)) / scale);
  }
  return worst;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolveOptions& opt) {
  const Impl& im = p.impl();
  Assembled a = assemble(im);
  const int m = im.y_dim;
  const double sgn = im.sense == Sense::maximize ? 1.0 : -1.0;

  SdpSolution sol;

  // Coordinates appearing in no constraint are fixed to zero, unless the
  // objective moves along them, in which case the problem is unbounded.
  std::vector<char> used(m, 0);
  for (const auto& at : a.cone.At) {
    for (int j = 0; j < m; ++j) {
      if (at.col(j).cwiseAbs().maxCoeff() != 0.0) used[j] = 1;
    }
  }
  for (int r = 0; r < a.E.rows(); ++r) {
    for (int j = 0; j < m; ++j) {
      if (a.E(r, j) != 0.0) used[j] = 1;
    }
  }
  std::vector<int> keep;
  for (int j = 0; j < m; ++j) {
    if (used[j]) {
      keep.push_back(j);
    } else if (a.b_user[j] != 0.0) {
      sol.status = SolveStatus::unbounded;
      RVec ray = RVec::Zero(m);
      ray[j] = sgn * (a.b_user[j] > 0 ? 1.0 : -1.0);
      SdpSolution tmp;
      fill_solution_blocks(im, ray, tmp);
      sol.certificate = std::move(tmp.blocks);
      for (auto& [name, v] : tmp.scalars) {
        sol.certificate[name] = CMat::Constant(1, 1, v);
      }
      sol.message = "objective is unbounded along an unconstrained coordinate";
      return sol;
    }
  }
  const int mc = static_cast<int>(keep.size());

  // Compress columns.
  std::vector<RMat> At(a.cone.At.size());
  for (size_t k = 0; k < a.cone.At.size(); ++k) {
    At[k].resize(a.cone.At[k].rows(), mc);
    for (int j = 0; j < mc; ++j) At[k].col(j) = a.cone.At[k].col(keep[j]);
  }
  RMat E(a.E.rows(), mc);
  for (int j = 0; j < mc; ++j) E.col(j) = a.E.col(keep[j]);
  RVec b_int(mc);
  for (int j = 0; j < mc; ++j) b_int[j] = sgn * a.b_user[keep[j]];

  // Eliminate equalities by reparameterizing y = y0 + Z t.
  RVec y0 = RVec::Zero(mc);
  RMat Z;
  if (E.rows() > 0) {
    Eigen::JacobiSVD<RMat> svd(E, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > 1e-12 * std::max(1.0, smax)) ++rank;
    }
    RVec uf = svd.matrixU().transpose() * a.f;
    RVec w = RVec::Zero(sv.size());
    for (int i = 0; i < rank; ++i) w[i] = uf[i] / sv[i];
    y0 = svd.matrixV().leftCols(sv.size()) * w;
    if ((E * y0 - a.f).cwiseAbs().maxCoeff() >
        1e-8 * (1.0 + a.f.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::infeasible;
      sol.message = "equality constraints are inconsistent";
      return sol;
    }
    Z = svd.matrixV().rightCols(mc - rank);
  } else {
    Z = RMat::Identity(mc, mc);
  }

  ConicProblem cp;
  cp.block_dims = a.cone.block_dims;
  cp.b = Z.transpose() * b_int;
  cp.At.resize(At.size());
  cp.c.resize(At.size());
  for (size_t k = 0; k < At.size(); ++k) {
    cp.c[k] = a.cone.c[k] - At[k] * y0;
    cp.At[k] = At[k] * Z;
  }
  const double c0_int = b_int.dot(y0);

  detail::ConicOptions copt;
  copt.gap_tol = opt.gap_tol;
  copt.feas_tol = opt.kkt_tol;
  copt.max_iters = opt.max_iters;
  copt.verbose = opt.verbose;
  ConicResult cres = detail::solve_conic(cp, copt);

  auto expand_y = [&](const RVec& yc) {
    RVec full = RVec::Zero(m);
    for (int j = 0; j < mc; ++j) full[keep[j]] = yc[j];
    return full;
  };

  sol.iterations = cres.iterations;
  switch (cres.status) {
    case ConicStatus::optimal:
    case ConicStatus::max_iters: {
      RVec yc = y0 + Z * cres.y;
      fill_solution_blocks(im, expand_y(yc), sol);
      sol.primal_value = evaluate_objective(im, sol);
      sol.dual_value = sgn * (cres.obj_x + c0_int) + a.c0;
      sol.gap = std::abs(sol.primal_value - sol.dual_value) /
                (1.0 + std::abs(sol.primal_value));
      sol.kkt_residual = std::max(kkt_residual_at(im, sol), cres.feas_y);
      sol.status = cres.status == ConicStatus::optimal ? SolveStatus::optimal
                                                       : SolveStatus::max_iters;
      if (sol.status == SolveStatus::optimal &&
          (sol.gap > 10 * opt.gap_tol || sol.kkt_residual > 10 * opt.kkt_tol)) {
        sol.status = SolveStatus::max_iters;
        sol.message = "converged point failed the independent KKT re-check";
      }
      break;
    }
    case ConicStatus::y_infeasible: {
      sol.status = SolveStatus::infeasible;
      sol.message = "conic certificate of infeasibility";
      for (size_t k = 0; k < cres.x.size(); ++k) {
        if (a.info[k].complex_dim == 0) {
          sol.certificate[a.info[k].name] = CMat::Constant(1, 1, cres.x[k][0]);
        } else {
          RMat xr = smat(cres.x[k]);
          const int d2 = a.info[k].complex_dim;
          RMat j = RMat::Zero(2 * d2, 2 * d2);
          j.topRightCorner(d2, d2) = -RMat::Identity(d2, d2);
          j.bottomLeftCorner(d2, d2) = RMat::Identity(d2, d2);
          sol.certificate[a.info[k].name] =
              derealify(RMat(0.5 * (xr + j * xr * j.transpose())));
        }
      }
      break;
    }
    case ConicStatus::y_unbounded: {
      sol.status = SolveStatus::unbounded;
      sol.message = "improving ray found";
      RVec yc = Z * cres.y;  // ray: equalities stay satisfied along it
      SdpSolution tmp;
      fill_solution_blocks(im, expand_y(RVec(sgn * yc)), tmp);
      sol.certificate = std::move(tmp.blocks);
      for (auto& [k, v] : tmp.scalars) {
        sol.certificate[k] = CMat::Constant(1, 1, v);
      }
      break;
    }
  }
  return sol;
}

bool slater_check(const SdpProblem& p, double margin) {
  const Impl& im = p.impl();
  Assembled a = assemble(im);
  const int m = im.y_dim;

  RMat E = a.E;
  RVec y0 = RVec::Zero(m);
  RMat Z;
  if (E.rows() > 0) {
    Eigen::JacobiSVD<RMat> svd(E, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > 1e-12 * std::max(1.0, smax)) ++rank;
    }
    RVec uf = svd.matrixU().transpose() * a.f;
    RVec w = RVec::Zero(sv.size());
    for (int i = 0; i < rank; ++i) w[i] = uf[i] / sv[i];
    y0 = svd.matrixV().leftCols(sv.size()) * w;
    if ((E * y0 - a.f).cwiseAbs().maxCoeff() >
        1e-8 * (1.0 + a.f.cwiseAbs().maxCoeff())) {
      return false;
    }
    Z = svd.matrixV().rightCols(m - rank);
  } else {
    Z = RMat::Identity(m, m);
  }
  const int mt = static_cast<int>(Z.cols());

  // Phase one: maximize t with every cone expression shifted by -t I and
  // t <= 1 to keep the problem bounded.
  ConicProblem cp;
  cp.block_dims = a.cone.block_dims;
  cp.b = RVec::Zero(mt + 1);
  cp.b[mt] = 1.0;
  for (size_t k = 0; k < a.cone.At.size(); ++k) {
    const int n = a.cone.block_dims[k];
    RMat at(svec_dim(n), mt + 1);
    at.leftCols(mt) = a.cone.At[k] * Z;
    at.col(mt) = svec(RMat::Identity(n, n));
    cp.At.push_back(std::move(at));
    cp.c.push_back(RVec(a.cone.c[k] - a.cone.At[k] * y0));
  }
  cp.block_dims.push_back(1);
  RMat att = RMat::Zero(1, mt + 1);
  att(0, mt) = 1.0;
  cp.At.push_back(att);
  cp.c.push_back(RVec::Ones(1));

  detail::ConicOptions copt;
  ConicResult res = detail::solve_conic(cp, copt);
  if (res.status != ConicStatus::optimal) return false;
  return res.y[mt] > margin;
}

std::string to_conic_text(const SdpProblem& p) {
  Assembled a = assemble(p.impl());
  a.cone.b = a.b_user;
  std::ostringstream os;
  os << detail::to_text(a.cone);
  os.precision(17);
  os << "eq_rows " << a.E.rows() << "\n";
  for (int r = 0; r < a.E.rows(); ++r) {
    for (int j = 0; j < a.E.cols(); ++j) {
      if (a.E(r, j) != 0.0) os << "E " << r << " " << j << " " << a.E(r, j) << "\n";
    }
    os << "f " << r << " " << a.f[r] << "\n";
  }
  os << "sense " << (p.impl().sense == Sense::maximize ? "max" : "min") << "\n";
  return os.str();
}

}  // namespace qdisc::sdp
