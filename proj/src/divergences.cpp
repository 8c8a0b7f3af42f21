#include "qdisc/divergences.hpp"

#include <cmath>

namespace qdisc::divergence {

using linalg::identity;
using linalg::psd_power;
using linalg::support_contains;
using linalg::support_log;
using sdp::MatExpr;
using sdp::ScalarExpr;
using sdp::SdpProblem;
using sdp::Sense;
using sdp::SolveStatus;
using sdp::VarId;

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("eps must lie in (0,1)");
  }
}

void check_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatchError("operator dims differ");
}

}  // namespace

double gamma_eps(const TraceOneHermitian& rho, const DensityMatrix& sigma, double eps,
                 const sdp::SolveOptions& opt) {
  check_eps(eps);
  check_same_dim(rho, sigma);
  const int d = rho.dim();

  SdpProblem p;
  VarId q = p.add_psd_var("Q", d);
  MatExpr ub({d});
  ub.add_constant(0, 0, identity(d)).add_term(q, 0, 0, -1.0);
  p.add_psd_constraint(std::move(ub), "Q<=I");
  ScalarExpr budget;
  budget.constant = eps;
  budget.add_term(q, CMat(-rho.entries()));
  p.add_scalar_ineq(budget, "type-I budget");
  ScalarExpr obj;
  obj.add_term(q, sigma.entries());
  p.set_objective(Sense::maximize, obj);

  auto sol = sdp::solve(p, opt);
  if (sol.status != SolveStatus::optimal) {
    throw SolverError("gamma_eps solve failed: " + sol.message);
  }
  return sol.primal_value;
}

double beta_eps(const DensityMatrix& rho, const DensityMatrix& sigma, double eps,
                const sdp::SolveOptions& opt) {
  check_eps(eps);
  check_same_dim(rho, sigma);
  const int d = rho.dim();

  SdpProblem p;
  VarId q = p.add_psd_var("Q", d);
  MatExpr ub({d});
  ub.add_constant(0, 0, identity(d)).add_term(q, 0, 0, -1.0);
  p.add_psd_constraint(std::move(ub), "Q<=I");
  // tr((I-Q) rho) <= eps
  ScalarExpr budget;
  budget.constant = eps - 1.0;
  budget.add_term(q, rho.entries());
  p.add_scalar_ineq(budget, "type-I budget");
  ScalarExpr obj;
  obj.add_term(q, sigma.entries());
  p.set_objective(Sense::minimize, obj);

  auto sol = sdp::solve(p, opt);
  if (sol.status != SolveStatus::optimal) {
    throw SolverError("beta_eps solve failed: " + sol.message);
  }
  return sol.primal_value;
}

double hypothesis_testing(const TraceOneHermitian& rho, const DensityMatrix& sigma,
                          double eps, const sdp::SolveOptions& opt) {
  double g = gamma_eps(rho, sigma, eps, opt);
  if (g >= 1.0 - 1e-8) return kInf;
  return -std::log1p(-g);
}

double sandwiched_renyi(const TraceOneHermitian& beta, const HermitianOperator& sigma,
                        double alpha, double support_tol) {
  if (!(alpha > 1.0)) throw DomainError("sandwiched divergence needs alpha > 1");
  check_same_dim(beta, sigma);
  if (!support_contains(sigma, beta, support_tol)) return kInf;
  const double p = (1.0 - alpha) / (2.0 * alpha);
  CMat s = psd_power(sigma.entries(), p, support_tol);
  CMat g = linalg::herm(s * beta.entries() * s);
  linalg::RVec lam = linalg::eig(g).eigenvalues;
  double acc = 0;
  for (int i = 0; i < lam.size(); ++i) acc += std::pow(std::abs(lam[i]), alpha);
  return std::log(acc) / (alpha - 1.0);
}

double geometric_renyi(const HermitianOperator& rho, const HermitianOperator& sigma,
                       double alpha, double support_tol) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw DomainError("geometric divergence needs alpha in (1,2]");
  }
  check_same_dim(rho, sigma);
  if (!support_contains(sigma, rho, support_tol)) return kInf;
  CMat si = psd_power(sigma.entries(), -0.5, support_tol);
  CMat x = linalg::herm(si * rho.entries() * si);
  double val = (sigma.entries() * psd_power(x, alpha, support_tol)).trace().real();
  return std::log(val) / (alpha - 1.0);
}

double geometric_renyi_sdp(const HermitianOperator& rho, const HermitianOperator& sigma,
                           int level, const sdp::SolveOptions& opt) {
  if (level < 0) throw DomainError("level must be >= 0");
  check_same_dim(rho, sigma);
  const int d = rho.dim();
  const double alpha = 1.0 + std::pow(2.0, -level);

  SdpProblem p;
  VarId m = p.add_herm_var("M", d);
  std::vector<VarId> n(level);
  for (int i = 0; i < level; ++i) {
    n[i] = p.add_herm_var("N" + std::to_string(i + 1), d);
  }
  // top block [[M, rho],[rho, N_l]] with N_0 = sigma fixed
  {
    MatExpr top({d, d});
    top.add_term(m, 0, 0).add_constant(0, 1, rho.entries());
    if (level == 0) {
      top.add_constant(1, 1, sigma.entries());
    } else {
      top.add_term(n[level - 1], 1, 1);
    }
    p.add_psd_constraint(std::move(top), "top");
  }
  for (int i = 1; i <= level; ++i) {
    MatExpr mid({d, d});
    mid.add_constant(0, 0, rho.entries());
    mid.add_term(n[i - 1], 0, 1);
    if (i == 1) {
      mid.add_constant(1, 1, sigma.entries());
    } else {
      mid.add_term(n[i - 2], 1, 1);
    }
    p.add_psd_constraint(std::move(mid), "chain" + std::to_string(i));
  }
  ScalarExpr obj;
  obj.add_term(m, identity(d));
  p.set_objective(Sense::minimize, obj);

  auto sol = sdp::solve(p, opt);
  if (sol.status == SolveStatus::infeasible) return kInf;
  if (sol.status != SolveStatus::optimal) {
    throw SolverError("geometric cascade solve failed: " + sol.message);
  }
  if (sol.primal_value <= 0.0) {
    throw SolverError("geometric cascade returned a nonpositive trace");
  }
  return std::log(sol.primal_value) / (alpha - 1.0);
}

double umegaki(const DensityMatrix& rho, const DensityMatrix& sigma,
               double support_tol) {
  check_same_dim(rho, sigma);
  if (!support_contains(sigma, rho, support_tol)) return kInf;
  const CMat& r = rho.entries();
  return (r * support_log(r, support_tol)).trace().real() -
         (r * support_log(sigma.entries(), support_tol)).trace().real();
}

double belavkin_staszewski(const DensityMatrix& rho, const DensityMatrix& sigma,
                           double support_tol) {
  check_same_dim(rho, sigma);
  if (!support_contains(sigma, rho, support_tol)) return kInf;
  CMat rh = psd_power(rho.entries(), 0.5, support_tol);
  CMat a = linalg::herm(rh * psd_power(sigma.entries(), -1.0, support_tol) * rh);
  return (rho.entries() * support_log(a, support_tol)).trace().real();
}

double evaluate(const DivergenceSpec& spec, const DensityMatrix& tau,
                const DensityMatrix& rho, double support_tol) {
  switch (spec.family) {
    case DivergenceSpec::Family::sandwiched:
      return sandwiched_renyi(tau, rho, spec.alpha, support_tol);
    case DivergenceSpec::Family::geometric:
      return geometric_renyi(tau, rho, spec.alpha, support_tol);
    case DivergenceSpec::Family::umegaki:
      return umegaki(tau, rho, support_tol);
    case DivergenceSpec::Family::belavkin_staszewski:
      return belavkin_staszewski(tau, rho, support_tol);
  }
  throw DomainError("unknown divergence family");
}

}  // namespace qdisc::divergence
