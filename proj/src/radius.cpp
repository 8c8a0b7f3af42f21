#include <cmath>
#include <memory>

#include "qdisc/divergences.hpp"

namespace qdisc::divergence {

using linalg::identity;
using linalg::psd_power;
using linalg::support_log;
using linalg::support_projector;
using sdp::MatExpr;
using sdp::ScalarExpr;
using sdp::SdpProblem;
using sdp::Sense;
using sdp::SolveStatus;
using sdp::VarId;

namespace {

// Isometry onto the intersection of the states' supports; empty when the
// intersection is trivial.
CMat common_support_isometry(const std::vector<DensityMatrix>& states, double tol) {
  const int d = states[0].dim();
  CMat defect = CMat::Zero(d, d);
  for (const auto& s : states) defect += identity(d) - support_projector(s.entries(), tol);
  auto spec = linalg::eig(defect);  // descending
  int kernel = 0;
  for (int i = d - 1; i >= 0; --i) {
    if (spec.eigenvalues[i] <= static_cast<double>(states.size()) * 1e-7) {
      ++kernel;
    } else {
      break;
    }
  }
  return spec.eigenvectors.rightCols(kernel);
}

DensityMatrix clamp_to_state(const CMat& tau) {
  auto spec = linalg::eig(linalg::herm(tau));
  linalg::RVec lam = spec.eigenvalues.cwiseMax(0.0);
  double tr = lam.sum();
  if (tr <= 0) throw SolverError("degenerate center candidate");
  linalg::RVec scaled = lam / tr;
  CMat fixed = spec.eigenvectors * scaled.cast<linalg::Complex>().asDiagonal() *
               spec.eigenvectors.adjoint();
  return DensityMatrix(fixed);
}

bool dyadic_level_for(double alpha, int& level) {
  for (int l = 0; l <= 3; ++l) {
    if (std::abs(alpha - (1.0 + std::pow(2.0, -l))) <= 1e-12) {
      level = l;
      return true;
    }
  }
  return false;
}

double logsumexp(const std::vector<double>& v, double t) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (std::isinf(m)) return m;
  double acc = 0;
  for (double x : v) acc += std::exp(t * (x - m));
  return m + std::log(acc) / t;
}

}  // namespace

RadiusObjective::RadiusObjective(std::vector<DensityMatrix> states, DivergenceSpec spec,
                                 double temperature, double support_tol)
    : states_(std::move(states)), spec_(spec), temperature_(temperature),
      support_tol_(support_tol) {
  if (states_.empty()) throw DomainError("radius needs at least one state");
  isometry_ = common_support_isometry(states_, support_tol_);
  if (isometry_.cols() == 0) {
    throw SupportEmptyError("states share no common support vector");
  }
  precomp_.reserve(states_.size());
  for (const auto& s : states_) {
    states_full_.push_back(s.entries());
    switch (spec_.family) {
      case DivergenceSpec::Family::umegaki:
        precomp_.push_back(isometry_.adjoint() *
                           support_log(s.entries(), support_tol_) * isometry_);
        break;
      case DivergenceSpec::Family::sandwiched:
        precomp_.push_back(
            psd_power(s.entries(), (1.0 - spec_.alpha) / (2.0 * spec_.alpha),
                      support_tol_) *
            isometry_);
        break;
      case DivergenceSpec::Family::geometric:
      case DivergenceSpec::Family::belavkin_staszewski:
        precomp_.push_back(psd_power(s.entries(), -0.5, support_tol_) * isometry_);
        break;
    }
  }
}

std::vector<double> RadiusObjective::per_state(const CMat& tau) const {
  std::vector<double> out(states_.size());
  for (size_t x = 0; x < states_.size(); ++x) {
    switch (spec_.family) {
      case DivergenceSpec::Family::umegaki: {
        out[x] = (tau * support_log(tau, support_tol_)).trace().real() -
                 (tau * precomp_[x]).trace().real();
        break;
      }
      case DivergenceSpec::Family::sandwiched: {
        CMat g = linalg::herm(precomp_[x] * tau * precomp_[x].adjoint());
        linalg::RVec lam = linalg::eig(g).eigenvalues;
        double acc = 0;
        for (int i = 0; i < lam.size(); ++i) {
          acc += std::pow(std::abs(lam[i]), spec_.alpha);
        }
        out[x] = std::log(acc) / (spec_.alpha - 1.0);
        break;
      }
      case DivergenceSpec::Family::geometric: {
        CMat xm = linalg::herm(precomp_[x] * tau * precomp_[x].adjoint());
        double v =
            (states_full_[x] * psd_power(xm, spec_.alpha, support_tol_)).trace().real();
        out[x] = std::log(v) / (spec_.alpha - 1.0);
        break;
      }
      case DivergenceSpec::Family::belavkin_staszewski: {
        CMat xm = linalg::herm(precomp_[x] * tau * precomp_[x].adjoint());
        CMat g = linalg::matrix_function_on_support(
            xm, [](double t) { return t * std::log(t); }, support_tol_);
        out[x] = (states_full_[x] * g).trace().real();
        break;
      }
    }
  }
  return out;
}

double RadiusObjective::value(const CMat& tau) const {
  return logsumexp(per_state(tau), temperature_);
}

CMat RadiusObjective::gradient(const CMat& tau) const {
  std::vector<double> d = per_state(tau);
  double m = -kInf;
  for (double x : d) m = std::max(m, x);
  std::vector<double> w(d.size());
  double z = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    w[i] = std::exp(temperature_ * (d[i] - m));
    z += w[i];
  }
  const int s = support_dim();
  CMat grad = CMat::Zero(s, s);
  for (size_t x = 0; x < states_.size(); ++x) {
    const double wx = w[x] / z;
    if (wx < 1e-300) continue;
    switch (spec_.family) {
      case DivergenceSpec::Family::umegaki: {
        grad += wx * (support_log(tau, support_tol_) + identity(s) - precomp_[x]);
        break;
      }
      case DivergenceSpec::Family::sandwiched: {
        CMat g = linalg::herm(precomp_[x] * tau * precomp_[x].adjoint());
        linalg::RVec lam = linalg::eig(g).eigenvalues;
        double acc = 0;
        for (int i = 0; i < lam.size(); ++i) {
          acc += std::pow(std::abs(lam[i]), spec_.alpha);
        }
        CMat gpow = psd_power(g, spec_.alpha - 1.0, support_tol_);
        grad += wx * (spec_.alpha / ((spec_.alpha - 1.0) * acc)) *
                linalg::herm(precomp_[x].adjoint() * gpow * precomp_[x]);
        break;
      }
      case DivergenceSpec::Family::geometric: {
        const double a = spec_.alpha;
        CMat xm = linalg::herm(precomp_[x] * tau * precomp_[x].adjoint());
        double v = (states_full_[x] * psd_power(xm, a, support_tol_)).trace().real();
        CMat fr = linalg::frechet_spectral(
            xm, [a](double t) { return std::pow(t, a); },
            [a](double t) { return a * std::pow(t, a - 1.0); }, states_full_[x],
            support_tol_);
        grad += wx / ((a - 1.0) * v) *
                linalg::herm(precomp_[x].adjoint() * fr * precomp_[x]);
        break;
      }
      case DivergenceSpec::Family::belavkin_staszewski: {
        CMat xm = linalg::herm(precomp_[x] * tau * precomp_[x].adjoint());
        CMat fr = linalg::frechet_spectral(
            xm, [](double t) { return t * std::log(t); },
            [](double t) { return std::log(t) + 1.0; }, states_full_[x], support_tol_);
        grad += wx * linalg::herm(precomp_[x].adjoint() * fr * precomp_[x]);
        break;
      }
    }
  }
  return grad;
}

namespace {

RadiusResult radius_mirror_descent(const std::vector<DensityMatrix>& states,
                                   const DivergenceSpec& spec,
                                   const RadiusOptions& opt) {
  RadiusResult res;
  const int d = states[0].dim();

  std::unique_ptr<RadiusObjective> objective;
  try {
    objective = std::make_unique<RadiusObjective>(states, spec, opt.temperatures.front());
  } catch (const SupportEmptyError&) {
    res.value = kInf;
    res.optimizer_tau = identity(d) / double(d);
    res.per_state.assign(states.size(), kInf);
    return res;
  }
  const CMat v = objective->isometry();
  const int s = static_cast<int>(v.cols());

  // start from the compressed ensemble average
  CMat tau0 = CMat::Zero(s, s);
  for (const auto& st : states) tau0 += v.adjoint() * st.entries() * v;
  tau0 = linalg::herm(tau0 / tau0.trace().real());
  CMat h = support_log(CMat(tau0 + 1e-12 * identity(s)));

  auto tau_of = [&](const CMat& hh) {
    auto spec_h = linalg::eig(hh);
    linalg::RVec e = (spec_h.eigenvalues.array() - spec_h.eigenvalues.maxCoeff()).exp();
    e /= e.sum();
    return CMat(spec_h.eigenvectors * e.cast<linalg::Complex>().asDiagonal() *
                spec_h.eigenvectors.adjoint());
  };

  int iters = 0;
  CMat tau = tau_of(h);
  for (double temp : opt.temperatures) {
    RadiusObjective obj(states, spec, temp);
    double f = obj.value(tau);
    double step = 1.0;
    while (iters < opt.max_iters) {
      CMat g = obj.gradient(tau);
      CMat gproj = g - (g.trace().real() / s) * identity(s);
      if (gproj.norm() <= opt.grad_tol) break;
      ++iters;
      CMat htrial = h - step * gproj;
      CMat tautrial = tau_of(htrial);
      double ftrial = obj.value(tautrial);
      if (ftrial < f) {
        h = htrial;
        tau = tautrial;
        f = ftrial;
        step = std::min(step * 1.3, 100.0);
      } else {
        step *= 0.5;
        if (step < 1e-12) break;
      }
    }
  }

  RadiusObjective certifier(states, spec, opt.temperatures.back());
  res.per_state = certifier.per_state(tau);
  res.value = -kInf;
  for (double x : res.per_state) res.value = std::max(res.value, x);
  res.optimizer_tau = v * tau * v.adjoint();
  res.iterations = iters;
  return res;
}

RadiusResult radius_geometric_cascade(const std::vector<DensityMatrix>& states,
                                      int level, double alpha,
                                      const RadiusOptions& opt) {
  RadiusResult res;
  const int d = states[0].dim();
  const int k = static_cast<int>(states.size());

  // Compress to the common support when every state has exactly that
  // support; keeps the blocks strictly feasible.
  CMat viso = common_support_isometry(states, linalg::kSupportTol);
  if (viso.cols() == 0) {
    res.value = kInf;
    res.optimizer_tau = identity(d) / double(d);
    res.per_state.assign(states.size(), kInf);
    return res;
  }
  const int s = static_cast<int>(viso.cols());
  bool compress = s < d;
  if (compress) {
    CMat common = viso * viso.adjoint();
    for (const auto& st : states) {
      if ((support_projector(st.entries()) - common).cwiseAbs().maxCoeff() > 1e-7) {
        compress = false;  // supports differ; solve in the full space
        break;
      }
    }
  }
  const CMat v = compress ? viso : CMat(identity(d));
  const int ds = compress ? s : d;

  std::vector<CMat> rho(k);
  for (int x = 0; x < k; ++x) {
    rho[x] = linalg::herm(v.adjoint() * states[x].entries() * v);
  }

  SdpProblem p;
  VarId tau = p.add_psd_var("tau", ds);
  VarId mu = p.add_scalar_var("mu");
  ScalarExpr tr1;
  tr1.constant = -1.0;
  tr1.add_term(tau, identity(ds));
  p.add_scalar_eq(tr1, "tr tau = 1");
  for (int x = 0; x < k; ++x) {
    std::vector<VarId> n(level);
    for (int i = 0; i < level; ++i) {
      n[i] = p.add_herm_var("N" + std::to_string(i + 1) + "_" + std::to_string(x), ds);
    }
    VarId mx = p.add_herm_var("M_" + std::to_string(x), ds);
    MatExpr top({ds, ds});
    top.add_term(mx, 0, 0).add_term(tau, 0, 1);
    if (level == 0) {
      top.add_constant(1, 1, rho[x]);
    } else {
      top.add_term(n[level - 1], 1, 1);
    }
    p.add_psd_constraint(std::move(top), "top_" + std::to_string(x));
    for (int i = 1; i <= level; ++i) {
      MatExpr mid({ds, ds});
      mid.add_term(tau, 0, 0).add_term(n[i - 1], 0, 1);
      if (i == 1) {
        mid.add_constant(1, 1, rho[x]);
      } else {
        mid.add_term(n[i - 2], 1, 1);
      }
      p.add_psd_constraint(std::move(mid), "chain" + std::to_string(i) + "_" +
                                                std::to_string(x));
    }
    ScalarExpr cap;
    cap.add_term(mu, 1.0);
    cap.add_term(mx, CMat(-identity(ds)));
    p.add_scalar_ineq(cap, "mu>=trM_" + std::to_string(x));
  }
  ScalarExpr obj;
  obj.add_term(mu, 1.0);
  p.set_objective(Sense::minimize, obj);

  auto sol = sdp::solve(p, opt.sdp);
  if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::max_iters) {
    throw SolverError("geometric radius solve failed: " + sol.message);
  }
  res.solver_value = std::log(sol.primal_value) / (alpha - 1.0);
  res.iterations = sol.iterations;

  // Certify at the solved center. Any optimizer is supported inside the
  // common support, so projecting onto it only strips solver noise and keeps
  // the closed-form evaluations finite.
  CMat xstar = sol.blocks.at("tau");
  CMat tau_s = compress ? xstar : CMat(viso.adjoint() * xstar * viso);
  DensityMatrix tau_full =
      clamp_to_state(CMat(viso * linalg::herm(tau_s) * viso.adjoint()));
  res.per_state.resize(k);
  for (int x = 0; x < k; ++x) {
    res.per_state[x] = geometric_renyi(tau_full, states[x], alpha);
  }
  res.value = -kInf;
  for (double x : res.per_state) res.value = std::max(res.value, x);
  res.optimizer_tau = tau_full.entries();
  return res;
}

}  // namespace

RadiusResult radius(const std::vector<DensityMatrix>& states,
                    const DivergenceSpec& spec, const RadiusOptions& opt) {
  if (states.empty()) throw DomainError("radius needs at least one state");
  for (const auto& s : states) {
    if (s.dim() != states[0].dim()) {
      throw DimensionMismatchError("radius states must share a dimension");
    }
  }
  int level = 0;
  if (!opt.force_iterative && spec.family == DivergenceSpec::Family::geometric &&
      dyadic_level_for(spec.alpha, level)) {
    return radius_geometric_cascade(states, level, spec.alpha, opt);
  }
  return radius_mirror_descent(states, spec, opt);
}

}  // namespace qdisc::divergence
