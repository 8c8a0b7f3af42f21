#include "qdisc/stategame.hpp"

#include <cmath>

namespace qdisc::game {

using divergence::DivergenceSpec;
using divergence::kInf;
using linalg::identity;
using sdp::MatExpr;
using sdp::ScalarExpr;
using sdp::SdpProblem;
using sdp::Sense;
using sdp::SolveStatus;
using sdp::VarId;

Ensemble::Ensemble(std::vector<DensityMatrix> s, std::vector<double> p)
    : states(std::move(s)), priors(std::move(p)) {
  if (states.empty() || states.size() != priors.size()) {
    throw DimensionMismatchError("ensemble needs matching states and priors");
  }
  double total = 0;
  for (double x : priors) {
    if (x <= 0) throw DomainError("priors must be strictly positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw DomainError("priors must sum to one");
  }
  for (const auto& st : states) {
    if (st.dim() != states.front().dim()) {
      throw DimensionMismatchError("ensemble states must share a dimension");
    }
  }
}

Ensemble Ensemble::uniform(std::vector<DensityMatrix> s) {
  std::vector<double> p(s.size(), 1.0 / static_cast<double>(s.size()));
  return Ensemble(std::move(s), std::move(p));
}

double Ensemble::p_min() const {
  double m = 1.0;
  for (double x : priors) m = std::min(m, x);
  return m;
}

Ensemble Ensemble::tensor_power(int n) const {
  if (n < 1 || n > 3) throw DomainError("tensor_power supports n in 1..3");
  double dn = std::pow(double(dim()), n);
  if (dn > 64) throw DomainError("tensor_power limited to dim^n <= 64");
  std::vector<DensityMatrix> out;
  for (const auto& st : states) {
    CMat acc = st.entries();
    for (int i = 1; i < n; ++i) acc = linalg::tensor(acc, st.entries());
    out.emplace_back(acc);
  }
  return Ensemble(std::move(out), priors);
}

CMat Ensemble::cq_state() const {
  const int d = dim();
  CMat out = CMat::Zero(k() * d, k() * d);
  for (int x = 0; x < k(); ++x) {
    out.block(x * d, x * d, d, d) = priors[x] * states[x].entries();
  }
  return out;
}

void GameConfig::validate() const {
  if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("eta must lie in [0,1)");
  if (n_copies < 1) throw DomainError("n_copies must be >= 1");
}

namespace {

// n_copies > 1 plays the same game on the tensor-powered ensemble.
template <class Fn>
auto with_copies(const Ensemble& e, const GameConfig& cfg, Fn&& fn) {
  if (cfg.n_copies > 1) {
    GameConfig single = cfg;
    single.n_copies = 1;
    return fn(e.tensor_power(cfg.n_copies), single);
  }
  return fn(e, cfg);
}

}  // namespace

GameResult solve_primal(const Ensemble& e, const GameConfig& cfg,
                        const sdp::SolveOptions& opt) {
  cfg.validate();
  if (cfg.n_copies > 1) {
    return with_copies(e, cfg, [&](const Ensemble& en, const GameConfig& c) {
      return solve_primal(en, c, opt);
    });
  }
  const int d = e.dim(), k = e.k();

  SdpProblem p;
  std::vector<VarId> q(k);
  MatExpr cap({d});
  cap.add_constant(0, 0, CMat((1.0 - cfg.eta) * identity(d)));
  ScalarExpr obj;
  for (int x = 0; x < k; ++x) {
    q[x] = p.add_psd_var("Q" + std::to_string(x), d);
    cap.add_term(q[x], 0, 0, -1.0);
    obj.add_term(q[x], CMat(e.priors[x] * e.states[x].entries()));
  }
  p.add_psd_constraint(std::move(cap), "sum Q <= (1-eta) I");
  p.set_objective(Sense::maximize, obj);

  auto sol = sdp::solve(p, opt);
  if (sol.status != SolveStatus::optimal) {
    throw SolverError("discrimination game primal failed: " + sol.message);
  }
  GameResult res;
  res.success_probability = sol.primal_value;
  for (int x = 0; x < k; ++x) {
    res.optimal_povm.push_back(sol.blocks.at("Q" + std::to_string(x)));
  }
  res.gap = sol.gap;
  res.kkt_residual = sol.kkt_residual;
  res.iterations = sol.iterations;
  return res;
}

GameResult solve_dual(const Ensemble& e, const GameConfig& cfg,
                      const sdp::SolveOptions& opt) {
  cfg.validate();
  if (cfg.n_copies > 1) {
    return with_copies(e, cfg, [&](const Ensemble& en, const GameConfig& c) {
      return solve_dual(en, c, opt);
    });
  }
  const int d = e.dim(), k = e.k();

  SdpProblem p;
  VarId m = p.add_herm_var("M", d);
  for (int x = 0; x < k; ++x) {
    MatExpr dom({d});
    dom.add_term(m, 0, 0);
    dom.add_constant(0, 0, CMat(-e.priors[x] * e.states[x].entries()));
    p.add_psd_constraint(std::move(dom), "M >= p rho " + std::to_string(x));
  }
  ScalarExpr obj;
  obj.add_term(m, CMat((1.0 - cfg.eta) * identity(d)));
  p.set_objective(Sense::minimize, obj);

  auto sol = sdp::solve(p, opt);
  if (sol.status != SolveStatus::optimal) {
    throw SolverError("discrimination game dual failed: " + sol.message);
  }
  GameResult res;
  res.success_probability = sol.primal_value;
  res.dual_certificate = sol.blocks.at("M");
  res.gap = sol.gap;
  res.kkt_residual = sol.kkt_residual;
  res.iterations = sol.iterations;
  return res;
}

CenterCertificate hypothesis_testing_certificate(const Ensemble& e,
                                                 const GameConfig& cfg,
                                                 const sdp::SolveOptions& opt) {
  if (cfg.n_copies > 1) {
    return with_copies(e, cfg, [&](const Ensemble& en, const GameConfig& c) {
      return hypothesis_testing_certificate(en, c, opt);
    });
  }
  auto dual = solve_dual(e, cfg, opt);
  const int k = e.k();
  double tr = dual.dual_certificate.trace().real();
  CMat tau = dual.dual_certificate / tr;

  CMat pi = identity(k) / double(k);
  TraceOneHermitian first(linalg::tensor(pi, tau));
  DensityMatrix cq(e.cq_state());
  const double eps = (1.0 - cfg.eta) / k;
  double gamma = divergence::gamma_eps(first, cq, eps, opt);
  return {TraceOneHermitian(tau), gamma, dual.success_probability};
}

double radius_exponent_bound(const Ensemble& e, const GameConfig& cfg,
                             const divergence::RadiusOptions& opt) {
  cfg.validate();
  if (!(cfg.alpha > 1.0)) throw DomainError("bound needs alpha > 1");
  const double logterm = std::log(e.p_min()) + std::log(e.k() - 1.0 + cfg.eta);
  if (std::isinf(logterm)) return kInf;  // single state at eta = 0
  auto rad = divergence::radius(e.states, DivergenceSpec::sandwiched(cfg.alpha), opt);
  if (std::isinf(rad.value)) return kInf;
  return rad.value - cfg.alpha / (cfg.alpha - 1.0) * logterm;
}

AsymptoticBound asymptotic_exponent_bound(const Ensemble& e,
                                          const std::vector<double>& alphas,
                                          const divergence::RadiusOptions& opt) {
  AsymptoticBound out;
  auto rad = divergence::radius(e.states, DivergenceSpec::umegaki(), opt);
  out.umegaki_radius = rad.value;
  for (double a : alphas) {
    out.sandwiched_radii[a] =
        divergence::radius(e.states, DivergenceSpec::sandwiched(a), opt).value;
  }
  return out;
}

QreResult qre(const std::vector<CMat>& ops, const sdp::SolveOptions& opt) {
  if (ops.empty()) throw DomainError("qre needs at least one operator");
  const int d = static_cast<int>(ops.front().rows());
  const int k = static_cast<int>(ops.size());
  for (const auto& q : ops) {
    linalg::HermitianOperator h(q);
    if (h.dim() != d) throw DimensionMismatchError("qre operators must share a dim");
    if (linalg::eig(h).eigenvalues.minCoeff() < -1e-8 * (1.0 + linalg::operator_norm(h))) {
      throw DomainError("qre operators must be positive semidefinite");
    }
  }

  QreResult res;
  {
    SdpProblem p;
    VarId pm = p.add_herm_var("P", d);
    for (int x = 0; x < k; ++x) {
      MatExpr dom({d});
      dom.add_term(pm, 0, 0).add_constant(0, 0, CMat(-ops[x]));
      p.add_psd_constraint(std::move(dom), "P >= Q" + std::to_string(x));
    }
    ScalarExpr obj;
    obj.add_term(pm, identity(d));
    p.set_objective(Sense::minimize, obj);
    auto sol = sdp::solve(p, opt);
    if (sol.status != SolveStatus::optimal) {
      throw SolverError("dominating-trace primal failed: " + sol.message);
    }
    res.value = sol.primal_value;
    res.dominating_operator = sol.blocks.at("P");
  }
  {
    SdpProblem p;
    std::vector<VarId> y(k);
    MatExpr cap({d});
    cap.add_constant(0, 0, identity(d));
    ScalarExpr obj;
    for (int x = 0; x < k; ++x) {
      y[x] = p.add_psd_var("Y" + std::to_string(x), d);
      cap.add_term(y[x], 0, 0, -1.0);
      obj.add_term(y[x], ops[x]);
    }
    p.add_psd_constraint(std::move(cap), "sum Y <= I");
    p.set_objective(Sense::maximize, obj);
    auto sol = sdp::solve(p, opt);
    if (sol.status != SolveStatus::optimal) {
      throw SolverError("dominating-trace dual failed: " + sol.message);
    }
    res.primal_dual_gap = std::abs(sol.primal_value - res.value);
    for (int x = 0; x < k; ++x) {
      res.dual_weights.push_back(sol.blocks.at("Y" + std::to_string(x)));
    }
  }
  return res;
}

double abstention_threshold(const std::vector<CMat>& ops,
                            const sdp::SolveOptions& opt) {
  auto res = qre(ops, opt);
  if (res.value <= 1e-12) {
    throw DomainError("abstention threshold undefined for an all-zero family");
  }
  CMat total = CMat::Zero(ops.front().rows(), ops.front().cols());
  for (const auto& y : res.dual_weights) total += y;
  double eta = 1.0 - linalg::operator_norm(total);
  return std::min(std::max(eta, 0.0), 1.0 - 1e-12);
}

double classical_success(const std::vector<double>& priors, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0,1]");
  double total = 0, pmax = 0;
  for (double p : priors) {
    if (p <= 0) throw DomainError("priors must be strictly positive");
    total += p;
    pmax = std::max(pmax, p);
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("priors must sum to one");
  return (1.0 - eta) * pmax;
}

AdvantageResult advantage_ratio(const std::vector<DensityMatrix>& states, double eta,
                                const sdp::SolveOptions& opt) {
  AdvantageResult out;
  std::vector<CMat> ops;
  for (const auto& s : states) ops.push_back(s.entries());
  auto q = qre(ops, opt);
  out.qre_value = q.value;
  out.eta_star = abstention_threshold(ops, opt);
  out.eta_above_threshold = eta >= out.eta_star;

  auto ensemble = Ensemble::uniform(states);
  GameConfig cfg;
  cfg.eta = eta;
  double quantum = solve_primal(ensemble, cfg, opt).success_probability;
  double classical = classical_success(ensemble.priors, eta);
  out.ratio_at_uniform = quantum / classical;
  return out;
}

}  // namespace qdisc::game
