#include "qdisc/channelgame.hpp"

#include <cmath>

#include "qdisc/divergences.hpp"

namespace qdisc::channel {

using linalg::Complex;
using linalg::identity;
using linalg::psd_power;
using linalg::Subsystem;
using sdp::MatExpr;
using sdp::ScalarExpr;
using sdp::SdpProblem;
using sdp::Sense;
using sdp::SolveStatus;
using sdp::VarId;

namespace {

CMat choi_from_kraus(const std::vector<CMat>& kraus, int din, int dout) {
  CMat j = CMat::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    Eigen::VectorXcd v(din * dout);
    for (int i = 0; i < din; ++i) {
      for (int a = 0; a < dout; ++a) v[i * dout + a] = k(a, i);
    }
    j += v * v.adjoint();
  }
  return j;
}

}  // namespace

Channel::Channel(std::vector<CMat> kraus, double tp_tol) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw DimensionMismatchError("channel needs Kraus operators");
  dim_out_ = static_cast<int>(kraus_.front().rows());
  dim_in_ = static_cast<int>(kraus_.front().cols());
  CMat acc = CMat::Zero(dim_in_, dim_in_);
  for (const auto& k : kraus_) {
    if (k.rows() != dim_out_ || k.cols() != dim_in_) {
      throw DimensionMismatchError("Kraus operators must share a shape");
    }
    acc += k.adjoint() * k;
  }
  if ((acc - linalg::identity(dim_in_)).cwiseAbs().maxCoeff() > tp_tol) {
    throw DomainError("channel is not trace preserving");
  }
  choi_ = choi_from_kraus(kraus_, dim_in_, dim_out_);
}

Channel Channel::from_choi(const CMat& choi_unnormalized, int dim_in, double tol) {
  const int total = static_cast<int>(choi_unnormalized.rows());
  if (dim_in < 1 || total % dim_in != 0) {
    throw DimensionMismatchError("Choi dimension must be dim_in * dim_out");
  }
  const int dim_out = total / dim_in;
  linalg::HermitianOperator j(choi_unnormalized, 1e-8);
  CMat ta = linalg::partial_trace(j.entries(), dim_in, dim_out, Subsystem::A);
  if ((ta - linalg::identity(dim_in)).cwiseAbs().maxCoeff() > tol) {
    throw DomainError("Choi operator must have identity partial trace");
  }
  auto spec = linalg::eig(j);
  if (spec.eigenvalues.minCoeff() < -tol * std::max(1.0, spec.eigenvalues.maxCoeff())) {
    throw DomainError("Choi operator must be positive semidefinite");
  }
  std::vector<CMat> kraus;
  for (int idx = 0; idx < total; ++idx) {
    double lam = std::max(spec.eigenvalues[idx], 0.0);
    if (lam <= tol * std::max(1.0, spec.eigenvalues.maxCoeff())) continue;
    CMat k(dim_out, dim_in);
    for (int i = 0; i < dim_in; ++i) {
      for (int a = 0; a < dim_out; ++a) {
        k(a, i) = std::sqrt(lam) * spec.eigenvectors(i * dim_out + a, idx);
      }
    }
    kraus.push_back(std::move(k));
  }
  return Channel(std::move(kraus), 10 * tol * dim_in);
}

CMat Channel::apply(const CMat& rho) const {
  if (rho.rows() != dim_in_ || rho.cols() != dim_in_) {
    throw DimensionMismatchError("channel input dimension");
  }
  CMat out = CMat::Zero(dim_out_, dim_out_);
  for (const auto& k : kraus_) out += k * rho * k.adjoint();
  return out;
}

CMat Channel::apply_with_reference(const CMat& rho_ra, int dim_r) const {
  if (rho_ra.rows() != static_cast<Eigen::Index>(dim_r) * dim_in_) {
    throw DimensionMismatchError("reference input dimension");
  }
  CMat out = CMat::Zero(dim_r * dim_out_, dim_r * dim_out_);
  CMat idr = linalg::identity(dim_r);
  for (const auto& k : kraus_) {
    CMat kk = linalg::tensor(idr, k);
    out += kk * rho_ra * kk.adjoint();
  }
  return out;
}

CMat Channel::choi(bool normalized) const {
  return normalized ? CMat(choi_ / double(dim_in_)) : choi_;
}

Channel Channel::identity(int d) {
  return Channel({linalg::identity(d)});
}

Channel Channel::depolarizing(double q) {
  if (q < 0.0 || q > 1.0) throw DomainError("depolarizing strength in [0,1]");
  CMat x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  z << 1, 0, 0, -1;
  std::vector<CMat> kraus;
  kraus.push_back(std::sqrt(1.0 - 0.75 * q) * linalg::identity(2));
  kraus.push_back(std::sqrt(0.25 * q) * x);
  kraus.push_back(std::sqrt(0.25 * q) * y);
  kraus.push_back(std::sqrt(0.25 * q) * z);
  return Channel(std::move(kraus));
}

Channel Channel::bit_flip(double p) {
  if (p < 0.0 || p > 1.0) throw DomainError("bit-flip strength in [0,1]");
  CMat x(2, 2);
  x << 0, 1, 1, 0;
  std::vector<CMat> kraus;
  kraus.push_back(std::sqrt(1.0 - p) * linalg::identity(2));
  kraus.push_back(std::sqrt(p) * x);
  return Channel(std::move(kraus));
}

Channel Channel::random(int dim_in, int dim_out, int kraus_rank, linalg::Rng& rng) {
  CMat g = linalg::random_ginibre(dim_out * kraus_rank, dim_in, rng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(dim_out * kraus_rank, dim_in);
  std::vector<CMat> kraus;
  for (int e = 0; e < kraus_rank; ++e) kraus.push_back(q.middleRows(e * dim_out, dim_out));
  return Channel(std::move(kraus));
}

namespace {

double choi_geometric_renyi(const CMat& j_first, const CMat& j_second, int da, int db,
                            double alpha, double support_tol) {
  if (!linalg::support_contains(j_second, j_first, support_tol)) {
    return divergence::kInf;
  }
  CMat mi = psd_power(j_second, -0.5, support_tol);
  CMat mh = psd_power(j_second, 0.5, support_tol);
  CMat x = linalg::herm(mi * j_first * mi);
  CMat g = linalg::herm(mh * psd_power(x, alpha, support_tol) * mh);
  CMat ta = linalg::partial_trace(g, da, db, Subsystem::A);
  return std::log(linalg::operator_norm(ta)) / (alpha - 1.0);
}

}  // namespace

double geometric_renyi(const Channel& n, const Channel& m, double alpha,
                       double support_tol) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw DomainError("channel divergence needs alpha in (1,2]");
  }
  if (n.dim_in() != m.dim_in() || n.dim_out() != m.dim_out()) {
    throw DimensionMismatchError("channel dims differ");
  }
  return choi_geometric_renyi(n.choi_unnormalized(), m.choi_unnormalized(),
                              n.dim_in(), n.dim_out(), alpha, support_tol);
}

ChoiRadiusResult choi_divergence_radius(const std::vector<Channel>& channels,
                                        int level, const sdp::SolveOptions& opt,
                                        const std::optional<CMat>& pinned_center) {
  if (channels.empty()) throw DomainError("need at least one channel");
  if (level < 0) throw DomainError("level must be >= 0");
  const int da = channels.front().dim_in();
  const int db = channels.front().dim_out();
  const int dj = da * db;
  const int k = static_cast<int>(channels.size());
  for (const auto& ch : channels) {
    if (ch.dim_in() != da || ch.dim_out() != db) {
      throw DimensionMismatchError("channels must share dims");
    }
  }
  const double alpha = 1.0 + std::pow(2.0, -level);

  SdpProblem p;
  std::optional<VarId> jt;
  CMat pinned;
  if (pinned_center) {
    pinned = *pinned_center;
    if (pinned.rows() != dj) throw DimensionMismatchError("pinned center dim");
  } else {
    jt = p.add_psd_var("J_T", dj);
    MatExpr tp({da});
    tp.add_partial_trace_term(*jt, 0, 0, da, db, Subsystem::A, 1.0);
    tp.add_constant(0, 0, CMat(-identity(da)));
    p.add_eq_constraint(std::move(tp), "tr_B J_T = I");
  }
  VarId lam = p.add_scalar_var("lambda");

  auto add_center = [&](MatExpr& e, int bi, int bj) {
    if (jt) {
      e.add_term(*jt, bi, bj);
    } else {
      e.add_constant(bi, bj, pinned);
    }
  };

  for (int x = 0; x < k; ++x) {
    const CMat& jn = channels[x].choi_unnormalized();
    VarId mx = p.add_herm_var("M_" + std::to_string(x), dj);
    std::vector<VarId> nvar(level);
    for (int i = 0; i < level; ++i) {
      nvar[i] =
          p.add_herm_var("N" + std::to_string(i + 2) + "_" + std::to_string(x), dj);
    }
    MatExpr top({dj, dj});
    top.add_term(mx, 0, 0);
    add_center(top, 0, 1);
    if (level == 0) {
      top.add_constant(1, 1, jn);
    } else {
      top.add_term(nvar[level - 1], 1, 1);
    }
    p.add_psd_constraint(std::move(top), "top_" + std::to_string(x));
    for (int i = 1; i <= level; ++i) {
      MatExpr mid({dj, dj});
      add_center(mid, 0, 0);
      mid.add_term(nvar[i - 1], 0, 1);
      if (i == 1) {
        mid.add_constant(1, 1, jn);
      } else {
        mid.add_term(nvar[i - 2], 1, 1);
      }
      p.add_psd_constraint(std::move(mid),
                           "chain" + std::to_string(i) + "_" + std::to_string(x));
    }
    MatExpr cap({da});
    cap.add_scalar_term(lam, 0, 0, identity(da));
    cap.add_partial_trace_term(mx, 0, 0, da, db, Subsystem::A, -1.0);
    p.add_psd_constraint(std::move(cap), "cap_" + std::to_string(x));
  }
  ScalarExpr obj;
  obj.add_term(lam, 1.0);
  p.set_objective(Sense::minimize, obj);

  auto sol = sdp::solve(p, opt);
  if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::max_iters) {
    throw SolverError("channel-radius solve failed: " + sol.message);
  }

  ChoiRadiusResult res;
  res.solver_gap = sol.gap;
  res.iterations = sol.iterations;
  if (sol.status == SolveStatus::optimal && sol.primal_value > 0.0) {
    res.value = std::log(sol.primal_value) / (alpha - 1.0);
    res.choi_center = jt ? sol.blocks.at("J_T") : pinned;
    return res;
  }

  // The blocks lose strict feasibility when some Choi operator is rank
  // deficient and the path-following iterates stall. Fall back to certified
  // feasible centers: the evaluation at any trace-preserving center upper
  // bounds the optimum, and when the feasible set collapses onto a forced
  // center this recovers the exact value.
  std::vector<CMat> candidates;
  if (pinned_center) {
    candidates.push_back(pinned);
  } else {
    for (const auto& ch : channels) candidates.push_back(ch.choi_unnormalized());
    if (sol.blocks.count("J_T")) {
      // repair the stalled center: clamp to PSD, restore the partial trace
      auto spec = linalg::eig(linalg::herm(sol.blocks.at("J_T")));
      linalg::RVec lam = spec.eigenvalues.cwiseMax(0.0);
      CMat r = spec.eigenvectors * lam.cast<linalg::Complex>().asDiagonal() *
               spec.eigenvectors.adjoint();
      CMat defect = linalg::identity(da) - linalg::partial_trace(r, da, db, Subsystem::A);
      r += linalg::tensor(defect, CMat(linalg::identity(db) / double(db)));
      Eigen::SelfAdjointEigenSolver<CMat> check(r, Eigen::EigenvaluesOnly);
      if (check.eigenvalues().minCoeff() >= -1e-10) candidates.push_back(r);
    }
  }
  double best = divergence::kInf;
  CMat best_center;
  for (const auto& cand : candidates) {
    double worst = 0;
    for (const auto& ch : channels) {
      worst = std::max(worst, choi_geometric_renyi(cand, ch.choi_unnormalized(), da,
                                                   db, alpha, linalg::kSupportTol));
      if (std::isinf(worst)) break;
    }
    if (worst < best) {
      best = worst;
      best_center = cand;
    }
  }
  if (std::isinf(best)) {
    throw SolverError("channel-radius solve stalled and no feasible center certifies a value");
  }
  res.value = best;
  res.choi_center = best_center;
  res.via_feasible_center = true;
  return res;
}

double adaptive_exponent_bound(const std::vector<Channel>& channels,
                               const std::vector<double>& priors, double eta, int n,
                               int level, const sdp::SolveOptions& opt) {
  if (n < 1) throw DomainError("round count must be >= 1");
  if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("eta must lie in [0,1)");
  if (priors.size() != channels.size()) {
    throw DimensionMismatchError("priors must match channels");
  }
  double total = 0, pmin = 1.0;
  for (double q : priors) {
    if (q <= 0) throw DomainError("priors must be strictly positive");
    total += q;
    pmin = std::min(pmin, q);
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("priors must sum to one");

  const double alpha = 1.0 + std::pow(2.0, -level);
  const double logterm =
      std::log(pmin) + std::log(double(channels.size()) - 1.0 + eta);
  if (std::isinf(logterm)) return divergence::kInf;
  double radius = choi_divergence_radius(channels, level, opt).value;
  return radius - alpha / (double(n) * (alpha - 1.0)) * logterm;
}

std::vector<CMat> ProtocolTrace::final_states() const {
  std::vector<CMat> out;
  for (const auto& rounds : outputs) out.push_back(rounds.back());
  return out;
}

ProtocolTrace simulate_protocol(const AdaptiveProtocol& protocol,
                                const std::vector<Channel>& channels) {
  if (channels.empty()) throw DomainError("need at least one channel");
  if (protocol.rounds < 1) throw DomainError("round count must be >= 1");
  if (static_cast<int>(protocol.adapters.size()) != protocol.rounds - 1) {
    throw DimensionMismatchError("protocol needs rounds-1 processing maps");
  }
  const int da = channels.front().dim_in();
  const int db = channels.front().dim_out();
  const int dr = protocol.dim_r;
  if (protocol.initial_state.dim() != dr * da) {
    throw DimensionMismatchError("initial state must live on R (x) A");
  }
  for (const auto& ad : protocol.adapters) {
    if (ad.dim_in() != dr * db || ad.dim_out() != dr * da) {
      throw DimensionMismatchError("processing maps must take R (x) B to R (x) A");
    }
  }

  ProtocolTrace trace;
  trace.dim_r = dr;
  for (const auto& ch : channels) {
    if (ch.dim_in() != da || ch.dim_out() != db) {
      throw DimensionMismatchError("channels must share dims");
    }
    std::vector<CMat> ins, outs;
    CMat state = protocol.initial_state.entries();
    for (int round = 0; round < protocol.rounds; ++round) {
      ins.push_back(state);
      CMat post = ch.apply_with_reference(state, dr);
      outs.push_back(post);
      if (round + 1 < protocol.rounds) state = protocol.adapters[round].apply(post);
    }
    trace.inputs.push_back(std::move(ins));
    trace.outputs.push_back(std::move(outs));
  }
  return trace;
}

double protocol_success(const ProtocolTrace& trace, const std::vector<double>& priors,
                        double eta, const sdp::SolveOptions& opt) {
  std::vector<DensityMatrix> finals;
  for (const auto& f : trace.final_states()) finals.emplace_back(f, 1e-8, 1e-8, 1e-8);
  game::GameConfig cfg;
  cfg.eta = eta;
  return game::solve_primal(game::Ensemble(std::move(finals), priors), cfg, opt)
      .success_probability;
}

double povm_success(const ProtocolTrace& trace, const std::vector<CMat>& povm,
                    const std::vector<double>& priors, double eta) {
  auto finals = trace.final_states();
  if (povm.size() != priors.size() + 1) {
    throw DimensionMismatchError("need one POVM element per hypothesis plus abstention");
  }
  CMat total = CMat::Zero(finals.front().rows(), finals.front().cols());
  for (const auto& m : povm) {
    if (linalg::eig(linalg::herm(m)).eigenvalues.minCoeff() < -1e-8) {
      throw DomainError("POVM elements must be positive semidefinite");
    }
    total += m;
  }
  if ((total - identity(static_cast<int>(total.rows()))).cwiseAbs().maxCoeff() > 1e-8) {
    throw DomainError("POVM must sum to the identity");
  }
  double floor = linalg::eig(linalg::herm(povm[0])).eigenvalues.minCoeff();
  if (floor < eta - 1e-8) {
    throw DomainError("abstention element must dominate eta I");
  }
  double val = 0;
  for (size_t x = 0; x < priors.size(); ++x) {
    val += priors[x] * (povm[x + 1] * finals[x]).trace().real();
  }
  return val;
}

LimitSequence asymptotic_channel_bound(const std::vector<Channel>& channels, int l_max,
                                       const sdp::SolveOptions& opt) {
  if (l_max < 1 || l_max > 3) throw DomainError("l_max must lie in 1..3");
  LimitSequence seq;
  for (int l = 1; l <= l_max; ++l) {
    double alpha = 1.0 + std::pow(2.0, -l);
    seq.values.push_back({alpha, choi_divergence_radius(channels, l, opt).value});
  }
  seq.best = seq.values.back().value;
  return seq;
}

AdaptiveProtocol random_protocol(int rounds, int dim_r, int dim_a, int dim_b,
                                 linalg::Rng& rng) {
  AdaptiveProtocol p;
  p.rounds = rounds;
  p.dim_r = dim_r;
  p.initial_state = linalg::random_pure(dim_r * dim_a, rng);
  for (int i = 0; i + 1 < rounds; ++i) {
    p.adapters.push_back(Channel::random(dim_r * dim_b, dim_r * dim_a, 2, rng));
  }
  return p;
}

}  // namespace qdisc::channel
