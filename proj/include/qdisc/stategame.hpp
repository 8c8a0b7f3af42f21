#pragma once

#include <map>
#include <optional>
#include <vector>

#include "qdisc/divergences.hpp"
#include "qdisc/linalg.hpp"
#include "qdisc/sdp.hpp"

namespace qdisc::game {

using linalg::CMat;
using linalg::DensityMatrix;
using linalg::TraceOneHermitian;

/// States with prior probabilities.
struct Ensemble {
  std::vector<DensityMatrix> states;
  std::vector<double> priors;

  Ensemble(std::vector<DensityMatrix> s, std::vector<double> p);
  static Ensemble uniform(std::vector<DensityMatrix> s);

  int k() const { return static_cast<int>(states.size()); }
  int dim() const { return states.front().dim(); }
  double p_min() const;

  /// n-fold tensor power of every state (same priors). Guarded to the desk
  /// scale n <= 3 and dim^n <= 64.
  Ensemble tensor_power(int n) const;

  /// Classical-quantum embedding  sum_x p_x |x><x| (x) rho_x.
  CMat cq_state() const;
};

/// Game parameters: eta is the abstention floor in [0,1).
struct GameConfig {
  double eta = 0.0;
  double alpha = 2.0;
  int n_copies = 1;

  void validate() const;
};

struct GameResult {
  double success_probability = 0.0;
  std::vector<CMat> optimal_povm;  // guessing elements; abstention is I - sum
  CMat dual_certificate;           // dominating operator from the dual route
  double gap = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// max sum_x p_x tr(rho_x Q_x)  s.t.  sum Q_x <= (1-eta) I, Q_x >= 0.
GameResult solve_primal(const Ensemble& e, const GameConfig& cfg,
                        const sdp::SolveOptions& opt = {});

/// min (1-eta) tr M  s.t.  M >= p_x rho_x for every x.
GameResult solve_dual(const Ensemble& e, const GameConfig& cfg,
                      const sdp::SolveOptions& opt = {});

/// The game value rewritten as an optimal hypothesis-test weight: at the
/// normalized dual certificate tau, gamma_{(1-eta)/k}(pi (x) tau || rho_XA)
/// equals the success probability.
struct CenterCertificate {
  TraceOneHermitian tau_hat;
  double gamma_value;
  double success_probability;
};
CenterCertificate hypothesis_testing_certificate(const Ensemble& e,
                                                 const GameConfig& cfg,
                                                 const sdp::SolveOptions& opt = {});

/// Upper bound on -ln(1 - success):
///   R^{sandwiched alpha}({rho_x}) - (alpha/(alpha-1)) (ln p_min + ln(k-1+eta)).
/// +inf when the radius diverges or k = 1 with eta = 0.
double radius_exponent_bound(const Ensemble& e, const GameConfig& cfg,
                             const divergence::RadiusOptions& opt = {});

/// n-independent bound on the many-copy error exponent: the Umegaki radius,
/// with sandwiched radii at the requested orders reported alongside.
struct AsymptoticBound {
  double umegaki_radius = 0.0;
  std::map<double, double> sandwiched_radii;
};
AsymptoticBound asymptotic_exponent_bound(const Ensemble& e,
                                          const std::vector<double>& alphas = {},
                                          const divergence::RadiusOptions& opt = {});

/// Least trace of an operator dominating every member of a PSD family:
///   min tr P s.t. P >= Q_x, with dual max sum tr(Y_x Q_x), sum Y_x <= I.
struct QreResult {
  double value = 0.0;
  CMat dominating_operator;        // primal optimizer P
  std::vector<CMat> dual_weights;  // dual optimizers Y_x
  double primal_dual_gap = 0.0;    // |primal - dual|
};
QreResult qre(const std::vector<CMat>& ops, const sdp::SolveOptions& opt = {});

/// 1 - ||sum_x Y_x||_inf at the dual optimum: abstention rates at or above
/// this level scale the constrained detection value linearly.
double abstention_threshold(const std::vector<CMat>& ops,
                            const sdp::SolveOptions& opt = {});

/// (1-eta) max_x p_x.
double classical_success(const std::vector<double>& priors, double eta);

/// Quantum-over-classical success ratio at uniform priors; equals the
/// dominating-trace value for abstention rates above the threshold.
struct AdvantageResult {
  double ratio_at_uniform = 0.0;
  double qre_value = 0.0;
  double eta_star = 0.0;
  bool eta_above_threshold = true;
};
AdvantageResult advantage_ratio(const std::vector<DensityMatrix>& states, double eta,
                                const sdp::SolveOptions& opt = {});

}  // namespace qdisc::game
