#pragma once

#include <limits>
#include <vector>

#include "qdisc/linalg.hpp"
#include "qdisc/sdp.hpp"

namespace qdisc::divergence {

using linalg::CMat;
using linalg::DensityMatrix;
using linalg::HermitianOperator;
using linalg::TraceOneHermitian;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Optimal detection weight on sigma under a type-I budget on rho:
///   sup { tr(Q sigma) : tr(Q rho) <= eps, 0 <= Q <= I }.
/// Valid for trace-one Hermitian rho; sigma must be a state.
double gamma_eps(const TraceOneHermitian& rho, const DensityMatrix& sigma, double eps,
                 const sdp::SolveOptions& opt = {});

/// Minimal type-II error at type-I budget eps; equals 1 - gamma_eps for
/// states. Exposed for states only.
double beta_eps(const DensityMatrix& rho, const DensityMatrix& sigma, double eps,
                const sdp::SolveOptions& opt = {});

/// -ln(1 - gamma_eps), in nats; +inf once gamma_eps reaches 1 (within 1e-8,
/// one order above the default solver gap).
double hypothesis_testing(const TraceOneHermitian& rho, const DensityMatrix& sigma,
                          double eps, const sdp::SolveOptions& opt = {});

/// Sandwiched Renyi divergence of order alpha > 1, extended to trace-one
/// Hermitian first arguments:
///   (1/(alpha-1)) ln || sigma^{(1-a)/2a} beta sigma^{(1-a)/2a} ||_a^a.
/// +inf unless supp(beta) is contained in supp(sigma).
double sandwiched_renyi(const TraceOneHermitian& beta, const HermitianOperator& sigma,
                        double alpha, double support_tol = linalg::kSupportTol);

/// Geometric Renyi divergence, alpha in (1,2]:
///   (1/(alpha-1)) ln tr[sigma (sigma^{-1/2} rho sigma^{-1/2})^alpha].
double geometric_renyi(const HermitianOperator& rho, const HermitianOperator& sigma,
                       double alpha, double support_tol = linalg::kSupportTol);

/// Geometric Renyi divergence at alpha = 1 + 2^-level through the
/// matrix-geometric-mean cascade of coupled semidefinite blocks.
/// level = 0 gives alpha = 2. +inf when the blocks are infeasible
/// (support failure).
double geometric_renyi_sdp(const HermitianOperator& rho, const HermitianOperator& sigma,
                           int level, const sdp::SolveOptions& opt = {});

double umegaki(const DensityMatrix& rho, const DensityMatrix& sigma,
               double support_tol = linalg::kSupportTol);

/// tr rho ln(rho^{1/2} sigma^+ rho^{1/2}) on the support of rho.
double belavkin_staszewski(const DensityMatrix& rho, const DensityMatrix& sigma,
                           double support_tol = linalg::kSupportTol);

struct DivergenceSpec {
  enum class Family { sandwiched, geometric, umegaki, belavkin_staszewski };
  Family family = Family::umegaki;
  double alpha = 2.0;

  static DivergenceSpec sandwiched(double a) {
    return {Family::sandwiched, a};
  }
  static DivergenceSpec geometric(double a) { return {Family::geometric, a}; }
  static DivergenceSpec umegaki() { return {Family::umegaki, 1.0}; }
  static DivergenceSpec bs() { return {Family::belavkin_staszewski, 1.0}; }
};

/// D(tau || rho) for the chosen family.
double evaluate(const DivergenceSpec& spec, const DensityMatrix& tau,
                const DensityMatrix& rho, double support_tol = linalg::kSupportTol);

struct RadiusResult {
  double value = 0.0;  // max of per_state at optimizer_tau (nats, +inf allowed)
  CMat optimizer_tau;
  std::vector<double> per_state;
  int iterations = 0;
  /// Objective of the coupled-block solve when the dyadic-geometric route was
  /// used; NaN for the iterative route.
  double solver_value = std::numeric_limits<double>::quiet_NaN();
};

struct RadiusOptions {
  int max_iters = 5000;
  double grad_tol = 1e-6;
  std::vector<double> temperatures = {10.0, 100.0, 1000.0};
  sdp::SolveOptions sdp;
  /// Run the smoothed-descent route even for dyadic geometric orders
  /// (used to cross-check the two routes against each other).
  bool force_iterative = false;
};

/// Divergence radius  inf over states tau of max_x D(tau || rho_x).
/// Geometric divergences at dyadic alpha = 1 + 2^-l solve one coupled
/// semidefinite program; every other family runs smoothed mirror descent
/// over the exponential parameterization (see RadiusObjective).
RadiusResult radius(const std::vector<DensityMatrix>& states,
                    const DivergenceSpec& spec, const RadiusOptions& opt = {});

/// Smoothed max-divergence objective restricted to the common support,
/// exposed for direct gradient checks.
class RadiusObjective {
 public:
  RadiusObjective(std::vector<DensityMatrix> states, DivergenceSpec spec,
                  double temperature, double support_tol = linalg::kSupportTol);

  int support_dim() const { return static_cast<int>(isometry_.cols()); }
  const CMat& isometry() const { return isometry_; }

  /// Smoothed value (1/T) ln sum_x exp(T D_x) at a density tau on the
  /// compressed support.
  double value(const CMat& tau) const;
  /// Gradient with respect to tau (Hermitian, compressed coordinates).
  CMat gradient(const CMat& tau) const;
  std::vector<double> per_state(const CMat& tau) const;

 private:
  std::vector<DensityMatrix> states_;
  DivergenceSpec spec_;
  double temperature_;
  double support_tol_;
  CMat isometry_;                 // d x s
  std::vector<CMat> precomp_;     // per state: family-specific factor
  std::vector<CMat> states_full_;
};

}  // namespace qdisc::divergence
