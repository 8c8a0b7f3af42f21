#pragma once

#include <optional>
#include <vector>

#include "qdisc/linalg.hpp"
#include "qdisc/random.hpp"
#include "qdisc/sdp.hpp"
#include "qdisc/stategame.hpp"

namespace qdisc::channel {

using linalg::CMat;
using linalg::DensityMatrix;

/// Completely positive trace-preserving map held as a Kraus list with the
/// unnormalized Choi operator (tr_B J = I_A) cached.
class Channel {
 public:
  explicit Channel(std::vector<CMat> kraus, double tp_tol = 1e-9);

  /// Reconstructs a channel from its unnormalized Choi operator.
  static Channel from_choi(const CMat& choi_unnormalized, int dim_in,
                           double tol = 1e-8);

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::vector<CMat>& kraus() const { return kraus_; }

  CMat apply(const CMat& rho) const;
  /// (id_R (x) this) on a state of R (x) A.
  CMat apply_with_reference(const CMat& rho_ra, int dim_r) const;

  /// Unnormalized Choi operator sum_ij |i><j| (x) N(|i><j|) on A (x) B.
  const CMat& choi_unnormalized() const { return choi_; }
  /// normalized = true divides by dim_in, giving a state.
  CMat choi(bool normalized) const;

  static Channel identity(int d);
  /// (1-q) rho + q tr(rho) I/2 on a qubit.
  static Channel depolarizing(double q);
  static Channel bit_flip(double p);
  static Channel random(int dim_in, int dim_out, int kraus_rank, linalg::Rng& rng);

 private:
  int dim_in_, dim_out_;
  std::vector<CMat> kraus_;
  CMat choi_;
};

/// Geometric Renyi channel divergence, alpha in (1,2], through unnormalized
/// Choi operators:
///   (1/(alpha-1)) ln || tr_B[ J_M^{1/2} (J_M^{-1/2} J_N J_M^{-1/2})^alpha
///                             J_M^{1/2} ] ||_inf,
/// +inf unless supp(J_N) is contained in supp(J_M).
double geometric_renyi(const Channel& n, const Channel& m, double alpha,
                       double support_tol = linalg::kSupportTol);

/// inf over CPTP maps T of max_x D_geo_alpha(T || N_x) at alpha = 1+2^-level,
/// via per-channel cascade blocks coupled through the Choi variable of T.
/// `pinned_center` fixes the Choi of T instead of optimizing it (the
/// degenerate fixed-pair form).
struct ChoiRadiusResult {
  double value = 0.0;
  CMat choi_center;
  double solver_gap = 0.0;
  int iterations = 0;
  /// True when the path-following solve stalled (rank-deficient Choi inputs
  /// lose strict feasibility) and the value was instead certified at the
  /// best feasible center; such values upper-bound the optimum, exactly so
  /// when the feasible set is a forced point.
  bool via_feasible_center = false;
};
ChoiRadiusResult choi_divergence_radius(const std::vector<Channel>& channels,
                                        int level, const sdp::SolveOptions& opt = {},
                                        const std::optional<CMat>& pinned_center = {});

/// Bound on the n-round adaptive error exponent:
///   choi radius  -  (alpha/(n(alpha-1))) (ln p_min + ln(k-1+eta)).
double adaptive_exponent_bound(const std::vector<Channel>& channels,
                               const std::vector<double>& priors, double eta, int n,
                               int level, const sdp::SolveOptions& opt = {});

/// n-round adaptive strategy: prepare tau on R (x) A, interleave processing
/// maps from R (x) B back to R (x) A, measure at the end. The final POVM is
/// optional; the success optimizer chooses the best one.
struct AdaptiveProtocol {
  int rounds = 1;
  int dim_r = 1;
  DensityMatrix initial_state{CMat::Identity(1, 1)};  // on R (x) A
  std::vector<Channel> adapters;
  std::optional<std::vector<CMat>> final_povm;  // element 0 is the abstention
};

struct ProtocolTrace {
  int dim_r = 1;
  std::vector<std::vector<CMat>> inputs;   // [hypothesis][round] on R (x) A
  std::vector<std::vector<CMat>> outputs;  // [hypothesis][round] on R (x) B

  std::vector<CMat> final_states() const;
};

/// Exact density-matrix propagation of the protocol under every hypothesis.
ProtocolTrace simulate_protocol(const AdaptiveProtocol& protocol,
                                const std::vector<Channel>& channels);

/// Best success probability over final measurements with abstention floor
/// eta; reduces to the state-discrimination game on the final states.
double protocol_success(const ProtocolTrace& trace, const std::vector<double>& priors,
                        double eta, const sdp::SolveOptions& opt = {});

/// Success of a fixed (k+1)-element measurement; validates the abstention
/// floor  povm[0] >= eta I.
double povm_success(const ProtocolTrace& trace, const std::vector<CMat>& povm,
                    const std::vector<double>& priors, double eta);

/// Cascade values at alpha = 1+2^-l for l = 1..l_max; nonincreasing in l,
/// with the last entry reported as the best computable bound for the
/// vanishing-order limit.
struct LimitSequence {
  struct Entry {
    double alpha;
    double value;
  };
  std::vector<Entry> values;
  double best = 0.0;
};
LimitSequence asymptotic_channel_bound(const std::vector<Channel>& channels, int l_max,
                                       const sdp::SolveOptions& opt = {});

/// Seeded random protocol: Haar-random pure initial state and random
/// isometry-induced adapters.
AdaptiveProtocol random_protocol(int rounds, int dim_r, int dim_a, int dim_b,
                                 linalg::Rng& rng);

}  // namespace qdisc::channel
