#pragma once

// Internal conic core: primal-dual path-following on the homogeneous
// self-dual embedding with Nesterov-Todd scaling and Mehrotra
// predictor-corrector. All blocks are dense real symmetric PSD cones
// (dimension 1 blocks are nonnegative rays). Not part of the public API;
// the sdp module assembles problems into this form.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace qdisc::sdp::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline int svec_dim(int n) { return n * (n + 1) / 2; }

/// Symmetric vectorization with sqrt(2)-scaled off-diagonals, so that
/// svec(a).dot(svec(b)) == (a*b).trace(). Lower triangle, column-major.
VectorXd svec(const MatrixXd& a);
MatrixXd smat(const VectorXd& v);

/// Internal standard pair, with the modeled (user) problem on the y side:
///   (y side)  maximize b.y   s.t.  s_k = c_k - At_k y  in PSD cone, all k
///   (x side)  minimize sum <c_k, x_k>  s.t.  sum At_k^T x_k = b, x_k in cone
struct ConicProblem {
  std::vector<int> block_dims;
  VectorXd b;                   // size m
  std::vector<MatrixXd> At;     // per block: svec_dim(n_k) x m
  std::vector<VectorXd> c;      // per block: svec_dim(n_k)
};

enum class ConicStatus {
  optimal,
  y_infeasible,   // certificate x: A x = 0, x in cone, <c,x> < 0
  y_unbounded,    // certificate y ray: -At y in cone, b.y > 0
  max_iters,
};

struct ConicOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-7;
  int max_iters = 200;
  double step_frac = 0.98;  // fraction to boundary
  bool verbose = false;
};

struct ConicResult {
  ConicStatus status = ConicStatus::max_iters;
  VectorXd y;
  std::vector<VectorXd> x;  // svec per block (divided by tau)
  std::vector<VectorXd> s;
  double obj_y = 0.0;  // b.y (user-problem value)
  double obj_x = 0.0;  // <c,x> (Lagrangian bound)
  double rel_gap = 0.0;
  double feas_y = 0.0;  // residual of s = c - At y
  double feas_x = 0.0;  // residual of A x = b
  int iterations = 0;
  double tau = 0.0, kappa = 0.0, mu = 0.0;
};

ConicResult solve_conic(const ConicProblem& p, const ConicOptions& opt = {});

std::string to_text(const ConicProblem& p);

}  // namespace qdisc::sdp::detail
