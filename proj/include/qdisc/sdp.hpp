#pragma once

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdisc/linalg.hpp"

namespace qdisc::sdp {

using linalg::CMat;
using linalg::Complex;
using linalg::RMat;
using linalg::RVec;
using linalg::Subsystem;

enum class Sense { minimize, maximize };

enum class SolveStatus { optimal, infeasible, unbounded, max_iters };

struct VarId {
  int v = -1;
};

struct SolveOptions {
  double gap_tol = 1e-8;
  double kkt_tol = 1e-7;
  int max_iters = 200;
  bool verbose = false;
};

/// Affine Hermitian-matrix-valued expression over declared variables, laid
/// out on a block-partitioned target. Off-diagonal placements are mirrored
/// so the expression stays Hermitian.
class MatExpr {
 public:
  explicit MatExpr(std::vector<int> block_dims);

  int dim() const { return dim_; }

  /// K placed at block (bi,bj); K^dagger is added at (bj,bi) when bi != bj.
  MatExpr& add_constant(int bi, int bj, const CMat& k);

  /// alpha * X_v at block (bi,bj), mirrored. alpha must be real on the
  /// diagonal.
  MatExpr& add_term(VarId v, int bi, int bj, Complex alpha = 1.0);

  /// alpha * tr_discarded(X_v) at block (bi,bj).
  MatExpr& add_partial_trace_term(VarId v, int bi, int bj, int dim_a, int dim_b,
                                  Subsystem keep, double alpha = 1.0);

  /// scalar_v * G at block (bi,bj).
  MatExpr& add_scalar_term(VarId v, int bi, int bj, const CMat& g);

  struct Term {
    VarId var;
    int bi, bj;
    Complex alpha;
    bool is_partial_trace = false;
    int dim_a = 0, dim_b = 0;
    Subsystem keep = Subsystem::A;
    bool is_scalar = false;
    CMat g;
  };

  std::vector<int> blocks;
  std::vector<int> offsets;
  int dim_ = 0;
  CMat constant;
  std::vector<Term> terms;
};

/// Affine real-valued expression: constant + sum Re tr(C_v X_v) + sum c_v s_v.
struct ScalarExpr {
  double constant = 0.0;
  std::vector<std::pair<VarId, CMat>> mat_terms;
  std::vector<std::pair<VarId, double>> scalar_terms;

  ScalarExpr& add_term(VarId v, const CMat& c) {
    mat_terms.emplace_back(v, c);
    return *this;
  }
  ScalarExpr& add_term(VarId v, double c) {
    scalar_terms.emplace_back(v, c);
    return *this;
  }
};

/// Conic program over complex Hermitian blocks and scalars, with linear
/// matrix inequalities, scalar inequalities and equalities. Solved through
/// the 2d-real embedding of every Hermitian block.
class SdpProblem {
 public:
  VarId add_psd_var(const std::string& name, int dim);
  VarId add_herm_var(const std::string& name, int dim);  // no cone constraint
  VarId add_scalar_var(const std::string& name, bool nonneg = false);

  void set_objective(Sense sense, ScalarExpr objective);

  void add_psd_constraint(MatExpr expr, const std::string& name = "");
  void add_eq_constraint(MatExpr expr, const std::string& name = "");
  void add_scalar_ineq(ScalarExpr expr, const std::string& name = "");  // >= 0
  void add_scalar_eq(ScalarExpr expr, const std::string& name = "");    // == 0

  int var_dim(VarId v) const;
  bool var_is_scalar(VarId v) const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

  SdpProblem();
  ~SdpProblem();
  SdpProblem(SdpProblem&&) noexcept;
  SdpProblem& operator=(SdpProblem&&) noexcept;
  SdpProblem(const SdpProblem&) = delete;
  SdpProblem& operator=(const SdpProblem&) = delete;

 private:
  std::unique_ptr<Impl> impl_;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::max_iters;
  double primal_value = 0.0;  // user objective at the returned point
  double dual_value = 0.0;    // Lagrangian bound from the conic dual
  double gap = 0.0;           // |primal-dual| / (1+|primal|)
  double kkt_residual = 0.0;  // worst constraint violation at the point
  int iterations = 0;
  std::map<std::string, CMat> blocks;
  std::map<std::string, double> scalars;
  /// Farkas multipliers (infeasible) or an improving ray (unbounded),
  /// keyed by constraint or variable name.
  std::map<std::string, CMat> certificate;
  std::string message;
};

SdpSolution solve(const SdpProblem& p, const SolveOptions& opt = {});

/// True when a phase-one solve finds a point satisfying every cone
/// constraint with margin > `margin` (given the equalities).
bool slater_check(const SdpProblem& p, double margin = 1e-7);

/// Plain-text dump of the assembled conic form (documented in the README)
/// for cross-checking against external solvers.
std::string to_conic_text(const SdpProblem& p);

/// Standard 2d x 2d real embedding [[Re H, -Im H], [Im H, Re H]].
RMat realify(const CMat& h);
CMat derealify(const RMat& s);

}  // namespace qdisc::sdp
