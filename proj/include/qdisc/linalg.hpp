#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "qdisc/errors.hpp"

namespace qdisc::linalg {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Default tolerance for Hermiticity checks.
inline constexpr double kHermTol = 1e-10;

/// Default support cutoff, relative to the operator norm: eigenvalues with
/// |lambda| <= tol * max(1, ||H||_inf) are treated as exactly zero.
inline constexpr double kSupportTol = 1e-9;

/// Dense complex Hermitian operator. Immutable after construction; the
/// constructor validates Hermiticity and symmetrizes roundoff.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMat entries, double hermiticity_tol = kHermTol);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& entries() const { return m_; }
  double trace() const { return m_.trace().real(); }

 protected:
  CMat m_;
};

/// Hermitian operator with unit trace; negativity allowed.
class TraceOneHermitian : public HermitianOperator {
 public:
  explicit TraceOneHermitian(CMat entries, double hermiticity_tol = kHermTol,
                             double trace_tol = 1e-9);
};

/// Quantum state: unit trace and positive semidefinite (within 1e-9).
class DensityMatrix : public TraceOneHermitian {
 public:
  explicit DensityMatrix(CMat entries, double hermiticity_tol = kHermTol,
                         double trace_tol = 1e-9, double psd_tol = 1e-9);
};

/// Eigendecomposition with descending eigenvalues.
struct Spectrum {
  RVec eigenvalues;   // descending
  CMat eigenvectors;  // orthonormal columns, matching order
};

Spectrum eig(const HermitianOperator& h);
Spectrum eig(const CMat& hermitian_entries);

enum class Subsystem { A, B };

/// Kronecker product.
CMat tensor(const CMat& a, const CMat& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);

/// Partial trace of an operator on C^{dim_a} (x) C^{dim_b}.
CMat partial_trace(const CMat& h, int dim_a, int dim_b, Subsystem keep);
HermitianOperator partial_trace(const HermitianOperator& h, int dim_a, int dim_b,
                                Subsystem keep);

/// Applies f eigenvalue-wise on the support of h. Eigenvalues with
/// |lambda| <= support_tol * max(1, ||h||_inf) are excluded and the result is
/// zero on the kernel. Eigenvalues in [-cutoff, 0) are clamped to zero first.
/// Throws DomainError if f produces a non-finite value on a retained
/// eigenvalue.
CMat matrix_function_on_support(const CMat& h, const std::function<double(double)>& f,
                                double support_tol = kSupportTol);
HermitianOperator matrix_function_on_support(const HermitianOperator& h,
                                             const std::function<double(double)>& f,
                                             double support_tol = kSupportTol);

/// Pseudo-power on the support: clamps eigenvalues in [-cutoff, 0) to zero and
/// throws DomainError on genuinely negative eigenvalues when p is fractional.
CMat psd_power(const CMat& h, double p, double support_tol = kSupportTol);

/// Pseudo-logarithm on the support.
CMat support_log(const CMat& h, double support_tol = kSupportTol);

/// Projector onto the support of a PSD operator.
CMat support_projector(const CMat& h, double support_tol = kSupportTol);

/// True iff the kernel projector of PSD `a` annihilates `b`:
/// ||P_ker b P_ker||_inf <= tol * ||b||_inf.
bool support_contains(const HermitianOperator& a, const HermitianOperator& b,
                      double tol = kSupportTol);
bool support_contains(const CMat& a, const CMat& b, double tol = kSupportTol);

/// Schatten alpha-norm over singular values; alpha >= 1, alpha = inf gives the
/// operator norm.
double schatten_norm(const CMat& h, double alpha);
double schatten_norm(const HermitianOperator& h, double alpha);
double operator_norm(const CMat& h);
double operator_norm(const HermitianOperator& h);

/// Hermitian part (m + m^dagger)/2.
CMat herm(const CMat& m);

CMat identity(int d);

/// Orthonormal basis of the real vector space of d x d Hermitian matrices
/// under <A,B> = tr(AB): diagonal units first, then symmetric and
/// antisymmetric off-diagonal pairs.
std::vector<CMat> hermitian_basis(int d);

/// Fréchet derivative of the spectral function f at Hermitian h, applied to
/// direction: V (K .* (V^dag direction V)) V^dag with the divided-difference
/// kernel K of f. `df` supplies f'; eigenvalues at or below the support cutoff
/// use f(0) = 0 and enter through divided differences only.
CMat frechet_spectral(const CMat& h, const std::function<double(double)>& f,
                      const std::function<double(double)>& df, const CMat& direction,
                      double support_tol = kSupportTol);

}  // namespace qdisc::linalg
