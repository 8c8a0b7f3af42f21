#include "qdisc/linalg.hpp"

#include <cmath>
#include <limits>

namespace qdisc::linalg {

namespace {

void check_square(const CMat& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatchError("operator must be square with dim >= 1");
  }
}

double inf_norm_hermitian(const CMat& m) {
  // cheap upper-bound-free exact value via eigenvalues is overkill here;
  // callers needing the exact operator norm use operator_norm().
  return m.cwiseAbs().maxCoeff();
}

}  // namespace

HermitianOperator::HermitianOperator(CMat entries, double hermiticity_tol) {
  check_square(entries);
  const double scale = std::max(1.0, inf_norm_hermitian(entries));
  const double dev = (entries - entries.adjoint().eval()).cwiseAbs().maxCoeff();
  if (dev > hermiticity_tol * scale) {
    throw NonHermitianError("matrix deviates from its conjugate transpose by " +
                            std::to_string(dev));
  }
  m_ = 0.5 * (entries + entries.adjoint().eval());
}

TraceOneHermitian::TraceOneHermitian(CMat entries, double hermiticity_tol,
                                     double trace_tol)
    : HermitianOperator(std::move(entries), hermiticity_tol) {
  if (std::abs(trace() - 1.0) > trace_tol) {
    throw DomainError("trace must equal 1, got " + std::to_string(trace()));
  }
}

DensityMatrix::DensityMatrix(CMat entries, double hermiticity_tol, double trace_tol,
                             double psd_tol)
    : TraceOneHermitian(std::move(entries), hermiticity_tol, trace_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol) {
    throw DomainError("state has eigenvalue " +
                      std::to_string(es.eigenvalues().minCoeff()));
  }
}

Spectrum eig(const CMat& hermitian_entries) {
  check_square(hermitian_entries);
  Eigen::SelfAdjointEigenSolver<CMat> es(herm(hermitian_entries));
  if (es.info() != Eigen::Success) {
    throw SolverError("eigendecomposition failed");
  }
  const int d = static_cast<int>(hermitian_entries.rows());
  Spectrum s;
  s.eigenvalues = es.eigenvalues().reverse();
  s.eigenvectors = CMat(d, d);
  for (int i = 0; i < d; ++i) s.eigenvectors.col(i) = es.eigenvectors().col(d - 1 - i);
  return s;
}

Spectrum eig(const HermitianOperator& h) { return eig(h.entries()); }

CMat tensor(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(tensor(a.entries(), b.entries()));
}

CMat partial_trace(const CMat& h, int dim_a, int dim_b, Subsystem keep) {
  check_square(h);
  if (static_cast<Eigen::Index>(dim_a) * dim_b != h.rows()) {
    throw DimensionMismatchError("partial_trace: dim_a*dim_b != dim");
  }
  if (keep == Subsystem::A) {
    CMat out = CMat::Zero(dim_a, dim_a);
    for (int i = 0; i < dim_a; ++i)
      for (int j = 0; j < dim_a; ++j)
        for (int b = 0; b < dim_b; ++b) out(i, j) += h(i * dim_b + b, j * dim_b + b);
    return out;
  }
  CMat out = CMat::Zero(dim_b, dim_b);
  for (int i = 0; i < dim_b; ++i)
    for (int j = 0; j < dim_b; ++j)
      for (int a = 0; a < dim_a; ++a) out(i, j) += h(a * dim_b + i, a * dim_b + j);
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& h, int dim_a, int dim_b,
                                Subsystem keep) {
  return HermitianOperator(partial_trace(h.entries(), dim_a, dim_b, keep));
}

CMat matrix_function_on_support(const CMat& h, const std::function<double(double)>& f,
                                double support_tol) {
  Spectrum s = eig(h);
  const double cutoff =
      support_tol * std::max(1.0, s.eigenvalues.cwiseAbs().maxCoeff());
  const int d = static_cast<int>(h.rows());
  RVec vals = RVec::Zero(d);
  for (int i = 0; i < d; ++i) {
    double lam = s.eigenvalues[i];
    if (std::abs(lam) <= cutoff) continue;  // kernel
    const double flam = f(lam);
    if (!std::isfinite(flam)) {
      throw DomainError("scalar map undefined at retained eigenvalue " +
                        std::to_string(lam));
    }
    vals[i] = flam;
  }
  return s.eigenvectors * vals.asDiagonal() * s.eigenvectors.adjoint();
}

HermitianOperator matrix_function_on_support(const HermitianOperator& h,
                                             const std::function<double(double)>& f,
                                             double support_tol) {
  return HermitianOperator(matrix_function_on_support(h.entries(), f, support_tol));
}

CMat psd_power(const CMat& h, double p, double support_tol) {
  Spectrum s = eig(h);
  const double cutoff =
      support_tol * std::max(1.0, s.eigenvalues.cwiseAbs().maxCoeff());
  const int d = static_cast<int>(h.rows());
  const bool fractional = p != std::floor(p) || p < 0;
  RVec vals = RVec::Zero(d);
  for (int i = 0; i < d; ++i) {
    double lam = s.eigenvalues[i];
    if (std::abs(lam) <= cutoff) continue;
    if (lam < 0) {
      if (fractional) {
        throw DomainError("fractional power of eigenvalue " + std::to_string(lam));
      }
      vals[i] = std::pow(lam, p);
    } else {
      vals[i] = std::pow(lam, p);
    }
  }
  return s.eigenvectors * vals.asDiagonal() * s.eigenvectors.adjoint();
}

CMat support_log(const CMat& h, double support_tol) {
  return matrix_function_on_support(
      h, [](double x) { return std::log(x); }, support_tol);
}

CMat support_projector(const CMat& h, double support_tol) {
  Spectrum s = eig(h);
  const double cutoff =
      support_tol * std::max(1.0, s.eigenvalues.cwiseAbs().maxCoeff());
  const int d = static_cast<int>(h.rows());
  CMat proj = CMat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    if (std::abs(s.eigenvalues[i]) > cutoff) {
      proj += s.eigenvectors.col(i) * s.eigenvectors.col(i).adjoint();
    }
  }
  return proj;
}

bool support_contains(const CMat& a, const CMat& b, double tol) {
  if (a.rows() != b.rows()) throw DimensionMismatchError("support_contains dims");
  const double bnorm = operator_norm(b);
  if (bnorm == 0.0) return true;
  CMat ker = identity(static_cast<int>(a.rows())) - support_projector(a, tol);
  return operator_norm(CMat(ker * b * ker)) <= tol * bnorm;
}

bool support_contains(const HermitianOperator& a, const HermitianOperator& b,
                      double tol) {
  return support_contains(a.entries(), b.entries(), tol);
}

double schatten_norm(const CMat& h, double alpha) {
  if (alpha < 1.0) throw DomainError("schatten_norm requires alpha >= 1");
  RVec sv = eig(h).eigenvalues.cwiseAbs();
  if (std::isinf(alpha)) return sv.maxCoeff();
  if (alpha == 1.0) return sv.sum();
  double acc = 0;
  for (int i = 0; i < sv.size(); ++i) acc += std::pow(sv[i], alpha);
  return std::pow(acc, 1.0 / alpha);
}

double schatten_norm(const HermitianOperator& h, double alpha) {
  return schatten_norm(h.entries(), alpha);
}

double operator_norm(const CMat& h) {
  if (h.rows() == h.cols()) return eig(h).eigenvalues.cwiseAbs().maxCoeff();
  Eigen::JacobiSVD<CMat> svd(h);
  return svd.singularValues().maxCoeff();
}

double operator_norm(const HermitianOperator& h) { return operator_norm(h.entries()); }

CMat herm(const CMat& m) { return 0.5 * (m + m.adjoint().eval()); }

CMat identity(int d) { return CMat::Identity(d, d); }

std::vector<CMat> hermitian_basis(int d) {
  std::vector<CMat> basis;
  basis.reserve(static_cast<size_t>(d) * d);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    CMat e = CMat::Zero(d, d);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      CMat e = CMat::Zero(d, d);
      e(i, j) = inv_sqrt2;
      e(j, i) = inv_sqrt2;
      basis.push_back(e);
      CMat g = CMat::Zero(d, d);
      g(i, j) = Complex(0, -inv_sqrt2);
      g(j, i) = Complex(0, inv_sqrt2);
      basis.push_back(g);
    }
  }
  return basis;
}

CMat frechet_spectral(const CMat& h, const std::function<double(double)>& f,
                      const std::function<double(double)>& df, const CMat& direction,
                      double support_tol) {
  Spectrum s = eig(h);
  const int d = static_cast<int>(h.rows());
  const double cutoff =
      support_tol * std::max(1.0, s.eigenvalues.cwiseAbs().maxCoeff());
  RVec lam(d), flam(d);
  for (int i = 0; i < d; ++i) {
    lam[i] = std::abs(s.eigenvalues[i]) <= cutoff ? 0.0 : s.eigenvalues[i];
    flam[i] = lam[i] == 0.0 ? 0.0 : f(lam[i]);
  }
  CMat dir_eig = s.eigenvectors.adjoint() * direction * s.eigenvectors;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double k;
      if (std::abs(lam[i] - lam[j]) <= 1e-12 * std::max(1.0, std::abs(lam[i]))) {
        k = lam[i] == 0.0 ? 0.0 : df(lam[i]);
      } else {
        k = (flam[i] - flam[j]) / (lam[i] - lam[j]);
      }
      dir_eig(i, j) *= k;
    }
  }
  return s.eigenvectors * dir_eig * s.eigenvectors.adjoint();
}

}  // namespace qdisc::linalg
