#include "qdisc/random.hpp"

#include <cmath>

namespace qdisc::linalg {

CMat random_ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  return g;
}

HermitianOperator random_hermitian(int d, Rng& rng) {
  CMat g = random_ginibre(d, d, rng);
  return HermitianOperator(0.5 * (g + g.adjoint().eval()) / std::sqrt(double(d)));
}

CMat random_psd(int d, int rank, Rng& rng) {
  CMat g = random_ginibre(d, rank, rng);
  return (g * g.adjoint()) / double(d);
}

DensityMatrix random_density(int d, Rng& rng) {
  CMat p = random_psd(d, d, rng);
  return DensityMatrix(p / p.trace().real());
}

DensityMatrix random_pure(int d, Rng& rng) {
  CVec v = random_ginibre(d, 1, rng).col(0);
  v.normalize();
  return DensityMatrix(v * v.adjoint());
}

CMat random_unitary(int d, Rng& rng) {
  Eigen::HouseholderQR<CMat> qr(random_ginibre(d, d, rng));
  CMat q = qr.householderQ() * CMat::Identity(d, d);
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix phases so the distribution is Haar
  for (int i = 0; i < d; ++i) {
    Complex diag = r(i, i);
    q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

std::vector<double> random_priors(int k, Rng& rng, double floor) {
  std::uniform_real_distribution<double> uni(floor / k, 1.0);
  std::vector<double> p(k);
  double total = 0;
  for (int i = 0; i < k; ++i) {
    p[i] = uni(rng);
    total += p[i];
  }
  for (int i = 0; i < k; ++i) p[i] /= total;
  return p;
}

}  // namespace qdisc::linalg
