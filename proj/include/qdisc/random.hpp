#pragma once

#include <random>
#include <vector>

#include "qdisc/linalg.hpp"

namespace qdisc::linalg {

using Rng = std::mt19937_64;

/// Matrix with i.i.d. standard complex Gaussian entries.
CMat random_ginibre(int rows, int cols, Rng& rng);

/// GUE-like Hermitian matrix, entries O(1).
HermitianOperator random_hermitian(int d, Rng& rng);

/// Positive semidefinite G G^dag with Gaussian G of given rank.
CMat random_psd(int d, int rank, Rng& rng);

/// Hilbert-Schmidt distributed density matrix.
DensityMatrix random_density(int d, Rng& rng);

/// Haar-random pure state projector.
DensityMatrix random_pure(int d, Rng& rng);

/// Haar-random unitary via QR of a Ginibre matrix.
CMat random_unitary(int d, Rng& rng);

/// Strictly positive prior vector summing to one; every entry >= floor / k.
std::vector<double> random_priors(int k, Rng& rng, double floor = 0.2);

}  // namespace qdisc::linalg
