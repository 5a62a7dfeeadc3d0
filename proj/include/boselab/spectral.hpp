#ifndef BOSELAB_SPECTRAL_HPP
#define BOSELAB_SPECTRAL_HPP

#include <vector>

#include "boselab/types.hpp"

namespace boselab {

/// Eigendecomposition of a Hermitian operator with degeneracy clustering.
/// Clusters group eigenvalues that are closer than cluster_tol under a greedy
/// ascending merge; they play the role of the spectral levels E with
/// projectors P_E.
struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // unitary columns, same order
  double cluster_tol = 0.0;
  std::vector<std::vector<int>> clusters;
  std::vector<double> cluster_energy;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  int n_clusters() const { return static_cast<int>(clusters.size()); }

  /// P_E in the original basis.
  Matrix projector(int cluster) const;

  Matrix to_eigenbasis(const Matrix& a) const {
    return eigenvectors.adjoint() * a * eigenvectors;
  }
  Matrix from_eigenbasis(const Matrix& a) const {
    return eigenvectors * a * eigenvectors.adjoint();
  }

  /// Reconstruction defect ||H - sum_E E P_E||_max.
  double reconstruction_defect(const Matrix& h) const;
};

/// cluster_tol < 0 selects the default 1e-9 * max(1, ||H||_max).
SpectralDecomposition spectral_decompose(const Matrix& h, double cluster_tol = -1.0);

/// Bohr frequencies B(H) = Sp(H) - Sp(H) over the clustered spectrum,
/// deduplicated with the same tolerance. Contains 0 and is symmetric.
struct BohrFrequencySet {
  std::vector<double> frequencies;                    // ascending
  std::vector<std::vector<std::pair<int, int>>> pairs;  // (cluster E, cluster E') with E-E'=nu
};

BohrFrequencySet bohr_frequencies(const SpectralDecomposition& spec);

}  // namespace boselab

#endif  // BOSELAB_SPECTRAL_HPP
