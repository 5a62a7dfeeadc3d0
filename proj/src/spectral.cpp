#include "boselab/spectral.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace boselab {

Matrix SpectralDecomposition::projector(int cluster) const {
  const auto& idx = clusters[cluster];
  Matrix p = Matrix::Zero(dim(), dim());
  for (int i : idx) p += eigenvectors.col(i) * eigenvectors.col(i).adjoint();
  return p;
}

double SpectralDecomposition::reconstruction_defect(const Matrix& h) const {
  Matrix rec = Matrix::Zero(dim(), dim());
  for (int c = 0; c < n_clusters(); ++c) rec += cluster_energy[c] * projector(c);
  return max_abs(h - rec);
}

SpectralDecomposition spectral_decompose(const Matrix& h, double cluster_tol) {
  if (h.rows() != h.cols()) throw std::invalid_argument("spectral_decompose: square matrix required");
  if (hermiticity_defect(h) > 1e-10 * std::max(1.0, max_abs(h)))
    throw std::invalid_argument("spectral_decompose: Hermitian input required");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  if (es.info() != Eigen::Success)
    throw NumericalError("spectral_decompose: eigensolver failed (dim " +
                         std::to_string(h.rows()) + ", ||H||_max " + std::to_string(max_abs(h)) +
                         ")");
  SpectralDecomposition spec;
  spec.eigenvalues = es.eigenvalues();
  spec.eigenvectors = es.eigenvectors();
  spec.cluster_tol = cluster_tol >= 0 ? cluster_tol : 1e-9 * std::max(1.0, max_abs(h));

  // greedy ascending merge: extend the current cluster while the next
  // eigenvalue is within tolerance of the cluster's last member
  const int d = spec.dim();
  std::vector<int> cur{0};
  for (int i = 1; i < d; ++i) {
    if (spec.eigenvalues(i) - spec.eigenvalues(cur.back()) <= spec.cluster_tol) {
      cur.push_back(i);
    } else {
      spec.clusters.push_back(cur);
      cur = {i};
    }
  }
  if (d > 0) spec.clusters.push_back(cur);
  for (const auto& c : spec.clusters) {
    double e = 0.0;
    for (int i : c) e += spec.eigenvalues(i);
    spec.cluster_energy.push_back(e / c.size());
  }
  return spec;
}

BohrFrequencySet bohr_frequencies(const SpectralDecomposition& spec) {
  BohrFrequencySet set;
  const int nc = spec.n_clusters();
  std::vector<std::pair<double, std::pair<int, int>>> all;
  all.reserve(static_cast<size_t>(nc) * nc);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j)
      all.push_back({spec.cluster_energy[i] - spec.cluster_energy[j], {i, j}});
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [nu, pr] : all) {
    if (set.frequencies.empty() || nu - set.frequencies.back() > spec.cluster_tol) {
      set.frequencies.push_back(nu);
      set.pairs.push_back({pr});
    } else {
      set.pairs.back().push_back(pr);
    }
  }
  return set;
}

}  // namespace boselab
