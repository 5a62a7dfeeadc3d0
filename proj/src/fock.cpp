#include "boselab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace boselab {

int FockBasis::total_occupation(int i) const {
  int t = 0;
  for (int n : states[i]) t += n;
  return t;
}

namespace {

// Occupation vectors with given total, entries <= per-mode cutoff, in
// lexicographic order.
void enumerate_sector(int n_modes, int cutoff, int total, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n_modes) {
    if (total == 0) out.push_back(cur);
    return;
  }
  int remaining_slots = n_modes - static_cast<int>(cur.size()) - 1;
  for (int k = 0; k <= std::min(cutoff, total); ++k) {
    // prune: the rest must be able to absorb total-k
    if (total - k > remaining_slots * cutoff) continue;
    cur.push_back(k);
    enumerate_sector(n_modes, cutoff, total - k, cur, out);
    cur.pop_back();
  }
}

}  // namespace

BasisPtr build_basis(int n_modes, int per_mode_cutoff, std::optional<int> total_cutoff,
                     int hard_cap) {
  if (n_modes < 1) throw std::invalid_argument("build_basis: n_modes must be >= 1");
  if (per_mode_cutoff < 0) throw std::invalid_argument("build_basis: per_mode_cutoff must be >= 0");
  if (total_cutoff && *total_cutoff < 0)
    throw std::invalid_argument("build_basis: total_cutoff must be >= 0");

  // size check before enumeration
  double dim_estimate = 1.0;
  if (!total_cutoff) {
    for (int i = 0; i < n_modes; ++i) dim_estimate *= per_mode_cutoff + 1;
  } else {
    // multiset coefficient upper bound C(N+n-1, n-1) summed over totals
    dim_estimate = 0.0;
    double sector = 1.0;
    for (int t = 0; t <= *total_cutoff; ++t) {
      if (t > 0) sector *= static_cast<double>(n_modes + t - 1) / t;
      dim_estimate += sector;
    }
  }
  if (dim_estimate > static_cast<double>(hard_cap)) {
    std::ostringstream os;
    os << "build_basis: requested space has ~" << dim_estimate << " states (n_modes=" << n_modes
       << ", per_mode_cutoff=" << per_mode_cutoff;
    if (total_cutoff) os << ", total_cutoff=" << *total_cutoff;
    os << "), exceeding the hard cap of " << hard_cap;
    throw DimensionCapError(os.str());
  }

  auto basis = std::make_shared<FockBasis>();
  basis->n_modes = n_modes;
  basis->per_mode_cutoff = per_mode_cutoff;
  basis->total_cutoff = total_cutoff;

  int max_total = total_cutoff ? std::min(*total_cutoff, n_modes * per_mode_cutoff)
                               : n_modes * per_mode_cutoff;
  std::vector<int> cur;
  for (int total = 0; total <= max_total; ++total) {
    enumerate_sector(n_modes, per_mode_cutoff, total, cur, basis->states);
  }
  if (static_cast<int>(basis->states.size()) > hard_cap) {
    std::ostringstream os;
    os << "build_basis: enumerated " << basis->states.size() << " states, exceeding the hard cap "
       << hard_cap;
    throw DimensionCapError(os.str());
  }
  for (int i = 0; i < basis->dim(); ++i) basis->index[basis->states[i]] = i;
  return basis;
}

FockOperator ladder_operator(const BasisPtr& basis, int mode, LadderKind kind) {
  if (mode < 0 || mode >= basis->n_modes)
    throw std::invalid_argument("ladder_operator: mode index out of range");
  const int d = basis->dim();
  Matrix m = Matrix::Zero(d, d);
  switch (kind) {
    case LadderKind::annihilate:
      for (int j = 0; j < d; ++j) {
        const auto& s = basis->states[j];
        if (s[mode] == 0) continue;
        std::vector<int> t = s;
        t[mode] -= 1;
        auto it = basis->index.find(t);
        if (it != basis->index.end()) m(it->second, j) = std::sqrt(double(s[mode]));
      }
      return {basis, std::move(m), false, "a_" + std::to_string(mode)};
    case LadderKind::create: {
      // adjoint of annihilation restricted to the basis: states leaving the
      // cutoff map to zero
      FockOperator a = ladder_operator(basis, mode, LadderKind::annihilate);
      return {basis, a.matrix.adjoint(), false, "adag_" + std::to_string(mode)};
    }
    case LadderKind::number:
      for (int j = 0; j < d; ++j) m(j, j) = double(basis->states[j][mode]);
      return {basis, std::move(m), true, "N_" + std::to_string(mode)};
  }
  throw std::logic_error("ladder_operator: unreachable");
}

FockOperator total_number_operator(const BasisPtr& basis) {
  const int d = basis->dim();
  Matrix m = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) m(j, j) = double(basis->total_occupation(j));
  return {basis, std::move(m), true, "N_tot"};
}

FockOperator occupation_projector(const FockOperator& number_op, int threshold,
                                  double integer_tol) {
  const Matrix& n = number_op.matrix;
  if (hermiticity_defect(n) > 1e-10 * std::max(1.0, max_abs(n)))
    throw NumericalError("occupation_projector: supplied number operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(n);
  if (es.info() != Eigen::Success)
    throw NumericalError("occupation_projector: eigensolver failed");
  const RealVector& ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    double nearest = std::round(ev(i));
    if (std::abs(ev(i) - nearest) > integer_tol) {
      std::ostringstream os;
      os << "occupation_projector: eigenvalue " << ev(i) << " (index " << i << ") deviates "
         << std::abs(ev(i) - nearest) << " from the nearest integer (tol " << integer_tol << ")";
      throw NumericalError(os.str());
    }
  }
  const int d = n.rows();
  Matrix p = Matrix::Zero(d, d);
  for (int i = 0; i < ev.size(); ++i) {
    if (std::llround(ev(i)) <= threshold) {
      p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
  }
  return {number_op.basis, hermitize(p), true,
          "proj(" + number_op.label + " <= " + std::to_string(threshold) + ")"};
}

std::vector<SectorBlock> number_sector_blocks(const FockOperator& op, double commutator_tol) {
  const BasisPtr& basis = op.basis;
  const Matrix& m = op.matrix;
  FockOperator ntot = total_number_operator(basis);
  Matrix comm = m * ntot.matrix - ntot.matrix * m;
  double cnorm = max_abs(comm);
  if (cnorm > commutator_tol * std::max(1.0, max_abs(m))) {
    std::ostringstream os;
    os << "number_sector_blocks: operator '" << op.label
       << "' does not conserve total particle number, ||[A, N_tot]||_max = " << cnorm;
    throw NumericalError(os.str());
  }

  int max_total = 0;
  for (int i = 0; i < basis->dim(); ++i) max_total = std::max(max_total, basis->total_occupation(i));
  std::vector<SectorBlock> blocks;
  for (int k = 0; k <= max_total; ++k) {
    SectorBlock blk;
    blk.sector_total = k;
    for (int i = 0; i < basis->dim(); ++i)
      if (basis->total_occupation(i) == k) blk.basis_indices.push_back(i);
    const int bd = static_cast<int>(blk.basis_indices.size());
    if (bd == 0) continue;
    blk.block.resize(bd, bd);
    for (int r = 0; r < bd; ++r)
      for (int c = 0; c < bd; ++c) blk.block(r, c) = m(blk.basis_indices[r], blk.basis_indices[c]);
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

Matrix assemble_from_blocks(const BasisPtr& basis, const std::vector<SectorBlock>& blocks) {
  const int d = basis->dim();
  Matrix m = Matrix::Zero(d, d);
  for (const auto& blk : blocks) {
    const int bd = static_cast<int>(blk.basis_indices.size());
    for (int r = 0; r < bd; ++r)
      for (int c = 0; c < bd; ++c) m(blk.basis_indices[r], blk.basis_indices[c]) = blk.block(r, c);
  }
  return m;
}

}  // namespace boselab
