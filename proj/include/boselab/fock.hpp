#ifndef BOSELAB_FOCK_HPP
#define BOSELAB_FOCK_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boselab/types.hpp"

namespace boselab {

/// Truncated multi-mode bosonic Fock space.
///
/// States are occupation vectors (n_1,...,n_m) with 0 <= n_i <= per_mode_cutoff
/// and, when total_cutoff is set, sum_i n_i <= total_cutoff. Enumeration is by
/// total occupation first, then lexicographic in the occupation vector, so two
/// builds with identical inputs produce identical index maps.
struct FockBasis {
  int n_modes = 0;
  int per_mode_cutoff = 0;
  std::optional<int> total_cutoff;
  std::vector<std::vector<int>> states;
  std::map<std::vector<int>, int> index;

  int dim() const { return static_cast<int>(states.size()); }
  bool contains(const std::vector<int>& s) const { return index.count(s) > 0; }
  int total_occupation(int i) const;
  bool same_shape(const FockBasis& other) const {
    return n_modes == other.n_modes && per_mode_cutoff == other.per_mode_cutoff &&
           total_cutoff == other.total_cutoff;
  }
};

using BasisPtr = std::shared_ptr<const FockBasis>;

/// Matrix on a FockBasis with provenance metadata.
struct FockOperator {
  BasisPtr basis;
  Matrix matrix;
  bool hermitian = false;
  std::string label;
};

enum class LadderKind { annihilate, create, number };

/// Default hard cap on basis dimension; constructions refuse beyond it.
inline constexpr int kDefaultBasisCap = 20000;

BasisPtr build_basis(int n_modes, int per_mode_cutoff,
                     std::optional<int> total_cutoff = std::nullopt,
                     int hard_cap = kDefaultBasisCap);

/// Truncated ladder operator on one mode. The creation operator maps the top
/// occupation level to zero (P a^dag P convention), so [a, a^dag] = 1 only
/// below the cutoff shell.
FockOperator ladder_operator(const BasisPtr& basis, int mode, LadderKind kind);

FockOperator total_number_operator(const BasisPtr& basis);

/// Spectral projector 1{N <= threshold} of a (possibly non-diagonal) number
/// operator. The spectrum must sit within integer_tol of integers; rotated-mode
/// number operators are exactly integer-spectral in exact arithmetic, so a
/// larger deviation indicates a corrupted truncation.
FockOperator occupation_projector(const FockOperator& number_op, int threshold,
                                  double integer_tol = 1e-6);

struct SectorBlock {
  int sector_total = 0;
  std::vector<int> basis_indices;  // positions in the FockBasis enumeration
  Matrix block;
};

/// Block decomposition of an operator commuting with the total number operator.
/// Throws NumericalError with the commutator norm if conservation fails.
std::vector<SectorBlock> number_sector_blocks(const FockOperator& op,
                                              double commutator_tol = 1e-10);

/// Reassemble a full matrix from sector blocks (inverse of the decomposition).
Matrix assemble_from_blocks(const BasisPtr& basis, const std::vector<SectorBlock>& blocks);

}  // namespace boselab

#endif  // BOSELAB_FOCK_HPP
