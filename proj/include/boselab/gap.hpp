#ifndef BOSELAB_GAP_HPP
#define BOSELAB_GAP_HPP

#include <vector>

#include "boselab/generator.hpp"
#include "boselab/models.hpp"

namespace boselab {

struct GapReport {
  double gap = 0.0;            // second-smallest eigenvalue of -L
  int kernel_dimension = 0;    // eigenvalues of -L below kernel_tol
  std::vector<double> lowest;  // lowest 10 eigenvalues of -L, ascending
  bool degenerate_kernel = false;
  double kernel_tol = 0.0;
};

GapReport spectral_gap(const Matrix& hs_matrix, double kernel_tol = 1e-8);
GapReport spectral_gap(const GibbsGenerator& gen, double kernel_tol = 1e-8);

/// Ladder-block comparison operator L_LB(x) = (1/2)(nu+ - nu-)^2 (Nx + xN)
/// - nu+(nu- - nu+) x on a single mode, diagonal on span{|n><m| : n+m=k} with
/// eigenvalue kappa_k.
struct LadderBlock {
  Matrix matrix;               // d^2 x d^2, Fock basis
  std::vector<double> kappa;   // kappa_k for k = 0..2(d-1)
  double nu_plus = 0.0, nu_minus = 0.0;
};

LadderBlock ladder_block_operator(double nu_plus, double nu_minus, const BasisPtr& basis);

double ladder_block_kappa(double nu_plus, double nu_minus, int k);

/// Quadratic-form comparison of the qOU Dirichlet operator -L_hs against the
/// ladder block, compressed onto the interior (occupations <= M~ - 2, where
/// truncation leaves the form untouched). Reports the minimum eigenvalue of
/// (-L_hs - L_LB); a negative value beyond tolerance means the comparison
/// inequality fails for this filter normalization and is surfaced as a
/// finding, not an error.
struct ComparisonDefect {
  double min_eig_interior = 0.0;
  double min_eig_full = 0.0;
  bool inequality_holds = false;  // min_eig_interior >= -tol
  double tol = 1e-8;
};

ComparisonDefect comparison_defect(const Matrix& qou_hs_matrix, const LadderBlock& lb,
                                   const BasisPtr& basis, double tol = 1e-8);

/// Dirichlet-form gap perturbation audit (bound (sqrt(gap) - sqrt(Delta))^2).
struct PerturbationAudit {
  double delta = 0.0;  // cosh-weighted integral of ||d - d~||^2
  double gap_base = 0.0;
  double gap_perturbed = 0.0;
  double bound_value = 0.0;
  bool applicable = false;  // gap_base > delta
  bool satisfied = false;   // gap_perturbed >= bound - 1e-8 when applicable
  double quad_residual = 0.0;
};

PerturbationAudit gap_perturbation_bound(const Matrix& h_base, const Matrix& h_pert,
                                         const std::vector<FockOperator>& jumps,
                                         const FilterFunction& filter, double quad_tol = 1e-8);

/// Finite-rank stability of conjugated dressed jumps: for H = H0 + R with
/// R = PRP, the remainder cal R_s = e^{sH} L(H) e^{-sH} - e^{sH0} L(H0) e^{-sH0}
/// has vanishing Qbar-Qbar block and finite rank.
struct FiniteRankRemainder {
  Matrix remainder;         // original basis
  double qrq_norm = 0.0;    // ||Qbar cal R Qbar||_2
  int numerical_rank = 0;   // singular values above rank_tol
  double rank_tol = 1e-8;
};

FiniteRankRemainder finite_rank_remainder(const Matrix& h0, const Matrix& r, const Matrix& p,
                                          const Matrix& bare_jump, const FilterFunction& filter,
                                          double s);

/// Per-level audit of the mean-field eigenvalue/eigenvector perturbation
/// bounds.
struct MeanFieldAuditRow {
  int n = 0;
  double energy = 0.0;
  double energy_unperturbed = 0.0;
  double eig_deviation = 0.0;
  double eig_bound = 0.0;
  bool eig_pass = false;
  double vec_deviation = 0.0;
  double vec_bound = 0.0;
  bool vec_pass = false;
  double overlap = 0.0;  // c_n = <n|E_n> after phase fixing
  bool ambiguous = false;
};

std::vector<MeanFieldAuditRow> meanfield_eigen_audit(const MeanFieldParams& params,
                                                     const BasisPtr& basis, int n_min, int n_max,
                                                     double r = -1.0);

}  // namespace boselab

#endif  // BOSELAB_GAP_HPP
