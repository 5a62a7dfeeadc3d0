#ifndef BOSELAB_GENERATOR_HPP
#define BOSELAB_GENERATOR_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "boselab/filter.hpp"
#include "boselab/fock.hpp"
#include "boselab/spectral.hpp"
#include "boselab/types.hpp"

namespace boselab {

enum class Picture { schrodinger, selfadjoint_hs };

/// Superoperator on the d^2-dimensional operator space, stored over
/// column-stacked vectorized operators: vec(A X B) = (B^T kron A) vec(X).
/// Entries refer to the eigenbasis of the Hamiltonian used to build it;
/// basis_rotation holds the eigenvector matrix for interpretation.
struct SuperOperator {
  int d = 0;
  Picture picture = Picture::schrodinger;
  Matrix matrix;          // d^2 x d^2
  Matrix basis_rotation;  // H eigenvectors (original basis -> eigenbasis)
  double sigma_e = kInf;
  std::string filter_id;
  std::string jump_set_id;
};

/// Frequency components of one bare jump on the clustered spectrum.
struct JumpComponents {
  std::string label;
  std::vector<double> freqs;       // Bohr frequencies with nonzero component
  std::vector<Matrix> components;  // A_nu in the eigenbasis
};

Matrix vec_to_matrix(const Vector& v, int d);
Vector matrix_to_vec(const Matrix& m);

/// Exact frequency-domain Gibbs-sampler generator for a finite-dimensional
/// Hamiltonian, an adjoint-closed set of bare jumps, and a KMS filter.
///
/// All internal data lives in the eigenbasis of H. Both pictures can be
/// applied matrix-free or materialized as dense superoperator matrices.
/// sigma_e = 0 keeps only equal-frequency pairs (Davies limit), sigma_e = inf
/// drops the Gaussian weight entirely (dressed-jump generator).
class GibbsGenerator {
 public:
  struct Options {
    double cluster_tol = -1.0;  // < 0: spectral_decompose default
    bool audit_filter = true;   // run kms_audit before construction
    double kms_tol = 1e-12;
    int superop_dim_cap = 64;   // refuse to materialize a d^2 x d^2 matrix beyond this d
  };

  GibbsGenerator(const Matrix& h, std::vector<FockOperator> jumps, FilterFunction filter,
                 double sigma_e, Options opt);
  GibbsGenerator(const Matrix& h, std::vector<FockOperator> jumps, FilterFunction filter,
                 double sigma_e)
      : GibbsGenerator(h, std::move(jumps), std::move(filter), sigma_e, Options()) {}

  int dim() const { return spec_.dim(); }
  double beta() const { return filter_.beta; }
  double sigma_e() const { return sigma_e_; }
  const SpectralDecomposition& spec() const { return spec_; }
  const FilterFunction& filter() const { return filter_; }
  const std::vector<JumpComponents>& jump_components() const { return comps_; }
  std::string jump_set_id() const;

  /// Gibbs weights w_i = e^{-beta(E_i - E_0)}/Z in the eigenbasis (ascending E).
  const RealVector& gibbs_weights() const { return weights_; }
  double log_partition_function() const { return log_z_; }

  /// Schrodinger-picture action on a density matrix given in the eigenbasis.
  Matrix apply(const Matrix& rho_eig) const;
  /// Hilbert-Schmidt adjoint of apply (conjugate-transposed superoperator).
  Matrix apply_adjoint(const Matrix& y_eig) const;
  /// Self-adjoint HS-picture action on an operator given in the eigenbasis.
  Matrix apply_hs(const Matrix& x_eig) const;

  Matrix schrodinger_matrix() const;
  Matrix hs_matrix() const;
  SuperOperator to_superoperator(Picture picture) const;

  /// Spectral norm of the Schrodinger superoperator by deterministic power
  /// iteration (matrix-free).
  double norm_estimate(int max_iters = 120, double tol = 1e-10) const;

  /// ||L(sigma_beta)||_1 / ||L||.
  double fixed_point_residual() const;

  Matrix to_eigenbasis(const Matrix& a) const { return spec_.to_eigenbasis(a); }
  Matrix from_eigenbasis(const Matrix& a) const { return spec_.from_eigenbasis(a); }

  /// Derivation superoperator d^alpha_t as a d^2 x d^2 matrix (eigenbasis):
  /// sum_nu f^(nu) e^{i nu t} (A_nu x - e^{beta nu/2} x A_nu). The right
  /// coefficient is evaluated as conj(f^(-nu)) (exact under KMS, stable).
  Matrix derivation_matrix(int jump, double t) const;
  Matrix derivation_apply(int jump, double t, const Matrix& x_eig) const;
  int n_jumps() const { return static_cast<int>(comps_.size()); }

 private:
  void build_drift();

  SpectralDecomposition spec_;
  FilterFunction filter_;
  double sigma_e_ = kInf;
  Options opt_;
  std::vector<JumpComponents> comps_;
  std::vector<std::string> jump_labels_;
  RealVector weights_;
  double log_z_ = 0.0;
  // precomputed drift operators (eigenbasis)
  Matrix drift_left_;   // Schrodinger: G_L rho
  Matrix drift_right_;  // Schrodinger: rho G_R
  Matrix drift_hs_;     // HS: {D, x}/1 with D Hermitian
};

double gaussian_pair_weight(double nu1, double nu2, double sigma_e);

/// L^alpha = sum_nu f^(nu) A^alpha_nu in the original basis, plus the
/// completeness defect ||sum_nu A_nu - A||_max.
struct DressedJump {
  Matrix dressed;
  double completeness_defect = 0.0;
};
DressedJump dressed_jump(const Matrix& a, const FilterFunction& filter,
                         const SpectralDecomposition& spec);

/// Coherent term B (original basis), Hermitian. Requires the jump set to be
/// closed under adjoints.
FockOperator coherent_term(const std::vector<FockOperator>& jumps, const FilterFunction& filter,
                           const SpectralDecomposition& spec, double sigma_e);

/// Closed-form self-adjoint generator for H = h(N) on a single mode with
/// jumps {a, a^dag}; equals the generic pipeline's HS matrix.
Matrix number_diagonal_generator(const std::function<double(int)>& h,
                                 const FilterFunction& filter, const BasisPtr& basis);

struct SelfAdjointReport {
  double hermiticity_defect = 0.0;
  double similarity_defect = 0.0;  // max over random X of ||iota2(L(X)) - cal L(iota2(X))||
  double max_eigenvalue = 0.0;
  double kernel_overlap = 0.0;     // |<sigma^{1/2}, kernel vector>|
  double kernel_residual = 0.0;    // ||L_hs(sigma^{1/2})||_2
};

/// Verifies the HS picture against the spec contract: hermiticity, the
/// iota2 similarity relation on random operators, nonpositive spectrum and
/// sigma^{1/2} in the kernel.
SelfAdjointReport verify_selfadjoint(const GibbsGenerator& gen, int n_random = 5,
                                     unsigned seed = 12345);

struct DirichletResult {
  double direct = 0.0;      // -<x, L_hs x>
  double quadrature = 0.0;  // cosh-weighted time integral of the derivations
  double residual = 0.0;    // quadrature convergence estimate
};

/// Two-route Dirichlet form evaluation; the routes agree within 1e-6 for
/// KMS filters.
DirichletResult dirichlet_form(const GibbsGenerator& gen, const Matrix& x_original_basis,
                               double quad_tol = 1e-9);

/// Adaptive evaluation of integral dt F(t) / (beta cosh(2 pi t / beta)).
double integrate_cosh_weighted(const std::function<double(double)>& f, double beta, double tol,
                               double* residual_out = nullptr);

}  // namespace boselab

#endif  // BOSELAB_GENERATOR_HPP
