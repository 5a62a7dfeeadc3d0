#ifndef BOSELAB_MODELS_HPP
#define BOSELAB_MODELS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "boselab/fock.hpp"
#include "boselab/types.hpp"

namespace boselab {

enum class Boundary { open, periodic };

/// Finite D-dimensional square lattice with nearest-neighbour adjacency.
struct LatticeSpec {
  int D = 1;
  int L = 1;
  Boundary boundary = Boundary::open;
  std::vector<std::vector<int>> sites;         // coordinates, row-major order
  std::vector<std::pair<int, int>> adjacency;  // each unordered pair once

  int n_sites() const { return static_cast<int>(sites.size()); }
};

LatticeSpec build_lattice(int D, int L, Boundary boundary = Boundary::open);

/// Bose-Hubbard couplings. Exactly one of the two parametrizations is
/// populated; the appendix (eta, eta') form is the internal canonical one.
struct BoseHubbardParams {
  double J = 0.0;
  double U = 1.0;
  std::optional<double> mu;                      // main-text form
  std::optional<std::pair<double, double>> eta;  // appendix form (eta, eta')

  bool is_main_text() const { return mu.has_value(); }
};

BoseHubbardParams main_text_params(double J, double U, double mu);
BoseHubbardParams appendix_params(double J, double U, double eta, double eta_prime);

/// Convert between the two parametrizations. Main -> appendix fixes eta' = 1;
/// the linear-in-N coefficients then match via eta - U*eta'/2 = -U/2 - mu.
BoseHubbardParams convert_parametrization(const BoseHubbardParams& p);

struct MeanFieldParams {
  double mu = 0.0;
  double U = 1.0;
  Complex psi = 0.0;
};

struct AubryAndreParams {
  double t = 0.0;
  int p = 0;  // flux index, gamma = 2*pi*p/L
  int L = 2;
};

/// Fully symmetric mode-overlap tensor Lambda_{kqrs} = sum_x phi_k phi_q phi_r phi_s.
struct OverlapTensor {
  int n = 0;
  std::vector<double> data;  // dense n^4, index k + n*(q + n*(r + n*s))

  double operator()(int k, int q, int r, int s) const {
    return data[((s * n + r) * n + q) * n + k];
  }
};

/// Normal-mode data of the quadratic hopping Hamiltonian on an open lattice.
struct NormalModeSystem {
  RealMatrix eigenfunctions;          // phi(k, x), rows orthonormal
  RealVector energies;                // eps_k = eta - 2J sum_mu cos(pi k_mu/(L+1))
  std::vector<Matrix> mode_lowering;  // b_k = sum_x phi_k(x) a_x on the FockBasis
  OverlapTensor overlap;              // Lambda_{kqrs}
};

FockOperator build_bose_hubbard(const LatticeSpec& lattice, const BoseHubbardParams& params,
                                const BasisPtr& basis);

/// Quadratic reference H0 = -J sum (a_i^dag a_j + h.c.) + eta sum N_i.
FockOperator build_hopping_part(const LatticeSpec& lattice, double J, double eta,
                                const BasisPtr& basis);

/// Quartic on-site part V = (U/2) sum_i (N_i^2 - eta' N_i).
FockOperator build_onsite_part(double U, double eta_prime, const BasisPtr& basis);

FockOperator build_mean_field(const MeanFieldParams& params, const BasisPtr& basis);

/// Diagonalizes the single-particle hopping problem on an open lattice and
/// lifts the normal modes to the FockBasis. Periodic boundaries are not
/// supported (the sine eigenbasis assumes open ends).
NormalModeSystem normal_mode_transform(const LatticeSpec& lattice, double J, double eta,
                                       const BasisPtr& basis);

/// H_SF = H0 + Pi^b_{M'} V Pi^b_{M'} with Pi^b_{M'} the product of spectral
/// projectors 1{N^b_k <= M'} over the rotated number operators.
FockOperator build_superfluid_truncation(const LatticeSpec& lattice,
                                         const BoseHubbardParams& params, int M_prime,
                                         const BasisPtr& basis);

/// H_MI = Pi^a_M (hopping + eta N) Pi^a_M + V with per-mode Fock projectors.
FockOperator build_mott_truncation(const LatticeSpec& lattice, const BoseHubbardParams& params,
                                   int M, const BasisPtr& basis);

struct AubryAndreResult {
  FockOperator hamiltonian;
  RealMatrix single_particle_energies;   // eps(i1, k1), i1 row, k1 column
  Matrix mode_rotation;                  // W(k, x): b_k = sum_x W(k,x) a_x
};

/// 2D torus in a constant magnetic field (Peierls phases along e1), diagonalized
/// independently per Fourier momentum k1. The j2-direction hopping wraps
/// periodically. Verifies H = sum eps b^dag b under the composed rotation.
AubryAndreResult build_aubry_andre(const AubryAndreParams& params, const BasisPtr& basis);

}  // namespace boselab

#endif  // BOSELAB_MODELS_HPP
