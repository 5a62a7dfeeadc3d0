#ifndef BOSELAB_THERMAL_HPP
#define BOSELAB_THERMAL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "boselab/generator.hpp"
#include "boselab/models.hpp"

namespace boselab {

struct GibbsState {
  BasisPtr basis;
  Matrix rho;                // unit trace, original basis
  double beta = 1.0;
  double log_partition = 0.0;  // log Z_beta
  std::string source_label;
};

GibbsState gibbs_state(const FockOperator& h, double beta);
GibbsState gibbs_state(const Matrix& h, double beta, const BasisPtr& basis = nullptr,
                       const std::string& label = "H");

/// Unnormalized trace distance ||rho - sigma||_1 in [0, 2].
double trace_distance(const Matrix& rho, const Matrix& sigma);

/// ||cal L(sigma_beta)||_1 / ||cal L||.
double fixed_point_residual(const GibbsGenerator& gen);

/// Exact semigroup evolution e^{t cal L}(rho0) through the HS-picture
/// eigendecomposition of the generator. The eigensolve is cached, so repeated
/// times are cheap. If sigma^{-1/4} is too ill-conditioned the evolver falls
/// back to scaling-and-squaring on the Schrodinger matrix and reports it.
class Evolver {
 public:
  Evolver(const GibbsGenerator& gen, double condition_cap = 1e140);

  Matrix evolve(const Matrix& rho0_original, double t) const;
  bool used_fallback() const { return fallback_; }

 private:
  const GibbsGenerator& gen_;
  bool fallback_ = false;
  // spectral path data (eigenbasis of H)
  RealVector s4_;       // sigma^{1/4} diagonal
  Matrix hs_vectors_;   // eigenvectors of the HS matrix
  RealVector hs_evals_;
  Matrix schrodinger_;  // fallback matrix
};

/// Smallest c with rho <= c sigma: max eigenvalue of sigma^{-1/2} rho sigma^{-1/2}.
double warm_start_constant(const Matrix& rho, const GibbsState& gibbs,
                           double rank_tol = 1e-290);

struct MixingRecord {
  double epsilon = 0.0;
  double t_mix = 0.0;
  double bound = 0.0;  // 2 log(c/eps)/gap
  double warm_start = 0.0;
  double gap = 0.0;
  std::vector<std::pair<double, double>> trajectory;  // (t, trace distance)
  bool bound_satisfied = false;
  bool monotone = false;
};

MixingRecord mixing_time(const GibbsGenerator& gen, const Evolver& evolver,
                         const Matrix& rho_ini_original, double epsilon, double gap,
                         double warm_start);

enum class TruncationModel { superfluid, mott };

struct TruncationStudy {
  std::vector<int> truncations;
  std::vector<double> distances;
  double fitted_log_slope = 0.0;
  bool monotone = true;
  double reference_dimension = 0;
};

/// Trace distance of sigma_beta(H_model(M')) to the reference sigma_beta(H_BH)
/// built at the full configured truncation, with a least-squares slope of
/// log-distance vs M'.
TruncationStudy truncation_convergence_study(TruncationModel model, const LatticeSpec& lattice,
                                             const BoseHubbardParams& params, double beta,
                                             const std::vector<int>& truncation_grid,
                                             const BasisPtr& basis);

/// F = -log Tr e^{-beta H} / beta, dense route.
double exact_free_energy(const Matrix& h, double beta);

/// Closed form for quadratic H0 = sum eps_k b_k^dag b_k on the untruncated
/// space: F = beta^{-1} sum_k log(1 - e^{-beta eps_k}); requires eps_k > 0.
double exact_free_energy_quadratic(const RealVector& energies, double beta);

enum class GibbsSource { exact_bh, superfluid };

struct FreeEnergyOptions {
  int grid = 100;                 // Riemann grid L
  int observable_cutoff = -1;     // M for H_M; < 0 means the basis cap
  GibbsSource source = GibbsSource::exact_bh;
  int source_truncation = 0;      // M' when source = superfluid
  std::optional<int> shots;       // sampling per grid point; nullopt = off
  std::optional<uint64_t> seed;   // mandatory when shots is set
};

struct FreeEnergyResult {
  double estimate = 0.0;       // (1/L) sum_k Tr(sigma(H(k/L)) H_M)
  double exact = 0.0;          // dense Delta F of the full path H0 -> H0 + V
  double deterministic = 0.0;  // same estimator with sampling off
  double abs_error = 0.0;      // |estimate - exact|
  int grid = 0;
  int observable_cutoff = 0;
  int source_truncation = 0;
  int shots = 0;
  uint64_t seed = 0;
  double hoeffding_radius = 0.0;    // 95% envelope for the configured shots
  uint64_t hoeffding_shots = 0;     // per-point shots predicted for (eps, delta)
};

/// Thermodynamic-integration estimator of Delta F = F(beta, H0 + V) - F(beta, H0)
/// over the left-endpoint Riemann grid k/L, with observable
/// H_M = Pi_M V Pi_M (diagonal in the Fock basis). Sampling draws
/// computational-basis outcomes from the exact Gibbs distribution with a
/// per-grid-point seed derived from (seed, k).
FreeEnergyResult thermo_integration_estimate(const LatticeSpec& lattice,
                                             const BoseHubbardParams& params, double beta,
                                             const BasisPtr& basis, const FreeEnergyOptions& opt,
                                             double target_eps = 1e-2, double target_delta = 0.05);

/// Deterministic per-task RNG stream: splitmix64 over (seed, k).
uint64_t derive_seed(uint64_t seed, uint64_t k);

}  // namespace boselab

#endif  // BOSELAB_THERMAL_HPP
