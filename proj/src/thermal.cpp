#include "boselab/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace boselab {

GibbsState gibbs_state(const Matrix& h, double beta, const BasisPtr& basis,
                       const std::string& label) {
  if (beta <= 0) throw std::invalid_argument("gibbs_state: beta must be > 0");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  if (es.info() != Eigen::Success) throw NumericalError("gibbs_state: eigensolver failed");
  const RealVector& e = es.eigenvalues();
  const double e0 = e.minCoeff();
  RealVector w = (-beta * (e.array() - e0)).exp();
  const double z = w.sum();
  w /= z;
  GibbsState g;
  g.basis = basis;
  g.rho = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  g.rho = hermitize(g.rho);
  g.beta = beta;
  g.log_partition = std::log(z) - beta * e0;
  g.source_label = label;
  return g;
}

GibbsState gibbs_state(const FockOperator& h, double beta) {
  return gibbs_state(h.matrix, beta, h.basis, h.label);
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
  return trace_norm(rho - sigma);
}

double fixed_point_residual(const GibbsGenerator& gen) { return gen.fixed_point_residual(); }

Evolver::Evolver(const GibbsGenerator& gen, double condition_cap) : gen_(gen) {
  s4_ = gen.gibbs_weights().array().pow(0.25);
  const double cond = std::pow(s4_.maxCoeff() / s4_.minCoeff(), 2.0);
  if (!std::isfinite(cond) || cond > condition_cap || s4_.minCoeff() <= 0.0) {
    fallback_ = true;
    schrodinger_ = gen.schrodinger_matrix();
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(gen.hs_matrix()));
  if (es.info() != Eigen::Success) throw NumericalError("Evolver: HS eigensolver failed");
  hs_vectors_ = es.eigenvectors();
  hs_evals_ = es.eigenvalues();
}

Matrix Evolver::evolve(const Matrix& rho0_original, double t) const {
  if (t < 0) throw std::invalid_argument("Evolver::evolve: t must be >= 0");
  const int d = gen_.dim();
  Matrix rho = gen_.to_eigenbasis(rho0_original);
  if (fallback_) {
    Matrix propagator = (t * schrodinger_).exp();
    Matrix out = vec_to_matrix(propagator * matrix_to_vec(rho), d);
    return gen_.from_eigenbasis(out);
  }
  // x0 = sigma^{-1/4} rho sigma^{-1/4}, spectral exponential, transform back
  Matrix x = rho;
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) x(r, c) /= s4_(r) * s4_(c);
  Vector coeffs = hs_vectors_.adjoint() * matrix_to_vec(x);
  for (int i = 0; i < coeffs.size(); ++i) coeffs(i) *= std::exp(t * hs_evals_(i));
  Matrix xt = vec_to_matrix(hs_vectors_ * coeffs, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) xt(r, c) *= s4_(r) * s4_(c);
  return gen_.from_eigenbasis(hermitize(xt));
}

double warm_start_constant(const Matrix& rho, const GibbsState& gibbs, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(gibbs.rho));
  if (es.info() != Eigen::Success)
    throw NumericalError("warm_start_constant: eigensolver failed");
  if (es.eigenvalues().minCoeff() <= rank_tol)
    throw NumericalError("warm_start_constant: Gibbs state is numerically rank-deficient (min "
                         "eigenvalue " +
                         std::to_string(es.eigenvalues().minCoeff()) + ")");
  RealVector inv_sqrt = es.eigenvalues().array().rsqrt();
  Matrix m = inv_sqrt.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint() * rho *
             es.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es2(hermitize(m));
  return es2.eigenvalues().maxCoeff();
}

MixingRecord mixing_time(const GibbsGenerator& gen, const Evolver& evolver,
                         const Matrix& rho_ini_original, double epsilon, double gap,
                         double warm_start) {
  if (epsilon <= 0 || epsilon >= 1)
    throw std::invalid_argument("mixing_time: epsilon must be in (0, 1)");
  if (gap <= 0) throw std::invalid_argument("mixing_time: gap must be > 0");
  MixingRecord rec;
  rec.epsilon = epsilon;
  rec.gap = gap;
  rec.warm_start = warm_start;
  rec.bound = 2.0 * std::log(warm_start / epsilon) / gap;

  Matrix sigma = gen.from_eigenbasis(
      Matrix(gen.gibbs_weights().cast<Complex>().asDiagonal()));
  auto dist_at = [&](double t) {
    return trace_distance(evolver.evolve(rho_ini_original, t), sigma);
  };

  const double d0 = dist_at(0.0);
  rec.trajectory.push_back({0.0, d0});
  if (d0 <= epsilon) {
    rec.t_mix = 0.0;
    rec.bound_satisfied = true;
    rec.monotone = true;
    return rec;
  }

  // bracket the crossing on the trajectory log
  double t_hi = 1.0 / gap;
  double d_hi = dist_at(t_hi);
  rec.trajectory.push_back({t_hi, d_hi});
  int guard = 0;
  while (d_hi > epsilon && guard++ < 200) {
    t_hi *= 1.6;
    d_hi = dist_at(t_hi);
    rec.trajectory.push_back({t_hi, d_hi});
  }
  if (d_hi > epsilon)
    throw NumericalError("mixing_time: failed to bracket the mixing time");
  double t_lo = 0.0;
  for (const auto& [t, dist] : rec.trajectory)
    if (dist > epsilon) t_lo = std::max(t_lo, t);

  for (int it = 0; it < 80 && (t_hi - t_lo) > 1e-10 * std::max(1.0, t_hi); ++it) {
    double mid = 0.5 * (t_lo + t_hi);
    double dm = dist_at(mid);
    rec.trajectory.push_back({mid, dm});
    (dm > epsilon ? t_lo : t_hi) = mid;
  }
  rec.t_mix = t_hi;
  rec.bound_satisfied = rec.t_mix <= rec.bound;

  std::sort(rec.trajectory.begin(), rec.trajectory.end());
  rec.monotone = true;
  for (size_t i = 1; i < rec.trajectory.size(); ++i)
    if (rec.trajectory[i].second > rec.trajectory[i - 1].second + 1e-8) rec.monotone = false;
  return rec;
}

TruncationStudy truncation_convergence_study(TruncationModel model, const LatticeSpec& lattice,
                                             const BoseHubbardParams& params, double beta,
                                             const std::vector<int>& truncation_grid,
                                             const BasisPtr& basis) {
  FockOperator reference = build_bose_hubbard(lattice, params, basis);
  GibbsState ref_state = gibbs_state(reference, beta);

  TruncationStudy study;
  study.truncations = truncation_grid;
  study.reference_dimension = basis->dim();
  for (int m : truncation_grid) {
    FockOperator truncated = model == TruncationModel::superfluid
                                 ? build_superfluid_truncation(lattice, params, m, basis)
                                 : build_mott_truncation(lattice, params, m, basis);
    study.distances.push_back(trace_distance(ref_state.rho, gibbs_state(truncated, beta).rho));
  }
  for (size_t i = 1; i < study.distances.size(); ++i)
    if (study.distances[i] > study.distances[i - 1] + 1e-10) study.monotone = false;

  // least-squares slope of log distance vs truncation, skipping exact zeros
  std::vector<double> xs, ys;
  for (size_t i = 0; i < study.distances.size(); ++i) {
    if (study.distances[i] > 1e-14) {
      xs.push_back(study.truncations[i]);
      ys.push_back(std::log(study.distances[i]));
    }
  }
  if (xs.size() >= 2) {
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    study.fitted_log_slope = num / den;
  }
  return study;
}

double exact_free_energy(const Matrix& h, double beta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  if (es.info() != Eigen::Success)
    throw NumericalError("exact_free_energy: eigensolver failed");
  const double e0 = es.eigenvalues().minCoeff();
  double z = (-beta * (es.eigenvalues().array() - e0)).exp().sum();
  return e0 - std::log(z) / beta;
}

double exact_free_energy_quadratic(const RealVector& energies, double beta) {
  double f = 0.0;
  for (int k = 0; k < energies.size(); ++k) {
    if (energies(k) <= 0)
      throw NumericalError("exact_free_energy_quadratic: mode energy " +
                           std::to_string(energies(k)) +
                           " <= 0 violates the Gibbs hypothesis");
    f += std::log(1.0 - std::exp(-beta * energies(k))) / beta;
  }
  return f;
}

uint64_t derive_seed(uint64_t seed, uint64_t k) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

/// Portable uniform in [0,1) from splitmix64 output.
class SplitMix {
 public:
  explicit SplitMix(uint64_t seed) : state_(seed) {}
  double uniform() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  uint64_t state_;
};

}  // namespace

FreeEnergyResult thermo_integration_estimate(const LatticeSpec& lattice,
                                             const BoseHubbardParams& params, double beta,
                                             const BasisPtr& basis, const FreeEnergyOptions& opt,
                                             double target_eps, double target_delta) {
  if (opt.shots && !opt.seed)
    throw std::invalid_argument(
        "thermo_integration_estimate: sampling requires a seed (reproducibility contract)");
  if (opt.grid < 1) throw std::invalid_argument("thermo_integration_estimate: grid must be >= 1");

  BoseHubbardParams ap = params.is_main_text() ? convert_parametrization(params) : params;
  auto [eta, eta_prime] = *ap.eta;

  Matrix h0 = build_hopping_part(lattice, ap.J, eta, basis).matrix;
  Matrix v = build_onsite_part(ap.U, eta_prime, basis).matrix;

  const int cap = opt.observable_cutoff < 0 ? basis->per_mode_cutoff : opt.observable_cutoff;
  // H_M = Pi_M V Pi_M, diagonal in the Fock basis
  const int d = basis->dim();
  RealVector hm = RealVector::Zero(d);
  for (int j = 0; j < d; ++j) {
    bool inside = true;
    for (int n : basis->states[j]) inside = inside && (n <= cap);
    if (inside) hm(j) = std::real(v(j, j));
  }

  Matrix path_v;  // dH/ds of the integrated path
  if (opt.source == GibbsSource::superfluid) {
    FockOperator hsf = build_superfluid_truncation(lattice, ap, opt.source_truncation, basis);
    path_v = hsf.matrix - h0;
  } else {
    path_v = v;
  }

  FreeEnergyResult res;
  res.grid = opt.grid;
  res.observable_cutoff = cap;
  res.source_truncation = opt.source == GibbsSource::superfluid ? opt.source_truncation : 0;
  res.exact = exact_free_energy(h0 + v, beta) - exact_free_energy(h0, beta);
  res.shots = opt.shots.value_or(0);
  res.seed = opt.seed.value_or(0);

  const double hm_range = hm.maxCoeff() - hm.minCoeff();
  double det_sum = 0.0, sampled_sum = 0.0;
  for (int k = 0; k < opt.grid; ++k) {
    const double s = static_cast<double>(k) / opt.grid;
    GibbsState g = gibbs_state(Matrix(h0 + s * path_v), beta, basis, "H(s)");
    RealVector probs(d);
    for (int j = 0; j < d; ++j) probs(j) = std::max(0.0, std::real(g.rho(j, j)));
    probs /= probs.sum();
    const double mean = probs.dot(hm);
    det_sum += mean;
    if (opt.shots) {
      // inverse-CDF computational-basis sampling, per-point derived stream
      RealVector cdf(d);
      std::partial_sum(probs.data(), probs.data() + d, cdf.data());
      SplitMix rng(derive_seed(*opt.seed, k));
      double acc = 0.0;
      for (int shot = 0; shot < *opt.shots; ++shot) {
        const double u = rng.uniform();
        int lo = 0, hi = d - 1;
        while (lo < hi) {
          int mid = (lo + hi) / 2;
          if (cdf(mid) < u)
            lo = mid + 1;
          else
            hi = mid;
        }
        acc += hm(lo);
      }
      sampled_sum += acc / *opt.shots;
    }
  }
  res.deterministic = det_sum / opt.grid;
  res.estimate = opt.shots ? sampled_sum / opt.grid : res.deterministic;
  res.abs_error = std::abs(res.estimate - res.exact);

  if (opt.shots) {
    // Hoeffding over all grid * shots draws with range hm_range
    const double total = static_cast<double>(opt.grid) * *opt.shots;
    res.hoeffding_radius = hm_range * std::sqrt(std::log(2.0 / 0.05) / (2.0 * total));
  }
  // per-point shot count for accuracy target_eps with failure target_delta
  res.hoeffding_shots = static_cast<uint64_t>(
      std::ceil(hm_range * hm_range * std::log(2.0 / target_delta) /
                (2.0 * target_eps * target_eps)));
  return res;
}

}  // namespace boselab
