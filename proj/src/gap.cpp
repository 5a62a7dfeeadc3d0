#include "boselab/gap.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace boselab {

GapReport spectral_gap(const Matrix& hs_matrix, double kernel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(-hs_matrix));
  if (es.info() != Eigen::Success) throw NumericalError("spectral_gap: eigensolver failed");
  const RealVector& ev = es.eigenvalues();  // ascending eigenvalues of -L
  GapReport rep;
  rep.kernel_tol = kernel_tol;
  for (int i = 0; i < ev.size() && i < 10; ++i) rep.lowest.push_back(ev(i));
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) <= kernel_tol) ++rep.kernel_dimension;
  rep.kernel_dimension = std::max(rep.kernel_dimension, 1);
  rep.degenerate_kernel = rep.kernel_dimension > 1;
  rep.gap = ev.size() > 1 ? ev(1) : 0.0;
  return rep;
}

GapReport spectral_gap(const GibbsGenerator& gen, double kernel_tol) {
  return spectral_gap(gen.hs_matrix(), kernel_tol);
}

double ladder_block_kappa(double nu_plus, double nu_minus, int k) {
  double diff = nu_plus - nu_minus;
  return 0.5 * diff * diff * k - nu_plus * (nu_minus - nu_plus);
}

LadderBlock ladder_block_operator(double nu_plus, double nu_minus, const BasisPtr& basis) {
  if (basis->n_modes != 1)
    throw std::invalid_argument("ladder_block_operator: single-mode basis required");
  const int d = basis->dim();
  LadderBlock lb;
  lb.nu_plus = nu_plus;
  lb.nu_minus = nu_minus;
  lb.matrix = Matrix::Zero(d * d, d * d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      lb.matrix(m * d + n, m * d + n) = ladder_block_kappa(nu_plus, nu_minus, n + m);
  for (int k = 0; k <= 2 * (d - 1); ++k) lb.kappa.push_back(ladder_block_kappa(nu_plus, nu_minus, k));
  return lb;
}

ComparisonDefect comparison_defect(const Matrix& qou_hs_matrix, const LadderBlock& lb,
                                   const BasisPtr& basis, double tol) {
  const int d = basis->dim();
  if (qou_hs_matrix.rows() != d * d || lb.matrix.rows() != d * d)
    throw std::invalid_argument("comparison_defect: dimension mismatch");
  Matrix diff = hermitize(-qou_hs_matrix) - lb.matrix;

  ComparisonDefect out;
  out.tol = tol;
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(diff));
    out.min_eig_full = es.eigenvalues().minCoeff();
  }
  // interior compression: occupations n, m <= d-3 see only uncorrupted ladder
  // matrix elements, so the compressed form equals the untruncated one
  std::vector<int> keep;
  for (int m = 0; m + 2 < d; ++m)
    for (int n = 0; n + 2 < d; ++n) keep.push_back(m * d + n);
  Matrix inner(keep.size(), keep.size());
  for (size_t c = 0; c < keep.size(); ++c)
    for (size_t r = 0; r < keep.size(); ++r) inner(r, c) = diff(keep[r], keep[c]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(inner));
  out.min_eig_interior = es.eigenvalues().minCoeff();
  out.inequality_holds = out.min_eig_interior >= -tol;
  return out;
}

PerturbationAudit gap_perturbation_bound(const Matrix& h_base, const Matrix& h_pert,
                                         const std::vector<FockOperator>& jumps,
                                         const FilterFunction& filter, double quad_tol) {
  GibbsGenerator base(h_base, jumps, filter, kInf);
  GibbsGenerator pert(h_pert, jumps, filter, kInf);
  PerturbationAudit audit;
  audit.gap_base = spectral_gap(base).gap;
  audit.gap_perturbed = spectral_gap(pert).gap;

  auto norm_sq_diff = [&](double t) {
    double s = 0.0;
    for (int a = 0; a < base.n_jumps(); ++a) {
      Matrix diff = base.derivation_matrix(a, t) - pert.derivation_matrix(a, t);
      s += std::pow(operator_norm(diff), 2);
    }
    return s;
  };
  audit.delta = integrate_cosh_weighted(norm_sq_diff, filter.beta, quad_tol, &audit.quad_residual);
  if (audit.quad_residual > 1e-6)
    throw NumericalError("gap_perturbation_bound: quadrature residual " +
                         std::to_string(audit.quad_residual) + " above 1e-6");

  audit.applicable = audit.gap_base > audit.delta;
  if (audit.applicable) {
    double root = std::sqrt(audit.gap_base) - std::sqrt(audit.delta);
    audit.bound_value = root * root;
    audit.satisfied = audit.gap_perturbed >= audit.bound_value - 1e-8;
  }
  return audit;
}

FiniteRankRemainder finite_rank_remainder(const Matrix& h0, const Matrix& r, const Matrix& p,
                                          const Matrix& bare_jump, const FilterFunction& filter,
                                          double s) {
  const double scale0 = std::max(1.0, max_abs(h0));
  if (max_abs(p * h0 - h0 * p) > 1e-10 * scale0)
    throw std::invalid_argument("finite_rank_remainder: [P, H0] != 0");
  if (max_abs(r - p * r * p) > 1e-12 * std::max(1.0, max_abs(r)))
    throw std::invalid_argument("finite_rank_remainder: R is not supported in P");

  Matrix h = h0 + r;
  SpectralDecomposition spec0 = spectral_decompose(h0);
  SpectralDecomposition spec = spectral_decompose(h);

  // collision guard: perturbed eigenvalues whose eigenvectors live in P must
  // stay clear of the Qbar spectrum, otherwise the spectral projectors mix
  const int d = spec.dim();
  for (int i = 0; i < d; ++i) {
    double p_weight = std::real(
        (spec.eigenvectors.col(i).adjoint() * p * spec.eigenvectors.col(i))(0, 0));
    if (p_weight < 0.5) continue;
    for (int j = 0; j < d; ++j) {
      double q_weight = std::real(
          (spec.eigenvectors.col(j).adjoint() * p * spec.eigenvectors.col(j))(0, 0));
      if (q_weight >= 0.5) continue;
      if (std::abs(spec.eigenvalues(i) - spec.eigenvalues(j)) <= spec.cluster_tol) {
        std::ostringstream os;
        os << "finite_rank_remainder: perturbed P-sector eigenvalue " << spec.eigenvalues(i)
           << " collides with a Qbar-sector eigenvalue within cluster tolerance; jitter the "
              "perturbation parameters";
        throw NumericalError(os.str());
      }
    }
  }

  auto conjugated_dressed = [&](const SpectralDecomposition& sp) {
    Matrix dressed_eig = sp.to_eigenbasis(dressed_jump(bare_jump, filter, sp).dressed);
    // e^{sH} L e^{-sH} is a stable diagonal scaling in the eigenbasis
    Matrix out = dressed_eig;
    for (int c = 0; c < sp.dim(); ++c)
      for (int rr = 0; rr < sp.dim(); ++rr)
        out(rr, c) *= std::exp(s * (sp.eigenvalues(rr) - sp.eigenvalues(c)));
    return sp.from_eigenbasis(out);
  };

  FiniteRankRemainder out;
  out.remainder = conjugated_dressed(spec) - conjugated_dressed(spec0);
  Matrix qbar = Matrix::Identity(p.rows(), p.cols()) - p;
  out.qrq_norm = operator_norm(qbar * out.remainder * qbar);
  Eigen::JacobiSVD<Matrix> svd(out.remainder);
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > out.rank_tol) ++out.numerical_rank;
  return out;
}

std::vector<MeanFieldAuditRow> meanfield_eigen_audit(const MeanFieldParams& params,
                                                     const BasisPtr& basis, int n_min, int n_max,
                                                     double r) {
  const double u = params.U, mu = params.mu;
  const double apsi = std::abs(params.psi);
  if (apsi >= u / 16.0)
    throw std::invalid_argument("meanfield_eigen_audit: requires |psi| < U/16");
  const int cutoff = basis->per_mode_cutoff;
  if (n_min < static_cast<int>(std::ceil(3.0 + 4.0 * mu / u)))
    throw std::invalid_argument("meanfield_eigen_audit: audited n must satisfy n >= 3 + 4 mu/U");
  if (n_max > cutoff - 4)
    throw std::invalid_argument(
        "meanfield_eigen_audit: audited n must sit below the cutoff (n <= cutoff - 4)");
  // the admissible interval (2|psi|, U sqrt(n+1)/8] is open at the left end;
  // the floor keeps r positive at psi = 0 and absorbs eigensolver round-off
  if (r < 0) r = 2.0 * apsi * (1.0 + 1e-6) + 1e-9;

  Matrix h = build_mean_field(params, basis).matrix;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericalError("meanfield_eigen_audit: eigensolver failed");

  std::vector<MeanFieldAuditRow> rows;
  for (int n = n_min; n <= n_max; ++n) {
    MeanFieldAuditRow row;
    row.n = n;
    row.energy_unperturbed = -mu * n + 0.5 * u * n * (n - 1.0) + apsi * apsi;

    // match by overlap maximization with |n>
    Eigen::Index best = 0;
    double best_ov = -1.0, second_ov = -1.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      double ov = std::abs(es.eigenvectors()(n, i));
      if (ov > best_ov) {
        second_ov = best_ov;
        best_ov = ov;
        best = i;
      } else if (ov > second_ov) {
        second_ov = ov;
      }
    }
    row.ambiguous = (best_ov - second_ov) < 1e-3;
    row.energy = es.eigenvalues()(best);

    // phase convention c_n = <n|E_n> >= 0
    Vector vec = es.eigenvectors().col(best);
    Complex cn = vec(n);
    if (std::abs(cn) > 0) vec *= std::conj(cn) / std::abs(cn);
    row.overlap = std::real(vec(n));

    row.eig_deviation = std::abs(row.energy - row.energy_unperturbed);
    row.eig_bound = r * std::sqrt(n + 1.0);
    row.eig_pass = row.eig_deviation < row.eig_bound;

    Vector fock = Vector::Zero(basis->dim());
    fock(n) = 1.0;
    row.vec_deviation = (vec - fock).norm();
    row.vec_bound = 32.0 * apsi / (u * std::sqrt(n + 1.0));
    row.vec_pass = row.vec_deviation <= row.vec_bound;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace boselab
