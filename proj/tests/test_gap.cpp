#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "boselab/gap.hpp"
#include "boselab/thermal.hpp"

using namespace boselab;

namespace {

std::vector<FockOperator> ladder_set(const BasisPtr& basis) {
  std::vector<FockOperator> jumps;
  for (int m = 0; m < basis->n_modes; ++m) {
    jumps.push_back(ladder_operator(basis, m, LadderKind::annihilate));
    jumps.push_back(ladder_operator(basis, m, LadderKind::create));
  }
  return jumps;
}

// roots of the characteristic cubic via the trigonometric method; the
// independent eigenvalue oracle for 3x3 Hermitian blocks
std::vector<double> cubic_eigenvalues(const Matrix& m) {
  REQUIRE(m.rows() == 3);
  double c2 = std::real(m.trace());
  double c1 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      c1 += std::real(m(i, i) * m(j, j) - m(i, j) * m(j, i));
  double c0 = std::real(m.determinant());
  // lambda = x + c2/3 gives x^3 + p x + q = 0
  double p = c1 - c2 * c2 / 3.0;
  double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
  double r = std::sqrt(-4.0 * p / 3.0);
  double arg = std::clamp(-4.0 * q / (r * r * r), -1.0, 1.0);
  double phi = std::acos(arg) / 3.0;
  std::vector<double> roots;
  for (int k = 0; k < 3; ++k)
    roots.push_back(r * std::cos(phi - 2.0 * M_PI * k / 3.0) + c2 / 3.0);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

TEST_CASE("cubic oracle sanity") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = -1.0;
  m(1, 1) = 0.5;
  m(2, 2) = 2.0;
  m(0, 1) = m(1, 0) = 0.3;
  m(1, 2) = m(2, 1) = -0.2;
  auto roots = cubic_eigenvalues(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  for (int i = 0; i < 3; ++i) CHECK(roots[i] == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-10));
}

TEST_CASE("spectral decomposition clustering") {
  Matrix d3 = Matrix::Zero(3, 3);
  d3(1, 1) = 1.0;
  d3(2, 2) = 2.0;
  SpectralDecomposition spec = spectral_decompose(d3);
  CHECK(spec.n_clusters() == 3);
  CHECK(spec.reconstruction_defect(d3) <= 1e-10);

  Matrix neardeg = Matrix::Zero(3, 3);
  neardeg(1, 1) = 1e-14;
  neardeg(2, 2) = 2.0;
  SpectralDecomposition spec2 = spectral_decompose(neardeg, 1e-9);
  CHECK(spec2.n_clusters() == 2);
  CHECK(spec2.clusters[0].size() == 2);

  // projector partition of unity
  Matrix sum = Matrix::Zero(3, 3);
  for (int c = 0; c < spec2.n_clusters(); ++c) sum += spec2.projector(c);
  CHECK(max_abs(sum - Matrix::Identity(3, 3)) <= 1e-10);
}

TEST_CASE("bose hubbard sector eigenvalues match the cubic oracle") {
  auto basis = build_basis(2, 2, 2);
  LatticeSpec lattice = build_lattice(1, 2);
  FockOperator h = build_bose_hubbard(lattice, appendix_params(0.4, 1.3, 1.2, 0.9), basis);
  auto blocks = number_sector_blocks(h);
  REQUIRE(blocks[2].block.rows() == 3);
  std::vector<double> oracle = cubic_eigenvalues(blocks[2].block);
  Eigen::SelfAdjointEigenSolver<Matrix> es(blocks[2].block);
  for (int i = 0; i < 3; ++i)
    CHECK(es.eigenvalues()(i) == doctest::Approx(oracle[i]).epsilon(1e-10));
}

TEST_CASE("qOU gap equals the closed-form rate difference") {
  auto basis = build_basis(1, 40);
  Matrix n = total_number_operator(basis).matrix;
  struct Choice {
    const char* name;
    FilterFunction f;
  };
  std::vector<Choice> choices = {{"metropolis b=0.8", metropolis_filter(0.8)},
                                 {"metropolis b=1.0", metropolis_filter(1.0)},
                                 {"metropolis b=1.5", metropolis_filter(1.5)},
                                 {"gaussian b=1.0", gaussian_kms_filter(1.0)},
                                 {"gaussian b=1.25 sf=0.8", gaussian_kms_filter(1.25, 0.8)}};
  for (auto& [name, f] : choices) {
    CAPTURE(name);
    auto [nup, num] = birth_death_rates(f, 1.0);
    GibbsGenerator gen(n, ladder_set(basis), f, kInf);
    GapReport rep = spectral_gap(gen);
    CHECK(std::abs(rep.gap - (num - nup) / 2.0) <= 1e-8);
    CHECK(rep.kernel_dimension == 1);
  }

  // metropolis beta = 1 numeric value from the rate formulas
  GapReport rep =
      spectral_gap(GibbsGenerator(n, ladder_set(basis), metropolis_filter(1.0), kInf));
  CHECK(rep.gap == doctest::Approx(0.25696).epsilon(2e-4));
}

TEST_CASE("mean-field gap is positive and continuous in psi") {
  auto basis = build_basis(1, 12);
  FilterFunction f = metropolis_filter(1.0);
  std::vector<double> psis = {0.2, 0.1, 0.05, 0.025};
  double gap0;
  {
    MeanFieldParams p{0.0, 2.0, 0.0};
    GibbsGenerator gen(build_mean_field(p, basis).matrix, ladder_set(basis), f, kInf);
    gap0 = spectral_gap(gen).gap;
  }
  CHECK(gap0 > 1e-6);
  double prev_dev = kInf;
  for (double psi : psis) {
    MeanFieldParams p{0.0, 2.0, psi};
    GibbsGenerator gen(build_mean_field(p, basis).matrix, ladder_set(basis), f, kInf);
    double gap = spectral_gap(gen).gap;
    CHECK(gap > 1e-6);
    double dev = std::abs(gap - gap0);
    CHECK(dev <= prev_dev + 1e-6);  // monotone trend within slack
    prev_dev = dev;
  }
}

TEST_CASE("ladder block operator") {
  CHECK(ladder_block_kappa(0.25, 1.0, 2) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(ladder_block_kappa(0.25, 1.0, 0) == doctest::Approx(-0.25 * 0.75).epsilon(1e-14));

  auto basis = build_basis(1, 6);
  LadderBlock lb = ladder_block_operator(0.25, 1.0, basis);
  const int d = basis->dim();
  // action on |1><1| (n + m = 2)
  Vector e = Vector::Zero(d * d);
  e(1 * d + 1) = 1.0;
  CHECK(((lb.matrix * e) - lb.kappa[2] * e).norm() <= 1e-14);

  // equal rates collapse the operator to zero
  LadderBlock zero = ladder_block_operator(0.3, 0.3, basis);
  CHECK(max_abs(zero.matrix) <= 1e-15);
}

TEST_CASE("comparison defect") {
  auto basis = build_basis(1, 24);
  FilterFunction f = metropolis_filter(1.0);
  Matrix n = total_number_operator(basis).matrix;
  GibbsGenerator gen(n, ladder_set(basis), f, kInf);
  Matrix hs = gen.hs_matrix();
  auto [nup, num] = birth_death_rates(f, 1.0);
  LadderBlock lb = ladder_block_operator(nup, num, basis);
  ComparisonDefect cd = comparison_defect(hs, lb, basis);

  // the defect on |0><0| equals the direct quadratic-form formula
  const int d = basis->dim();
  Vector e00 = Vector::Zero(d * d);
  e00(0) = 1.0;
  Matrix diff = hermitize(-hs) - lb.matrix;
  double direct = std::real((e00.adjoint() * (diff * e00))(0, 0));
  double formula = nup + nup * (num - nup);  // (-L on |0><0|) minus kappa_0
  CHECK(direct == doctest::Approx(formula).epsilon(1e-12));

  // sigma^{1/2} is a null direction of the form difference; on the truncated
  // space the identity holds up to the geometric tail ~ d e^{-beta d}
  RealVector sq = gen.gibbs_weights().array().sqrt();
  Vector sv = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) sv(i * d + i) = sq(i);
  double at_fixed_point = std::real((sv.adjoint() * (diff * sv))(0, 0));
  double tail = 4.0 * d * std::exp(-1.0 * d);
  CHECK(std::abs(at_fixed_point) <= tail);

  // for the unnormalized Metropolis filter the quadratic-form comparison
  // fails beyond truncation effects; reported as a finding, not an error
  CHECK(cd.min_eig_interior < -1e-3);
  CHECK_FALSE(cd.inequality_holds);
  CHECK(cd.min_eig_full <= cd.min_eig_interior + 1e-12);
}

TEST_CASE("gap perturbation bound") {
  auto basis = build_basis(1, 10);
  FilterFunction f = metropolis_filter(1.0);
  Matrix n = total_number_operator(basis).matrix;
  auto jumps = ladder_set(basis);

  SUBCASE("identical Hamiltonians give delta zero") {
    PerturbationAudit audit = gap_perturbation_bound(n, n, jumps, f);
    CHECK(audit.delta <= 1e-12);
    CHECK(audit.applicable);
    CHECK(audit.bound_value == doctest::Approx(audit.gap_base).epsilon(1e-9));
    CHECK(audit.satisfied);
  }

  SUBCASE("small diagonal perturbation") {
    Matrix hp = n;
    hp(0, 0) += 0.01;
    PerturbationAudit audit = gap_perturbation_bound(n, hp, jumps, f);
    CHECK(audit.applicable);
    CHECK(audit.satisfied);
    CHECK(audit.delta < audit.gap_base);
  }

  SUBCASE("large perturbation is inconclusive") {
    Matrix hp = n;
    hp(0, 0) += 3.0;
    hp(1, 1) += 1.5;
    PerturbationAudit audit = gap_perturbation_bound(n, hp, jumps, f);
    CHECK_FALSE(audit.applicable);
  }
}

TEST_CASE("finite rank remainder") {
  auto basis = build_basis(1, 8);
  const int d = basis->dim();
  FilterFunction f = metropolis_filter(1.0);
  Matrix n = total_number_operator(basis).matrix;
  Matrix a = ladder_operator(basis, 0, LadderKind::annihilate).matrix;

  Matrix p = Matrix::Zero(d, d);
  p(1, 1) = 1.0;
  Matrix r = Matrix::Zero(d, d);
  r(1, 1) = 0.3;

  SUBCASE("zero perturbation gives zero remainder") {
    FiniteRankRemainder rem = finite_rank_remainder(n, Matrix::Zero(d, d), p, a, f, 0.25);
    CHECK(max_abs(rem.remainder) <= 1e-12);
    CHECK(rem.numerical_rank == 0);
  }

  SUBCASE("structure and the matrix-exponential oracle") {
    for (double s : {0.25, -0.25}) {
      FiniteRankRemainder rem = finite_rank_remainder(n, r, p, a, f, s);
      CHECK(rem.qrq_norm <= 1e-8);
      CHECK(rem.numerical_rank >= 1);

      // brute force: conjugate the dressed jumps with explicit matrix
      // exponentials instead of the eigenbasis scaling
      Matrix h = n + r;
      SpectralDecomposition spec = spectral_decompose(h);
      SpectralDecomposition spec0 = spectral_decompose(n);
      Matrix lh = dressed_jump(a, f, spec).dressed;
      Matrix lh0 = dressed_jump(a, f, spec0).dressed;
      Matrix oracle = Matrix((s * h).exp()) * lh * Matrix((-s * h).exp()) -
                      Matrix((s * n).exp()) * lh0 * Matrix((-s * n).exp());
      CHECK(max_abs(rem.remainder - oracle) <= 1e-9);

      Eigen::JacobiSVD<Matrix> svd(oracle);
      int oracle_rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-8) ++oracle_rank;
      CHECK(rem.numerical_rank == oracle_rank);
    }
  }

  SUBCASE("eigenvalue collision is refused") {
    Matrix rc = Matrix::Zero(d, d);
    rc(1, 1) = 1.0;  // shifts level 1 exactly onto level 2
    CHECK_THROWS_AS(finite_rank_remainder(n, rc, p, a, f, 0.25), NumericalError);
  }

  SUBCASE("preconditions") {
    Matrix bad_r = Matrix::Zero(d, d);
    bad_r(3, 3) = 0.2;  // outside P
    CHECK_THROWS(finite_rank_remainder(n, bad_r, p, a, f, 0.25));
  }
}

TEST_CASE("mean-field eigen audit") {
  SUBCASE("psi = 0 gives exactly zero deviations") {
    auto basis = build_basis(1, 16);
    auto rows = meanfield_eigen_audit({0.0, 2.0, 0.0}, basis, 4, 10);
    for (const auto& r : rows) {
      CHECK(r.eig_deviation <= 1e-12);
      CHECK(r.vec_deviation <= 1e-12);
      CHECK(r.overlap == doctest::Approx(1.0));
      CHECK(r.eig_pass);
      CHECK(r.vec_pass);
    }
  }

  SUBCASE("acceptance instance passes all bounds") {
    auto basis = build_basis(1, 16);
    auto rows = meanfield_eigen_audit({0.0, 2.0, 0.05}, basis, 4, 10);
    REQUIRE(rows.size() == 7);
    for (const auto& r : rows) {
      CHECK(r.eig_pass);
      CHECK(r.vec_pass);
      CHECK_FALSE(r.ambiguous);
    }
  }

  SUBCASE("unperturbed separation bound") {
    // |E_m0 - E_n0| >= (U/4)(m + n + 1) for n >= 3 + 4 mu/U, any m != n
    double mu = 0.3, u = 1.7;
    auto e0 = [&](int k) { return -mu * k + 0.5 * u * k * (k - 1.0); };
    int nmin = static_cast<int>(std::ceil(3.0 + 4.0 * mu / u));
    for (int n = nmin; n <= 20; ++n)
      for (int m = 0; m <= 24; ++m) {
        if (m == n) continue;
        CHECK(std::abs(e0(m) - e0(n)) >= u / 4.0 * (m + n + 1) - 1e-12);
      }
  }

  SUBCASE("preconditions") {
    auto basis = build_basis(1, 16);
    CHECK_THROWS(meanfield_eigen_audit({0.0, 2.0, 0.2}, basis, 4, 10));   // |psi| >= U/16
    CHECK_THROWS(meanfield_eigen_audit({0.0, 2.0, 0.05}, basis, 2, 10));  // n below window
    CHECK_THROWS(meanfield_eigen_audit({0.0, 2.0, 0.05}, basis, 4, 14));  // too close to cutoff
  }
}
