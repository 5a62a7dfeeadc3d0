#include "boselab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace boselab {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// f^(nu) e^{beta nu/4}, evaluated in closed form for the built-in families to
/// dodge exp overflow/underflow at large |nu|.
Complex quarter_weighted(const FilterFunction& f, double nu) {
  switch (f.kind) {
    case FilterKind::metropolis:
      return f.amplitude * std::exp(-std::sqrt(1.0 + f.beta * nu * f.beta * nu) / 4.0);
    case FilterKind::gaussian_kms:
      return f.amplitude * std::exp(-nu * nu / (4.0 * f.sigma_f * f.sigma_f));
    case FilterKind::custom:
      return f(nu) * std::exp(f.beta * nu / 4.0);
  }
  return 0.0;
}

}  // namespace

Matrix vec_to_matrix(const Vector& v, int d) {
  Matrix m(d, d);
  for (int j = 0; j < d; ++j) m.col(j) = v.segment(j * d, d);
  return m;
}

Vector matrix_to_vec(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  Vector v(d * d);
  for (int j = 0; j < d; ++j) v.segment(j * d, d) = m.col(j);
  return v;
}

double gaussian_pair_weight(double nu1, double nu2, double sigma_e) {
  if (std::isinf(sigma_e)) return 1.0;
  double diff = nu1 - nu2;
  return std::exp(-diff * diff / (8.0 * sigma_e * sigma_e));
}

GibbsGenerator::GibbsGenerator(const Matrix& h, std::vector<FockOperator> jumps,
                               FilterFunction filter, double sigma_e, Options opt)
    : filter_(std::move(filter)), sigma_e_(sigma_e), opt_(opt) {
  if (opt_.audit_filter) {
    auto rep = kms_audit(filter_, default_kms_grid(filter_.beta), opt_.kms_tol);
    if (!rep.pass) {
      std::ostringstream os;
      os << "GibbsGenerator: filter '" << filter_.name() << "' fails the KMS audit, violation "
         << rep.max_violation << " at nu = " << rep.worst_nu;
      throw NumericalError(os.str());
    }
  }
  // adjoint closure of the jump set
  for (const auto& j : jumps) {
    double best = kInf;
    for (const auto& k : jumps) best = std::min(best, max_abs(k.matrix - j.matrix.adjoint()));
    if (best > 1e-10 * std::max(1.0, max_abs(j.matrix)))
      throw std::invalid_argument("GibbsGenerator: jump set is not closed under adjoints (jump '" +
                                  j.label + "')");
  }

  spec_ = spectral_decompose(h, opt_.cluster_tol);
  const int d = spec_.dim();

  weights_.resize(d);
  const double e0 = spec_.eigenvalues(0);
  double z = 0.0;
  for (int i = 0; i < d; ++i) {
    weights_(i) = std::exp(-filter_.beta * (spec_.eigenvalues(i) - e0));
    z += weights_(i);
  }
  weights_ /= z;
  log_z_ = std::log(z) - filter_.beta * e0;

  // frequency components per jump over the clustered spectrum
  BohrFrequencySet bohr = bohr_frequencies(spec_);
  for (const auto& jump : jumps) {
    JumpComponents jc;
    jc.label = jump.label;
    jump_labels_.push_back(jump.label);
    Matrix a_eig = spec_.to_eigenbasis(jump.matrix);
    const double scale = std::max(1.0, max_abs(a_eig));
    for (size_t f = 0; f < bohr.frequencies.size(); ++f) {
      Matrix comp = Matrix::Zero(d, d);
      for (auto [ci, cj] : bohr.pairs[f]) {
        for (int r : spec_.clusters[ci])
          for (int c : spec_.clusters[cj]) comp(r, c) = a_eig(r, c);
      }
      if (max_abs(comp) > 1e-14 * scale) {
        jc.freqs.push_back(bohr.frequencies[f]);
        jc.components.push_back(std::move(comp));
      }
    }
    comps_.push_back(std::move(jc));
  }

  build_drift();
}

std::string GibbsGenerator::jump_set_id() const {
  std::string s;
  for (const auto& l : jump_labels_) {
    if (!s.empty()) s += ",";
    s += l;
  }
  return s;
}

void GibbsGenerator::build_drift() {
  const int d = dim();
  const double beta = filter_.beta;
  drift_left_ = Matrix::Zero(d, d);
  drift_right_ = Matrix::Zero(d, d);
  drift_hs_ = Matrix::Zero(d, d);
  for (const auto& jc : comps_) {
    const int nc = static_cast<int>(jc.freqs.size());
    for (int i1 = 0; i1 < nc; ++i1) {
      const double nu1 = jc.freqs[i1];
      const Complex f1c = std::conj(filter_(nu1));
      Matrix sum_left = Matrix::Zero(d, d);
      Matrix sum_right = Matrix::Zero(d, d);
      Matrix sum_hs = Matrix::Zero(d, d);
      for (int i2 = 0; i2 < nc; ++i2) {
        const double nu2 = jc.freqs[i2];
        const double w = sigma_e_ == 0.0 ? (i1 == i2 ? 1.0 : 0.0)
                                         : gaussian_pair_weight(nu1, nu2, sigma_e_);
        if (w == 0.0) continue;
        const Complex f2 = filter_(nu2);
        const double th = std::tanh(beta * (nu2 - nu1) / 4.0);
        const double sech = 1.0 / std::cosh(beta * (nu1 - nu2) / 4.0);
        sum_left += w * 0.5 * (1.0 - th) * f2 * jc.components[i2];
        sum_right += w * 0.5 * (1.0 + th) * f2 * jc.components[i2];
        sum_hs += w * 0.5 * sech * f2 * jc.components[i2];
      }
      Matrix a1d = jc.components[i1].adjoint();
      drift_left_ += f1c * (a1d * sum_left);
      drift_right_ += f1c * (a1d * sum_right);
      drift_hs_ += f1c * (a1d * sum_hs);
    }
  }
}

Matrix GibbsGenerator::apply(const Matrix& rho_eig) const {
  const int d = dim();
  Matrix out = -(drift_left_ * rho_eig) - rho_eig * drift_right_;
  for (const auto& jc : comps_) {
    const int nc = static_cast<int>(jc.freqs.size());
    std::vector<Matrix> t(nc);
    for (int i2 = 0; i2 < nc; ++i2) t[i2] = jc.components[i2] * rho_eig;
    for (int i1 = 0; i1 < nc; ++i1) {
      Matrix m1 = Matrix::Zero(d, d);
      for (int i2 = 0; i2 < nc; ++i2) {
        const double w = sigma_e_ == 0.0
                             ? (i1 == i2 ? 1.0 : 0.0)
                             : gaussian_pair_weight(jc.freqs[i1], jc.freqs[i2], sigma_e_);
        if (w == 0.0) continue;
        m1 += (w * filter_(jc.freqs[i2])) * t[i2];
      }
      out += m1 * (std::conj(filter_(jc.freqs[i1])) * jc.components[i1].adjoint());
    }
  }
  return out;
}

Matrix GibbsGenerator::apply_adjoint(const Matrix& y_eig) const {
  // conjugate-transposed superoperator: rho -> c M rho N becomes
  // y -> conj(c) M^dag y N^dag
  const int d = dim();
  Matrix out = -(drift_left_.adjoint() * y_eig) - y_eig * drift_right_.adjoint();
  for (const auto& jc : comps_) {
    const int nc = static_cast<int>(jc.freqs.size());
    std::vector<Matrix> t(nc);
    for (int i2 = 0; i2 < nc; ++i2) t[i2] = jc.components[i2].adjoint() * y_eig;
    for (int i1 = 0; i1 < nc; ++i1) {
      Matrix m1 = Matrix::Zero(d, d);
      for (int i2 = 0; i2 < nc; ++i2) {
        const double w = sigma_e_ == 0.0
                             ? (i1 == i2 ? 1.0 : 0.0)
                             : gaussian_pair_weight(jc.freqs[i1], jc.freqs[i2], sigma_e_);
        if (w == 0.0) continue;
        m1 += (w * std::conj(filter_(jc.freqs[i2]))) * t[i2];
      }
      out += m1 * (filter_(jc.freqs[i1]) * jc.components[i1]);
    }
  }
  return out;
}

Matrix GibbsGenerator::apply_hs(const Matrix& x_eig) const {
  const int d = dim();
  Matrix out = -(drift_hs_ * x_eig) - x_eig * drift_hs_;
  for (const auto& jc : comps_) {
    const int nc = static_cast<int>(jc.freqs.size());
    std::vector<Matrix> t(nc);
    for (int i2 = 0; i2 < nc; ++i2) t[i2] = jc.components[i2] * x_eig;
    for (int i1 = 0; i1 < nc; ++i1) {
      Matrix m1 = Matrix::Zero(d, d);
      for (int i2 = 0; i2 < nc; ++i2) {
        const double w = sigma_e_ == 0.0
                             ? (i1 == i2 ? 1.0 : 0.0)
                             : gaussian_pair_weight(jc.freqs[i1], jc.freqs[i2], sigma_e_);
        if (w == 0.0) continue;
        m1 += (w * quarter_weighted(filter_, jc.freqs[i2])) * t[i2];
      }
      out += m1 * (std::conj(quarter_weighted(filter_, jc.freqs[i1])) *
                   jc.components[i1].adjoint());
    }
  }
  return out;
}

Matrix GibbsGenerator::schrodinger_matrix() const {
  const int d = dim();
  if (d > opt_.superop_dim_cap)
    throw DimensionCapError("GibbsGenerator: refusing to materialize a " + std::to_string(d * d) +
                            "^2 superoperator (cap d = " + std::to_string(opt_.superop_dim_cap) +
                            ")");
  Matrix id = Matrix::Identity(d, d);
  Matrix out = -kron(id, drift_left_) - kron(drift_right_.transpose(), id);
  for (const auto& jc : comps_) {
    const int nc = static_cast<int>(jc.freqs.size());
    for (int i1 = 0; i1 < nc; ++i1) {
      Matrix m1 = Matrix::Zero(d, d);
      for (int i2 = 0; i2 < nc; ++i2) {
        const double w = sigma_e_ == 0.0
                             ? (i1 == i2 ? 1.0 : 0.0)
                             : gaussian_pair_weight(jc.freqs[i1], jc.freqs[i2], sigma_e_);
        if (w == 0.0) continue;
        m1 += (w * filter_(jc.freqs[i2])) * jc.components[i2];
      }
      out += std::conj(filter_(jc.freqs[i1])) * kron(jc.components[i1].conjugate(), m1);
    }
  }
  return out;
}

Matrix GibbsGenerator::hs_matrix() const {
  const int d = dim();
  if (d > opt_.superop_dim_cap)
    throw DimensionCapError("GibbsGenerator: refusing to materialize a " + std::to_string(d * d) +
                            "^2 superoperator (cap d = " + std::to_string(opt_.superop_dim_cap) +
                            ")");
  Matrix id = Matrix::Identity(d, d);
  Matrix out = -kron(id, drift_hs_) - kron(drift_hs_.transpose(), id);
  for (const auto& jc : comps_) {
    const int nc = static_cast<int>(jc.freqs.size());
    for (int i1 = 0; i1 < nc; ++i1) {
      Matrix m1 = Matrix::Zero(d, d);
      for (int i2 = 0; i2 < nc; ++i2) {
        const double w = sigma_e_ == 0.0
                             ? (i1 == i2 ? 1.0 : 0.0)
                             : gaussian_pair_weight(jc.freqs[i1], jc.freqs[i2], sigma_e_);
        if (w == 0.0) continue;
        m1 += (w * quarter_weighted(filter_, jc.freqs[i2])) * jc.components[i2];
      }
      out += std::conj(quarter_weighted(filter_, jc.freqs[i1])) *
             kron(jc.components[i1].conjugate(), m1);
    }
  }
  return out;
}

SuperOperator GibbsGenerator::to_superoperator(Picture picture) const {
  SuperOperator s;
  s.d = dim();
  s.picture = picture;
  s.matrix = picture == Picture::schrodinger ? schrodinger_matrix() : hs_matrix();
  s.basis_rotation = spec_.eigenvectors;
  s.sigma_e = sigma_e_;
  s.filter_id = filter_.name();
  s.jump_set_id = jump_set_id();
  return s;
}

double GibbsGenerator::norm_estimate(int max_iters, double tol) const {
  const int d = dim();
  // deterministic start: identity direction plus a fixed splitmix64 fill
  Matrix v(d, d);
  uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&state]() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) v(r, c) = Complex(next() - 0.5, next() - 0.5);
  v += Matrix::Identity(d, d);
  v /= v.norm();

  // a materialized matrix makes each power step a plain matvec
  Matrix mat;
  if (d <= opt_.superop_dim_cap) mat = schrodinger_matrix();

  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Matrix w;
    if (mat.size() > 0) {
      Vector step = mat.adjoint() * (mat * matrix_to_vec(v));
      w = vec_to_matrix(step, d);
    } else {
      w = apply_adjoint(apply(v));
    }
    double next_lambda = w.norm();
    if (next_lambda == 0.0) return 0.0;
    w /= next_lambda;
    bool converged = std::abs(next_lambda - lambda) <= tol * std::max(1.0, next_lambda) && it > 2;
    lambda = next_lambda;
    v = std::move(w);
    if (converged) break;
  }
  return std::sqrt(lambda);
}

double GibbsGenerator::fixed_point_residual() const {
  Matrix sigma = weights_.cast<Complex>().asDiagonal();
  double num = trace_norm(apply(sigma));
  double den = norm_estimate();
  return den > 0 ? num / den : num;
}

Matrix GibbsGenerator::derivation_matrix(int jump, double t) const {
  const int d = dim();
  Matrix id = Matrix::Identity(d, d);
  Matrix out = Matrix::Zero(d * d, d * d);
  const auto& jc = comps_[jump];
  for (size_t i = 0; i < jc.freqs.size(); ++i) {
    const double nu = jc.freqs[i];
    const Complex phase = std::exp(Complex(0.0, nu * t));
    // e^{beta nu/2} f^(nu) = conj(f^(-nu)) under KMS
    out += phase * (filter_(nu) * kron(id, jc.components[i]) -
                    std::conj(filter_(-nu)) * kron(jc.components[i].transpose(), id));
  }
  return out;
}

Matrix GibbsGenerator::derivation_apply(int jump, double t, const Matrix& x_eig) const {
  const int d = dim();
  Matrix out = Matrix::Zero(d, d);
  const auto& jc = comps_[jump];
  for (size_t i = 0; i < jc.freqs.size(); ++i) {
    const double nu = jc.freqs[i];
    const Complex phase = std::exp(Complex(0.0, nu * t));
    out += phase * (filter_(nu) * (jc.components[i] * x_eig) -
                    std::conj(filter_(-nu)) * (x_eig * jc.components[i]));
  }
  return out;
}

DressedJump dressed_jump(const Matrix& a, const FilterFunction& filter,
                         const SpectralDecomposition& spec) {
  const int d = spec.dim();
  Matrix a_eig = spec.to_eigenbasis(a);
  BohrFrequencySet bohr = bohr_frequencies(spec);
  Matrix dressed = Matrix::Zero(d, d);
  Matrix total = Matrix::Zero(d, d);
  for (size_t f = 0; f < bohr.frequencies.size(); ++f) {
    Matrix comp = Matrix::Zero(d, d);
    for (auto [ci, cj] : bohr.pairs[f])
      for (int r : spec.clusters[ci])
        for (int c : spec.clusters[cj]) comp(r, c) = a_eig(r, c);
    total += comp;
    dressed += filter(bohr.frequencies[f]) * comp;
  }
  DressedJump out;
  out.completeness_defect = max_abs(total - a_eig);
  out.dressed = spec.from_eigenbasis(dressed);
  return out;
}

FockOperator coherent_term(const std::vector<FockOperator>& jumps, const FilterFunction& filter,
                           const SpectralDecomposition& spec, double sigma_e) {
  for (const auto& j : jumps) {
    double best = kInf;
    for (const auto& k : jumps) best = std::min(best, max_abs(k.matrix - j.matrix.adjoint()));
    if (best > 1e-10 * std::max(1.0, max_abs(j.matrix)))
      throw std::invalid_argument("coherent_term: jump set is not closed under adjoints (jump '" +
                                  j.label + "')");
  }
  const int d = spec.dim();
  const double beta = filter.beta;
  BohrFrequencySet bohr = bohr_frequencies(spec);
  Matrix b = Matrix::Zero(d, d);
  for (const auto& jump : jumps) {
    Matrix a_eig = spec.to_eigenbasis(jump.matrix);
    std::vector<double> freqs;
    std::vector<Matrix> comps;
    for (size_t f = 0; f < bohr.frequencies.size(); ++f) {
      Matrix comp = Matrix::Zero(d, d);
      for (auto [ci, cj] : bohr.pairs[f])
        for (int r : spec.clusters[ci])
          for (int c : spec.clusters[cj]) comp(r, c) = a_eig(r, c);
      if (max_abs(comp) > 1e-14 * std::max(1.0, max_abs(a_eig))) {
        freqs.push_back(bohr.frequencies[f]);
        comps.push_back(std::move(comp));
      }
    }
    for (size_t i1 = 0; i1 < freqs.size(); ++i1) {
      Matrix sum = Matrix::Zero(d, d);
      for (size_t i2 = 0; i2 < freqs.size(); ++i2) {
        const double w = sigma_e == 0.0
                             ? (i1 == i2 ? 1.0 : 0.0)
                             : gaussian_pair_weight(freqs[i1], freqs[i2], sigma_e);
        if (w == 0.0) continue;
        const double th = std::tanh(beta * (freqs[i2] - freqs[i1]) / 4.0);
        sum += (w * th * Complex(0.0, 0.5) * filter(freqs[i2])) * comps[i2];
      }
      b += std::conj(filter(freqs[i1])) * (comps[i1].adjoint() * sum);
    }
  }
  b = spec.from_eigenbasis(b);
  FockOperator out;
  out.basis = jumps.empty() ? nullptr : jumps.front().basis;
  out.matrix = std::move(b);
  out.hermitian = true;
  out.label = "B";
  return out;
}

Matrix number_diagonal_generator(const std::function<double(int)>& h,
                                 const FilterFunction& filter, const BasisPtr& basis) {
  if (basis->n_modes != 1)
    throw std::invalid_argument("number_diagonal_generator: single-mode basis required");
  const int d = basis->dim();
  Matrix a = ladder_operator(basis, 0, LadderKind::annihilate).matrix;
  Matrix gp = Matrix::Zero(d, d);  // f^(h(n+1)-h(n)) e^{beta(...)/4}
  Matrix gm = Matrix::Zero(d, d);  // f^(h(n-1)-h(n)) e^{beta(...)/4}
  Matrix loss = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    if (n + 1 < d) {
      double dplus = h(n + 1) - h(n);
      gp(n, n) = quarter_weighted(filter, dplus);
      loss(n, n) += (n + 1) * std::norm(filter(dplus));  // A_+
    }
    if (n > 0) {
      double dminus = h(n - 1) - h(n);
      gm(n, n) = quarter_weighted(filter, dminus);
      loss(n, n) += n * std::norm(filter(dminus));  // A_-
    }
  }
  Matrix up = a.adjoint() * gp;  // a^dag g_+(N)
  Matrix dn = a * gm;            // a g_-(N)
  Matrix id = Matrix::Identity(d, d);
  Matrix out = kron(up.conjugate(), up) + kron(dn.conjugate(), dn) -
               0.5 * (kron(id, loss) + kron(loss.transpose(), id));
  return out;
}

SelfAdjointReport verify_selfadjoint(const GibbsGenerator& gen, int n_random, unsigned seed) {
  SelfAdjointReport rep;
  const int d = gen.dim();
  Matrix hs = gen.hs_matrix();
  rep.hermiticity_defect = hermiticity_defect(hs);

  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(hs));
  rep.max_eigenvalue = es.eigenvalues().maxCoeff();

  RealVector sqw = gen.gibbs_weights().array().sqrt();
  Vector sq_vec = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) sq_vec(i * d + i) = sqw(i);
  sq_vec /= sq_vec.norm();
  Eigen::Index kmax;
  es.eigenvalues().cwiseAbs().minCoeff(&kmax);
  rep.kernel_overlap = std::abs((es.eigenvectors().col(kmax).adjoint() * sq_vec)(0, 0));
  rep.kernel_residual = gen.apply_hs(vec_to_matrix(sq_vec, d)).norm();

  // similarity relation iota2(L_hs(X)) = cal L(iota2(X)), iota2(x) = s x s with
  // s = sigma^{1/4}; forward multiplications only
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RealVector s4 = gen.gibbs_weights().array().pow(0.25);
  for (int k = 0; k < n_random; ++k) {
    Matrix x(d, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) x(r, c) = Complex(gauss(rng), gauss(rng));
    x /= x.norm();
    Matrix lhs = gen.apply_hs(x);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) lhs(r, c) *= s4(r) * s4(c);
    Matrix iota_x = x;
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) iota_x(r, c) *= s4(r) * s4(c);
    Matrix rhs = gen.apply(iota_x);
    rep.similarity_defect =
        std::max(rep.similarity_defect, max_abs(lhs - rhs) / std::max(1.0, max_abs(rhs)));
  }
  return rep;
}

double integrate_cosh_weighted(const std::function<double(double)>& f, double beta, double tol,
                               double* residual_out) {
  const double pi = 3.14159265358979323846;
  auto weighted = [&](double t) { return f(t) / (beta * std::cosh(2.0 * pi * t / beta)); };

  // pick the window from the cosh tail; the sampled sup of F is inflated since
  // almost-periodic integrands can peak between samples
  double fsup = 0.0;
  for (int i = 0; i <= 64; ++i) fsup = std::max(fsup, std::abs(f(-2.0 * beta + i * beta / 16.0)));
  fsup = std::max(8.0 * fsup, 1e-300);
  double T = beta;
  auto tail_bound = [&](double w) { return 2.0 * fsup * std::exp(-2.0 * pi * w / beta) / pi; };
  while (tail_bound(T) > 0.25 * tol && T < 64.0 * beta) T *= 1.5;

  // composite Simpson, doubling until two consecutive refinements stabilize
  double prev = 0.0, cur = 0.0, last_change = kInf;
  int n = 256, stable = 0;
  for (int round = 0; round < 12; ++round, n *= 2) {
    double hstep = 2.0 * T / n;
    double s = weighted(-T) + weighted(T);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * weighted(-T + i * hstep);
    cur = s * hstep / 3.0;
    last_change = std::abs(cur - prev);
    if (round > 0 && last_change <= 0.5 * tol * std::max(1.0, std::abs(cur)))
      ++stable;
    else
      stable = 0;
    prev = cur;
    if (stable >= 2) break;
  }
  if (residual_out) *residual_out = last_change + tail_bound(T);
  return cur;
}

DirichletResult dirichlet_form(const GibbsGenerator& gen, const Matrix& x_original_basis,
                               double quad_tol) {
  DirichletResult out;
  Matrix x = gen.to_eigenbasis(x_original_basis);
  Matrix lx = gen.apply_hs(x);
  out.direct = -std::real((x.adjoint() * lx).trace());
  auto integrand = [&](double t) {
    double s = 0.0;
    for (int a = 0; a < gen.n_jumps(); ++a) s += gen.derivation_apply(a, t, x).squaredNorm();
    return s;
  };
  out.quadrature = integrate_cosh_weighted(integrand, gen.beta(), quad_tol, &out.residual);
  return out;
}

}  // namespace boselab
