#include "boselab/models.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace boselab {

LatticeSpec build_lattice(int D, int L, Boundary boundary) {
  if (D < 1 || L < 1) throw std::invalid_argument("build_lattice: D and L must be >= 1");
  LatticeSpec lat;
  lat.D = D;
  lat.L = L;
  lat.boundary = boundary;

  int n = 1;
  for (int i = 0; i < D; ++i) n *= L;
  lat.sites.reserve(n);
  for (int s = 0; s < n; ++s) {
    std::vector<int> coord(D);
    int rem = s;
    for (int mu = D - 1; mu >= 0; --mu) {
      coord[mu] = rem % L;
      rem /= L;
    }
    lat.sites.push_back(std::move(coord));
  }

  auto site_index = [&](const std::vector<int>& c) {
    int s = 0;
    for (int mu = 0; mu < D; ++mu) s = s * L + c[mu];
    return s;
  };

  std::set<std::pair<int, int>> pairs;
  for (int s = 0; s < n; ++s) {
    for (int mu = 0; mu < D; ++mu) {
      std::vector<int> c = lat.sites[s];
      c[mu] += 1;
      if (c[mu] >= L) {
        if (boundary == Boundary::open) continue;
        c[mu] = 0;
      }
      int t = site_index(c);
      if (t == s) continue;  // L == 1 wrap
      pairs.insert({std::min(s, t), std::max(s, t)});
    }
  }
  lat.adjacency.assign(pairs.begin(), pairs.end());
  return lat;
}

BoseHubbardParams main_text_params(double J, double U, double mu) {
  if (U <= 0) throw std::invalid_argument("BoseHubbardParams: U must be > 0");
  BoseHubbardParams p;
  p.J = J;
  p.U = U;
  p.mu = mu;
  return p;
}

BoseHubbardParams appendix_params(double J, double U, double eta, double eta_prime) {
  if (U <= 0) throw std::invalid_argument("BoseHubbardParams: U must be > 0");
  BoseHubbardParams p;
  p.J = J;
  p.U = U;
  p.eta = {eta, eta_prime};
  return p;
}

BoseHubbardParams convert_parametrization(const BoseHubbardParams& p) {
  // Main text:  (U/2)(N^2 - N) - mu N        -> linear coefficient -U/2 - mu
  // Appendix :  eta N + (U/2)(N^2 - eta' N)  -> linear coefficient eta - U eta'/2
  if (p.is_main_text()) {
    double eta_prime = 1.0;
    double eta = -*p.mu - p.U / 2.0 + p.U * eta_prime / 2.0;  // = -mu with eta' = 1
    return appendix_params(p.J, p.U, eta, eta_prime);
  }
  auto [eta, eta_prime] = *p.eta;
  double mu = -(eta - p.U * eta_prime / 2.0) - p.U / 2.0;
  return main_text_params(p.J, p.U, mu);
}

FockOperator build_hopping_part(const LatticeSpec& lattice, double J, double eta,
                                const BasisPtr& basis) {
  if (basis->n_modes != lattice.n_sites())
    throw std::invalid_argument("build_hopping_part: basis/lattice size mismatch");
  const int d = basis->dim();
  Matrix h = Matrix::Zero(d, d);
  for (auto [i, j] : lattice.adjacency) {
    Matrix ai = ladder_operator(basis, i, LadderKind::annihilate).matrix;
    Matrix aj = ladder_operator(basis, j, LadderKind::annihilate).matrix;
    Matrix hop = ai.adjoint() * aj;
    h -= J * (hop + hop.adjoint());
  }
  for (int i = 0; i < basis->n_modes; ++i)
    h += eta * ladder_operator(basis, i, LadderKind::number).matrix;
  return {basis, hermitize(h), true, "H0"};
}

FockOperator build_onsite_part(double U, double eta_prime, const BasisPtr& basis) {
  const int d = basis->dim();
  Matrix v = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int n : basis->states[j]) s += 0.5 * U * (double(n) * n - eta_prime * n);
    v(j, j) = s;
  }
  return {basis, std::move(v), true, "V"};
}

FockOperator build_bose_hubbard(const LatticeSpec& lattice, const BoseHubbardParams& params,
                                const BasisPtr& basis) {
  BoseHubbardParams ap = params.is_main_text() ? convert_parametrization(params) : params;
  auto [eta, eta_prime] = *ap.eta;
  Matrix h = build_hopping_part(lattice, ap.J, eta, basis).matrix +
             build_onsite_part(ap.U, eta_prime, basis).matrix;
  return {basis, hermitize(h), true, "H_BH"};
}

FockOperator build_mean_field(const MeanFieldParams& params, const BasisPtr& basis) {
  if (basis->n_modes != 1)
    throw std::invalid_argument("build_mean_field: single-mode basis required");
  if (params.U <= 0) throw std::invalid_argument("build_mean_field: U must be > 0");
  const int d = basis->dim();
  Matrix a = ladder_operator(basis, 0, LadderKind::annihilate).matrix;
  Matrix n = ladder_operator(basis, 0, LadderKind::number).matrix;
  Matrix h = -params.mu * n + 0.5 * params.U * (n * n - n) -
             std::conj(params.psi) * a - params.psi * a.adjoint() +
             std::norm(params.psi) * Matrix::Identity(d, d);
  return {basis, hermitize(h), true, "H_MF"};
}

NormalModeSystem normal_mode_transform(const LatticeSpec& lattice, double J, double eta,
                                       const BasisPtr& basis) {
  if (lattice.boundary != Boundary::open)
    throw std::invalid_argument(
        "normal_mode_transform: periodic boundary unsupported (sine eigenbasis assumes open "
        "ends)");
  if (basis->n_modes != lattice.n_sites())
    throw std::invalid_argument("normal_mode_transform: basis/lattice size mismatch");
  const int D = lattice.D, L = lattice.L, n = lattice.n_sites();
  const double pi = std::numbers::pi;

  NormalModeSystem sys;
  sys.eigenfunctions.resize(n, n);
  sys.energies.resize(n);
  // modes are indexed like sites: k = (k_1..k_D) with k_mu in 1..L, row-major
  for (int km = 0; km < n; ++km) {
    std::vector<int> k(D);
    int rem = km;
    for (int mu = D - 1; mu >= 0; --mu) {
      k[mu] = rem % L + 1;
      rem /= L;
    }
    double eps = eta;
    for (int mu = 0; mu < D; ++mu) eps -= 2.0 * J * std::cos(pi * k[mu] / (L + 1));
    sys.energies(km) = eps;
    for (int xm = 0; xm < n; ++xm) {
      double phi = 1.0;
      for (int mu = 0; mu < D; ++mu) {
        int x = lattice.sites[xm][mu] + 1;  // paper sites run 1..L
        phi *= std::sqrt(2.0 / (L + 1)) * std::sin(pi * k[mu] * x / (L + 1));
      }
      sys.eigenfunctions(km, xm) = phi;
    }
  }

  std::vector<Matrix> site_lowering(n);
  for (int x = 0; x < n; ++x)
    site_lowering[x] = ladder_operator(basis, x, LadderKind::annihilate).matrix;
  sys.mode_lowering.resize(n);
  for (int k = 0; k < n; ++k) {
    Matrix b = Matrix::Zero(basis->dim(), basis->dim());
    for (int x = 0; x < n; ++x) b += sys.eigenfunctions(k, x) * site_lowering[x];
    sys.mode_lowering[k] = std::move(b);
  }

  sys.overlap.n = n;
  sys.overlap.data.assign(static_cast<size_t>(n) * n * n * n, 0.0);
  for (int s = 0; s < n; ++s)
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < n; ++q)
        for (int k = 0; k < n; ++k) {
          double sum = 0.0;
          for (int x = 0; x < n; ++x)
            sum += sys.eigenfunctions(k, x) * sys.eigenfunctions(q, x) *
                   sys.eigenfunctions(r, x) * sys.eigenfunctions(s, x);
          sys.overlap.data[((size_t(s) * n + r) * n + q) * n + k] = sum;
        }
  return sys;
}

FockOperator build_superfluid_truncation(const LatticeSpec& lattice,
                                         const BoseHubbardParams& params, int M_prime,
                                         const BasisPtr& basis) {
  BoseHubbardParams ap = params.is_main_text() ? convert_parametrization(params) : params;
  auto [eta, eta_prime] = *ap.eta;
  NormalModeSystem modes = normal_mode_transform(lattice, ap.J, eta, basis);

  const int d = basis->dim();
  Matrix proj = Matrix::Identity(d, d);
  for (int k = 0; k < lattice.n_sites(); ++k) {
    Matrix nb = modes.mode_lowering[k].adjoint() * modes.mode_lowering[k];
    FockOperator nb_op{basis, hermitize(nb), true, "N_b" + std::to_string(k)};
    proj = proj * occupation_projector(nb_op, M_prime).matrix;
  }
  proj = hermitize(proj);

  Matrix h0 = build_hopping_part(lattice, ap.J, eta, basis).matrix;
  Matrix v = build_onsite_part(ap.U, eta_prime, basis).matrix;
  Matrix h = h0 + proj * v * proj;
  return {basis, hermitize(h), true, "H_SF(M'=" + std::to_string(M_prime) + ")"};
}

FockOperator build_mott_truncation(const LatticeSpec& lattice, const BoseHubbardParams& params,
                                   int M, const BasisPtr& basis) {
  BoseHubbardParams ap = params.is_main_text() ? convert_parametrization(params) : params;
  auto [eta, eta_prime] = *ap.eta;
  const int d = basis->dim();
  // per-mode Fock projector product: diagonal 1{n_i <= M for all i}
  Matrix proj = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    bool inside = true;
    for (int n : basis->states[j]) inside = inside && (n <= M);
    proj(j, j) = inside ? 1.0 : 0.0;
  }
  Matrix t = build_hopping_part(lattice, ap.J, eta, basis).matrix;
  Matrix v = build_onsite_part(ap.U, eta_prime, basis).matrix;
  Matrix h = proj * t * proj + v;
  return {basis, hermitize(h), true, "H_MI(M=" + std::to_string(M) + ")"};
}

AubryAndreResult build_aubry_andre(const AubryAndreParams& params, const BasisPtr& basis) {
  const int L = params.L;
  if (params.p < 0 || params.p >= L)
    throw std::invalid_argument("build_aubry_andre: flux index p must satisfy 0 <= p < L");
  const int n = L * L;
  if (basis->n_modes != n)
    throw std::invalid_argument("build_aubry_andre: basis must have L^2 modes");
  const double pi = std::numbers::pi;
  const double gamma = 2.0 * pi * params.p / L;
  const double t = params.t;

  auto site = [&](int j1, int j2) { return ((j1 % L + L) % L) * L + ((j2 % L + L) % L); };

  // single-particle matrix in position space, torus wrap in both directions
  Matrix h1 = Matrix::Zero(n, n);
  for (int j1 = 0; j1 < L; ++j1)
    for (int j2 = 0; j2 < L; ++j2) {
      int s = site(j1, j2);
      h1(s, s) += 1.0;
      Complex phase = std::exp(Complex(0.0, j2 * gamma));
      h1(site(j1 + 1, j2), s) += t * phase;        // e^{i j2 gamma} a^dag_{j+e1} a_j
      h1(s, site(j1 + 1, j2)) += t * std::conj(phase);
      h1(site(j1, j2 + 1), s) += t;                // a^dag_{j+e2} a_j
      h1(s, site(j1, j2 + 1)) += t;
    }
  h1 = hermitize(h1);

  // Fock-space Hamiltonian: second quantization of h1
  const int d = basis->dim();
  std::vector<Matrix> a(n);
  for (int x = 0; x < n; ++x) a[x] = ladder_operator(basis, x, LadderKind::annihilate).matrix;
  Matrix H = Matrix::Zero(d, d);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (std::abs(h1(x, y)) < 1e-15) continue;
      H += h1(x, y) * (a[x].adjoint() * a[y]);
    }
  H = hermitize(H);

  // independent diagonalization: Fourier along e1, then per-k1 tridiagonal
  // (with periodic wrap) blocks h_{k1} = diag(1 + 2t cos(i1 gamma + k1)) + t(S + S^dag)
  AubryAndreResult out;
  out.single_particle_energies.resize(L, L);
  out.mode_rotation = Matrix::Zero(n, n);
  for (int m = 0; m < L; ++m) {
    double k1 = 2.0 * pi * m / L;
    Matrix hk = Matrix::Zero(L, L);
    for (int i = 0; i < L; ++i) {
      hk(i, i) = 1.0 + 2.0 * t * std::cos(i * gamma + k1);
      hk((i + 1) % L, i) += t;
      hk(i, (i + 1) % L) += t;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(hk));
    if (es.info() != Eigen::Success)
      throw NumericalError("build_aubry_andre: block eigensolver failed");
    for (int i1 = 0; i1 < L; ++i1) out.single_particle_energies(i1, m) = es.eigenvalues()(i1);
    // b_{i1,k1} = sum_{j2} conj(u_{i1,k1}(j2)) c_{j2,k1} with the Fourier sign
    // that makes the e1-hopping term read 2t cos(j2 gamma + k1):
    // c_{j2,k1} = (1/sqrt(L)) sum_{j1} e^{+i k1 j1} a_{(j1,j2)}
    for (int i1 = 0; i1 < L; ++i1) {
      int mode_row = i1 * L + m;
      for (int j2 = 0; j2 < L; ++j2) {
        Complex u = es.eigenvectors()(j2, i1);
        for (int j1 = 0; j1 < L; ++j1) {
          Complex fourier = std::exp(Complex(0.0, k1 * j1)) / std::sqrt(double(L));
          out.mode_rotation(mode_row, site(j1, j2)) += std::conj(u) * fourier;
        }
      }
    }
  }

  // consistency: H equals sum eps b^dag b under the composed rotation
  Matrix Hmodes = Matrix::Zero(d, d);
  for (int i1 = 0; i1 < L; ++i1)
    for (int m = 0; m < L; ++m) {
      int row = i1 * L + m;
      Matrix b = Matrix::Zero(d, d);
      for (int x = 0; x < n; ++x) b += out.mode_rotation(row, x) * a[x];
      Hmodes += out.single_particle_energies(i1, m) * (b.adjoint() * b);
    }
  double defect = max_abs(H - Hmodes);
  if (defect > 1e-10 * std::max(1.0, max_abs(H))) {
    std::ostringstream os;
    os << "build_aubry_andre: mode decomposition mismatch, ||H - sum eps b^dag b||_max = "
       << defect;
    throw NumericalError(os.str());
  }

  out.hamiltonian = {basis, std::move(H), true,
                     "H_AA(L=" + std::to_string(L) + ",p=" + std::to_string(params.p) + ")"};
  return out;
}

}  // namespace boselab
