#include "boselab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <set>

#include "boselab/filter.hpp"
#include "boselab/gap.hpp"
#include "boselab/generator.hpp"
#include "boselab/models.hpp"
#include "boselab/thermal.hpp"

namespace boselab {

namespace {

using nlohmann::json;

const std::vector<std::string> kScenarios = {
    "filter-audit",     "gap-vs-psi",          "gap-vs-truncation", "gap-vs-sigmaE",
    "ladder-block-compare", "finite-rank-audit",   "meanfield-eigen-audit",
    "gibbs-trace-distance", "mixing-time",         "free-energy",       "aubry-andre-spectrum"};

void require_keys(const json& obj, const std::string& section,
                  const std::set<std::string>& allowed, std::vector<std::string>& problems) {
  if (!obj.is_object()) {
    problems.push_back("section '" + section + "' must be an object");
    return;
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      problems.push_back("unknown key '" + it.key() + "' in section '" + section + "'");
  }
}

double read_sigma_e(const json& g) {
  if (!g.contains("sigma_e")) return kInf;
  const auto& v = g["sigma_e"];
  if (v.is_string()) {
    if (v == "inf" || v == "infinity") return kInf;
    throw std::invalid_argument("generator.sigma_e string must be \"inf\"");
  }
  return v.get<double>();
}

BasisPtr basis_from_config(const json& cfg) {
  const auto& b = cfg.at("basis");
  std::optional<int> total;
  if (b.contains("total_cutoff") && !b["total_cutoff"].is_null())
    total = b["total_cutoff"].get<int>();
  return build_basis(b.at("n_modes").get<int>(), b.at("per_mode_cutoff").get<int>(), total);
}

FilterFunction filter_from_config(const json& cfg) {
  const auto& f = cfg.at("filter");
  const std::string kind = f.at("kind").get<std::string>();
  const double beta = f.at("beta").get<double>();
  const double amplitude = f.value("amplitude", 1.0);
  if (kind == "metropolis") return metropolis_filter(beta, amplitude);
  if (kind == "gaussian_kms") return gaussian_kms_filter(beta, f.value("sigma_f", 0.0), amplitude);
  if (kind == "custom") return custom_filter_from_csv(beta, f.at("table_csv").get<std::string>());
  throw std::invalid_argument("unknown filter kind '" + kind + "'");
}

std::vector<FockOperator> ladder_jump_set(const BasisPtr& basis) {
  std::vector<FockOperator> jumps;
  for (int m = 0; m < basis->n_modes; ++m) {
    jumps.push_back(ladder_operator(basis, m, LadderKind::annihilate));
    jumps.push_back(ladder_operator(basis, m, LadderKind::create));
  }
  return jumps;
}

LatticeSpec lattice_from_model(const json& model) {
  return build_lattice(model.value("D", 1), model.value("L", 1),
                       model.value("boundary", std::string("open")) == "periodic"
                           ? Boundary::periodic
                           : Boundary::open);
}

BoseHubbardParams bh_params_from_model(const json& model) {
  if (model.contains("mu"))
    return main_text_params(model.at("J").get<double>(), model.at("U").get<double>(),
                            model.at("mu").get<double>());
  return appendix_params(model.at("J").get<double>(), model.at("U").get<double>(),
                         model.at("eta").get<double>(), model.value("eta_prime", 1.0));
}

/// Builds the configured Hamiltonian family on the basis.
FockOperator model_from_config(const json& cfg, const BasisPtr& basis) {
  const auto& model = cfg.at("model");
  const std::string family = model.at("family").get<std::string>();
  if (family == "mean_field") {
    MeanFieldParams p;
    p.mu = model.value("mu", 0.0);
    p.U = model.at("U").get<double>();
    p.psi = Complex(model.value("psi", 0.0), model.value("psi_imag", 0.0));
    return build_mean_field(p, basis);
  }
  if (family == "number") {
    return total_number_operator(basis);
  }
  if (family == "bose_hubbard")
    return build_bose_hubbard(lattice_from_model(model), bh_params_from_model(model), basis);
  if (family == "superfluid")
    return build_superfluid_truncation(lattice_from_model(model), bh_params_from_model(model),
                                       model.at("truncation").get<int>(), basis);
  if (family == "mott")
    return build_mott_truncation(lattice_from_model(model), bh_params_from_model(model),
                                 model.at("truncation").get<int>(), basis);
  if (family == "aubry_andre") {
    AubryAndreParams p;
    p.t = model.at("t").get<double>();
    p.p = model.at("p").get<int>();
    p.L = model.at("L").get<int>();
    return build_aubry_andre(p, basis).hamiltonian;
  }
  throw std::invalid_argument("unknown model family '" + family + "'");
}

void add_check(ExperimentReport& rep, const std::string& name, bool pass, double value,
               double threshold) {
  rep.checks.push_back({name, pass, value, threshold});
}

template <typename T, typename F>
std::vector<T> parallel_map(int n, int threads, F&& fn) {
  std::vector<T> out(n);
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<void>> futs;
  std::atomic<int> next{0};
  for (int w = 0; w < std::min(threads, n); ++w) {
    futs.push_back(std::async(std::launch::async, [&]() {
      for (int i = next++; i < n; i = next++) out[i] = fn(i);
    }));
  }
  for (auto& f : futs) f.get();
  return out;
}

// ---------------------------------------------------------------------------
// scenarios

void scenario_filter_audit(const json& cfg, ExperimentReport& rep) {
  FilterFunction f = filter_from_config(cfg);
  const json params = cfg.value("params", json::object());
  auto grid = default_kms_grid(f.beta, params.value("grid_points", 401));
  KmsAuditReport audit = kms_audit(f, grid);
  rep.results["max_violation"] = audit.max_violation;
  rep.results["worst_nu"] = audit.worst_nu;
  rep.results["sup_abs"] = audit.sup_abs;
  rep.results["sup_weighted"] = audit.sup_weighted;
  add_check(rep, "kms_audit", audit.pass, audit.max_violation, 1e-12);

  CsvSeries series{"filter_values", {"nu", "re", "im", "kms_defect"}, {}};
  for (double nu : grid) {
    Complex v = f(nu);
    double defect = std::abs(std::conj(v) - f(-nu) * std::exp(-f.beta * nu / 2.0));
    series.rows.push_back({nu, v.real(), v.imag(), defect});
  }
  rep.series.push_back(std::move(series));
}

void scenario_gap_vs_psi(const json& cfg, ExperimentReport& rep, int threads) {
  BasisPtr basis = basis_from_config(cfg);
  FilterFunction f = filter_from_config(cfg);
  const double sigma_e = read_sigma_e(cfg.value("generator", json::object()));
  const auto& model = cfg.at("model");
  std::vector<double> psis = cfg.at("params").at("psi_values").get<std::vector<double>>();

  struct Row {
    double psi, gap, residual, herm, max_eig;
    int kernel_dim;
  };
  auto rows = parallel_map<Row>(static_cast<int>(psis.size()), threads, [&](int i) {
    MeanFieldParams p;
    p.mu = model.value("mu", 0.0);
    p.U = model.at("U").get<double>();
    p.psi = psis[i];
    FockOperator h = build_mean_field(p, basis);
    GibbsGenerator gen(h.matrix, ladder_jump_set(basis), f, sigma_e);
    GapReport gap = spectral_gap(gen);
    SelfAdjointReport sa = verify_selfadjoint(gen);
    return Row{psis[i], gap.gap, gen.fixed_point_residual(), sa.hermiticity_defect,
               sa.max_eigenvalue, gap.kernel_dimension};
  });

  CsvSeries series{"gap_vs_psi",
                   {"psi", "gap", "kernel_dim", "fixed_point_residual", "hs_hermiticity_defect",
                    "hs_max_eigenvalue"},
                   {}};
  for (const auto& r : rows) {
    series.rows.push_back({r.psi, r.gap, double(r.kernel_dim), r.residual, r.herm, r.max_eig});
    std::string tag = "psi=" + format_double(r.psi);
    add_check(rep, tag + ".gap_positive", r.gap > 1e-6, r.gap, 1e-6);
    add_check(rep, tag + ".fixed_point_residual", r.residual <= 1e-8, r.residual, 1e-8);
    add_check(rep, tag + ".hs_hermiticity", r.herm <= 1e-8, r.herm, 1e-8);
    add_check(rep, tag + ".hs_max_eigenvalue", std::abs(r.max_eig) <= 1e-8, r.max_eig, 1e-8);
  }
  rep.series.push_back(std::move(series));
}

void scenario_gap_vs_truncation(const json& cfg, ExperimentReport& rep, int threads) {
  BasisPtr basis = basis_from_config(cfg);
  FilterFunction f = filter_from_config(cfg);
  const double sigma_e = read_sigma_e(cfg.value("generator", json::object()));
  const auto& model = cfg.at("model");
  const std::string family = model.at("family").get<std::string>();
  LatticeSpec lattice = lattice_from_model(model);
  BoseHubbardParams params = bh_params_from_model(model);
  std::vector<int> truncs = cfg.at("params").at("truncations").get<std::vector<int>>();

  struct Row {
    int trunc;
    double gap, residual;
  };
  auto rows = parallel_map<Row>(static_cast<int>(truncs.size()), threads, [&](int i) {
    FockOperator h = family == "superfluid"
                         ? build_superfluid_truncation(lattice, params, truncs[i], basis)
                         : build_mott_truncation(lattice, params, truncs[i], basis);
    GibbsGenerator gen(h.matrix, ladder_jump_set(basis), f, sigma_e);
    return Row{truncs[i], spectral_gap(gen).gap, gen.fixed_point_residual()};
  });
  CsvSeries series{"gap_vs_truncation", {"truncation", "gap", "fixed_point_residual"}, {}};
  for (const auto& r : rows) {
    series.rows.push_back({double(r.trunc), r.gap, r.residual});
    std::string tag = "M=" + std::to_string(r.trunc);
    add_check(rep, tag + ".gap_positive", r.gap > 1e-6, r.gap, 1e-6);
    add_check(rep, tag + ".fixed_point_residual", r.residual <= 1e-8, r.residual, 1e-8);
  }
  rep.series.push_back(std::move(series));
}

void scenario_gap_vs_sigma_e(const json& cfg, ExperimentReport& rep, int threads) {
  BasisPtr basis = basis_from_config(cfg);
  FilterFunction f = filter_from_config(cfg);
  FockOperator h = model_from_config(cfg, basis);
  const auto& values = cfg.at("params").at("sigma_e_values");
  std::vector<double> sig;
  for (const auto& v : values)
    sig.push_back(v.is_string() ? kInf : v.get<double>());

  struct Row {
    double sigma_e, gap, residual;
  };
  auto rows = parallel_map<Row>(static_cast<int>(sig.size()), threads, [&](int i) {
    GibbsGenerator gen(h.matrix, ladder_jump_set(basis), f, sig[i]);
    return Row{sig[i], spectral_gap(gen).gap, gen.fixed_point_residual()};
  });
  CsvSeries series{"gap_vs_sigma_e", {"sigma_e", "gap", "fixed_point_residual"}, {}};
  for (const auto& r : rows) {
    series.rows.push_back({r.sigma_e, r.gap, r.residual});
    std::string tag = "sigma_e=" + format_double(r.sigma_e);
    add_check(rep, tag + ".fixed_point_residual", r.residual <= 1e-8, r.residual, 1e-8);
    add_check(rep, tag + ".gap_positive", r.gap > 1e-6, r.gap, 1e-6);
  }
  rep.series.push_back(std::move(series));
}

void scenario_ladder_block(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  if (basis->n_modes != 1)
    throw std::invalid_argument("ladder-block-compare requires a single-mode basis");
  FilterFunction f = filter_from_config(cfg);
  auto [nu_plus, nu_minus] = birth_death_rates(f, 1.0);

  FockOperator n = total_number_operator(basis);
  GibbsGenerator gen(n.matrix, ladder_jump_set(basis), f, kInf);
  Matrix hs = gen.hs_matrix();
  LadderBlock lb = ladder_block_operator(nu_plus, nu_minus, basis);

  // kappa table against the built superoperator's action on |n><m|
  const int d = basis->dim();
  double action_defect = 0.0;
  CsvSeries table{"ladder_block_kappa", {"k", "kappa", "action_defect"}, {}};
  int kmax = std::min(10, 2 * (d - 1));
  for (int k = 0; k <= kmax; ++k) {
    double worst = 0.0;
    for (int nn = 0; nn <= k && nn < d; ++nn) {
      int mm = k - nn;
      if (mm >= d) continue;
      Vector e = Vector::Zero(d * d);
      e(mm * d + nn) = 1.0;  // vec of |n><m|
      Vector img = lb.matrix * e;
      worst = std::max(worst, (img - lb.kappa[k] * e).norm());
    }
    action_defect = std::max(action_defect, worst);
    table.rows.push_back({double(k), lb.kappa[k], worst});
  }
  rep.series.push_back(std::move(table));
  add_check(rep, "kappa_action_defect", action_defect <= 1e-10, action_defect, 1e-10);

  ComparisonDefect cd = comparison_defect(hs, lb, basis);
  rep.results["nu_plus"] = nu_plus;
  rep.results["nu_minus"] = nu_minus;
  rep.results["comparison_min_eig_interior"] = cd.min_eig_interior;
  rep.results["comparison_min_eig_full"] = cd.min_eig_full;
  rep.results["comparison_inequality_holds"] = cd.inequality_holds;
  // the comparison direction is delegated to the cited external proof; a
  // violation is reported as a finding, not a failure
  rep.results["finding"] =
      cd.inequality_holds
          ? "ladder-block lower bound holds on the interior"
          : "ladder-block lower bound violated for this filter normalization (reported, not "
            "failed)";
  GapReport gap = spectral_gap(gen);
  add_check(rep, "qou_gap_matches_rates", std::abs(gap.gap - (nu_minus - nu_plus) / 2) <= 1e-8,
            gap.gap - (nu_minus - nu_plus) / 2, 1e-8);
}

void scenario_finite_rank(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  FilterFunction f = filter_from_config(cfg);
  const json& params = cfg.at("params");
  const int cases = params.value("cases", 10);
  const int rank_p = params.value("projector_rank", 2);
  const double scale = params.value("perturbation_scale", 0.3);
  const uint64_t seed = cfg.at("seed").get<uint64_t>();

  Matrix n = total_number_operator(basis).matrix;
  const int d = basis->dim();
  Matrix a = ladder_operator(basis, 0, LadderKind::annihilate).matrix;

  CsvSeries series{"finite_rank_audit", {"case", "s", "qrq_norm", "rank"}, {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    // random Hermitian R supported on the lowest rank_p Fock levels
    Matrix r = Matrix::Zero(d, d);
    for (int i = 0; i < rank_p; ++i)
      for (int j = 0; j <= i; ++j) {
        Complex v = i == j ? Complex(gauss(rng), 0.0) : Complex(gauss(rng), gauss(rng));
        r(i, j) = v;
        r(j, i) = std::conj(v);
      }
    r *= scale / std::max(1.0, max_abs(r));
    Matrix p = Matrix::Zero(d, d);
    for (int i = 0; i < rank_p; ++i) p(i, i) = 1.0;

    Matrix jump = (c % 2 == 0) ? a : Matrix(a.adjoint());
    for (double s : {f.beta / 4.0, -f.beta / 4.0}) {
      FiniteRankRemainder rem = finite_rank_remainder(n, r, p, jump, f, s);
      series.rows.push_back({double(c), s, rem.qrq_norm, double(rem.numerical_rank)});
      worst = std::max(worst, rem.qrq_norm);
    }
  }
  rep.series.push_back(std::move(series));
  add_check(rep, "qrq_norm_max", worst <= 1e-8, worst, 1e-8);
}

void scenario_meanfield_audit(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  const auto& model = cfg.at("model");
  MeanFieldParams p;
  p.mu = model.value("mu", 0.0);
  p.U = model.at("U").get<double>();
  p.psi = Complex(model.value("psi", 0.0), model.value("psi_imag", 0.0));
  const auto& params = cfg.at("params");
  auto rows = meanfield_eigen_audit(p, basis, params.at("n_min").get<int>(),
                                    params.at("n_max").get<int>());
  CsvSeries series{"meanfield_eigen_audit",
                   {"n", "energy", "energy_unperturbed", "eig_deviation", "eig_bound",
                    "vec_deviation", "vec_bound", "overlap"},
                   {}};
  bool all = true;
  for (const auto& r : rows) {
    series.rows.push_back({double(r.n), r.energy, r.energy_unperturbed, r.eig_deviation,
                           r.eig_bound, r.vec_deviation, r.vec_bound, r.overlap});
    std::string tag = "n=" + std::to_string(r.n);
    add_check(rep, tag + ".eigenvalue_bound", r.eig_pass, r.eig_deviation, r.eig_bound);
    add_check(rep, tag + ".eigenvector_bound", r.vec_pass, r.vec_deviation, r.vec_bound);
    all = all && r.eig_pass && r.vec_pass && !r.ambiguous;
  }
  rep.results["all_bounds_pass"] = all;
  rep.series.push_back(std::move(series));
}

void scenario_gibbs_trace_distance(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  const auto& model = cfg.at("model");
  const std::string family = model.at("family").get<std::string>();
  LatticeSpec lattice = lattice_from_model(model);
  BoseHubbardParams params = bh_params_from_model(model);
  const double beta = cfg.at("filter").at("beta").get<double>();
  auto truncs = cfg.at("params").at("truncations").get<std::vector<int>>();

  TruncationStudy study = truncation_convergence_study(
      family == "superfluid" ? TruncationModel::superfluid : TruncationModel::mott, lattice,
      params, beta, truncs, basis);

  CsvSeries series{"trace_distance_vs_truncation", {"truncation", "distance"}, {}};
  for (size_t i = 0; i < truncs.size(); ++i)
    series.rows.push_back({double(truncs[i]), study.distances[i]});
  rep.series.push_back(std::move(series));
  rep.results["fitted_log_slope"] = study.fitted_log_slope;
  add_check(rep, "monotone_decrease", study.monotone, study.monotone ? 1.0 : 0.0, 1.0);
  if (family == "superfluid") {
    BoseHubbardParams ap = params.is_main_text() ? convert_parametrization(params) : params;
    double kappa = beta * (ap.eta->first - 2.0 * lattice.D * std::abs(ap.J));
    add_check(rep, "decay_rate", study.fitted_log_slope <= -kappa / 4.0, study.fitted_log_slope,
              -kappa / 4.0);
  }
}

void scenario_mixing_time(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  FilterFunction f = filter_from_config(cfg);
  FockOperator h = model_from_config(cfg, basis);
  const double sigma_e = read_sigma_e(cfg.value("generator", json::object()));
  GibbsGenerator gen(h.matrix, ladder_jump_set(basis), f, sigma_e);
  Evolver evolver(gen);
  GibbsState gibbs = gibbs_state(h, f.beta);
  GapReport gap = spectral_gap(gen);

  const int d = basis->dim();
  Matrix vacuum = Matrix::Zero(d, d);
  vacuum(0, 0) = 1.0;
  double c = warm_start_constant(vacuum, gibbs);
  rep.results["warm_start_constant"] = c;
  rep.results["log_partition"] = gibbs.log_partition;
  rep.results["gap"] = gap.gap;
  add_check(rep, "vacuum_warm_start_equals_Z",
            std::abs(c - std::exp(gibbs.log_partition)) <= 1e-10 * std::exp(gibbs.log_partition),
            c, std::exp(gibbs.log_partition));

  auto epsilons = cfg.at("params").at("epsilons").get<std::vector<double>>();
  CsvSeries summary{"mixing_time", {"epsilon", "t_mix", "bound"}, {}};
  int traj_id = 0;
  for (double eps : epsilons) {
    MixingRecord rec = mixing_time(gen, evolver, vacuum, eps, gap.gap, c);
    summary.rows.push_back({eps, rec.t_mix, rec.bound});
    std::string tag = "eps=" + format_double(eps);
    add_check(rep, tag + ".bound", rec.bound_satisfied, rec.t_mix, rec.bound);
    add_check(rep, tag + ".monotone_trajectory", rec.monotone, rec.monotone ? 1.0 : 0.0, 1.0);
    CsvSeries traj{"trajectory_" + std::to_string(traj_id++), {"t", "trace_distance"}, {}};
    for (auto [t, dist] : rec.trajectory) traj.rows.push_back({t, dist});
    rep.series.push_back(std::move(traj));
  }
  rep.series.push_back(std::move(summary));
}

void scenario_free_energy(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  const auto& model = cfg.at("model");
  LatticeSpec lattice = lattice_from_model(model);
  BoseHubbardParams params = bh_params_from_model(model);
  const double beta = cfg.at("filter").at("beta").get<double>();
  const json& p = cfg.at("params");

  FreeEnergyOptions opt;
  opt.grid = p.value("grid", 100);
  opt.observable_cutoff = p.value("observable_cutoff", -1);
  opt.source = p.value("source", std::string("exact_bh")) == "superfluid"
                   ? GibbsSource::superfluid
                   : GibbsSource::exact_bh;
  opt.source_truncation = p.value("source_truncation", 0);

  FreeEnergyResult det = thermo_integration_estimate(lattice, params, beta, basis, opt);
  rep.results["deterministic_estimate"] = det.deterministic;
  rep.results["exact"] = det.exact;
  rep.results["abs_error"] = det.abs_error;
  rep.results["hoeffding_shots_for_target"] = det.hoeffding_shots;
  add_check(rep, "deterministic_error", det.abs_error <= p.value("tolerance", 1e-3),
            det.abs_error, p.value("tolerance", 1e-3));

  if (p.contains("shots")) {
    opt.shots = p.at("shots").get<int>();
    const int repeats = p.value("repeats", 40);
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    CsvSeries series{"sampled_runs", {"repeat", "estimate", "deviation", "inside_envelope"}, {}};
    int inside = 0;
    double radius = 0.0;
    for (int rpt = 0; rpt < repeats; ++rpt) {
      opt.seed = derive_seed(seed, 1000 + rpt);
      FreeEnergyResult s = thermo_integration_estimate(lattice, params, beta, basis, opt);
      radius = s.hoeffding_radius;
      bool ok = std::abs(s.estimate - s.deterministic) <= s.hoeffding_radius;
      inside += ok;
      series.rows.push_back({double(rpt), s.estimate, s.estimate - s.deterministic,
                             ok ? 1.0 : 0.0});
    }
    rep.series.push_back(std::move(series));
    rep.results["hoeffding_radius"] = radius;
    rep.results["inside_envelope_fraction"] = double(inside) / repeats;
    add_check(rep, "hoeffding_envelope_95", inside >= static_cast<int>(std::ceil(0.95 * repeats)),
              double(inside) / repeats, 0.95);
  }

  if (p.contains("grid_sweep")) {
    auto grids = p.at("grid_sweep").get<std::vector<int>>();
    CsvSeries series{"error_vs_grid", {"grid", "abs_error"}, {}};
    FreeEnergyOptions sweep = opt;
    sweep.shots.reset();
    for (int g : grids) {
      sweep.grid = g;
      FreeEnergyResult r = thermo_integration_estimate(lattice, params, beta, basis, sweep);
      series.rows.push_back({double(g), r.abs_error});
    }
    rep.series.push_back(std::move(series));
  }
}

void scenario_aubry_andre(const json& cfg, ExperimentReport& rep) {
  BasisPtr basis = basis_from_config(cfg);
  FilterFunction f = filter_from_config(cfg);
  const auto& model = cfg.at("model");
  AubryAndreParams p;
  p.t = model.at("t").get<double>();
  p.p = model.at("p").get<int>();
  p.L = model.at("L").get<int>();
  AubryAndreResult aa = build_aubry_andre(p, basis);

  // per-mode qOU gaps from a large single-mode eigensolve
  const int mode_cutoff = cfg.value("params", json::object()).value("mode_cutoff", 40);
  BasisPtr mode_basis = build_basis(1, mode_cutoff);
  CsvSeries series{"aubry_andre_modes", {"i1", "k1_index", "eps", "nu_plus", "nu_minus",
                                         "mode_gap_closed_form", "mode_gap_numeric"},
                   {}};
  double min_closed = kInf, min_numeric = kInf, worst_mode_defect = 0.0;
  for (int i1 = 0; i1 < p.L; ++i1)
    for (int m = 0; m < p.L; ++m) {
      double eps = aa.single_particle_energies(i1, m);
      auto [nu_pl, nu_mi] = birth_death_rates(f, eps);
      double closed = (nu_mi - nu_pl) / 2.0;
      Matrix hmode = eps * total_number_operator(mode_basis).matrix;
      GibbsGenerator gen(hmode, ladder_jump_set(mode_basis), f, kInf);
      double numeric = spectral_gap(gen).gap;
      series.rows.push_back({double(i1), double(m), eps, nu_pl, nu_mi, closed, numeric});
      min_closed = std::min(min_closed, closed);
      min_numeric = std::min(min_numeric, numeric);
      worst_mode_defect = std::max(worst_mode_defect, std::abs(numeric - closed));
    }
  rep.series.push_back(std::move(series));
  rep.results["min_mode_gap_closed_form"] = min_closed;
  rep.results["min_mode_gap_numeric"] = min_numeric;
  add_check(rep, "per_mode_gap_defect", worst_mode_defect <= 1e-8, worst_mode_defect, 1e-8);
  add_check(rep, "multi_mode_gap_equals_min", std::abs(min_numeric - min_closed) <= 1e-8,
            min_numeric - min_closed, 1e-8);

  // truncated multi-mode generator: reported at its truncation-limited accuracy
  if (basis->dim() <= 40) {
    GibbsGenerator gen(aa.hamiltonian.matrix, ladder_jump_set(basis), f, kInf);
    GapReport gap = spectral_gap(gen);
    rep.results["capped_multimode_gap"] = gap.gap;
    rep.results["capped_multimode_fixed_point_residual"] = gen.fixed_point_residual();
    add_check(rep, "capped_fixed_point", gen.fixed_point_residual() <= 1e-8,
              gen.fixed_point_residual(), 1e-8);
  }
}

}  // namespace

bool ExperimentReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

nlohmann::json ExperimentReport::summary() const {
  json j;
  j["scenario"] = scenario;
  j["version"] = version;
  j["config"] = config_echo;
  j["results"] = results;
  json checks_json = json::array();
  for (const auto& c : checks)
    checks_json.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}});
  j["checks"] = checks_json;
  j["all_pass"] = all_pass();
  j["timing"] = {{"wall_seconds", wall_seconds}};  // excluded from comparisons
  return j;
}

json config_schema() {
  json s;
  s["scenario"] = kScenarios;
  s["seed"] = "uint64; mandatory whenever randomness is enabled";
  s["basis"] = {{"n_modes", "int >= 1"},
                {"per_mode_cutoff", "int >= 0"},
                {"total_cutoff", "int >= 0 or null"}};
  s["model"] = {{"family", {"mean_field", "number", "bose_hubbard", "superfluid", "mott",
                            "aubry_andre"}},
                {"mu", "double"},
                {"U", "double > 0"},
                {"psi", "double"},
                {"psi_imag", "double"},
                {"J", "double"},
                {"eta", "double"},
                {"eta_prime", "double"},
                {"D", "int >= 1"},
                {"L", "int >= 1"},
                {"boundary", {"open", "periodic"}},
                {"truncation", "int >= 0"},
                {"t", "double"},
                {"p", "int"}};
  s["filter"] = {{"kind", {"metropolis", "gaussian_kms", "custom"}},
                 {"beta", "double > 0"},
                 {"sigma_f", "double > 0"},
                 {"amplitude", "double > 0"},
                 {"table_csv", "path to (nu, re, im) rows"}};
  s["generator"] = {{"sigma_e", "double >= 0 or \"inf\""}, {"cluster_tol", "double"}};
  s["params"] = {{"filter-audit", {{"grid_points", "int"}}},
                 {"gap-vs-psi", {{"psi_values", "array of double"}}},
                 {"gap-vs-truncation", {{"truncations", "array of int"}}},
                 {"gap-vs-sigmaE", {{"sigma_e_values", "array of double or \"inf\""}}},
                 {"ladder-block-compare", json::object()},
                 {"finite-rank-audit",
                  {{"cases", "int"}, {"projector_rank", "int"}, {"perturbation_scale", "double"}}},
                 {"meanfield-eigen-audit", {{"n_min", "int"}, {"n_max", "int"}}},
                 {"gibbs-trace-distance", {{"truncations", "array of int"}}},
                 {"mixing-time", {{"epsilons", "array of double"}}},
                 {"free-energy",
                  {{"grid", "int"},
                   {"observable_cutoff", "int"},
                   {"source", {"exact_bh", "superfluid"}},
                   {"source_truncation", "int"},
                   {"tolerance", "double"},
                   {"shots", "int"},
                   {"repeats", "int"},
                   {"grid_sweep", "array of int"}}},
                 {"aubry-andre-spectrum", {{"mode_cutoff", "int"}}}};
  s["output"] = {{"dir", "path"}, {"formats", "subset of [csv, json]"}};
  return s;
}

std::vector<std::string> validate_config(const json& cfg) {
  std::vector<std::string> problems;
  if (!cfg.is_object()) {
    problems.push_back("config must be a JSON object");
    return problems;
  }
  require_keys(cfg, "(top level)",
               {"scenario", "seed", "basis", "model", "filter", "generator", "params", "output"},
               problems);
  if (!cfg.contains("scenario") || !cfg["scenario"].is_string()) {
    problems.push_back("missing string key 'scenario'");
    return problems;
  }
  const std::string scenario = cfg["scenario"].get<std::string>();
  if (std::find(kScenarios.begin(), kScenarios.end(), scenario) == kScenarios.end())
    problems.push_back("unknown scenario '" + scenario + "'");

  if (cfg.contains("basis"))
    require_keys(cfg["basis"], "basis", {"n_modes", "per_mode_cutoff", "total_cutoff"}, problems);
  if (cfg.contains("model"))
    require_keys(cfg["model"], "model",
                 {"family", "mu", "U", "psi", "psi_imag", "J", "eta", "eta_prime", "D", "L",
                  "boundary", "truncation", "t", "p"},
                 problems);
  if (cfg.contains("filter"))
    require_keys(cfg["filter"], "filter", {"kind", "beta", "sigma_f", "amplitude", "table_csv"},
                 problems);
  if (cfg.contains("generator"))
    require_keys(cfg["generator"], "generator", {"sigma_e", "cluster_tol"}, problems);
  if (cfg.contains("output"))
    require_keys(cfg["output"], "output", {"dir", "formats"}, problems);

  static const std::map<std::string, std::set<std::string>> scenario_keys = {
      {"filter-audit", {"grid_points"}},
      {"gap-vs-psi", {"psi_values"}},
      {"gap-vs-truncation", {"truncations"}},
      {"gap-vs-sigmaE", {"sigma_e_values"}},
      {"ladder-block-compare", {}},
      {"finite-rank-audit", {"cases", "projector_rank", "perturbation_scale"}},
      {"meanfield-eigen-audit", {"n_min", "n_max"}},
      {"gibbs-trace-distance", {"truncations"}},
      {"mixing-time", {"epsilons"}},
      {"free-energy",
       {"grid", "observable_cutoff", "source", "source_truncation", "tolerance", "shots",
        "repeats", "grid_sweep"}},
      {"aubry-andre-spectrum", {"mode_cutoff"}}};
  auto it = scenario_keys.find(scenario);
  if (it != scenario_keys.end() && cfg.contains("params"))
    require_keys(cfg["params"], "params", it->second, problems);

  // scenario-specific required sections
  auto need = [&](const char* key) {
    if (!cfg.contains(key)) problems.push_back(std::string("scenario '") + scenario +
                                               "' requires section '" + key + "'");
  };
  if (scenario != "filter-audit") need("basis");
  need("filter");
  if (scenario == "gap-vs-psi" || scenario == "gap-vs-truncation" ||
      scenario == "gap-vs-sigmaE" || scenario == "meanfield-eigen-audit" ||
      scenario == "gibbs-trace-distance" || scenario == "mixing-time" ||
      scenario == "free-energy" || scenario == "aubry-andre-spectrum")
    need("model");
  if (scenario == "finite-rank-audit" && !cfg.contains("seed"))
    problems.push_back("finite-rank-audit draws random perturbations and requires 'seed'");
  if (scenario == "free-energy" && cfg.contains("params") && cfg["params"].contains("shots") &&
      !cfg.contains("seed"))
    problems.push_back("free-energy with sampling requires 'seed'");
  return problems;
}

ExperimentReport run_scenario(const json& cfg, int threads) {
  auto problems = validate_config(cfg);
  if (!problems.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
  ExperimentReport rep;
  rep.scenario = cfg["scenario"].get<std::string>();
  rep.config_echo = cfg;
  const auto start = std::chrono::steady_clock::now();

  if (rep.scenario == "filter-audit")
    scenario_filter_audit(cfg, rep);
  else if (rep.scenario == "gap-vs-psi")
    scenario_gap_vs_psi(cfg, rep, threads);
  else if (rep.scenario == "gap-vs-truncation")
    scenario_gap_vs_truncation(cfg, rep, threads);
  else if (rep.scenario == "gap-vs-sigmaE")
    scenario_gap_vs_sigma_e(cfg, rep, threads);
  else if (rep.scenario == "ladder-block-compare")
    scenario_ladder_block(cfg, rep);
  else if (rep.scenario == "finite-rank-audit")
    scenario_finite_rank(cfg, rep);
  else if (rep.scenario == "meanfield-eigen-audit")
    scenario_meanfield_audit(cfg, rep);
  else if (rep.scenario == "gibbs-trace-distance")
    scenario_gibbs_trace_distance(cfg, rep);
  else if (rep.scenario == "mixing-time")
    scenario_mixing_time(cfg, rep);
  else if (rep.scenario == "free-energy")
    scenario_free_energy(cfg, rep);
  else if (rep.scenario == "aubry-andre-spectrum")
    scenario_aubry_andre(cfg, rep);

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_report(const ExperimentReport& report, const std::string& out_dir, bool csv,
                 bool json_out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::ios_base::failure("emit_report: cannot create " + out_dir);

  if (csv) {
    for (const auto& s : report.series) {
      fs::path path = fs::path(out_dir) / (s.name + ".csv");
      std::ofstream out(path);
      if (!out) throw std::ios_base::failure("emit_report: cannot write " + path.string());
      for (size_t i = 0; i < s.header.size(); ++i)
        out << s.header[i] << (i + 1 < s.header.size() ? "," : "\n");
      for (const auto& row : s.rows) {
        for (size_t i = 0; i < row.size(); ++i)
          out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
      }
      if (!out) throw std::ios_base::failure("emit_report: write failed on " + path.string());
    }
  }
  if (json_out) {
    fs::path path = fs::path(out_dir) / "summary.json";
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("emit_report: cannot write " + path.string());
    out << report.summary().dump(2) << "\n";
    if (!out) throw std::ios_base::failure("emit_report: write failed on " + path.string());
  }
}

}  // namespace boselab
