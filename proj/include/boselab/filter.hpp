#ifndef BOSELAB_FILTER_HPP
#define BOSELAB_FILTER_HPP

#include <string>
#include <utility>
#include <vector>

#include "boselab/types.hpp"

namespace boselab {

enum class FilterKind { metropolis, gaussian_kms, custom };

/// Frequency-domain filter f^(nu) defining the sampler jumps. Built-in
/// families satisfy the KMS symmetry conj(f^(nu)) = f^(-nu) e^{-beta nu/2}
/// exactly; custom tabulated filters are linearly interpolated and must be
/// audited before use.
struct FilterFunction {
  FilterKind kind = FilterKind::metropolis;
  double beta = 1.0;
  double sigma_f = 1.0;    // gaussian_kms width
  double amplitude = 1.0;  // overall real scale; KMS-invariant
  // custom: sorted tabulation nodes (nu, value)
  std::vector<std::pair<double, Complex>> table;

  Complex operator()(double nu) const;
  std::string name() const;
};

FilterFunction metropolis_filter(double beta, double amplitude = 1.0);

/// Schwartz KMS family f^(nu) = e^{-beta nu/4} e^{-nu^2/(4 sigma_f^2)};
/// sigma_f defaults to 1/beta.
FilterFunction gaussian_kms_filter(double beta, double sigma_f = 0.0, double amplitude = 1.0);

/// Tabulated filter from (nu, re, im) rows, linearly interpolated, zero
/// outside the table range.
FilterFunction custom_filter(double beta, std::vector<std::pair<double, Complex>> table);

FilterFunction custom_filter_from_csv(double beta, const std::string& path);

struct KmsAuditReport {
  double max_violation = 0.0;
  double worst_nu = 0.0;
  double sup_abs = 0.0;           // sup |f^|
  double sup_weighted = 0.0;      // sup e^{beta nu/2} |f^|
  bool pass = false;
};

/// Default audit grid: nu in [-10/beta, 10/beta], 401 points.
std::vector<double> default_kms_grid(double beta, int points = 401);

/// Max over the grid of |conj(f^(nu)) - f^(-nu) e^{-beta nu/2}| relative to
/// max(1, |f^(nu)|); pass iff <= tol.
KmsAuditReport kms_audit(const FilterFunction& f, const std::vector<double>& grid,
                         double tol = 1e-12);

/// Birth/death rates at Bohr frequency omega: (|f^(omega)|^2, |f^(-omega)|^2).
std::pair<double, double> birth_death_rates(const FilterFunction& f, double omega);

}  // namespace boselab

#endif  // BOSELAB_FILTER_HPP
