#pragma once

#include <functional>
#include <numbers>
#include <vector>

#include "byzsim/linalg.hpp"

namespace byzsim {

/// Asymptotic efficiency of the median-of-means estimator, 2/pi.
inline constexpr double kMomEfficiency = 2.0 / std::numbers::pi;
/// Limiting (K -> infinity) efficiency of VRMOM, 3/pi.
inline constexpr double kVrmomLimitEfficiency = 3.0 / std::numbers::pi;
/// Limiting normalized VRMOM variance sigma_K^2 / sigma^2, pi/3.
inline constexpr double kVrmomLimitVariance = std::numbers::pi / 3.0;

/// Asymptotic variance of sqrt(N) (VRMOM - mu) with K quantile levels:
///   sigma^2 * sum_{k1,k2} min(tau)(1 - max(tau)) / (sum_k psi(Delta_k))^2,
/// tau_k = k / (K + 1). Exact O(K^2) double sum.
double sigma_k_squared(int quantile_levels, double sigma_sq = 1.0);

struct EfficiencyReport {
  int quantile_levels = 1;
  double sigma_k_sq_over_sigma_sq = 0.0;
  /// sigma^2 / sigma_K^2
  double efficiency = 0.0;
  double mom_efficiency = kMomEfficiency;
  double limit_efficiency = kVrmomLimitEfficiency;
};

EfficiencyReport efficiency_report(int quantile_levels);

/// P(Z1 <= x, Z2 <= y) for standard bivariate normal with correlation rho.
/// Genz's Gauss-Legendre evaluation of the Drezner-Wesolowsky integral;
/// absolute error well below 1e-12. rho = +-1 reduce to one-dimensional
/// CDFs. Throws DomainError for |rho| > 1 or NaN arguments.
double bivariate_normal_cdf(double x, double y, double rho);

struct CovEntryInputs {
  double rho = 0.0;
  double sigma_11 = 1.0;
  double sigma_22 = 1.0;
  int quantile_levels = 10;
};

/// Entry of the limiting covariance of the coordinate-wise VRMOM estimator
/// for two coordinates with correlation rho.
double c_matrix_entry(const CovEntryInputs& inputs);

/// Entry of the limiting covariance of the coordinate-wise MOM estimator:
/// (2 pi P(Z1 <= 0, Z2 <= 0) - pi/2) sqrt(sigma_11 sigma_22).
double c_mom_entry(double rho, double sigma_11 = 1.0, double sigma_22 = 1.0);

struct QuadratureValue {
  double value = 0.0;
  /// Estimated absolute error of `value`.
  double error = 0.0;
};

/// K -> infinity limit of c_matrix_entry:
///   (4 pi \int\int psi(y1) psi(y2) F_rho(y1, y2) dy1 dy2 - pi) sqrt(sigma_11 sigma_22),
/// by nested adaptive Gauss-Kronrod quadrature on [-8, 8]^2. Throws
/// Error when the requested accuracy (1e-6 on the double integral) is not
/// reached.
QuadratureValue c_limit_entry(double rho, double sigma_11 = 1.0, double sigma_22 = 1.0);

/// (C_MOM,12 - lim_K C_12) / pi for unit variances and correlation sin(phi).
/// C_MOM - C_lim is positive semidefinite in dimension two iff |h| <= 1/6.
/// Throws DomainError for phi outside [-pi/2, pi/2].
double h_phi(double phi);

/// 2x2 matrix C_MOM - lim_K C for unit variances and correlation sin(phi).
DenseMatrix covariance_gap_2d(double phi);

/// Adaptive Gauss-Kronrod (7/15) quadrature of f on [a, b], splitting first
/// at each breakpoint inside (a, b).
QuadratureValue integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                   double abs_tol, const std::vector<double>& breakpoints = {});

}  // namespace byzsim
