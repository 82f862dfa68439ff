#pragma once

#include <numbers>
#include <span>

namespace byzsim {

inline constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

/// Standard normal CDF. Throws DomainError for non-finite input.
double normal_cdf(double x);

/// Standard normal quantile function. Exactly antisymmetric about 1/2.
/// Throws DomainError unless 0 < tau < 1.
double normal_inv_cdf(double tau);

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Sample quantile with linear interpolation between adjacent order
/// statistics (position tau * (count - 1)). At tau = 1/2 this is the
/// middle order statistic for odd counts and the average of the two
/// central ones for even counts.
///
/// Expected linear time. The input is copied; see select_quantile_inplace
/// for the scratch-buffer variant used in hot loops.
double select_quantile(std::span<const double> values, double tau);

/// As select_quantile, but permutes `values` instead of copying them.
double select_quantile_inplace(std::span<double> values, double tau);

inline double median(std::span<const double> values) { return select_quantile(values, 0.5); }

namespace detail {

/// Moves the k-th smallest element into position k; everything before it
/// compares <= and everything after compares >=. Randomized-pivot
/// quickselect that switches to median-of-medians pivoting when the
/// partition sizes stop shrinking geometrically.
void nth_element_select(std::span<double> values, std::size_t k);

}  // namespace detail

}  // namespace byzsim
