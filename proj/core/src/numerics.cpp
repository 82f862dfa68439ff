#include "byzsim/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "byzsim/error.hpp"

namespace byzsim {

namespace {

// Wichura, AS241 (PPND16). Relative accuracy about 1e-16 before refinement.
constexpr std::array<double, 8> kA = {
    3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
    3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr std::array<double, 8> kB = {
    1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
    5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
    2.8729085735721942674e+4, 5.2264952788528545610e+3};
constexpr std::array<double, 8> kC = {
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr std::array<double, 8> kD = {
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr std::array<double, 8> kE = {
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr std::array<double, 8> kF = {
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

double horner(const std::array<double, 8>& c, double x) {
  double acc = c[7];
  for (int i = 6; i >= 0; --i) acc = acc * x + c[static_cast<std::size_t>(i)];
  return acc;
}

// Quantile for tau in (0, 1/2]; result <= 0.
double lower_quantile(double tau) {
  const double q = tau - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q * horner(kA, r) / horner(kB, r);
  } else {
    double r = std::sqrt(-std::log(tau));
    if (r <= 5.0) {
      r -= 1.6;
      x = -horner(kC, r) / horner(kD, r);
    } else {
      r -= 5.0;
      x = -horner(kE, r) / horner(kF, r);
    }
  }
  // One Newton step against the erfc-based CDF, which is accurate in
  // relative terms throughout the lower tail.
  const double pdf = normal_pdf(x);
  if (pdf > 0.0) x -= (0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0) - tau) / pdf;
  return x;
}

constexpr std::size_t kSmallRange = 16;

void insertion_sort(std::span<double> v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double key = v[i];
    std::size_t j = i;
    while (j > 0 && v[j - 1] > key) {
      v[j] = v[j - 1];
      --j;
    }
    v[j] = key;
  }
}

double median_of_three(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

// Median of medians of groups of five; permutes v.
double median_of_medians_pivot(std::span<double> v) {
  const std::size_t groups = (v.size() + 4) / 5;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * 5;
    const std::size_t len = std::min<std::size_t>(5, v.size() - begin);
    auto group = v.subspan(begin, len);
    insertion_sort(group);
    std::swap(v[g], group[len / 2]);
  }
  auto medians = v.first(groups);
  detail::nth_element_select(medians, groups / 2);
  return medians[groups / 2];
}

}  // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("normal_cdf: non-finite argument");
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double normal_inv_cdf(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("normal_inv_cdf: probability must lie in (0, 1), got " +
                      std::to_string(tau));
  }
  if (tau <= 0.5) return lower_quantile(tau);
  return -lower_quantile(1.0 - tau);
}

namespace detail {

void nth_element_select(std::span<double> values, std::size_t k) {
  std::size_t lo = 0;
  std::size_t hi = values.size();
  // Quickselect is abandoned for median-of-medians pivots once partitions
  // fail to shrink to 3/4 of their size too often.
  int bad_rounds = 0;
  while (hi - lo > kSmallRange) {
    auto range = values.subspan(lo, hi - lo);
    const std::size_t n = range.size();
    const double pivot = bad_rounds >= 3
                             ? median_of_medians_pivot(range)
                             : median_of_three(range[0], range[n / 2], range[n - 1]);

    // Three-way partition: [lo, lt) < pivot, [lt, gt) == pivot, [gt, hi) > pivot.
    std::size_t lt = 0;
    std::size_t i = 0;
    std::size_t gt = n;
    while (i < gt) {
      if (range[i] < pivot) {
        std::swap(range[lt++], range[i++]);
      } else if (range[i] > pivot) {
        std::swap(range[i], range[--gt]);
      } else {
        ++i;
      }
    }
    const std::size_t rel = k - lo;
    std::size_t next_size;
    if (rel < lt) {
      hi = lo + lt;
      next_size = lt;
    } else if (rel >= gt) {
      lo += gt;
      next_size = n - gt;
    } else {
      return;
    }
    if (4 * next_size > 3 * n) ++bad_rounds;
  }
  insertion_sort(values.subspan(lo, hi - lo));
}

}  // namespace detail

double select_quantile_inplace(std::span<double> values, double tau) {
  if (values.empty()) throw DomainError("select_quantile: empty input");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("select_quantile: tau outside [0, 1]");
  for (double v : values) {
    if (std::isnan(v)) throw DomainError("select_quantile: NaN in input");
  }
  const double pos = tau * static_cast<double>(values.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(k);
  detail::nth_element_select(values, k);
  const double lower = values[k];
  if (frac == 0.0 || k + 1 >= values.size()) return lower;
  const double upper = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                                         values.end());
  return lower + frac * (upper - lower);
}

double select_quantile(std::span<const double> values, double tau) {
  std::vector<double> scratch(values.begin(), values.end());
  return select_quantile_inplace(scratch, tau);
}

}  // namespace byzsim
