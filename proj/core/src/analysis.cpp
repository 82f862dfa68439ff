#include "byzsim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>
#include <string>

#include "byzsim/error.hpp"
#include "byzsim/numerics.hpp"

namespace byzsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Half of the symmetric Gauss-Legendre rules of orders 6, 12 and 20.
constexpr std::array<double, 3> kGl6X = {-0.932469514203152, -0.6612093864662645,
                                         -0.23861918608319693};
constexpr std::array<double, 3> kGl6W = {0.17132449237916975, 0.36076157304813894,
                                         0.46791393457269137};
constexpr std::array<double, 6> kGl12X = {-0.9815606342467192, -0.9041172563704748,
                                          -0.7699026741943047, -0.5873179542866175,
                                          -0.3678314989981802, -0.1252334085114689};
constexpr std::array<double, 6> kGl12W = {0.04717533638651202, 0.10693932599531888,
                                          0.1600783285433461,  0.20316742672306565,
                                          0.23349253653835464, 0.2491470458134027};
constexpr std::array<double, 10> kGl20X = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513258, -0.8391169718222188,
    -0.7463319064601508, -0.636053680726515,  -0.5108670019508271, -0.37370608871541955,
    -0.2277858511416451, -0.07652652113349734};
constexpr std::array<double, 10> kGl20W = {
    0.017614007139153273, 0.04060142980038622, 0.06267204833410944, 0.08327674157670467,
    0.10193011981724026,  0.11819453196151825, 0.13168863844917653, 0.14209610931838187,
    0.14917298647260366,  0.15275338713072578};

double phi_upper(double x) { return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0); }

// P(X > h, Y > k), |r| < 1 (Genz, "Numerical computation of rectangular
// bivariate and trivariate normal and t probabilities", 2004).
double bvn_upper(double h, double k, double r) {
  std::span<const double> xs;
  std::span<const double> ws;
  if (std::abs(r) < 0.3) {
    xs = kGl6X;
    ws = kGl6W;
  } else if (std::abs(r) < 0.75) {
    xs = kGl12X;
    ws = kGl12W;
  } else {
    xs = kGl20X;
    ws = kGl20W;
  }
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double sn = std::sin(asr * (xs[i] + 1.0) / 2.0);
      bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-xs[i] + 1.0) / 2.0);
      bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + phi_upper(h) * phi_upper(k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  const double as = (1.0 - r) * (1.0 + r);
  double a = std::sqrt(as);
  const double bs = (h - k) * (h - k);
  const double c = (4.0 - hk) / 8.0;
  const double d = (12.0 - hk) / 16.0;
  bvn = a * std::exp(-(bs / as + hk) / 2.0) *
        (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
  if (hk > -160.0) {
    const double b = std::sqrt(bs);
    bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * phi_upper(b / a) * b *
           (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
  }
  a /= 2.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x2 = (a * (xs[i] + 1.0)) * (a * (xs[i] + 1.0));
    double rs = std::sqrt(1.0 - x2);
    bvn += a * ws[i] *
           (std::exp(-bs / (2.0 * x2) - hk / (1.0 + rs)) / rs -
            std::exp(-(bs / x2 + hk) / 2.0) * (1.0 + c * x2 * (1.0 + d * x2)));
    x2 = as * (-xs[i] + 1.0) * (-xs[i] + 1.0) / 4.0;
    rs = std::sqrt(1.0 - x2);
    bvn += a * ws[i] * std::exp(-(bs / x2 + hk) / 2.0) *
           (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * x2 * (1.0 + d * x2)));
  }
  bvn = -bvn / kTwoPi;
  if (r > 0.0) return bvn + phi_upper(std::max(h, k));
  return -bvn + std::max(0.0, phi_upper(h) - phi_upper(k));
}

// Gauss-Kronrod 7/15 nodes on [0, 1] (symmetric half) and weights.
constexpr std::array<double, 8> kGkX = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kGkW = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGW = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kGkW[7] * fc;
  double gauss = kGW[3] * fc;
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kGkX[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kGkW[i] * sum;
    if (i % 2 == 1) gauss += kGW[i / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

constexpr std::size_t kMaxSegments = 4000;

}  // namespace

double sigma_k_squared(int quantile_levels, double sigma_sq) {
  if (quantile_levels < 1) throw DomainError("sigma_k_squared: K must be >= 1");
  if (!(sigma_sq > 0.0)) throw DomainError("sigma_k_squared: sigma^2 must be positive");
  const int k = quantile_levels;
  std::vector<double> tau(static_cast<std::size_t>(k));
  double psi_sum = 0.0;
  for (int i = 1; i <= k; ++i) {
    tau[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / (k + 1);
    psi_sum += normal_pdf(normal_inv_cdf(tau[static_cast<std::size_t>(i - 1)]));
  }
  // Symmetric in (k1, k2): diagonal once, off-diagonal twice.
  double numerator = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    numerator += tau[i] * (1.0 - tau[i]);
    for (std::size_t j = i + 1; j < tau.size(); ++j) numerator += 2.0 * tau[i] * (1.0 - tau[j]);
  }
  return numerator / (psi_sum * psi_sum) * sigma_sq;
}

EfficiencyReport efficiency_report(int quantile_levels) {
  EfficiencyReport r;
  r.quantile_levels = quantile_levels;
  r.sigma_k_sq_over_sigma_sq = sigma_k_squared(quantile_levels, 1.0);
  r.efficiency = 1.0 / r.sigma_k_sq_over_sigma_sq;
  return r;
}

double bivariate_normal_cdf(double x, double y, double rho) {
  if (std::isnan(x) || std::isnan(y) || std::isnan(rho)) {
    throw DomainError("bivariate_normal_cdf: NaN argument");
  }
  if (std::abs(rho) > 1.0) throw DomainError("bivariate_normal_cdf: |rho| > 1");
  if (x == -INFINITY || y == -INFINITY) return 0.0;
  if (x == INFINITY) return y == INFINITY ? 1.0 : normal_cdf(y);
  if (y == INFINITY) return normal_cdf(x);
  if (rho == 1.0) return normal_cdf(std::min(x, y));
  if (rho == -1.0) return std::max(0.0, normal_cdf(x) - normal_cdf(-y));
  return bvn_upper(-x, -y, rho);
}

double c_matrix_entry(const CovEntryInputs& in) {
  if (in.quantile_levels < 1) throw DomainError("c_matrix_entry: K must be >= 1");
  if (!(in.sigma_11 > 0.0 && in.sigma_22 > 0.0)) {
    throw DomainError("c_matrix_entry: variances must be positive");
  }
  const int k = in.quantile_levels;
  std::vector<double> tau(static_cast<std::size_t>(k));
  std::vector<double> delta(tau.size());
  double psi_sum = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    tau[i] = static_cast<double>(i + 1) / (k + 1);
    delta[i] = normal_inv_cdf(tau[i]);
    psi_sum += normal_pdf(delta[i]);
  }
  double numerator = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    for (std::size_t j = 0; j < tau.size(); ++j) {
      // At rho = 1 the joint CDF is exactly min(tau_i, tau_j).
      const double joint = in.rho == 1.0 ? std::min(tau[i], tau[j])
                                         : bivariate_normal_cdf(delta[i], delta[j], in.rho);
      numerator += joint - tau[i] * tau[j];
    }
  }
  return numerator / (psi_sum * psi_sum) * std::sqrt(in.sigma_11 * in.sigma_22);
}

double c_mom_entry(double rho, double sigma_11, double sigma_22) {
  if (!(sigma_11 > 0.0 && sigma_22 > 0.0)) throw DomainError("c_mom_entry: variances must be positive");
  const double orthant = bivariate_normal_cdf(0.0, 0.0, rho);
  return (2.0 * std::numbers::pi * orthant - std::numbers::pi / 2.0) * std::sqrt(sigma_11 * sigma_22);
}

QuadratureValue integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                   double abs_tol, const std::vector<double>& breakpoints) {
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(b);

  std::priority_queue<Segment> queue;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    Segment s = gauss_kronrod(f, cuts[i], cuts[i + 1]);
    value += s.value;
    error += s.error;
    queue.push(s);
  }
  while (error > abs_tol && queue.size() < kMaxSegments) {
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  return {value, error};
}

QuadratureValue c_limit_entry(double rho, double sigma_11, double sigma_22) {
  if (std::isnan(rho) || std::abs(rho) > 1.0) throw DomainError("c_limit_entry: |rho| > 1");
  if (!(sigma_11 > 0.0 && sigma_22 > 0.0)) {
    throw DomainError("c_limit_entry: variances must be positive");
  }
  constexpr double kBound = 8.0;
  constexpr double kOuterTol = 1e-9;
  constexpr double kInnerTol = 1e-11;
  constexpr double kRequired = 1e-6;

  double worst_inner = 0.0;
  // The joint CDF changes fastest across the line y2 = sign(rho) * y1.
  const bool strong = std::abs(rho) > 0.5;
  auto inner = [&](double y1) {
    std::vector<double> cuts;
    if (strong) cuts.push_back(rho > 0.0 ? y1 : -y1);
    const QuadratureValue q = integrate_adaptive(
        [&](double y2) { return normal_pdf(y2) * bivariate_normal_cdf(y1, y2, rho); }, -kBound,
        kBound, kInnerTol, cuts);
    worst_inner = std::max(worst_inner, q.error);
    return normal_pdf(y1) * q.value;
  };
  const QuadratureValue outer = integrate_adaptive(inner, -kBound, kBound, kOuterTol);
  const double error = outer.error + worst_inner;
  if (!(error <= kRequired)) {
    throw Error("c_limit_entry: quadrature reached only " + std::to_string(error) +
                " (required " + std::to_string(kRequired) + ")");
  }
  const double scale = std::sqrt(sigma_11 * sigma_22);
  return {(4.0 * std::numbers::pi * outer.value - std::numbers::pi) * scale,
          4.0 * std::numbers::pi * error * scale};
}

double h_phi(double phi) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  if (!(phi >= -kHalfPi && phi <= kHalfPi)) throw DomainError("h_phi: phi outside [-pi/2, pi/2]");
  const double rho = std::clamp(std::sin(phi), -1.0, 1.0);
  return (c_mom_entry(rho) - c_limit_entry(rho).value) / std::numbers::pi;
}

DenseMatrix covariance_gap_2d(double phi) {
  const double rho = std::clamp(std::sin(phi), -1.0, 1.0);
  const double diag = c_mom_entry(1.0) - c_limit_entry(1.0).value;
  const double off = c_mom_entry(rho) - c_limit_entry(rho).value;
  return DenseMatrix{{diag, off}, {off, diag}};
}

}  // namespace byzsim
