#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "byzsim/analysis.hpp"
#include "byzsim/error.hpp"
#include "byzsim/numerics.hpp"
#include "byzsim/rng.hpp"
#include "oracles.hpp"

using namespace byzsim;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference value of the K -> infinity covariance entry for unit variances.
double limit_oracle(double rho) { return 2.0 * std::asin(rho / 2.0); }

}  // namespace

TEST_CASE("sigma_k_squared examples") {
  CHECK(std::abs(sigma_k_squared(1) - kPi / 2.0) < 1e-12);
  CHECK(std::abs(sigma_k_squared(2000) / (kPi / 3.0) - 1.0) < 0.005);
  CHECK(1.0 / sigma_k_squared(5) > 0.9);
  CHECK(sigma_k_squared(10, 4.0) == doctest::Approx(4.0 * sigma_k_squared(10)));
  CHECK_THROWS_AS(sigma_k_squared(0), DomainError);
  CHECK_THROWS_AS(sigma_k_squared(3, 0.0), DomainError);
}

TEST_CASE("sigma_k_squared agrees with a direct double sum using oracle quantiles") {
  for (int k : {2, 3, 10, 25}) {
    double psi = 0.0;
    for (int i = 1; i <= k; ++i) psi += normal_pdf(oracle::phi_quantile(i / (k + 1.0)));
    double num = 0.0;
    for (int a = 1; a <= k; ++a) {
      for (int b = 1; b <= k; ++b) {
        const double ta = a / (k + 1.0);
        const double tb = b / (k + 1.0);
        num += std::min(ta, tb) * (1.0 - std::max(ta, tb));
      }
    }
    CHECK(sigma_k_squared(k) == doctest::Approx(num / (psi * psi)).epsilon(1e-9));
  }
}

TEST_CASE("efficiency is non-decreasing over even K and bounded by 3/pi") {
  double previous = 0.0;
  for (int k = 2; k <= 400; k += 2) {
    const EfficiencyReport r = efficiency_report(k);
    CHECK(r.efficiency > previous);
    CHECK(r.efficiency <= 1.0);
    CHECK(r.efficiency < kVrmomLimitEfficiency);
    previous = r.efficiency;
  }
  const EfficiencyReport r = efficiency_report(10);
  CHECK(r.mom_efficiency == 2.0 / kPi);
  CHECK(r.limit_efficiency == 3.0 / kPi);
  CHECK(r.quantile_levels == 10);
}

TEST_CASE("bivariate_normal_cdf examples") {
  CHECK(bivariate_normal_cdf(0, 0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  for (double rho = -0.99; rho < 1.0; rho += 0.09) {
    CHECK(std::abs(bivariate_normal_cdf(0, 0, rho) - (0.25 + std::asin(rho) / (2.0 * kPi))) < 1e-14);
  }
  for (double rho : {-0.9, 0.0, 0.5, 0.999}) {
    CHECK(std::abs(bivariate_normal_cdf(0.7, 40.0, rho) - normal_cdf(0.7)) < 1e-14);
    CHECK(bivariate_normal_cdf(0.7, INFINITY, rho) == normal_cdf(0.7));
    CHECK(bivariate_normal_cdf(-INFINITY, 0.3, rho) == 0.0);
  }
  CHECK(bivariate_normal_cdf(0.4, -0.2, 1.0) == normal_cdf(-0.2));
  CHECK(bivariate_normal_cdf(0.4, -0.2, -1.0) == doctest::Approx(normal_cdf(0.4) - normal_cdf(0.2)));
  CHECK(bivariate_normal_cdf(-0.4, -0.2, -1.0) == 0.0);
  CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, 1.01), DomainError);
  CHECK_THROWS_AS(bivariate_normal_cdf(std::nan(""), 0, 0.2), DomainError);
}

TEST_CASE("bivariate_normal_cdf matches high precision references") {
  // Values from 30-digit quadrature of phi(t) Phi((y - rho t) / sqrt(1 - rho^2)).
  struct Case {
    double x, y, rho, expected;
  };
  const Case cases[] = {
      {0.3, -0.2, 0.5, 0.33619843701551877},   {1, 2, 0.95, 0.84133614703287114},
      {-1, 0.5, -0.95, 0.002322899490085131},  {0, 0, 0.99, 0.47747329317779394},
      {-2, -2, 0.999, 0.02178710694063509},    {0.5, 0.5, -0.5, 0.41922310903660271},
      {1.5, -1, 0.2, 0.15337994900927892},     {-3, 2, -0.93, 7.0159031547498507e-6},
  };
  for (const Case& c : cases) CHECK(std::abs(bivariate_normal_cdf(c.x, c.y, c.rho) - c.expected) < 1e-14);
}

TEST_CASE("bivariate_normal_cdf agrees with a Monte Carlo oracle") {
  struct Case {
    double x, y, rho;
  };
  const Case cases[] = {{0.3, -0.5, 0.6}, {-1.0, 1.2, -0.8}, {0.9, 0.1, 0.97}};
  std::uint64_t seed = 1000;
  for (const Case& c : cases) {
    const oracle::McEstimate mc = oracle::bvn_monte_carlo(c.x, c.y, c.rho, 10'000'000, seed++);
    CHECK(std::abs(bivariate_normal_cdf(c.x, c.y, c.rho) - mc.mean) < 4.0 * mc.standard_error);
  }
}

TEST_CASE("bivariate_normal_cdf is symmetric and monotone") {
  SeededRng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double x = 2.0 * rng.normal();
    const double y = 2.0 * rng.normal();
    const double rho = 2.0 * rng.uniform() - 1.0;
    const double v = bivariate_normal_cdf(x, y, rho);
    CHECK(v == doctest::Approx(bivariate_normal_cdf(y, x, rho)).epsilon(1e-13));
    CHECK(v >= 0.0);
    CHECK(v <= std::min(normal_cdf(x), normal_cdf(y)) + 1e-15);
    CHECK(bivariate_normal_cdf(x + 0.1, y, rho) >= v - 1e-15);
    // P(X <= x, Y <= y) + P(X <= x, -Y < -y) = Phi(x)
    CHECK(v + bivariate_normal_cdf(x, -y, -rho) == doctest::Approx(normal_cdf(x)).epsilon(1e-12));
  }
}

TEST_CASE("c_matrix_entry examples") {
  CHECK(std::abs(c_matrix_entry({0.0, 1.0, 1.0, 10})) < 1e-14);
  for (int k = 1; k <= 50; ++k) {
    CHECK(std::abs(c_matrix_entry({1.0, 1.0, 1.0, k}) - sigma_k_squared(k)) < 1e-8);
  }
  CHECK(c_matrix_entry({1.0, 2.0, 2.0, 10}) == doctest::Approx(sigma_k_squared(10, 2.0)));
  CHECK(c_matrix_entry({-0.4, 1, 1, 6}) == doctest::Approx(-c_matrix_entry({0.4, 1, 1, 6})).epsilon(1e-12));
  CHECK_THROWS_AS(c_matrix_entry({1.2, 1, 1, 10}), DomainError);
  CHECK_THROWS_AS(c_matrix_entry({0.5, 1, 1, 0}), DomainError);
}

TEST_CASE("c_matrix_entry agrees with the indicator-covariance Monte Carlo oracle") {
  const int k = 10;
  const double rho = 0.5;
  std::vector<double> deltas;
  double psi = 0.0;
  for (int i = 1; i <= k; ++i) {
    deltas.push_back(oracle::phi_quantile(i / (k + 1.0)));
    psi += normal_pdf(deltas.back());
  }
  SeededRng rng(77);
  const std::size_t draws = 2'000'000;
  std::vector<double> a(draws);
  std::vector<double> b(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const double z1 = rng.normal();
    const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * rng.normal();
    int c1 = 0;
    int c2 = 0;
    for (double d : deltas) {
      c1 += z1 <= d;
      c2 += z2 <= d;
    }
    a[i] = c1;
    b[i] = c2;
  }
  const double ma = oracle::sample_mean(a);
  const double mb = oracle::sample_mean(b);
  std::vector<double> prod(draws);
  for (std::size_t i = 0; i < draws; ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  const double estimate = oracle::sample_mean(prod) / (psi * psi);
  const double se = std::sqrt(oracle::sample_variance(prod) / static_cast<double>(draws)) / (psi * psi);
  CHECK(std::abs(c_matrix_entry({rho, 1, 1, k}) - estimate) < 3.0 * se);
}

TEST_CASE("c_mom_entry examples") {
  CHECK(c_mom_entry(1.0) == doctest::Approx(kPi / 2.0).epsilon(1e-15));
  CHECK(c_mom_entry(1.0, 3.0, 3.0) == doctest::Approx(3.0 * kPi / 2.0).epsilon(1e-15));
  CHECK(std::abs(c_mom_entry(0.0)) < 1e-15);
  for (double phi = -1.5; phi <= 1.5; phi += 0.25) {
    CHECK(std::abs(c_mom_entry(std::sin(phi)) - phi) < 1e-13);
    CHECK(c_mom_entry(std::sin(phi), 2.0, 8.0) == doctest::Approx(4.0 * phi).epsilon(1e-12));
  }
}

TEST_CASE("integrate_adaptive") {
  const QuadratureValue q = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13);
  CHECK(std::abs(q.value - (std::exp(1.0) - 1.0)) < 1e-13);
  const QuadratureValue kink = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, -1.0, 1.0, 1e-12, {0.3});
  CHECK(std::abs(kink.value - (1.3 * 1.3 + 0.7 * 0.7) / 2.0) < 1e-12);
  const QuadratureValue g = integrate_adaptive([](double x) { return normal_pdf(x); }, -8.0, 8.0, 1e-13);
  CHECK(std::abs(g.value - 1.0) < 1e-13);
}

TEST_CASE("c_limit_entry matches its closed form") {
  CHECK(std::abs(c_limit_entry(1.0).value - kPi / 3.0) < 1e-5);
  CHECK(std::abs(c_limit_entry(0.0).value) < 1e-5);
  CHECK(c_limit_entry(1.0, 2.0, 2.0).value == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-5));
  for (double rho = -1.0; rho <= 1.0; rho += 0.125) {
    const QuadratureValue q = c_limit_entry(rho);
    CHECK(std::abs(q.value - limit_oracle(rho)) < 1e-5);
    CHECK(q.error < 1e-5);
  }
  CHECK_THROWS_AS(c_limit_entry(1.5), DomainError);
}

TEST_CASE("c_matrix_entry approaches c_limit_entry") {
  CHECK(std::abs(c_matrix_entry({0.3, 1, 1, 200}) - c_limit_entry(0.3).value) < 2e-2);
  CHECK(std::abs(c_matrix_entry({0.8, 1, 1, 400}) - c_limit_entry(0.8).value) < 2e-2);
}

TEST_CASE("h_phi examples") {
  CHECK(std::abs(h_phi(0.0)) < 1e-6);
  CHECK(std::abs(h_phi(kPi / 2.0) - 1.0 / 6.0) < 1e-4);
  CHECK(std::abs(h_phi(-kPi / 2.0) + 1.0 / 6.0) < 1e-4);
  for (double phi = -1.5; phi <= 1.5; phi += 0.1) {
    const double closed = phi / kPi - 2.0 * std::asin(std::sin(phi) / 2.0) / kPi;
    CHECK(std::abs(h_phi(phi) - closed) < 1e-4);
  }
  CHECK_THROWS_AS(h_phi(2.0), DomainError);
}

TEST_CASE("h_phi grid: bounded, increasing, and the covariance gap is PSD") {
  const int points = 181;
  double previous = -1.0;
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double phi = -kPi / 2.0 + kPi * i / (points - 1);
    const double h = h_phi(std::clamp(phi, -kPi / 2.0, kPi / 2.0));
    worst = std::max(worst, std::abs(h));
    CHECK(h >= previous - 1e-9);
    previous = h;
    const DenseMatrix gap = covariance_gap_2d(std::clamp(phi, -kPi / 2.0, kPi / 2.0));
    CHECK(gap(0, 0) == doctest::Approx(kPi / 6.0).epsilon(1e-5));
    CHECK(gap(0, 0) >= 0.0);
    CHECK(gap(0, 0) * gap(1, 1) - gap(0, 1) * gap(1, 0) >= -1e-9);
  }
  CHECK(worst <= 1.0 / 6.0 + 1e-3);
}
