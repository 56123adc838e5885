#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "tailgroups/error.hpp"
#include "tailgroups/tail.hpp"

using namespace tailgroups;

namespace {

// Direct Hill sum over a descending copy, written independently of the library.
double hill_oracle(std::vector<double> x, int k) {
  std::sort(x.begin(), x.end(), std::greater<>());
  long double s = 0.0L;
  for (int i = 0; i < k; ++i) s += std::log(static_cast<long double>(x[i]) / x[k]);
  return static_cast<double>(k / s);
}

std::vector<double> pareto_sample(double alpha, int n, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = std::pow(rng.uniform(), -1.0 / alpha);
  return x;
}

std::vector<double> excesses_of(std::span<const double> x, double u) {
  std::vector<double> y;
  for (double v : x) {
    if (v > u) y.push_back(v - u);
  }
  return y;
}

}  // namespace

TEST_CASE("hill: two largest values e*c and c give alpha 1") {
  const double c = 3.5;
  const std::vector<double> x{1.0, c, std::numbers::e * c, 2.0};
  const auto est = hill_estimate(x, 1, 0.95);
  CHECK(est.alpha == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(est.k == 1);
}

TEST_CASE("hill: Wald interval uses z * alpha / sqrt(k)") {
  Rng rng(11);
  const auto x = pareto_sample(2.0, 5000, rng);
  const auto est = hill_estimate(x, 200, 0.95);
  const double half = 1.959963984540054 * est.alpha / std::sqrt(200.0);
  CHECK(est.ci_high - est.alpha == doctest::Approx(half).epsilon(1e-12));
  CHECK(est.alpha - est.ci_low == doctest::Approx(half).epsilon(1e-12));
  CHECK(est.confidence == 0.95);
}

TEST_CASE("hill: agrees with the direct sum") {
  Rng rng(7);
  const auto x = pareto_sample(1.5, 2000, rng);
  for (int k : {1, 5, 50, 500, 1999}) {
    CHECK(hill_estimate(x, k, 0.9).alpha == doctest::Approx(hill_oracle(x, k)).epsilon(1e-12));
  }
}

TEST_CASE("hill: Pareto(2), n=1e5, k=1000 lies in [1.8, 2.2]") {
  Rng rng(2024);
  const auto x = pareto_sample(2.0, 100000, rng);
  const double a = hill_estimate(x, 1000, 0.95).alpha;
  CHECK(a >= 1.8);
  CHECK(a <= 2.2);
  // frozen from hill_oracle on the same draw
  CHECK(a == doctest::Approx(hill_oracle(x, 1000)).epsilon(1e-12));
}

TEST_CASE("hill: errors") {
  const std::vector<double> flat(10, 4.0);
  CHECK_THROWS_AS(hill_estimate(flat, 3, 0.95), DegenerateSample);
  const std::vector<double> neg{1.0, -2.0, 3.0};
  CHECK_THROWS_AS(hill_estimate(neg, 1, 0.95), InvalidArgument);
  const std::vector<double> ok{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(hill_estimate(ok, 0, 0.95), InvalidArgument);
  CHECK_THROWS_AS(hill_estimate(ok, 3, 0.95), InvalidArgument);
  CHECK_THROWS_AS(hill_estimate(ok, 1, 1.0), InvalidArgument);
}

TEST_CASE("hill: scale equivariance is exact") {
  Rng rng(3);
  auto x = pareto_sample(3.0, 1000, rng);
  const double a = hill_estimate(x, 100, 0.95).alpha;
  for (double& v : x) v *= 8.0;  // power of two keeps the ratios bit-identical
  CHECK(hill_estimate(x, 100, 0.95).alpha == a);
}

TEST_CASE("hill: exact Pareto grid converges") {
  const int n = 100000;
  for (double alpha : {1.0, 2.0, 4.0}) {
    std::vector<double> x(n);
    for (int i = 1; i <= n; ++i) x[i - 1] = std::pow(static_cast<double>(n) / i, 1.0 / alpha);
    CHECK(std::abs(hill_estimate(x, 1000, 0.95).alpha - alpha) <= 0.1);
  }
}

TEST_CASE("hill_curve: length, endpoints and k=1 case") {
  Rng rng(5);
  const auto x = pareto_sample(1.0, 3000, rng);
  const auto one = hill_curve(x, 1, 1, 0.95);
  REQUIRE(one.size() == 1);
  CHECK(one[0].alpha == hill_estimate(x, 1, 0.95).alpha);
  const auto curve = hill_curve(x, 10, 400, 0.95);
  CHECK(curve.size() == 391);
  CHECK(curve.front().k == 10);
  CHECK(curve.back().k == 400);
  CHECK(curve[137].alpha == doctest::Approx(hill_estimate(x, 147, 0.95).alpha).epsilon(1e-12));
  CHECK_THROWS_AS(hill_curve(x, 5, 4, 0.95), InvalidArgument);
}

TEST_CASE("hill_curve: Pareto(1) grid is near 1 in the mid range") {
  const int n = 20000;
  std::vector<double> x(n);
  for (int i = 1; i <= n; ++i) x[i - 1] = static_cast<double>(n) / i;
  for (const auto& e : hill_curve(x, 100, 2000, 0.95)) CHECK(std::abs(e.alpha - 1.0) < 0.05);
}

TEST_CASE("gpd: xi=0.5 recovered within 0.05 at n=1e5") {
  Rng rng(42);
  const auto y = gpd_sample(GpdParams{0.0, 1.0, 0.5, 1.0}, 100000, rng);
  const auto fit = gpd_fit(y, 0.0);
  CHECK(std::abs(fit.scale - 1.0) <= 0.05);
  CHECK(std::abs(fit.shape - 0.5) <= 0.05);
  CHECK(fit.exceed_prob == 1.0);
}

TEST_CASE("gpd: exponential excesses give xi near 0") {
  Rng rng(43);
  std::vector<double> y(100000);
  for (auto& v : y) v = rng.exponential();
  const auto fit = gpd_fit(y, 0.0);
  CHECK(std::abs(fit.shape) <= 0.03);
}

TEST_CASE("gpd: too few excesses") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  CHECK_THROWS_AS(gpd_fit(x, 3.0), DegenerateSample);
  const auto edge = gpd_fit(x, 1.5);  // near-uniform excesses: maximum at shape -1
  CHECK(edge.shape == -1.0);
  CHECK(edge.scale == doctest::Approx(10.5));
}

TEST_CASE("gpd: exceed_prob is the sample fraction above the threshold") {
  Rng rng(8);
  std::vector<double> x(1000);
  for (auto& v : x) v = rng.exponential();
  const auto fit = gpd_fit(x, 1.0);
  long above = std::count_if(x.begin(), x.end(), [](double v) { return v > 1.0; });
  CHECK(fit.exceed_prob == static_cast<double>(above) / 1000.0);
  CHECK(fit.threshold == 1.0);
}

TEST_CASE("gpd: fitted likelihood dominates the truth and a brute-force grid") {
  for (double xi : {-0.2, 0.0, 0.5}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(100 + seed);
      const auto y = gpd_sample(GpdParams{0.0, 1.0, xi, 1.0}, 2000, rng);
      const auto fit = gpd_fit(y, 0.0);
      const double best = gpd_log_likelihood(y, fit.scale, fit.shape);
      CHECK(best >= gpd_log_likelihood(y, 1.0, xi));
      // coarse oracle: exhaustive scan around the truth
      double grid = -INFINITY;
      for (double s = 0.8; s <= 1.2; s += 0.01) {
        for (double k = xi - 0.2; k <= xi + 0.2; k += 0.01) grid = std::max(grid, gpd_log_likelihood(y, s, k));
      }
      CHECK(best >= grid - 1e-9);
    }
  }
}

TEST_CASE("gpd: gradient at the optimum vanishes") {
  Rng rng(9);
  const auto y = gpd_sample(GpdParams{0.0, 2.0, 0.3, 1.0}, 5000, rng);
  const auto f = gpd_fit(y, 0.0);
  const double h = 1e-5;
  const double n = static_cast<double>(y.size());
  const double ds = (gpd_log_likelihood(y, f.scale * std::exp(h), f.shape) -
                     gpd_log_likelihood(y, f.scale * std::exp(-h), f.shape)) / (2 * h * n);
  const double dk = (gpd_log_likelihood(y, f.scale, f.shape + h) -
                     gpd_log_likelihood(y, f.scale, f.shape - h)) / (2 * h * n);
  CHECK(std::abs(ds) < 1e-6);
  CHECK(std::abs(dk) < 1e-6);
}

TEST_CASE("gpd_log_likelihood: closed form and endpoint") {
  const std::vector<double> y{0.5, 1.0, 2.0};
  double expected = 0.0;
  for (double v : y) expected += -std::log(2.0) - (1.0 / 0.25 + 1.0) * std::log1p(0.25 * v / 2.0);
  CHECK(gpd_log_likelihood(y, 2.0, 0.25) == doctest::Approx(expected).epsilon(1e-13));
  double expo = 0.0;
  for (double v : y) expo += -v;
  CHECK(gpd_log_likelihood(y, 1.0, 0.0) == doctest::Approx(expo).epsilon(1e-13));
  CHECK(std::isinf(gpd_log_likelihood(y, 1.0, -1.0)));  // endpoint 1 < 2
}

TEST_CASE("gpd_sample: exponential mean, threshold floor, survival identity") {
  Rng rng(77);
  const auto e = gpd_sample(GpdParams{0.0, 1.0, 0.0, 1.0}, 100000, rng);
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  CHECK(mean >= 0.97);
  CHECK(mean <= 1.03);

  const GpdParams p{5.0, 0.3, -0.4, 1.0};
  const auto d = gpd_sample(p, 20000, rng);
  CHECK(*std::min_element(d.begin(), d.end()) > 5.0);

  const GpdParams h{0.0, 1.0, 0.5, 1.0};
  const auto s = gpd_sample(h, 1000000, rng);
  for (double y : {1.0, 5.0}) {
    const double emp = static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v > y; })) / s.size();
    CHECK(emp * std::pow(1.0 + 0.5 * y, 2.0) == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("gpd_survival and gpd_quantile are inverse") {
  const GpdParams p{2.0, 1.5, 0.3, 0.1};
  for (double q : {0.9, 0.5, 0.01, 1e-6}) {
    CHECK(gpd_survival(p, gpd_quantile(p, q)) == doctest::Approx(q).epsilon(1e-12));
  }
  CHECK(gpd_survival(p, 1.0) == 1.0);
}
