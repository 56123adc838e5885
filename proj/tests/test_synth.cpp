#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tailgroups/error.hpp"
#include "tailgroups/synth.hpp"

using namespace tailgroups;

namespace {

// O(n^2) concordance count; exact for continuous data.
double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.size();
  long long s = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = (a(i) - a(j)) * (b(i) - b(j));
      s += (p > 0) - (p < 0);
    }
  }
  return 2.0 * static_cast<double>(s) / (static_cast<double>(n) * (n - 1));
}

double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  double d = 0.0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max({d, std::abs(u[i] - i / n), std::abs(u[i] - (i + 1) / n)});
  return d;
}

DependenceGroup g(std::vector<int> m) { return DependenceGroup(std::move(m)); }

}  // namespace

TEST_CASE("positive_stable: Laplace transform exp(-s^alpha)") {
  for (double alpha : {0.25, 0.5, 0.8}) {
    Rng rng(1);
    const int n = 200000;
    std::vector<double> v(n);
    for (auto& x : v) x = positive_stable(alpha, rng);
    for (double s : {0.5, 1.0, 2.0}) {
      double m = 0.0;
      for (double x : v) m += std::exp(-s * x);
      m /= n;
      CHECK(m == doctest::Approx(std::exp(-std::pow(s, alpha))).epsilon(0.01));
    }
  }
  Rng rng(2);
  CHECK(positive_stable(1.0, rng) == 1.0);
  CHECK_THROWS_AS(positive_stable(1.5, rng), InvalidArgument);
}

TEST_CASE("gumbel_copula_sample: Kendall tau for nu = 1 and 2") {
  Rng rng(3);
  const auto ind = gumbel_copula_sample(1.0, 2, 10000, rng);
  CHECK(std::abs(kendall_tau(ind.col(0), ind.col(1))) <= 0.03);
  const auto dep = gumbel_copula_sample(2.0, 3, 10000, rng);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) CHECK(std::abs(kendall_tau(dep.col(a), dep.col(b)) - 0.5) <= 0.03);
  }
  CHECK_THROWS_AS(gumbel_copula_sample(0.9, 2, 10, rng), InvalidArgument);
}

TEST_CASE("gumbel_copula_sample: uniform margins pass KS in at least 95% of seeds") {
  int pass = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(100 + seed);
    const auto u = gumbel_copula_sample(2.0, 2, 10000, rng);
    for (int j = 0; j < 2; ++j) {
      std::vector<double> c(u.col(j).data(), u.col(j).data() + u.rows());
      pass += ks_uniform(c) < 1.36 / 100.0;
      ++total;
    }
  }
  CHECK(pass >= 0.95 * total);
}

TEST_CASE("gumbel_copula_sample: diagonal C(u,u) within 3 binomial SE") {
  const int n = 100000;
  for (double nu : {1.5, 2.0, 4.0}) {
    Rng rng(4);
    const auto s = gumbel_copula_sample(nu, 2, n, rng);
    for (double u : {0.9, 0.99}) {
      long c = 0;
      for (int i = 0; i < n; ++i) c += (s(i, 0) <= u && s(i, 1) <= u);
      const double p = std::exp(-std::pow(2.0, 1.0 / nu) * -std::log(u));
      const double se = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(static_cast<double>(c) / n - p) <= 3 * se);
    }
  }
}

TEST_CASE("gumbel_pareto_sample: Pareto margins via 1/X uniform") {
  Rng rng(5);
  const auto x = gumbel_pareto_sample(2.0, 2, 10000, rng);
  CHECK(x.minCoeff() >= 1.0);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> u;
    for (int i = 0; i < x.rows(); ++i) u.push_back(1.0 / x(i, j));
    CHECK(ks_uniform(u) < 1.63 / 100.0);
  }
}

TEST_CASE("experiment_ground_truth: 7 singletons, 7 pairs, 1 triple") {
  const auto truth = experiment_ground_truth();
  REQUIRE(truth.size() == 15);
  int sizes[4] = {0, 0, 0, 0};
  for (const auto& grp : truth) ++sizes[grp.size()];
  CHECK(sizes[1] == 7);
  CHECK(sizes[2] == 7);
  CHECK(sizes[3] == 1);
  CHECK(std::is_sorted(truth.begin(), truth.end()));
  CHECK(std::find(truth.begin(), truth.end(), g({10, 12, 13})) != truth.end());
  CHECK(std::find(truth.begin(), truth.end(), g({0, 1})) != truth.end());
}

TEST_CASE("experiment_dataset: shape, margins and regimes") {
  ExperimentSpec spec;
  spec.n = 20000;
  Rng rng(6);
  Eigen::MatrixXi reg;
  const auto z = experiment_dataset(spec, rng, &reg);
  CHECK(z.standardized);
  CHECK(z.cols() == 14);
  CHECK(z.rows() == 20000);
  CHECK(z.column_names.front() == "X1");
  for (int j = 0; j < 14; ++j) {
    std::vector<double> u;
    for (int i = 0; i < z.rows(); ++i) u.push_back(1.0 / z.values(i, j));
    CHECK(ks_uniform(u) < 1.63 / std::sqrt(20000.0));
  }
  REQUIRE(reg.cols() == 3);
  const Eigen::MatrixXd r = reg.cast<double>();
  for (int b = 0; b < 3; ++b) CHECK(std::abs(r.col(b).mean() - 0.5) < 0.02);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const Eigen::VectorXd x = r.col(a).array() - r.col(a).mean();
      const Eigen::VectorXd y = r.col(b).array() - r.col(b).mean();
      CHECK(std::abs(x.dot(y) / (x.norm() * y.norm())) < 0.05);
    }
  }
  // in regime A columns 3,4 are coupled, in B columns 4,5
  int both34a = 0, both45a = 0, na = 0;
  for (int i = 0; i < z.rows(); ++i) {
    if (reg(i, 0) != 0) continue;
    ++na;
    both34a += z.values(i, 2) > 20 && z.values(i, 3) > 20;
    both45a += z.values(i, 3) > 20 && z.values(i, 4) > 20;
  }
  CHECK(both34a > 5 * std::max(1, both45a));
  CHECK(na > 0);
}

TEST_CASE("experiment_dataset: implied mixture weights 2/17 and 1/17") {
  // Unit-Frechet tail mass of each group: 2 for the two pure pairs, 1 for
  // each half-weighted component, 1 for each independent singleton.
  const auto truth = experiment_ground_truth();
  double total = 0.0;
  std::vector<double> mass;
  for (const auto& grp : truth) {
    const bool pure = grp == g({0, 1}) || grp == g({8, 9});
    mass.push_back(pure ? 2.0 : 1.0);
    total += mass.back();
  }
  CHECK(total == 17.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pure = truth[i] == g({0, 1}) || truth[i] == g({8, 9});
    CHECK(mass[i] / total == doctest::Approx(pure ? 2.0 / 17 : 1.0 / 17));
  }
}

TEST_CASE("classify_recovery: four classes from the two set differences") {
  const auto truth = experiment_ground_truth();
  CHECK(classify_recovery(truth, truth).classification == RecoveryClass::NoError);
  auto fewer = truth;
  fewer.pop_back();
  const auto r1 = classify_recovery(fewer, truth);
  CHECK(r1.classification == RecoveryClass::ErrorI);
  CHECK(r1.missing.size() == 1);
  auto more = truth;
  more.push_back(g({0, 5}));
  const auto r2 = classify_recovery(more, truth);
  CHECK(r2.classification == RecoveryClass::ErrorII);
  CHECK(r2.spurious == std::vector<DependenceGroup>{g({0, 5})});
  fewer.push_back(g({0, 5}));
  CHECK(classify_recovery(fewer, truth).classification == RecoveryClass::ErrorI_II);
  std::vector<DependenceGroup> shuffled(truth.rbegin(), truth.rend());
  shuffled.push_back(truth.front());
  CHECK(classify_recovery(shuffled, truth).classification == RecoveryClass::NoError);
  CHECK(to_string(RecoveryClass::ErrorI_II) == "Error I+II");
}

TEST_CASE("recovery_experiment: seeding and counts") {
  ExperimentSpec spec;
  spec.n = 1000;
  spec.k = 100;
  ExtremalParams p;
  p.n_r = 5;
  p.m_r = 2;
  p.sigma = 0.2;
  int calls = 0;
  const auto tab = recovery_experiment(spec, p, 2, 77, [&](int, const RecoveryResult&) { ++calls; });
  CHECK(calls == 2);
  CHECK(tab.trials.size() == 2);
  int sum = 0;
  for (int c : tab.counts) sum += c;
  CHECK(sum == 2);
  const auto again = recovery_experiment(spec, p, 2, 77);
  for (int i = 0; i < 2; ++i) {
    CHECK(again.trials[i].missing == tab.trials[i].missing);
    CHECK(again.trials[i].spurious == tab.trials[i].spurious);
  }
  CHECK(experiment_cluster_seed(77, 0) != experiment_cluster_seed(77, 1));
  CHECK_THROWS_AS(recovery_experiment(spec, p, 0, 1), InvalidArgument);
}
