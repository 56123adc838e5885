#include "tailgroups/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tailgroups/error.hpp"

namespace tailgroups {

double positive_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("stable index must lie in (0, 1]");
  if (alpha == 1.0) return 1.0;
  // Kanter's representation of the one-sided stable law.
  const double w = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  return std::sin(alpha * w) / std::pow(std::sin(w), 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * w) / e, (1.0 - alpha) / alpha);
}

namespace {

// Fills `out` (n x m) with s_i = (E_i / V)^(1/nu), so that U_i = exp(-s_i).
void gumbel_exponents(double nu, int m, int n, Rng& rng, Eigen::MatrixXd& out) {
  if (!(nu >= 1.0)) throw InvalidArgument("Gumbel parameter nu must be >= 1");
  if (m < 1 || n < 0) throw InvalidArgument("invalid copula sample shape");
  out.resize(n, m);
  const double alpha = 1.0 / nu;
  for (int i = 0; i < n; ++i) {
    if (nu == 1.0) {
      for (int j = 0; j < m; ++j) out(i, j) = rng.exponential();
      continue;
    }
    const double v = positive_stable(alpha, rng);
    for (int j = 0; j < m; ++j) out(i, j) = std::pow(rng.exponential() / v, alpha);
  }
}

double pareto_from_exponent(double s) { return -1.0 / std::expm1(-s); }

}  // namespace

Eigen::MatrixXd gumbel_copula_sample(double nu, int m, int n, Rng& rng) {
  Eigen::MatrixXd s;
  gumbel_exponents(nu, m, n, rng, s);
  return (-s.array()).exp().matrix();
}

Eigen::MatrixXd gumbel_pareto_sample(double nu, int m, int n, Rng& rng) {
  Eigen::MatrixXd s;
  gumbel_exponents(nu, m, n, rng, s);
  return s.unaryExpr([](double v) { return pareto_from_exponent(v); });
}

void ExperimentSpec::validate() const {
  if (!(nu >= 1.0)) throw InvalidArgument("nu must be >= 1");
  if (n < 2 || k < 1 || k >= n) throw InvalidArgument("need 1 <= k < n");
}

DataMatrix experiment_dataset(const ExperimentSpec& spec, Rng& rng) {
  return experiment_dataset(spec, rng, nullptr);
}

DataMatrix experiment_dataset(const ExperimentSpec& spec, Rng& rng, Eigen::MatrixXi* regimes) {
  spec.validate();
  const int n = spec.n;
  DataMatrix out;
  out.values.resize(n, 14);
  out.column_names = default_column_names(14);
  out.standardized = true;
  if (regimes) regimes->resize(n, 3);

  auto free_pareto = [&]() { return 1.0 / rng.uniform(); };
  auto coupled = [&](int m) {
    Eigen::MatrixXd s;
    gumbel_exponents(spec.nu, m, 1, rng, s);
    Eigen::VectorXd x(m);
    for (int j = 0; j < m; ++j) x(j) = pareto_from_exponent(s(0, j));
    return x;
  };

  for (int i = 0; i < n; ++i) {
    auto row = out.values.row(i);
    Eigen::VectorXd p = coupled(2);
    row(0) = p(0);
    row(1) = p(1);

    // Blocks (3,4,5) and (6,7,8): regime A couples the first two columns,
    // regime B the last two.
    for (int b = 0; b < 2; ++b) {
      const int c0 = 2 + 3 * b;
      const bool regime_b = rng.uniform() < 0.5;
      if (regimes) (*regimes)(i, b) = regime_b ? 1 : 0;
      p = coupled(2);
      if (!regime_b) {
        row(c0) = p(0);
        row(c0 + 1) = p(1);
        row(c0 + 2) = free_pareto();
      } else {
        row(c0 + 1) = p(0);
        row(c0 + 2) = p(1);
        row(c0) = free_pareto();
      }
    }

    p = coupled(2);
    row(8) = p(0);
    row(9) = p(1);

    // Block (11..14): triple (11,13,14) with 12 free, or pair (11,12) with 13, 14 free.
    const bool regime_b = rng.uniform() < 0.5;
    if (regimes) (*regimes)(i, 2) = regime_b ? 1 : 0;
    if (!regime_b) {
      p = coupled(3);
      row(10) = p(0);
      row(12) = p(1);
      row(13) = p(2);
      row(11) = free_pareto();
    } else {
      p = coupled(2);
      row(10) = p(0);
      row(11) = p(1);
      row(12) = free_pareto();
      row(13) = free_pareto();
    }
  }
  return out;
}

std::vector<DependenceGroup> experiment_ground_truth() {
  std::vector<DependenceGroup> g;
  for (int j : {3, 5, 6, 8, 12, 13, 14}) g.emplace_back(std::vector<int>{j - 1});
  const int pairs[7][2] = {{1, 2}, {3, 4}, {4, 5}, {6, 7}, {7, 8}, {9, 10}, {11, 12}};
  for (const auto& pr : pairs) g.emplace_back(std::vector<int>{pr[0] - 1, pr[1] - 1});
  g.emplace_back(std::vector<int>{10, 12, 13});
  std::sort(g.begin(), g.end());
  return g;
}

std::string to_string(RecoveryClass c) {
  switch (c) {
    case RecoveryClass::NoError: return "No error";
    case RecoveryClass::ErrorI: return "Error I";
    case RecoveryClass::ErrorII: return "Error II";
    case RecoveryClass::ErrorI_II: return "Error I+II";
  }
  return "?";
}

RecoveryResult classify_recovery(const std::vector<DependenceGroup>& found,
                                 const std::vector<DependenceGroup>& truth) {
  std::vector<DependenceGroup> f = found, t = truth;
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  RecoveryResult r;
  std::set_difference(t.begin(), t.end(), f.begin(), f.end(), std::back_inserter(r.missing));
  std::set_difference(f.begin(), f.end(), t.begin(), t.end(), std::back_inserter(r.spurious));
  const bool type1 = !r.missing.empty();
  const bool type2 = !r.spurious.empty();
  r.classification = type1 ? (type2 ? RecoveryClass::ErrorI_II : RecoveryClass::ErrorI)
                           : (type2 ? RecoveryClass::ErrorII : RecoveryClass::NoError);
  return r;
}

std::uint64_t experiment_cluster_seed(std::uint64_t seed, int trial) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1));
}

RecoveryTable recovery_experiment(const ExperimentSpec& spec, ExtremalParams params, int trials,
                                  std::uint64_t seed,
                                  const std::function<void(int, const RecoveryResult&)>& progress) {
  spec.validate();
  if (trials < 1) throw InvalidArgument("trials must be positive");
  params.t = spec.threshold();
  const std::vector<DependenceGroup> truth = experiment_ground_truth();
  RecoveryTable table;
  for (int i = 0; i < trials; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const DataMatrix z = experiment_dataset(spec, rng);
    const ExtremalResult res = run_extremal_clustering(z, params, experiment_cluster_seed(seed, i));
    RecoveryResult r = classify_recovery(res.groups, truth);
    ++table.counts[static_cast<std::size_t>(r.classification)];
    if (progress) progress(i, r);
    table.trials.push_back(std::move(r));
  }
  return table;
}

}  // namespace tailgroups
