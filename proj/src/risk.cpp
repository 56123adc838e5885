#include "tailgroups/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailgroups/angular.hpp"
#include "tailgroups/error.hpp"

namespace tailgroups {

void ExceedanceQuery::validate(double t) const {
  if (target.empty()) throw InvalidArgument("query target is empty");
  if (thresholds.size() != target.members.size()) {
    throw InvalidArgument("query needs one threshold per target column");
  }
  if (raw_scale) return;
  for (double x : thresholds) {
    if (!(x > t)) throw InvalidArgument("query thresholds must exceed t = " + std::to_string(t));
  }
}

double TailSimulation::rejection_rate() const {
  if (proposals == 0) return 0.0;
  return 1.0 - static_cast<double>(draws.rows()) / static_cast<double>(proposals);
}

TailSimulation simulate_joint_tail(const DataMatrix& z, const DependenceGroup& group, double t,
                                   int n_sim, Rng& rng, const TailFitOptions& opts) {
  if (!z.standardized) throw InvalidArgument("tail simulation expects standardized data");
  if (group.empty()) throw InvalidArgument("tail simulation needs a non-empty group");
  if (n_sim < 0) throw InvalidArgument("n_sim must be non-negative");
  for (int j : group.members) {
    if (j < 0 || j >= z.cols()) throw InvalidArgument("group column out of range");
  }
  const int m = group.size();

  std::vector<double> radius;
  std::vector<int> rows;
  for (int i = 0; i < z.rows(); ++i) {
    double r = 0.0;
    bool all = true;
    for (int j : group.members) {
      all = all && z.values(i, j) > t;
      r = std::max(r, z.values(i, j));
    }
    if (opts.rows == TailFitRows::AllExceed ? all : r > t) {
      radius.push_back(r);
      rows.push_back(i);
    }
  }

  TailSimulation sim;
  sim.group = group;
  sim.radial = gpd_fit(radius, t);
  sim.draws.resize(n_sim, m);
  if (m == 1) {
    const std::vector<double> r = gpd_sample(sim.radial, n_sim, rng);
    for (int i = 0; i < n_sim; ++i) sim.draws(i, 0) = r[static_cast<std::size_t>(i)];
    sim.proposals = n_sim;
    return sim;
  }

  if (rows.size() < 5) throw DegenerateSample("too few exceedances to fit the face density");
  Eigen::MatrixXd support(static_cast<Eigen::Index>(rows.size()), m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < m; ++c) {
      support(static_cast<Eigen::Index>(r), c) = z.values(rows[r], group.members[static_cast<std::size_t>(c)]);
    }
  }
  support.rowwise().normalize();
  const double h = opts.bandwidth ? *opts.bandwidth : auto_bandwidth(support);
  const FaceDensity density(group, std::move(support), h);
  sim.bandwidth = density.bandwidth();
  NormChoice norms;
  int accepted = 0;
  while (accepted < n_sim) {
    const int batch = std::max(64, n_sim - accepted);
    const std::vector<double> r = gpd_sample(sim.radial, batch, rng);
    const FaceSample a = sample_face_density(density, batch, rng);
    for (int b = 0; b < batch && accepted < n_sim; ++b) {
      ++sim.proposals;
      PolarPoint p;
      p.radius = r[static_cast<std::size_t>(b)];
      p.angle = a.angles.row(b).transpose();
      const Eigen::VectorXd v = inverse_polar(p, norms);
      if ((v.array() > t).all()) sim.draws.row(accepted++) = v.transpose();
    }
    if (sim.proposals >= 100000 && static_cast<double>(accepted) < 1e-4 * sim.proposals) {
      throw DegenerateSample("fewer than 1e-4 of simulated vectors exceed t on every coordinate");
    }
  }
  return sim;
}

RiskEstimate joint_exceedance_probability(const DataMatrix& z,
                                          const std::vector<DependenceGroup>& groups,
                                          const ExceedanceQuery& query, double t, int n_sim,
                                          Rng& rng, const TailFitOptions& opts) {
  if (query.raw_scale) throw InvalidArgument("map raw-scale queries with standardize_query first");
  query.validate(t);
  if (n_sim < 1) throw InvalidArgument("n_sim must be positive");

  std::vector<DependenceGroup> covering;
  for (const auto& g : groups) {
    if (g.contains(query.target)) covering.push_back(g);
  }
  std::sort(covering.begin(), covering.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.members < b.members;
  });
  covering.erase(std::unique(covering.begin(), covering.end()), covering.end());

  RiskEstimate est;
  est.n_sim = n_sim;
  if (covering.empty()) {
    est.structural_zero = true;
    return est;
  }

  std::vector<bool> taken(static_cast<std::size_t>(z.rows()), false);
  double variance = 0.0;
  for (const auto& g : covering) {
    long count = 0;
    for (int i = 0; i < z.rows(); ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      bool all = true;
      for (int j : g.members) all = all && z.values(i, j) > t;
      if (all) {
        taken[static_cast<std::size_t>(i)] = true;
        ++count;
      }
    }
    const TailSimulation sim = simulate_joint_tail(z, g, t, n_sim, rng, opts);
    std::vector<Eigen::Index> cols;
    for (int j : query.target.members) {
      cols.push_back(std::find(g.members.begin(), g.members.end(), j) - g.members.begin());
    }
    long hits = 0;
    for (Eigen::Index i = 0; i < sim.draws.rows(); ++i) {
      bool above = true;
      for (std::size_t c = 0; c < cols.size(); ++c) above = above && sim.draws(i, cols[c]) > query.thresholds[c];
      if (above) ++hits;
    }
    GroupContribution gc;
    gc.group = g;
    gc.conditioning_prob = static_cast<double>(count) / static_cast<double>(z.rows());
    gc.mc_fraction = static_cast<double>(hits) / static_cast<double>(n_sim);
    gc.rejection_rate = sim.rejection_rate();
    est.probability += gc.conditioning_prob * gc.mc_fraction;
    est.conditioning_prob += gc.conditioning_prob;
    variance += gc.conditioning_prob * gc.conditioning_prob * gc.mc_fraction * (1.0 - gc.mc_fraction) / n_sim;
    est.contributions.push_back(std::move(gc));
  }
  est.mc_fraction = est.conditioning_prob > 0.0 ? est.probability / est.conditioning_prob : 0.0;
  est.std_error = std::sqrt(variance);
  return est;
}

double pair_exceedance_oracle(double nu, double u) {
  if (!(nu >= 1.0)) throw InvalidArgument("Gumbel parameter must be >= 1");
  if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("u must lie in (0, 1)");
  const double s = -std::log(u);
  // 1 - 2u + u^c written with expm1 to keep precision for u near 1.
  return -2.0 * std::expm1(-s) + std::expm1(-std::pow(2.0, 1.0 / nu) * s);
}

double standardize_value(std::span<const double> column, double x, double t) {
  const auto n = static_cast<long>(column.size());
  if (n < 2) throw InvalidArgument("standardizing needs at least 2 observations");
  if (!(t > 1.0)) throw InvalidArgument("t must exceed 1");
  std::vector<double> s(column.begin(), column.end());
  std::sort(s.begin(), s.end());
  const double np1 = static_cast<double>(n) + 1.0;
  // m top values sit above u, whose rank maps to (n+1)/(m+1) ~ t.
  const long m = std::min(n - 1, static_cast<long>(std::floor(np1 / t)));
  if (m < 10) throw DegenerateSample("fewer than 10 observations above the level matching t");
  const double u = s[static_cast<std::size_t>(n - m - 1)];
  if (x > u) {
    const GpdParams tail = gpd_fit(s, u);
    const double p = (static_cast<double>(m) + 1.0) / np1 * gpd_survival(tail, x);
    if (!(p > 0.0)) throw InvalidArgument("threshold lies beyond the fitted upper endpoint");
    return 1.0 / p;
  }
  const auto r = static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
  return np1 / (np1 - r);
}

ExceedanceQuery standardize_query(const DataMatrix& raw, const ExceedanceQuery& query, double t) {
  if (!query.raw_scale) return query;
  if (query.thresholds.size() != query.target.members.size()) {
    throw InvalidArgument("query needs one threshold per target column");
  }
  ExceedanceQuery out = query;
  out.raw_scale = false;
  for (std::size_t c = 0; c < query.thresholds.size(); ++c) {
    const int j = query.target.members[c];
    if (j < 0 || j >= raw.cols()) throw InvalidArgument("query column out of range");
    const Eigen::VectorXd col = raw.values.col(j);
    out.thresholds[c] = standardize_value(std::span<const double>(col.data(), col.size()),
                                          query.thresholds[c], t);
  }
  return out;
}

}  // namespace tailgroups
