#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tailgroups/extremal.hpp"
#include "tailgroups/random.hpp"
#include "tailgroups/tail.hpp"
#include "tailgroups/transform.hpp"

namespace tailgroups {

/// P(Z_j > x_j for every j in target). Thresholds follow the ascending order
/// of target.members.
struct ExceedanceQuery {
  DependenceGroup target;
  std::vector<double> thresholds;
  bool raw_scale = false;  // thresholds given on the original data scale

  /// Throws InvalidArgument on a size mismatch or a threshold not above t.
  void validate(double t) const;
};

/// Rows used to fit the radial GPD and the face density of a group E.
enum class TailFitRows {
  AnyExceed,  // |Z_E|_inf > t: the radius is GPD from t on
  AllExceed,  // every E-coordinate > t
};

struct TailFitOptions {
  std::optional<double> bandwidth;  // automatic when empty
  TailFitRows rows = TailFitRows::AnyExceed;
};

/// Draws of Z_E conditioned on every coordinate of E exceeding t.
struct TailSimulation {
  DependenceGroup group;
  Eigen::MatrixXd draws;  // n_sim x |E|
  long proposals = 0;     // (radius, angle) pairs drawn before rejection
  GpdParams radial;
  double bandwidth = 0.0; // 0 for singletons

  double rejection_rate() const;
};

/// Radius R = |Z_E|_inf and angle A = Z_E / |Z_E|_2 are fitted on the rows
/// selected by `opts.rows` (GPD for R, face kernel density for A), drawn
/// independently and mapped back with inverse_polar. Vectors with a
/// coordinate <= t are redrawn. A singleton E reduces to the GPD alone.
///
/// Throws DegenerateSample when the fits lack data or fewer than 1e-4 of the
/// proposals survive the conditioning.
TailSimulation simulate_joint_tail(const DataMatrix& z, const DependenceGroup& group, double t,
                                   int n_sim, Rng& rng, const TailFitOptions& opts = {});

struct GroupContribution {
  DependenceGroup group;
  double conditioning_prob = 0.0;
  double mc_fraction = 0.0;
  double rejection_rate = 0.0;
};

struct RiskEstimate {
  double probability = 0.0;
  int n_sim = 0;
  double conditioning_prob = 0.0;  // summed over covering groups
  double mc_fraction = 0.0;        // probability / conditioning_prob
  double std_error = 0.0;
  bool structural_zero = false;
  std::vector<GroupContribution> contributions;
};

/// Joint exceedance probability of a standardized-scale query.
///
/// With no discovered group containing the target the answer is a structural
/// zero. Otherwise each covering group E contributes
/// P(rows in E's exceedance event) * P(target above x | simulated tail of E).
/// Covering groups are visited largest first (canonical order on ties) and a
/// row is counted for the first group whose coordinates all exceed t, which
/// keeps the conditioning events disjoint.
RiskEstimate joint_exceedance_probability(const DataMatrix& z,
                                          const std::vector<DependenceGroup>& groups,
                                          const ExceedanceQuery& query, double t, int n_sim,
                                          Rng& rng, const TailFitOptions& opts = {});

/// P(U1 > u, U2 > u) for a bivariate Gumbel copula with parameter nu:
/// 1 - 2u + exp(-2^(1/nu) * (-log u)).
double pair_exceedance_oracle(double nu, double u);

/// Standardized value of a raw observation x for one column: the rank
/// transform inside the sample and a GPD tail, fitted above the raw level
/// whose rank maps to t, beyond it.
double standardize_value(std::span<const double> column, double x, double t);

/// Maps a raw-scale query to the standardized scale column by column.
ExceedanceQuery standardize_query(const DataMatrix& raw, const ExceedanceQuery& query, double t);

}  // namespace tailgroups
