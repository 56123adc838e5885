#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tailgroups/extremal.hpp"
#include "tailgroups/random.hpp"
#include "tailgroups/transform.hpp"

namespace tailgroups {

/// Positive stable variate with Laplace transform exp(-s^alpha), 0 < alpha <= 1.
double positive_stable(double alpha, Rng& rng);

/// n rows from the m-dimensional Gumbel copula with parameter nu >= 1, built
/// from a positive stable frailty V with index 1/nu:
/// U_i = exp(-(E_i / V)^(1/nu)), E_i standard exponential.
Eigen::MatrixXd gumbel_copula_sample(double nu, int m, int n, Rng& rng);

/// Same draw mapped to standard Pareto margins X = 1 / (1 - U), computed
/// without cancellation in 1 - U.
Eigen::MatrixXd gumbel_pareto_sample(double nu, int m, int n, Rng& rng);

/// Design of the 14-dimensional recovery experiment.
struct ExperimentSpec {
  int n = 10000;
  double nu = 2.0;
  int k = 500;  // t = n / k
  std::uint64_t seed = 0;

  double threshold() const { return static_cast<double>(n) / k; }
  void validate() const;
};

/// 14 columns with standard Pareto margins and five independent blocks:
///   (1,2)        Gumbel pair
///   (3,4,5)      half (3,4) coupled + 5 free, half (4,5) coupled + 3 free
///   (6,7,8)      same layout as (3,4,5)
///   (9,10)       Gumbel pair
///   (11..14)     half (11,13,14) coupled + 12 free, half (11,12) coupled + 13, 14 free
/// The regime of each mixed block is an independent fair coin per row.
/// Returned with standardized = true: the margins are already standard Pareto.
DataMatrix experiment_dataset(const ExperimentSpec& spec, Rng& rng);

/// Also reports the regime drawn for each row and mixed block
/// (n x 3: blocks 3-5, 6-8, 11-14; 1 = second regime).
DataMatrix experiment_dataset(const ExperimentSpec& spec, Rng& rng, Eigen::MatrixXi* regimes);

/// The 15 dependence groups of the design (0-based columns).
std::vector<DependenceGroup> experiment_ground_truth();

enum class RecoveryClass { NoError, ErrorI, ErrorII, ErrorI_II };

std::string to_string(RecoveryClass c);

struct RecoveryResult {
  RecoveryClass classification = RecoveryClass::NoError;
  std::vector<DependenceGroup> missing;   // in truth, not found (type I)
  std::vector<DependenceGroup> spurious;  // found, not in truth (type II)
};

RecoveryResult classify_recovery(const std::vector<DependenceGroup>& found,
                                 const std::vector<DependenceGroup>& truth);

/// Counts per RecoveryClass over repeated experiments.
struct RecoveryTable {
  std::array<int, 4> counts{};  // indexed by RecoveryClass
  std::vector<RecoveryResult> trials;

  int count(RecoveryClass c) const { return counts[static_cast<std::size_t>(c)]; }
};

/// Runs `trials` independent replications: trial i draws its data from
/// Rng(seed, i) and clusters with seed experiment_cluster_seed(seed, i), at
/// t = spec.threshold() (params.t is overridden).
RecoveryTable recovery_experiment(const ExperimentSpec& spec, ExtremalParams params, int trials,
                                  std::uint64_t seed,
                                  const std::function<void(int, const RecoveryResult&)>& progress = {});

std::uint64_t experiment_cluster_seed(std::uint64_t seed, int trial);

}  // namespace tailgroups
