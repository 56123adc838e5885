#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "tailgroups/random.hpp"
#include "tailgroups/spectral.hpp"
#include "tailgroups/transform.hpp"

namespace tailgroups {

/// A set of asymptotically dependent components, as sorted 0-based column
/// indices. Ordered by size, then lexicographically.
struct DependenceGroup {
  std::vector<int> members;

  DependenceGroup() = default;
  explicit DependenceGroup(std::vector<int> m);

  bool empty() const { return members.empty(); }
  int size() const { return static_cast<int>(members.size()); }
  bool contains(const DependenceGroup& other) const;

  bool operator==(const DependenceGroup&) const = default;
  std::strong_ordering operator<=>(const DependenceGroup& other) const;
};

/// "X1,X2" style label using the given column names.
std::string format_group(const DependenceGroup& g, const std::vector<std::string>& names);

/// Parses a comma-separated list of column names (or 1-based indices).
DependenceGroup parse_group(const std::string& text, const std::vector<std::string>& names);

struct ExtremalParams {
  double t = 20.0;            // radius threshold
  int n_r = 100;              // spectral clustering repetitions
  int m_r = 25;               // votes needed to accept a cluster
  double e_fraction = 0.2;    // e_i = e_fraction * c_i
  double sigma = 0.05;        // kernel width
  NormChoice norms;
  int kmeans_restarts = 1;
  int max_clusters = 40;      // largest cluster count the eigengap may pick
  GapRule gap_rule = GapRule::Absolute;

  /// Throws InvalidArgument when a field violates its range.
  void validate() const;
};

/// Columns j whose count of cluster rows with Z_j > t is at least e.
/// `cluster` indexes `source_rows`, which maps to rows of `z`.
DependenceGroup derive_group(const std::vector<int>& cluster, const DataMatrix& z,
                             const std::vector<int>& source_rows, double t, double e);

struct AcceptedCluster {
  std::vector<int> points;  // indices into the extreme set
  int votes = 0;
  DependenceGroup group;    // may be empty
};

struct ExtremalResult {
  std::vector<DependenceGroup> groups;  // unique, non-empty, sorted
  std::vector<AcceptedCluster> accepted;
  Eigen::VectorXd eigenvalues;          // smallest max_clusters + 1 Laplacian eigenvalues
  int cluster_count = 0;                // eigengap choice
  int extreme_count = 0;                // K = |Theta(t)|
};

/// Extremal spectral clustering of standardized data. Repetition r draws
/// from Rng(seed, r), so the result is a pure function of (z, params, seed).
ExtremalResult run_extremal_clustering(const DataMatrix& z, const ExtremalParams& params,
                                       std::uint64_t seed);

/// Mixture weights of the discovered groups.
///
/// Among rows with max-norm above t, a row counts for group p when exactly
/// the coordinates in p exceed t. Rows whose exceedance pattern is not a
/// discovered group make up `remainder`.
struct WeightTable {
  std::vector<DependenceGroup> groups;
  std::vector<double> weights;
  double remainder = 0.0;
  int n_extreme = 0;  // N_t

  double weight_of(const DependenceGroup& g) const;
  /// Weights rescaled to sum to one over the discovered groups.
  WeightTable renormalized() const;
};

WeightTable estimate_weights(const DataMatrix& z, double t, const std::vector<DependenceGroup>& groups);

}  // namespace tailgroups
