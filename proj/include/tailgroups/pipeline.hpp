#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailgroups/extremal.hpp"
#include "tailgroups/risk.hpp"
#include "tailgroups/transform.hpp"

namespace tailgroups {

/// Parameters of a batch analysis. Exactly one of k and t selects the
/// threshold (t = n / k); the seed must be set.
struct RunConfig {
  std::string input;             // CSV path; empty with synthetic = true
  bool synthetic = false;        // generate the 14-column experiment instead
  int synthetic_n = 10000;
  double nu = 2.0;
  bool input_standardized = false;

  std::optional<double> k;
  std::optional<double> t;
  double sigma = 0.05;
  int n_r = 100;
  int m_r = 25;
  double e_fraction = 0.2;
  int kmeans_restarts = 1;
  int max_clusters = 40;
  GapRule gap_rule = GapRule::Absolute;
  NormChoice norms;

  double confidence = 0.95;
  std::optional<int> hill_k;     // defaults to k, or n / t

  std::vector<std::string> queries;  // "X1,X2:1e5,1e5"
  bool raw_queries = false;
  int n_sim = 100000;
  std::optional<double> bandwidth;
  TailFitRows tail_fit = TailFitRows::AnyExceed;

  std::optional<std::uint64_t> seed;
  std::string output_dir = "out";

  /// Checks every field against its module's preconditions before any work.
  void validate() const;
  double threshold(int n) const;
  ExtremalParams extremal_params(int n) const;
  /// key=value lines in a fixed order; recorded in the manifest.
  std::string describe() const;
};

/// "X1,X2:1e5,1e5" or "X1,X2:1e5" (one threshold for every column).
ExceedanceQuery parse_query(const std::string& text, const std::vector<std::string>& names,
                            bool raw_scale);

GapRule parse_gap_rule(const std::string& text);
std::string to_string(GapRule rule);
TailFitRows parse_tail_fit(const std::string& text);
std::string to_string(TailFitRows rows);

/// The data a run starts from: loaded CSV or synthetic sample.
DataMatrix load_input(const RunConfig& config);

// Report tables, shared by the pipeline and the command line tool.
std::string hill_table(const DataMatrix& raw, int k, double confidence);
std::string hill_curve_table(const DataMatrix& raw, int k_min, int k_max, double confidence);
std::string eigenvalue_table(const Eigen::VectorXd& eigenvalues);
std::string groups_text(const std::vector<DependenceGroup>& groups, const std::vector<std::string>& names);
std::string weights_table(const WeightTable& weights, const std::vector<std::string>& names);
std::string risk_table(const std::vector<std::string>& queries, const std::vector<RiskEstimate>& estimates,
                       const std::vector<std::string>& names);

/// Parses groups.txt content or "X1,X2;X3" lists.
std::vector<DependenceGroup> parse_groups(const std::string& text, const std::vector<std::string>& names);

struct PipelineResult {
  double t = 0.0;
  ExtremalResult clustering;
  WeightTable weights;
  std::vector<RiskEstimate> risks;
  std::vector<std::string> files;  // written, relative to output_dir
};

/// Hill table, rank standardization, extremal clustering, weights and risk
/// queries; writes hill.csv, eigenvalues.csv, groups.txt, weights.csv,
/// risk.csv (when queries are given) and manifest.json into output_dir.
/// The same config reproduces the same bytes.
PipelineResult run_pipeline(const RunConfig& config);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace tailgroups
