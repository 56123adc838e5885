#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tailgroups {

/// n observations (rows) of d components (columns).
///
/// `standardized` marks data on the standard Pareto scale, either produced by
/// rank_standardize or generated directly with Pareto margins.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_names;
  bool standardized = false;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Default names "X1".."Xd".
std::vector<std::string> default_column_names(int d);

/// An L_p norm (p >= 1) or the max-norm.
class Norm {
 public:
  static Norm p(double p);
  static Norm max() { return Norm(kMaxTag); }

  /// Parses "max", "inf" or a number p >= 1.
  static Norm parse(const std::string& text);

  bool is_max() const { return p_ == kMaxTag; }
  double exponent() const { return p_; }
  std::string name() const;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  static constexpr double kMaxTag = -1.0;
  explicit Norm(double p) : p_(p) {}
  double p_;
};

/// Norm used for the radius and norm used to normalise the angle.
struct NormChoice {
  Norm radius_norm = Norm::max();
  Norm angle_norm = Norm::p(2.0);
};

struct PolarPoint {
  double radius = 0.0;
  Eigen::VectorXd angle;
};

/// Rank transform of every column to the standard Pareto scale:
/// Z = (n + 1) / (n + 1 - r) with r the ascending rank (ties by row order).
DataMatrix rank_standardize(const DataMatrix& raw);

/// (radius_norm(z), z / angle_norm(z)). Throws on negative entries or z = 0.
PolarPoint polar_transform(const Eigen::Ref<const Eigen::VectorXd>& z, const NormChoice& norms);

/// r * a / radius_norm(a); exact inverse of polar_transform for any norm pair.
Eigen::VectorXd inverse_polar(const PolarPoint& p, const NormChoice& norms);

/// Polar transforms of the rows whose radius exceeds t, in row order.
struct ExtremeSet {
  std::vector<PolarPoint> points;
  std::vector<int> rows;  // source row of each point
};

ExtremeSet extreme_angles(const DataMatrix& z, double t, const NormChoice& norms);

/// Threshold t = n / k linking the number of extremes k to the radius threshold.
double threshold_from_k(int n, double k);

}  // namespace tailgroups
