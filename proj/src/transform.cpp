#include "tailgroups/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailgroups/error.hpp"

namespace tailgroups {

std::vector<std::string> default_column_names(int d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (int j = 1; j <= d; ++j) names.push_back("X" + std::to_string(j));
  return names;
}

Norm Norm::p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InvalidArgument("norm exponent must be finite and >= 1, got " + std::to_string(p));
  }
  return Norm(p);
}

Norm Norm::parse(const std::string& text) {
  if (text == "max" || text == "inf" || text == "infinity") return max();
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw InvalidArgument("unknown norm '" + text + "'");
  return Norm::p(p);
}

std::string Norm::name() const {
  if (is_max()) return "max";
  std::string s = std::to_string(p_);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

double Norm::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (is_max()) return x.cwiseAbs().maxCoeff();
  if (p_ == 2.0) return x.norm();
  if (p_ == 1.0) return x.cwiseAbs().sum();
  // Scale by the largest entry so large p does not overflow.
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  return m * std::pow((x.cwiseAbs() / m).array().pow(p_).sum(), 1.0 / p_);
}

DataMatrix rank_standardize(const DataMatrix& raw) {
  if (raw.standardized) throw InvalidArgument("data are already standardized");
  const int n = raw.rows();
  const int d = raw.cols();
  if (n < 2) throw InvalidArgument("rank standardization needs at least 2 rows");
  DataMatrix out;
  out.values.resize(n, d);
  out.column_names = raw.column_names;
  out.standardized = true;
  std::vector<int> order(static_cast<std::size_t>(n));
  const double np1 = n + 1.0;
  for (int j = 0; j < d; ++j) {
    std::iota(order.begin(), order.end(), 0);
    const auto col = raw.values.col(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return col(a) < col(b); });
    for (int r = 1; r <= n; ++r) {
      out.values(order[static_cast<std::size_t>(r - 1)], j) = np1 / (np1 - r);
    }
  }
  return out;
}

PolarPoint polar_transform(const Eigen::Ref<const Eigen::VectorXd>& z, const NormChoice& norms) {
  if ((z.array() < 0.0).any()) throw InvalidArgument("polar transform needs nonnegative coordinates");
  const double a = norms.angle_norm(z);
  if (!(a > 0.0)) throw InvalidArgument("polar transform of the zero vector is undefined");
  PolarPoint p;
  p.radius = norms.radius_norm(z);
  p.angle = z / a;
  return p;
}

Eigen::VectorXd inverse_polar(const PolarPoint& p, const NormChoice& norms) {
  const double rn = norms.radius_norm(p.angle);
  if (!(rn > 0.0) || !(p.radius > 0.0)) throw InvalidArgument("invalid polar point");
  return p.angle * (p.radius / rn);
}

ExtremeSet extreme_angles(const DataMatrix& z, double t, const NormChoice& norms) {
  if (!z.standardized) throw InvalidArgument("extreme_angles expects standardized data");
  if (!(t >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  ExtremeSet out;
  for (int i = 0; i < z.rows(); ++i) {
    const Eigen::VectorXd row = z.values.row(i).transpose();
    if (norms.radius_norm(row) > t) {
      out.points.push_back(polar_transform(row, norms));
      out.rows.push_back(i);
    }
  }
  return out;
}

double threshold_from_k(int n, double k) {
  if (!(k > 0.0) || !(k < n)) throw InvalidArgument("extreme count k must lie in (0, n)");
  return static_cast<double>(n) / k;
}

}  // namespace tailgroups
