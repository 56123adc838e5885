#include "tailgroups/tail.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>

#include "tailgroups/error.hpp"

namespace tailgroups {
namespace {

double two_sided_z(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidArgument("confidence must lie in (0, 1), got " + std::to_string(confidence));
  }
  const boost::math::normal_distribution<double> std_normal;
  return boost::math::quantile(std_normal, 0.5 + 0.5 * confidence);
}

std::vector<double> sorted_descending(std::span<const double> sample) {
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!(sample[i] > 0.0) || !std::isfinite(sample[i])) {
      throw InvalidArgument("Hill estimator needs finite positive values; entry " +
                            std::to_string(i) + " is " + std::to_string(sample[i]));
    }
  }
  std::vector<double> x(sample.begin(), sample.end());
  std::stable_sort(x.begin(), x.end(), std::greater<>());
  return x;
}

TailIndexEstimate make_estimate(double log_sum, int k, double z, double confidence) {
  if (!(log_sum > 0.0)) {
    throw DegenerateSample("Hill estimator undefined at k=" + std::to_string(k) +
                           ": the top order statistics are all equal");
  }
  TailIndexEstimate est;
  est.k = k;
  est.alpha = static_cast<double>(k) / log_sum;
  const double half_width = z * est.alpha / std::sqrt(static_cast<double>(k));
  est.ci_low = est.alpha - half_width;
  est.ci_high = est.alpha + half_width;
  est.confidence = confidence;
  return est;
}

// Series-safe pieces of the GPD score. With x = shape * y / scale:
//   h(x)   = log1p(x) - x / (1 + x)
//   phi(x) = h(x) / x^2
//   dphi(x) = phi'(x)
// Direct evaluation cancels badly near x = 0, so a truncated series is used there.
double phi(double x) {
  if (std::abs(x) < 1e-3) {
    double term = 1.0, sum = 0.0;
    for (int k = 2; k < 10; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1.0) / k * term;
      term *= x;
    }
    return sum;
  }
  return (std::log1p(x) - x / (1.0 + x)) / (x * x);
}

double dphi(double x) {
  if (std::abs(x) < 1e-3) {
    double term = 1.0, sum = 0.0;
    for (int k = 3; k < 11; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1.0) * (k - 2.0) / k * term;
      term *= x;
    }
    return sum;
  }
  const double h = std::log1p(x) - x / (1.0 + x);
  const double dh = x / ((1.0 + x) * (1.0 + x));
  return (x * dh - 2.0 * h) / (x * x * x);
}

struct MeanScore {
  double value = 0.0;   // mean log-likelihood
  double g[2] = {0, 0};  // gradient w.r.t. (log scale, shape)
  double h[2][2] = {{0, 0}, {0, 0}};
  bool feasible = true;
};

MeanScore mean_score(std::span<const double> y, double log_scale, double shape) {
  MeanScore s;
  const double scale = std::exp(log_scale);
  const double n = static_cast<double>(y.size());
  double sum_log_z = 0.0;
  for (double yi : y) {
    const double v = yi / scale;
    const double x = shape * v;
    const double z = 1.0 + x;
    if (!(z > 0.0)) {
      s.feasible = false;
      s.value = -std::numeric_limits<double>::infinity();
      return s;
    }
    const double log_z = std::log1p(x);
    sum_log_z += (std::abs(shape) < kGpdShapeZero) ? v : (1.0 + 1.0 / shape) * log_z;
    const double vz = v / z;
    s.g[0] += -1.0 + (1.0 + shape) * vz;
    s.g[1] += v * v * phi(x) - vz;
    s.h[0][0] += -(1.0 + shape) * v / (z * z);
    s.h[0][1] += vz - (1.0 + shape) * vz * vz;
    s.h[1][1] += v * v * v * dphi(x) + vz * vz;
  }
  s.value = -log_scale - sum_log_z / n;
  s.g[0] /= n;
  s.g[1] /= n;
  s.h[0][0] /= n;
  s.h[0][1] /= n;
  s.h[1][1] /= n;
  s.h[1][0] = s.h[0][1];
  return s;
}

// Profile log-likelihood per observation in theta = shape / scale, with the
// shape at its conditional optimum mean(log1p(theta * y)).
struct Profile {
  double value;
  double shape;
  double scale;
};

Profile profile(std::span<const double> y, double theta, double mean_y) {
  if (theta == 0.0) return {-std::log(mean_y) - 1.0, 0.0, mean_y};
  double acc = 0.0;
  for (double yi : y) acc += std::log1p(theta * yi);
  const double shape = acc / static_cast<double>(y.size());
  const double scale = shape / theta;
  return {-std::log(scale) - shape - 1.0, shape, scale};
}

}  // namespace

TailIndexEstimate hill_estimate(std::span<const double> sample, int k, double confidence) {
  const double z = two_sided_z(confidence);
  const int n = static_cast<int>(sample.size());
  if (n < 2) throw InvalidArgument("Hill estimator needs at least 2 values");
  if (k < 1 || k > n - 1) {
    throw InvalidArgument("k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  }
  const auto x = sorted_descending(sample);
  double log_sum = 0.0;
  for (int i = 0; i < k; ++i) log_sum += std::log(x[i] / x[k]);
  return make_estimate(log_sum, k, z, confidence);
}

std::vector<TailIndexEstimate> hill_curve(std::span<const double> sample, int k_min, int k_max,
                                          double confidence) {
  const double z = two_sided_z(confidence);
  const int n = static_cast<int>(sample.size());
  if (n < 2) throw InvalidArgument("Hill estimator needs at least 2 values");
  if (k_min < 1 || k_min > k_max || k_max > n - 1) {
    throw InvalidArgument("need 1 <= k_min <= k_max <= n-1");
  }
  const auto x = sorted_descending(sample);
  std::vector<TailIndexEstimate> out;
  out.reserve(static_cast<std::size_t>(k_max - k_min + 1));
  double prefix = 0.0;  // sum of log X(i) for i <= k
  for (int k = 1; k <= k_max; ++k) {
    prefix += std::log(x[k - 1]);
    if (k < k_min) continue;
    const double log_sum = prefix - k * std::log(x[k]);
    out.push_back(make_estimate(log_sum, k, z, confidence));
  }
  return out;
}

double gpd_log_likelihood(std::span<const double> excesses, double scale, double shape) {
  if (!(scale > 0.0)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double y : excesses) {
    if (std::abs(shape) < kGpdShapeZero) {
      acc += y / scale;
      continue;
    }
    const double z = 1.0 + shape * y / scale;
    if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += (1.0 + 1.0 / shape) * std::log1p(shape * y / scale);
  }
  return -static_cast<double>(excesses.size()) * std::log(scale) - acc;
}

GpdParams gpd_fit(std::span<const double> sample, double threshold) {
  std::vector<double> y;
  for (double x : sample) {
    if (x > threshold) y.push_back(x - threshold);
  }
  if (y.size() < 10) {
    throw DegenerateSample("GPD fit needs at least 10 excesses above " + std::to_string(threshold) +
                           ", found " + std::to_string(y.size()));
  }
  const double n_exc = static_cast<double>(y.size());
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n_exc;
  const double y_max = *std::max_element(y.begin(), y.end());
  if (!(y_max > 0.0)) throw DegenerateSample("all excesses are zero");

  // theta range: the shape(theta) map is increasing, so [-1, 10] in shape
  // translates to an interval in theta found by bisection.
  auto shape_at = [&](double theta) { return profile(y, theta, mean_y).shape; };
  auto solve_theta = [&](double target, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (shape_at(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double theta_floor = -1.0 / y_max;
  const double theta_lo =
      (shape_at(theta_floor * (1.0 - 1e-12)) < -1.0) ? solve_theta(-1.0, theta_floor, 0.0)
                                                      : theta_floor * (1.0 - 1e-12);
  double theta_hi = 1.0 / mean_y;
  while (shape_at(theta_hi) < 10.0 && theta_hi < 1e300) theta_hi *= 4.0;

  // Deterministic coarse scan, then Brent on the bracket around the best node.
  std::vector<double> grid;
  for (int i = 0; i < 60; ++i) grid.push_back(theta_lo * (1.0 - std::pow(i / 60.0, 2.0)));
  grid.push_back(0.0);
  for (int i = 0; i <= 120; ++i) {
    grid.push_back(theta_hi * std::pow(10.0, -12.0 + 12.0 * i / 120.0));
  }
  std::sort(grid.begin(), grid.end());
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = profile(y, grid[i], mean_y).value;
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  auto neg = [&](double theta) { return -profile(y, theta, mean_y).value; };
  const auto [theta_star, neg_val] = boost::math::tools::brent_find_minima(neg, a, b, 52);
  Profile p = profile(y, theta_star, mean_y);
  if (-neg_val < best_val) p = profile(y, grid[best], mean_y);

  GpdParams out;
  out.threshold = threshold;
  out.exceed_prob = n_exc / static_cast<double>(sample.size());
  // Maximum on the edge of the shape domain: no stationary point to polish.
  if (p.shape <= -1.0 + 1e-6) {
    // shape -1 is uniform on [0, scale]; its likelihood peaks at the largest excess
    out.scale = y_max * (1.0 + 1e-12);
    out.shape = -1.0;
    return out;
  }
  if (p.shape >= 10.0 - 1e-6) {
    out.scale = p.scale;
    out.shape = 10.0;
    return out;
  }

  // Newton polish in (log scale, shape).
  double ls = std::log(p.scale);
  double xi = p.shape;
  MeanScore s = mean_score(y, ls, xi);
  int iter = 0;
  constexpr int kMaxIter = 200;
  for (; iter < kMaxIter; ++iter) {
    const double gnorm = std::hypot(s.g[0], s.g[1]);
    if (gnorm <= 1e-8) break;
    const double det = s.h[0][0] * s.h[1][1] - s.h[0][1] * s.h[1][0];
    double d0, d1;
    if (s.h[0][0] < 0.0 && det > 0.0) {
      d0 = -(s.h[1][1] * s.g[0] - s.h[0][1] * s.g[1]) / det;
      d1 = -(-s.h[1][0] * s.g[0] + s.h[0][0] * s.g[1]) / det;
    } else {
      d0 = s.g[0];
      d1 = s.g[1];
    }
    double step = 1.0;
    MeanScore next;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      next = mean_score(y, ls + step * d0, xi + step * d1);
      if (next.feasible && next.value >= s.value - 1e-15 * std::abs(s.value)) break;
    }
    if (!next.feasible) break;
    ls += step * d0;
    xi += step * d1;
    s = next;
  }
  if (std::hypot(s.g[0], s.g[1]) > 1e-8) {
    throw ConvergenceError("GPD likelihood polish stopped with gradient norm " +
                           std::to_string(std::hypot(s.g[0], s.g[1])));
  }

  out.scale = std::exp(ls);
  out.shape = std::abs(xi) < kGpdShapeZero ? 0.0 : xi;
  return out;
}

double gpd_survival(const GpdParams& params, double x) {
  if (x <= params.threshold) return 1.0;
  const double v = (x - params.threshold) / params.scale;
  if (std::abs(params.shape) < kGpdShapeZero) return std::exp(-v);
  const double z = 1.0 + params.shape * v;
  if (z <= 0.0) return 0.0;
  return std::exp(-std::log1p(params.shape * v) / params.shape);
}

double gpd_quantile(const GpdParams& params, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("survival level must lie in (0, 1]");
  const double e = -std::log(p);
  if (std::abs(params.shape) < kGpdShapeZero) return params.threshold + params.scale * e;
  return params.threshold + params.scale * std::expm1(params.shape * e) / params.shape;
}

std::vector<double> gpd_sample(const GpdParams& params, int n_sim, Rng& rng) {
  if (!(params.scale > 0.0)) throw InvalidArgument("GPD scale must be positive");
  if (n_sim < 0) throw InvalidArgument("n_sim must be non-negative");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_sim));
  while (static_cast<int>(out.size()) < n_sim) {
    const double e = -std::log1p(-rng.uniform());  // -log(1 - U)
    const double excess = (std::abs(params.shape) < kGpdShapeZero)
                              ? params.scale * e
                              : params.scale * std::expm1(params.shape * e) / params.shape;
    const double x = params.threshold + excess;
    if (x > params.threshold) out.push_back(x);
  }
  return out;
}

}  // namespace tailgroups
