#pragma once

#include <span>
#include <vector>

#include "tailgroups/random.hpp"

namespace tailgroups {

/// Hill estimate of the tail index together with a Wald confidence interval.
struct TailIndexEstimate {
  double alpha = 0.0;
  int k = 0;  // number of upper order statistics used
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.0;
};

/// Hill estimator on the k largest values of `sample`.
///
/// alpha = ( (1/k) * sum_{i=1..k} log(X(i) / X(k+1)) )^-1, where
/// X(1) >= X(2) >= ... are the descending order statistics. The interval is
/// alpha +/- z * alpha / sqrt(k), z the two-sided standard normal quantile.
///
/// Throws InvalidArgument for non-positive values, k outside [1, n-1] or a
/// confidence outside (0, 1); DegenerateSample when all log-spacings vanish.
TailIndexEstimate hill_estimate(std::span<const double> sample, int k, double confidence);

/// Hill estimates for every k in [k_min, k_max] (the "Hill plot" series).
/// Sorts once, so the cost is O(n log n + k_max).
std::vector<TailIndexEstimate> hill_curve(std::span<const double> sample, int k_min, int k_max,
                                          double confidence);

/// Generalized Pareto tail above a threshold.
struct GpdParams {
  double threshold = 0.0;
  double scale = 1.0;
  double shape = 0.0;
  double exceed_prob = 1.0;  // empirical fraction of the sample above threshold
};

/// Shapes with |xi| below this are treated as the exponential limit.
inline constexpr double kGpdShapeZero = 1e-12;

/// Maximum-likelihood GPD fit to the excesses x - threshold of the values
/// strictly above `threshold`.
///
/// The shape is located by a profile search over theta = shape / scale with
/// the closed-form shape update, then polished by Newton steps on the full
/// likelihood until the gradient of the mean log-likelihood with respect to
/// (log scale, shape) has norm <= 1e-8. The search domain is shape in [-1, 10];
/// a maximum on its edge is returned without the polish (shape -1 with the
/// largest excess as scale, or shape 10).
///
/// Throws DegenerateSample for fewer than 10 excesses, ConvergenceError when
/// the polish does not converge.
GpdParams gpd_fit(std::span<const double> sample, double threshold);

/// Log-likelihood of GPD(scale, shape) for excesses y > 0. Returns -inf when
/// some excess lies beyond the upper endpoint.
double gpd_log_likelihood(std::span<const double> excesses, double scale, double shape);

/// P(X > x) for X ~ GPD(params) conditioned on exceeding the threshold.
double gpd_survival(const GpdParams& params, double x);

/// Inverse of the conditional survival: x with P(X > x | X > u) = p.
double gpd_quantile(const GpdParams& params, double p);

/// n_sim draws of u + scale * ((1 - U)^-shape - 1) / shape; every draw is
/// strictly above the threshold.
std::vector<double> gpd_sample(const GpdParams& params, int n_sim, Rng& rng);

}  // namespace tailgroups
