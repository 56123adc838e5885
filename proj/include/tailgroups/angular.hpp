#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tailgroups/extremal.hpp"
#include "tailgroups/random.hpp"
#include "tailgroups/tail.hpp"
#include "tailgroups/transform.hpp"

namespace tailgroups {

/// Normalized empirical angular measure of a region:
/// #{i : R_i > t, A_i in region} / #{i : R_i > t}.
/// Throws DegenerateSample when no point has radius above t.
double empirical_angular_mass(const std::vector<PolarPoint>& points, double t,
                              const std::function<bool(const Eigen::VectorXd&)>& region);

/// Kernel density on the face sphere {a in R^m : a >= 0, |a|_2 = 1}.
///
/// Geodesic Gaussian kernels exp(-rho^2 / (2 h^2)) at the support points and
/// at their mirror images under every sign flip of the coordinates, divided
/// by K times the kernel mass over the whole sphere. The images put back the
/// mass a kernel would lose across the face boundary, so f integrates to one
/// against the surface measure and stays flat up to the edges for uniform
/// data. Kernel terms beyond 8h are dropped (relative size below 1e-13).
class FaceDensity {
 public:
  FaceDensity(DependenceGroup group, Eigen::MatrixXd support, double bandwidth);

  const DependenceGroup& group() const { return group_; }
  const Eigen::MatrixXd& support() const { return support_; }  // K x m, unit rows
  double bandwidth() const { return bandwidth_; }
  int dimension() const { return static_cast<int>(support_.cols()); }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a) const;

  /// Largest value over a deterministic grid and the support points.
  /// Computed on first use and cached.
  double grid_max() const;

 private:
  double unnormalized(const Eigen::Ref<const Eigen::VectorXd>& a) const;
  double kernel_of_cos(double c) const;
  double mean_kernel_mass() const;

  DependenceGroup group_;
  Eigen::MatrixXd support_;
  double bandwidth_;
  double cos_cutoff_;
  double normalizer_;
  std::vector<double> arc_;  // m = 2: sorted polar angles of the support and its images
  mutable double grid_max_ = -1.0;
  // m >= 3: kernel as a function of the cosine, cubic Hermite nodes on
  // [table_lo_, 1] (value and derivative interleaved)
  std::vector<double> table_;
  double table_lo_ = 0.0;
  double table_step_ = 0.0;

};

/// Surface area of the nonnegative part of the unit sphere in R^m.
double face_area(int m);

/// Rows of `z` exceeding t on every coordinate of `group`, restricted to
/// those coordinates and scaled to unit 2-norm.
Eigen::MatrixXd face_points(const DataMatrix& z, const DependenceGroup& group, double t);

/// Default bandwidth: root-mean-square geodesic distance to the mean
/// direction times K^(-1/(m+3)), floored at 1e-3.
double auto_bandwidth(const Eigen::Ref<const Eigen::MatrixXd>& points);

/// Kernel density fit on a face of dimension m - 1 >= 1. Throws
/// InvalidArgument for singleton groups, DegenerateSample for fewer than 5
/// joint exceedances.
FaceDensity fit_face_density(const DataMatrix& z, const DependenceGroup& group, double t,
                             std::optional<double> bandwidth = std::nullopt);

struct FaceSample {
  Eigen::MatrixXd angles;  // n_sim x m
  long proposals = 0;
  double acceptance_rate() const;
};

/// Accept-reject draws with a uniform proposal on the face and envelope
/// 1.1 * grid_max(). Throws DegenerateSample when the acceptance rate drops
/// below 1e-4 (the bandwidth is too small for the envelope).
FaceSample sample_face_density(const FaceDensity& density, int n_sim, Rng& rng);

/// One mixture component: a singleton carries a point mass on its axis.
struct AngularComponent {
  DependenceGroup group;
  double weight = 0.0;
  std::optional<FaceDensity> density;
};

struct AngularMixtureModel {
  std::vector<AngularComponent> components;
  GpdParams radial;
};

/// Weighted face densities for the discovered groups plus a GPD fit of the
/// max-norm radius above t. Groups with too few joint exceedances for a
/// density keep their weight and no density.
AngularMixtureModel fit_mixture_model(const DataMatrix& z, double t, const WeightTable& weights,
                                      std::optional<double> bandwidth = std::nullopt);

}  // namespace tailgroups
