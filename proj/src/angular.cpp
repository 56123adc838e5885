#include "tailgroups/angular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tailgroups/error.hpp"

namespace tailgroups {

double empirical_angular_mass(const std::vector<PolarPoint>& points, double t,
                              const std::function<bool(const Eigen::VectorXd&)>& region) {
  long total = 0, inside = 0;
  for (const auto& p : points) {
    if (!(p.radius > t)) continue;
    ++total;
    if (region(p.angle)) ++inside;
  }
  if (total == 0) throw DegenerateSample("no point with radius above t");
  return static_cast<double>(inside) / static_cast<double>(total);
}

double face_area(int m) {
  if (m < 1) throw InvalidArgument("face dimension must be positive");
  // |S^{m-1}| / 2^m with |S^{m-1}| = 2 pi^{m/2} / Gamma(m/2).
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m) / std::pow(2.0, m);
}

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Eigen::Vector3d octant_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Eigen::VectorXd uniform_on_face(int m, Rng& rng) {
  Eigen::VectorXd a(m);
  for (int j = 0; j < m; ++j) a(j) = std::abs(rng.normal());
  return a / a.norm();
}

}  // namespace

FaceDensity::FaceDensity(DependenceGroup group, Eigen::MatrixXd support, double bandwidth)
    : group_(std::move(group)), support_(std::move(support)), bandwidth_(bandwidth) {
  if (support_.rows() < 1 || support_.cols() < 2) {
    throw InvalidArgument("face density needs support points of dimension >= 2");
  }
  if (group_.size() != support_.cols()) throw InvalidArgument("group size does not match support");
  if (!(bandwidth_ > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if ((support_.array() < 0.0).any() ||
      ((support_.rowwise().norm().array() - 1.0).abs() > 1e-9).any()) {
    throw InvalidArgument("support points must be nonnegative with unit 2-norm");
  }
  const double cut = std::min(8.0 * bandwidth_, std::numbers::pi);
  cos_cutoff_ = std::cos(cut);
  if (dimension() == 2) {
    // Mirror images phi, -phi, pi - phi, phi - pi, repeated one turn either
    // way so a window of half-width <= pi never needs wrapping.
    for (Eigen::Index i = 0; i < support_.rows(); ++i) {
      const double phi = std::atan2(support_(i, 1), support_(i, 0));
      for (double img : {phi, -phi, std::numbers::pi - phi, phi - std::numbers::pi}) {
        for (double turn : {-2.0, 0.0, 2.0}) arc_.push_back(img + turn * std::numbers::pi);
      }
    }
    std::sort(arc_.begin(), arc_.end());
  } else {
    // exp(-acos(c)^2 / 2h^2) is smooth in c up to c = 1 (not at c = -1, where
    // the table stops); spacing proportional to h^2 keeps the interpolation
    // error near 1e-12 for every bandwidth.
    constexpr int kNodes = 8192;
    table_lo_ = std::max(cos_cutoff_, -0.9);
    table_step_ = (1.0 - table_lo_) / kNodes;
    table_.resize(2 * (kNodes + 1));
    const double h2 = bandwidth_ * bandwidth_;
    for (int i = 0; i <= kNodes; ++i) {
      const double c = i == kNodes ? 1.0 : table_lo_ + i * table_step_;
      const double rho = std::acos(std::clamp(c, -1.0, 1.0));
      const double q = std::exp(-0.5 * rho * rho / h2);
      const double ratio = rho < 1e-8 ? 1.0 : rho / std::sin(rho);  // d(rho^2/2)/dc = -rho / sin(rho)
      table_[2 * i] = q;
      table_[2 * i + 1] = q * ratio / h2 * table_step_;
    }
  }
  normalizer_ = mean_kernel_mass();
}

double FaceDensity::unnormalized(const Eigen::Ref<const Eigen::VectorXd>& a) const {
  const double inv = -0.5 / (bandwidth_ * bandwidth_);
  double acc = 0.0;
  const Eigen::Index k = support_.rows();
  if (!arc_.empty()) {
    // On the circle the geodesic distance is the angle difference.
    const double phi = std::atan2(a(1), a(0));
    const double cut = std::min(8.0 * bandwidth_, std::numbers::pi * (1.0 - 1e-12));
    auto it = std::lower_bound(arc_.begin(), arc_.end(), phi - cut);
    for (; it != arc_.end() && *it <= phi + cut; ++it) {
      const double rho = *it - phi;
      acc += std::exp(inv * rho * rho);
    }
    return acc / static_cast<double>(k);
  }
  const int m = dimension();
  const unsigned images = 1u << m;
  Eigen::VectorXd p(m);
  for (Eigen::Index i = 0; i < k; ++i) {
    p = support_.row(i).transpose().cwiseProduct(a);
    if (p.sum() < cos_cutoff_) continue;  // the unreflected image is the closest
    for (unsigned mask = 0; mask < images; ++mask) {
      double c = 0.0;
      for (int j = 0; j < m; ++j) c += (mask >> j & 1u) ? -p(j) : p(j);
      if (c >= cos_cutoff_) acc += kernel_of_cos(c);
    }
  }
  return acc / static_cast<double>(k);
}

double FaceDensity::kernel_of_cos(double c) const {
  if (c < table_lo_) {
    const double rho = std::acos(std::max(c, -1.0));
    return std::exp(-0.5 * rho * rho / (bandwidth_ * bandwidth_));
  }
  const double x = std::min((c - table_lo_) / table_step_, static_cast<double>(table_.size() / 2 - 1));
  const auto i = std::min(static_cast<std::size_t>(x), table_.size() / 2 - 2);
  const double u = x - static_cast<double>(i);
  const double* n = &table_[2 * i];
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * n[0] + (u3 - 2 * u2 + u) * n[1] + (-2 * u3 + 3 * u2) * n[2] + (u3 - u2) * n[3];
}

double FaceDensity::operator()(const Eigen::Ref<const Eigen::VectorXd>& a) const {
  return unnormalized(a) / normalizer_;
}

double FaceDensity::mean_kernel_mass() const {
  // With every mirror image included, each support point contributes the
  // kernel's mass over the whole sphere S^{m-1}.
  const int m = dimension();
  const double h = bandwidth_;
  const double cut = std::min(8.0 * h, std::numbers::pi);
  if (m == 2) return std::sqrt(2.0 * std::numbers::pi) * h * (2.0 * std_normal_cdf(cut / h) - 1.0);
  const double sub = 2.0 * std::pow(std::numbers::pi, 0.5 * (m - 1)) / std::tgamma(0.5 * (m - 1));
  auto radial = [&](double rho) { return std::exp(-0.5 * rho * rho / (h * h)) * std::pow(std::sin(rho), m - 2); };
  return sub * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, cut, 15, 1e-13);
}

double FaceDensity::grid_max() const {
  if (grid_max_ >= 0.0) return grid_max_;
  double best = 0.0;
  for (Eigen::Index i = 0; i < support_.rows(); ++i) {
    best = std::max(best, unnormalized(support_.row(i).transpose()));
  }
  const int m = dimension();
  if (m == 2) {
    constexpr int kGrid = 2048;
    for (int i = 0; i <= kGrid; ++i) {
      const double phi = (std::numbers::pi / 2.0) * i / kGrid;
      best = std::max(best, unnormalized(Eigen::Vector2d(std::cos(phi), std::sin(phi))));
    }
  } else if (m == 3) {
    constexpr int kGrid = 128;
    const double step = (std::numbers::pi / 2.0) / kGrid;
    for (int i = 0; i <= kGrid; ++i)
      for (int j = 0; j <= kGrid; ++j) best = std::max(best, unnormalized(octant_point(i * step, j * step)));
  }
  grid_max_ = best / normalizer_;
  return grid_max_;
}

Eigen::MatrixXd face_points(const DataMatrix& z, const DependenceGroup& group, double t) {
  std::vector<int> rows;
  for (int i = 0; i < z.rows(); ++i) {
    bool all = true;
    for (int j : group.members) all = all && z.values(i, j) > t;
    if (all) rows.push_back(i);
  }
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), group.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < group.size(); ++c) {
      pts(static_cast<Eigen::Index>(r), c) = z.values(rows[r], group.members[static_cast<std::size_t>(c)]);
    }
  }
  pts.rowwise().normalize();
  return pts;
}

double auto_bandwidth(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const Eigen::Index k = points.rows();
  if (k == 0) throw InvalidArgument("bandwidth of an empty point set");
  Eigen::VectorXd mean = points.colwise().mean().transpose();
  mean.normalize();
  double ss = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double rho = std::acos(std::clamp(points.row(i).dot(mean), -1.0, 1.0));
    ss += rho * rho;
  }
  const double spread = std::sqrt(ss / static_cast<double>(k));
  const double m = static_cast<double>(points.cols());
  return std::max(1e-3, spread * std::pow(static_cast<double>(k), -1.0 / (m + 3.0)));
}

FaceDensity fit_face_density(const DataMatrix& z, const DependenceGroup& group, double t,
                             std::optional<double> bandwidth) {
  if (group.size() < 2) throw InvalidArgument("a singleton group has no face density");
  Eigen::MatrixXd pts = face_points(z, group, t);
  if (pts.rows() < 5) {
    throw DegenerateSample("face density needs at least 5 joint exceedances, found " +
                           std::to_string(pts.rows()));
  }
  const double h = bandwidth ? *bandwidth : auto_bandwidth(pts);
  return FaceDensity(group, std::move(pts), h);
}

double FaceSample::acceptance_rate() const {
  return proposals > 0 ? static_cast<double>(angles.rows()) / static_cast<double>(proposals) : 0.0;
}

FaceSample sample_face_density(const FaceDensity& density, int n_sim, Rng& rng) {
  if (n_sim < 0) throw InvalidArgument("n_sim must be non-negative");
  const int m = density.dimension();
  const double envelope = 1.1 * density.grid_max();
  FaceSample out;
  out.angles.resize(n_sim, m);
  int accepted = 0;
  while (accepted < n_sim) {
    const Eigen::VectorXd a = uniform_on_face(m, rng);
    ++out.proposals;
    if (rng.uniform() * envelope < density(a)) out.angles.row(accepted++) = a.transpose();
    if (out.proposals >= 100000 && static_cast<double>(accepted) < 1e-4 * out.proposals) {
      throw DegenerateSample("accept-reject acceptance rate below 1e-4; use a larger bandwidth");
    }
  }
  return out;
}

AngularMixtureModel fit_mixture_model(const DataMatrix& z, double t, const WeightTable& weights,
                                      std::optional<double> bandwidth) {
  AngularMixtureModel model;
  for (std::size_t i = 0; i < weights.groups.size(); ++i) {
    AngularComponent c;
    c.group = weights.groups[i];
    c.weight = weights.weights[i];
    if (c.group.size() >= 2) {
      try {
        c.density = fit_face_density(z, c.group, t, bandwidth);
      } catch (const DegenerateSample&) {
        c.density.reset();
      }
    }
    model.components.push_back(std::move(c));
  }
  std::vector<double> radius(static_cast<std::size_t>(z.rows()));
  for (int i = 0; i < z.rows(); ++i) radius[static_cast<std::size_t>(i)] = z.values.row(i).maxCoeff();
  model.radial = gpd_fit(radius, t);
  return model;
}

}  // namespace tailgroups
