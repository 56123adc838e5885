#include "tailgroups/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <lapacke.h>

#include "tailgroups/error.hpp"

namespace tailgroups {

std::vector<int> ClusterSet::sizes() const {
  std::vector<int> s;
  s.reserve(clusters.size());
  for (const auto& c : clusters) s.push_back(static_cast<int>(c.size()));
  return s;
}

double geodesic_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw InvalidArgument("angles differ in dimension");
  if (std::abs(a.norm() - 1.0) > 1e-9 || std::abs(b.norm() - 1.0) > 1e-9) {
    throw InvalidArgument("geodesic distance needs unit 2-norm angles");
  }
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

Eigen::MatrixXd angle_matrix(const std::vector<PolarPoint>& points) {
  if (points.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), points.front().angle.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = points[i].angle.transpose();
  }
  return m;
}

Eigen::MatrixXd geodesic_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& angles) {
  const Eigen::VectorXd norms = angles.rowwise().norm();
  if (((norms.array() - 1.0).abs() > 1e-9).any()) {
    throw InvalidArgument("geodesic distance needs unit 2-norm angles");
  }
  Eigen::MatrixXd d = angles * angles.transpose();
  const Eigen::Index k = d.rows();
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = std::acos(std::clamp(d(i, j), -1.0, 1.0));
      d(i, j) = v;
      d(j, i) = v;
    }
    d(j, j) = 0.0;
  }
  return d;
}

SimilarityGraph similarity_from_distances(const Eigen::Ref<const Eigen::MatrixXd>& distances,
                                          double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("kernel width sigma must be positive");
  if (distances.rows() < 2 || distances.rows() != distances.cols()) {
    throw InvalidArgument("similarity graph needs a square distance matrix with K >= 2");
  }
  SimilarityGraph g;
  g.sigma = sigma;
  const double scale = -1.0 / (2.0 * sigma * sigma);
  g.weights = (distances.array().square() * scale).exp().matrix();
  // Exact symmetry and unit diagonal regardless of rounding in the input.
  const Eigen::Index k = g.weights.rows();
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) g.weights(j, i) = g.weights(i, j);
    g.weights(j, j) = 1.0;
  }
  return g;
}

SimilarityGraph similarity_matrix(const Eigen::Ref<const Eigen::MatrixXd>& angles, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("kernel width sigma must be positive");
  return similarity_from_distances(geodesic_distance_matrix(angles), sigma);
}

LaplacianSpectrum normalized_laplacian(const SimilarityGraph& graph, int n_eigen) {
  const Eigen::Index k = graph.weights.rows();
  if (k < 1) throw InvalidArgument("empty similarity graph");
  const Eigen::VectorXd degree = graph.weights.rowwise().sum();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(degree(i) > 0.0)) {
      throw InvalidArgument("vertex " + std::to_string(i) +
                            " has zero degree; increase the kernel width sigma");
    }
  }
  const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  Eigen::MatrixXd lap = -(inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;

  const lapack_int n = static_cast<lapack_int>(k);
  const lapack_int wanted = (n_eigen < 0) ? n : std::min<lapack_int>(n_eigen, n);
  if (wanted < 1) throw InvalidArgument("n_eigen must be positive");
  LaplacianSpectrum spec;
  spec.graph_size = static_cast<int>(k);
  Eigen::VectorXd w(k);
  spec.eigenvectors.resize(k, wanted);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(wanted));
  lapack_int found = 0;
  // Only the lower triangle is read, which makes the input exactly symmetric.
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', wanted == n ? 'A' : 'I', 'L', n,
                                         lap.data(), n, 0.0, 0.0, 1, wanted, 0.0, &found, w.data(),
                                         spec.eigenvectors.data(), n, support.data());
  if (info != 0 || found != wanted) throw ConvergenceError("Laplacian eigendecomposition failed");
  spec.eigenvalues = w.head(wanted);
  return spec;
}

int eigengap_count(const LaplacianSpectrum& spectrum, int max_k, GapRule rule) {
  const auto& ev = spectrum.eigenvalues;
  if (max_k < 1 || max_k > spectrum.graph_size) throw InvalidArgument("max_k out of range");
  if (max_k + 1 > ev.size()) {
    // k = K has no following eigenvalue; only reachable for tiny graphs.
    if (max_k == spectrum.graph_size && ev.size() == spectrum.graph_size) --max_k;
    else throw InvalidArgument("eigengap needs max_k + 1 computed eigenvalues");
    if (max_k < 1) return 1;
  }
  const double floor = 1e-10 * std::abs(ev(max_k));
  int best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_k; ++k) {
    double gap = ev(k) - ev(k - 1);
    if (rule == GapRule::Relative) gap = (ev(k) > floor) ? gap / ev(k) : 0.0;
    // gaps equal up to rounding count as ties, which the first one wins
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      best = k;
    }
  }
  return best;
}

ClusterSet clusters_from_labels(const std::vector<int>& labels, int k) {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    groups[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  ClusterSet out;
  for (auto& g : groups) {
    if (!g.empty()) out.clusters.push_back(std::move(g));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

namespace {

KMeansResult lloyd(const Eigen::Ref<const Eigen::MatrixXd>& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  KMeansResult r;
  r.centers.resize(k, x.cols());
  Eigen::VectorXd nearest(n);

  // Farthest-point initialisation from a random first center.
  const auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  r.centers.row(0) = x.row(first);
  nearest = (x.rowwise() - x.row(first)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    Eigen::Index far = 0;
    nearest.maxCoeff(&far);
    r.centers.row(c) = x.row(far);
    nearest = nearest.cwiseMin((x.rowwise() - x.row(far)).rowwise().squaredNorm());
  }

  r.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> counts(static_cast<std::size_t>(k));
  Eigen::VectorXd dist(n);
  for (r.iterations = 0; r.iterations < 300; ++r.iterations) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - r.centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist(i) = best_d;
      if (r.labels[static_cast<std::size_t>(i)] != best) {
        r.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    // Empty cluster: take over the point farthest from its own center among
    // clusters that can spare one.
    std::fill(counts.begin(), counts.end(), 0);
    for (int l : r.labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int l = r.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(l)] > 1 && dist(i) > far_d) {
          far_d = dist(i);
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(far)])];
      r.labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist(far) = 0.0;
      changed = true;
    }
    if (!changed && r.iterations > 0) break;
    r.centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) r.centers.row(r.labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int c = 0; c < k; ++c) r.centers.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  r.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.wcss += (x.row(i) - r.centers.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, int restarts, Rng& rng) {
  if (k < 1 || k > points.rows()) throw InvalidArgument("k-means needs 1 <= k <= number of points");
  if (restarts < 1) throw InvalidArgument("k-means needs at least one restart");
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult cur = lloyd(points, k, rng);
    if (cur.wcss < best.wcss) best = std::move(cur);
  }
  return best;
}

ClusterSet spectral_cluster(const LaplacianSpectrum& spectrum, int k, int restarts, Rng& rng) {
  const int n = spectrum.graph_size;
  if (k < 1 || k > n) throw InvalidArgument("cluster count must lie in [1, K]");
  if (k > spectrum.computed()) throw InvalidArgument("spectrum holds fewer than k eigenvectors");
  if (k == 1) {
    ClusterSet all;
    all.clusters.emplace_back(static_cast<std::size_t>(n));
    std::iota(all.clusters.front().begin(), all.clusters.front().end(), 0);
    return all;
  }
  Eigen::MatrixXd y = spectrum.eigenvectors.leftCols(k);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double nrm = y.row(i).norm();
    if (nrm > 0.0) y.row(i) /= nrm;
  }
  const KMeansResult km = kmeans(y, k, restarts, rng);
  return clusters_from_labels(km.labels, k);
}

ClusterSet spectral_cluster(const SimilarityGraph& graph, int k, int restarts, Rng& rng) {
  return spectral_cluster(normalized_laplacian(graph, k), k, restarts, rng);
}

}  // namespace tailgroups
