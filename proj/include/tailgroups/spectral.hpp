#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tailgroups/random.hpp"
#include "tailgroups/transform.hpp"

namespace tailgroups {

/// Gaussian similarity graph on angular points.
struct SimilarityGraph {
  Eigen::MatrixXd weights;  // symmetric, unit diagonal, entries in [0, 1]
  double sigma = 0.0;

  int size() const { return static_cast<int>(weights.rows()); }
};

/// Leading part of the spectrum of L_sym = I - D^-1/2 W D^-1/2.
///
/// `eigenvalues` holds the smallest m eigenvalues in ascending order and the
/// columns of `eigenvectors` the matching orthonormal eigenvectors. m equals
/// the graph size when the full decomposition was computed.
struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int graph_size = 0;

  int computed() const { return static_cast<int>(eigenvalues.size()); }
};

/// Partition of {0..K-1}; each cluster sorted, clusters ordered by first member.
struct ClusterSet {
  std::vector<std::vector<int>> clusters;

  std::vector<int> sizes() const;
  int size() const { return static_cast<int>(clusters.size()); }
};

/// arccos(<a, b>) for unit-2-norm angles. Throws when an input is not unit
/// length within 1e-9.
double geodesic_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

/// Stack the angles of polar points as the rows of a K x d matrix.
Eigen::MatrixXd angle_matrix(const std::vector<PolarPoint>& points);

/// Pairwise geodesic distances between the rows of `angles` (K x d).
Eigen::MatrixXd geodesic_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& angles);

/// W_ij = exp(-rho_ij^2 / (2 sigma^2)) with rho the geodesic distance.
SimilarityGraph similarity_matrix(const Eigen::Ref<const Eigen::MatrixXd>& angles, double sigma);

/// Same, from a precomputed distance matrix.
SimilarityGraph similarity_from_distances(const Eigen::Ref<const Eigen::MatrixXd>& distances,
                                          double sigma);

/// Dense eigen-decomposition of the normalized Laplacian, keeping the
/// `n_eigen` smallest eigenpairs (all of them when n_eigen < 0). Throws
/// InvalidArgument on a vertex with zero degree.
LaplacianSpectrum normalized_laplacian(const SimilarityGraph& graph, int n_eigen = -1);

enum class GapRule {
  Absolute,  // argmax lambda_{k+1} - lambda_k
  Relative,  // argmax (lambda_{k+1} - lambda_k) / lambda_{k+1}
};

/// Cluster count from the largest eigengap over 1 <= k <= max_k; the first
/// maximum wins ties. Needs max_k + 1 computed eigenvalues.
int eigengap_count(const LaplacianSpectrum& spectrum, int max_k, GapRule rule = GapRule::Absolute);

/// Normalized spectral clustering: rows of the K x k matrix of the k smallest
/// eigenvectors are scaled to unit length and grouped by k-means with
/// `restarts` farthest-point initialisations; the lowest within-cluster sum of
/// squares wins (ties by restart order).
ClusterSet spectral_cluster(const LaplacianSpectrum& spectrum, int k, int restarts, Rng& rng);
ClusterSet spectral_cluster(const SimilarityGraph& graph, int k, int restarts, Rng& rng);

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;  // k x dim
  double wcss = 0.0;
  int iterations = 0;
};

/// Lloyd's algorithm on the rows of `points`. Every restart starts from a
/// random point and adds the farthest point greedily; at most 300 iterations.
KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, int restarts, Rng& rng);

/// Converts k-means labels to a canonical ClusterSet.
ClusterSet clusters_from_labels(const std::vector<int>& labels, int k);

}  // namespace tailgroups
