#include "tailgroups/extremal.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "tailgroups/error.hpp"

namespace tailgroups {

DependenceGroup::DependenceGroup(std::vector<int> m) : members(std::move(m)) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
}

bool DependenceGroup::contains(const DependenceGroup& other) const {
  return std::includes(members.begin(), members.end(), other.members.begin(), other.members.end());
}

std::strong_ordering DependenceGroup::operator<=>(const DependenceGroup& other) const {
  if (auto c = members.size() <=> other.members.size(); c != 0) return c;
  return members <=> other.members;
}

std::string format_group(const DependenceGroup& g, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    if (i) out += ',';
    const int j = g.members[i];
    out += (j >= 0 && j < static_cast<int>(names.size())) ? names[static_cast<std::size_t>(j)]
                                                           : std::to_string(j + 1);
  }
  return out;
}

DependenceGroup parse_group(const std::string& text, const std::vector<std::string>& names) {
  std::vector<int> members;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t\r") + 1);
    if (item.empty()) continue;
    const auto it = std::find(names.begin(), names.end(), item);
    if (it != names.end()) {
      members.push_back(static_cast<int>(it - names.begin()));
      continue;
    }
    std::size_t used = 0;
    int idx = 0;
    try {
      idx = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || idx < 1 || idx > static_cast<int>(names.size())) {
      throw InvalidArgument("unknown column '" + item + "' in group '" + text + "'");
    }
    members.push_back(idx - 1);
  }
  if (members.empty()) throw InvalidArgument("empty group '" + text + "'");
  return DependenceGroup(std::move(members));
}

void ExtremalParams::validate() const {
  if (!(t > 0.0)) throw InvalidArgument("threshold t must be positive");
  if (n_r < 1) throw InvalidArgument("n_r must be at least 1");
  if (m_r < 1 || m_r > n_r) throw InvalidArgument("m_r must satisfy 1 <= m_r <= n_r");
  if (!(e_fraction > 0.0 && e_fraction <= 1.0)) throw InvalidArgument("e_fraction must lie in (0, 1]");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (kmeans_restarts < 1) throw InvalidArgument("kmeans_restarts must be at least 1");
  if (max_clusters < 1) throw InvalidArgument("max_clusters must be at least 1");
}

DependenceGroup derive_group(const std::vector<int>& cluster, const DataMatrix& z,
                             const std::vector<int>& source_rows, double t, double e) {
  if (!(e > 0.0)) throw InvalidArgument("group threshold e must be positive");
  std::vector<int> members;
  for (int j = 0; j < z.cols(); ++j) {
    int count = 0;
    for (int idx : cluster) {
      if (z.values(source_rows.at(static_cast<std::size_t>(idx)), j) > t) ++count;
    }
    if (count >= e) members.push_back(j);
  }
  return DependenceGroup(std::move(members));
}

ExtremalResult run_extremal_clustering(const DataMatrix& z, const ExtremalParams& params,
                                       std::uint64_t seed) {
  params.validate();
  if (!z.standardized) throw InvalidArgument("extremal clustering expects standardized data");
  const ExtremeSet extremes = extreme_angles(z, params.t, params.norms);
  const int k_points = static_cast<int>(extremes.points.size());
  if (k_points == 0) throw DegenerateSample("no extremes at threshold t");
  if (k_points < 2) throw DegenerateSample("fewer than 2 extreme points at threshold t");

  // Geodesic distances live on the 2-norm sphere whatever the angle norm.
  Eigen::MatrixXd angles = angle_matrix(extremes.points);
  angles.rowwise().normalize();
  const SimilarityGraph graph = similarity_matrix(angles, params.sigma);

  const int max_k = std::min(params.max_clusters, k_points - 1);
  const LaplacianSpectrum spectrum = normalized_laplacian(graph, max_k + 1);

  ExtremalResult result;
  result.extreme_count = k_points;
  result.eigenvalues = spectrum.eigenvalues;
  // The spectrum is deterministic, so every repetition selects the same count.
  result.cluster_count = eigengap_count(spectrum, max_k, params.gap_rule);

  std::map<std::vector<int>, int> votes;
  for (int r = 0; r < params.n_r; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    const ClusterSet cs = spectral_cluster(spectrum, result.cluster_count, params.kmeans_restarts, rng);
    for (const auto& c : cs.clusters) ++votes[c];
  }

  std::vector<DependenceGroup> groups;
  for (const auto& [points, count] : votes) {
    if (count < params.m_r) continue;
    AcceptedCluster ac;
    ac.points = points;
    ac.votes = count;
    ac.group = derive_group(points, z, extremes.rows, params.t,
                            params.e_fraction * static_cast<double>(points.size()));
    if (!ac.group.empty()) groups.push_back(ac.group);
    result.accepted.push_back(std::move(ac));
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  result.groups = std::move(groups);
  return result;
}

double WeightTable::weight_of(const DependenceGroup& g) const {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == g) return weights[i];
  }
  return 0.0;
}

WeightTable WeightTable::renormalized() const {
  WeightTable out = *this;
  double total = 0.0;
  for (double w : weights) total += w;
  if (total > 0.0) {
    for (double& w : out.weights) w /= total;
    out.remainder = 0.0;
  }
  return out;
}

WeightTable estimate_weights(const DataMatrix& z, double t, const std::vector<DependenceGroup>& groups) {
  if (groups.empty()) throw InvalidArgument("weight estimation needs at least one group");
  WeightTable table;
  table.groups = groups;
  std::sort(table.groups.begin(), table.groups.end());
  table.groups.erase(std::unique(table.groups.begin(), table.groups.end()), table.groups.end());
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < table.groups.size(); ++i) index[table.groups[i].members] = i;

  std::vector<long> counts(table.groups.size(), 0);
  long unmatched = 0;
  long n_t = 0;
  std::vector<int> pattern;
  for (int i = 0; i < z.rows(); ++i) {
    if (!(z.values.row(i).maxCoeff() > t)) continue;
    ++n_t;
    // Exceedance pattern: coordinates above t; the rest must lie strictly below.
    pattern.clear();
    bool tie = false;
    for (int j = 0; j < z.cols(); ++j) {
      const double v = z.values(i, j);
      if (v > t) pattern.push_back(j);
      else if (v == t) tie = true;
    }
    const auto it = tie ? index.end() : index.find(pattern);
    if (it == index.end()) ++unmatched;
    else ++counts[it->second];
  }
  if (n_t == 0) throw DegenerateSample("no observation exceeds t; weights undefined");
  table.n_extreme = static_cast<int>(n_t);
  table.weights.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    table.weights[i] = static_cast<double>(counts[i]) / static_cast<double>(n_t);
  }
  table.remainder = static_cast<double>(unmatched) / static_cast<double>(n_t);
  return table;
}

}  // namespace tailgroups
