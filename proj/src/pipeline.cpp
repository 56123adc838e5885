#include "tailgroups/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "tailgroups/csv.hpp"
#include "tailgroups/error.hpp"
#include "tailgroups/synth.hpp"
#include "tailgroups/tail.hpp"

namespace tailgroups {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw InvalidArgument("cannot read " + what + " from '" + text + "'");
  }
  return v;
}

std::vector<double> column(const DataMatrix& m, int j) {
  std::vector<double> c(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) c[static_cast<std::size_t>(i)] = m.values(i, j);
  return c;
}

const std::vector<std::string>& names_of(const DataMatrix& m, std::vector<std::string>& fallback) {
  if (!m.column_names.empty()) return m.column_names;
  fallback = default_column_names(m.cols());
  return fallback;
}

}  // namespace

void RunConfig::validate() const {
  if (!synthetic && input.empty()) throw InvalidArgument("no input file given");
  if (synthetic && synthetic_n < 2) throw InvalidArgument("synthetic sample size must be at least 2");
  if (synthetic && !(nu >= 1.0)) throw InvalidArgument("nu must be >= 1");
  if (k.has_value() == t.has_value()) throw InvalidArgument("give exactly one of k and t");
  if (k && !(*k >= 1.0)) throw InvalidArgument("k must be at least 1");
  if (t && !(*t > 0.0)) throw InvalidArgument("t must be positive");
  if (!seed) throw InvalidArgument("a seed is required");
  ExtremalParams p = extremal_params(0);
  p.t = 1.0;
  p.validate();
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");
  if (hill_k && *hill_k < 1) throw InvalidArgument("hill_k must be at least 1");
  if (n_sim < 1) throw InvalidArgument("n_sim must be positive");
  if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (output_dir.empty()) throw InvalidArgument("output directory is empty");
}

double RunConfig::threshold(int n) const {
  if (t) return *t;
  if (!k) throw InvalidArgument("give exactly one of k and t");
  if (!(*k < n)) throw InvalidArgument("k must be smaller than the sample size");
  return threshold_from_k(n, *k);
}

ExtremalParams RunConfig::extremal_params(int n) const {
  ExtremalParams p;
  if (n > 0) p.t = threshold(n);
  p.n_r = n_r;
  p.m_r = m_r;
  p.e_fraction = e_fraction;
  p.sigma = sigma;
  p.norms = norms;
  p.kmeans_restarts = kmeans_restarts;
  p.max_clusters = max_clusters;
  p.gap_rule = gap_rule;
  return p;
}

std::string RunConfig::describe() const {
  std::ostringstream out;
  auto opt = [](const auto& v) { return v ? format_number(static_cast<double>(*v)) : std::string(); };
  out << "input=" << input << '\n'
      << "synthetic=" << (synthetic ? "true" : "false") << '\n'
      << "synthetic_n=" << synthetic_n << '\n'
      << "nu=" << format_number(nu) << '\n'
      << "input_standardized=" << (input_standardized ? "true" : "false") << '\n'
      << "k=" << opt(k) << '\n'
      << "t=" << opt(t) << '\n'
      << "sigma=" << format_number(sigma) << '\n'
      << "n_r=" << n_r << '\n'
      << "m_r=" << m_r << '\n'
      << "e_fraction=" << format_number(e_fraction) << '\n'
      << "kmeans_restarts=" << kmeans_restarts << '\n'
      << "max_clusters=" << max_clusters << '\n'
      << "gap_rule=" << to_string(gap_rule) << '\n'
      << "radius_norm=" << norms.radius_norm.name() << '\n'
      << "angle_norm=" << norms.angle_norm.name() << '\n'
      << "confidence=" << format_number(confidence) << '\n'
      << "hill_k=" << (hill_k ? std::to_string(*hill_k) : std::string()) << '\n'
      << "n_sim=" << n_sim << '\n'
      << "bandwidth=" << opt(bandwidth) << '\n'
      << "tail_fit=" << to_string(tail_fit) << '\n'
      << "raw_queries=" << (raw_queries ? "true" : "false") << '\n'
      << "seed=" << (seed ? std::to_string(*seed) : std::string()) << '\n';
  for (const auto& q : queries) out << "query=" << q << '\n';
  return out.str();
}

ExceedanceQuery parse_query(const std::string& text, const std::vector<std::string>& names,
                            bool raw_scale) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InvalidArgument("query '" + text + "' must look like X1,X2:threshold[,threshold...]");
  }
  ExceedanceQuery q;
  q.raw_scale = raw_scale;
  // Thresholds pair with the columns as written; reorder to ascending columns.
  std::vector<std::pair<int, double>> pairs;
  std::vector<std::string> cols, xs;
  std::string item;
  std::stringstream cs(text.substr(0, colon)), xsstream(text.substr(colon + 1));
  while (std::getline(cs, item, ',')) cols.push_back(trim(item));
  while (std::getline(xsstream, item, ',')) xs.push_back(trim(item));
  if (xs.size() == 1 && cols.size() > 1) xs.assign(cols.size(), xs.front());
  if (xs.size() != cols.size()) {
    throw InvalidArgument("query '" + text + "' needs one threshold per column or a single one");
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const DependenceGroup one = parse_group(cols[c], names);
    pairs.emplace_back(one.members.front(), parse_double(xs[c], "query threshold"));
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t c = 1; c < pairs.size(); ++c) {
    if (pairs[c].first == pairs[c - 1].first) throw InvalidArgument("query '" + text + "' repeats a column");
  }
  std::vector<int> members;
  for (const auto& [j, x] : pairs) {
    members.push_back(j);
    q.thresholds.push_back(x);
  }
  q.target = DependenceGroup(std::move(members));
  return q;
}

GapRule parse_gap_rule(const std::string& text) {
  if (text == "absolute") return GapRule::Absolute;
  if (text == "relative") return GapRule::Relative;
  throw InvalidArgument("gap rule must be 'absolute' or 'relative', got '" + text + "'");
}

std::string to_string(GapRule rule) { return rule == GapRule::Absolute ? "absolute" : "relative"; }

TailFitRows parse_tail_fit(const std::string& text) {
  if (text == "any") return TailFitRows::AnyExceed;
  if (text == "all") return TailFitRows::AllExceed;
  throw InvalidArgument("tail fit rows must be 'any' or 'all', got '" + text + "'");
}

std::string to_string(TailFitRows rows) { return rows == TailFitRows::AnyExceed ? "any" : "all"; }

DataMatrix load_input(const RunConfig& config) {
  if (config.synthetic) {
    ExperimentSpec spec;
    spec.n = config.synthetic_n;
    spec.nu = config.nu;
    spec.k = 1;
    if (!config.seed) throw InvalidArgument("a seed is required");
    Rng rng(*config.seed);
    return experiment_dataset(spec, rng);
  }
  DataMatrix m = load_csv(config.input);
  m.standardized = config.input_standardized;
  return m;
}

std::string hill_table(const DataMatrix& raw, int k, double confidence) {
  std::vector<std::string> fallback;
  const auto& names = names_of(raw, fallback);
  CsvTable t;
  t.header = {"column", "k", "alpha", "ci_low", "ci_high", "confidence"};
  for (int j = 0; j < raw.cols(); ++j) {
    const std::vector<double> c = column(raw, j);
    TailIndexEstimate e;
    try {
      e = hill_estimate(c, k, confidence);
    } catch (const Error& err) {
      throw InvalidArgument("column " + names[static_cast<std::size_t>(j)] + ": " + err.what());
    }
    t.rows.push_back({names[static_cast<std::size_t>(j)], std::to_string(e.k), format_number(e.alpha),
                      format_number(e.ci_low), format_number(e.ci_high), format_number(e.confidence)});
  }
  return t.str();
}

std::string hill_curve_table(const DataMatrix& raw, int k_min, int k_max, double confidence) {
  std::vector<std::string> fallback;
  const auto& names = names_of(raw, fallback);
  CsvTable t;
  t.header = {"column", "k", "alpha", "ci_low", "ci_high"};
  for (int j = 0; j < raw.cols(); ++j) {
    for (const auto& e : hill_curve(column(raw, j), k_min, k_max, confidence)) {
      t.rows.push_back({names[static_cast<std::size_t>(j)], std::to_string(e.k), format_number(e.alpha),
                        format_number(e.ci_low), format_number(e.ci_high)});
    }
  }
  return t.str();
}

std::string eigenvalue_table(const Eigen::VectorXd& eigenvalues) {
  CsvTable t;
  t.header = {"index", "eigenvalue"};
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), format_number(eigenvalues(i))});
  }
  return t.str();
}

std::string groups_text(const std::vector<DependenceGroup>& groups, const std::vector<std::string>& names) {
  std::string out;
  for (const auto& g : groups) out += format_group(g, names) + '\n';
  return out;
}

std::string weights_table(const WeightTable& weights, const std::vector<std::string>& names) {
  CsvTable t;
  t.header = {"group", "weight"};
  for (std::size_t i = 0; i < weights.groups.size(); ++i) {
    t.rows.push_back({'"' + format_group(weights.groups[i], names) + '"', format_number(weights.weights[i])});
  }
  t.rows.push_back({"remainder", format_number(weights.remainder)});
  t.rows.push_back({"n_extreme", std::to_string(weights.n_extreme)});
  return t.str();
}

std::string risk_table(const std::vector<std::string>& queries, const std::vector<RiskEstimate>& estimates,
                       const std::vector<std::string>& names) {
  CsvTable t;
  t.header = {"query", "probability", "std_error", "conditioning_prob", "mc_fraction", "structural_zero",
              "covering_groups", "n_sim"};
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const RiskEstimate& e = estimates[i];
    std::string cover;
    for (const auto& c : e.contributions) {
      if (!cover.empty()) cover += ';';
      cover += format_group(c.group, names);
    }
    t.rows.push_back({'"' + queries[i] + '"', format_number(e.probability), format_number(e.std_error),
                      format_number(e.conditioning_prob), format_number(e.mc_fraction),
                      e.structural_zero ? "true" : "false", '"' + cover + '"', std::to_string(e.n_sim)});
  }
  return t.str();
}

std::vector<DependenceGroup> parse_groups(const std::string& text, const std::vector<std::string>& names) {
  std::vector<DependenceGroup> groups;
  std::string line;
  std::stringstream ss(text);
  while (std::getline(ss, line)) {
    std::stringstream ls(line);
    std::string part;
    while (std::getline(ls, part, ';')) {
      part = trim(part);
      if (part.empty() || part.front() == '#') continue;
      groups.push_back(parse_group(part, names));
    }
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  if (groups.empty()) throw InvalidArgument("no groups given");
  return groups;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  DataMatrix data = load_input(config);
  if (data.column_names.empty()) data.column_names = default_column_names(data.cols());
  const auto& names = data.column_names;
  const int n = data.rows();
  PipelineResult result;
  result.t = config.threshold(n);
  const ExtremalParams params = config.extremal_params(n);
  std::vector<ExceedanceQuery> queries;
  for (const auto& q : config.queries) queries.push_back(parse_query(q, names, config.raw_queries));
  const int hill_k = config.hill_k ? *config.hill_k
                                   : static_cast<int>(std::lround(config.k ? *config.k : n / result.t));

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("hill.csv", hill_table(data, hill_k, config.confidence));

  const DataMatrix z = data.standardized ? data : rank_standardize(data);
  const std::uint64_t seed = *config.seed;
  result.clustering = run_extremal_clustering(z, params, seed);
  files.emplace_back("eigenvalues.csv", eigenvalue_table(result.clustering.eigenvalues));
  files.emplace_back("groups.txt", groups_text(result.clustering.groups, names));
  if (!result.clustering.groups.empty()) {
    result.weights = estimate_weights(z, result.t, result.clustering.groups);
  } else {
    // nothing discovered: every extreme row is remainder
    result.weights.remainder = 1.0;
    result.weights.n_extreme = result.clustering.extreme_count;
  }
  files.emplace_back("weights.csv", weights_table(result.weights, names));

  if (!queries.empty()) {
    TailFitOptions opts;
    opts.bandwidth = config.bandwidth;
    opts.rows = config.tail_fit;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const ExceedanceQuery q = config.raw_queries ? standardize_query(data, queries[i], result.t) : queries[i];
      Rng rng(seed, 0x7269736bULL + i);
      result.risks.push_back(
          joint_exceedance_probability(z, result.clustering.groups, q, result.t, config.n_sim, rng, opts));
    }
    files.emplace_back("risk.csv", risk_table(config.queries, result.risks, names));
  }

  std::filesystem::create_directories(config.output_dir);
  nlohmann::json manifest;
  manifest["config"] = config.describe();
  manifest["seed"] = seed;
  manifest["threshold"] = format_number(result.t);
  manifest["n"] = n;
  manifest["d"] = data.cols();
  manifest["extreme_count"] = result.clustering.extreme_count;
  manifest["cluster_count"] = result.clustering.cluster_count;
  for (const auto& [name, content] : files) {
    write_text((std::filesystem::path(config.output_dir) / name).string(), content);
    manifest["files"][name] = sha256_hex(content);
    result.files.push_back(name);
  }
  write_text((std::filesystem::path(config.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  result.files.push_back("manifest.json");
  return result;
}

}  // namespace tailgroups
