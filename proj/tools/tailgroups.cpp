// Command line front end: one subcommand per analysis step plus `run` for the
// whole pipeline.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailgroups/csv.hpp"
#include "tailgroups/error.hpp"
#include "tailgroups/pipeline.hpp"
#include "tailgroups/synth.hpp"

using namespace tailgroups;

namespace {

struct Options {
  RunConfig cfg;
  std::string radius_norm = "max";
  std::string angle_norm = "2";
  std::string gap_rule = "absolute";
  std::string tail_fit = "any";
  std::string output;
  std::string groups;
  std::string groups_file;
  std::string group;
  std::optional<int> k_min, k_max;
  int trials = 50;
  bool verbose = false;
};

void add_input(CLI::App* sub, Options& o, bool standardized_flag) {
  sub->add_option("-i,--input", o.cfg.input, "CSV file with a header row")->required();
  if (standardized_flag) {
    sub->add_flag("--standardized,--input-standardized", o.cfg.input_standardized,
                  "input is already on the standard Pareto scale (skip the rank transform)");
  }
}

void add_threshold(CLI::App* sub, Options& o) {
  auto* k = sub->add_option("-k,--k", o.cfg.k, "number of extremes; t = n / k");
  auto* t = sub->add_option("-t,--t", o.cfg.t, "radius threshold");
  k->excludes(t);
}

void add_seed(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.cfg.seed, "random seed (required)")->required();
}

void add_clustering(CLI::App* sub, Options& o) {
  sub->add_option("--sigma", o.cfg.sigma, "Gaussian kernel width")->capture_default_str();
  sub->add_option("--n-r,--n_r", o.cfg.n_r, "spectral clustering repetitions")->capture_default_str();
  sub->add_option("--m-r,--m_r", o.cfg.m_r, "votes needed to keep a cluster")->capture_default_str();
  sub->add_option("--e-fraction,--e_fraction", o.cfg.e_fraction, "group threshold e_i = e_fraction * c_i")
      ->capture_default_str();
  sub->add_option("--kmeans-restarts,--kmeans_restarts", o.cfg.kmeans_restarts)->capture_default_str();
  sub->add_option("--max-clusters,--max_clusters", o.cfg.max_clusters, "largest eigengap candidate")
      ->capture_default_str();
  sub->add_option("--gap-rule,--gap_rule", o.gap_rule, "absolute | relative")->capture_default_str();
  sub->add_option("--radius-norm,--radius_norm", o.radius_norm, "max | p >= 1")->capture_default_str();
  sub->add_option("--angle-norm,--angle_norm", o.angle_norm, "max | p >= 1")->capture_default_str();
}

void add_simulation(CLI::App* sub, Options& o) {
  sub->add_option("--n-sim,--n_sim", o.cfg.n_sim, "simulated tail vectors")->capture_default_str();
  sub->add_option("--bandwidth", o.cfg.bandwidth, "face kernel bandwidth (automatic when absent)");
  sub->add_option("--tail-fit,--tail_fit", o.tail_fit,
                  "rows fitting the tail model: any (|Z_E|_inf > t) | all (every coordinate > t)")
      ->capture_default_str();
}

void add_groups(CLI::App* sub, Options& o) {
  auto* g = sub->add_option("--groups", o.groups, "groups as 'X1,X2;X3'");
  auto* f = sub->add_option("--groups-file,--groups_file", o.groups_file, "groups.txt from `cluster`");
  g->excludes(f);
}

void finish(Options& o) {
  o.cfg.norms.radius_norm = Norm::parse(o.radius_norm);
  o.cfg.norms.angle_norm = Norm::parse(o.angle_norm);
  o.cfg.gap_rule = parse_gap_rule(o.gap_rule);
  o.cfg.tail_fit = parse_tail_fit(o.tail_fit);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else write_text(path, content);
}

DataMatrix standardized_input(const Options& o) {
  DataMatrix m = load_csv(o.cfg.input);
  m.standardized = o.cfg.input_standardized;
  return m.standardized ? m : rank_standardize(m);
}

double threshold_of(const Options& o, int n) {
  if (!o.cfg.k && !o.cfg.t) throw InvalidArgument("give one of --k and --t");
  return o.cfg.threshold(n);
}

std::vector<DependenceGroup> groups_of(const Options& o, const std::vector<std::string>& names) {
  if (!o.groups_file.empty()) {
    std::ifstream in(o.groups_file);
    if (!in) throw IoError("cannot open '" + o.groups_file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_groups(buf.str(), names);
  }
  if (o.groups.empty()) throw InvalidArgument("give --groups or --groups-file");
  return parse_groups(o.groups, names);
}

// Turns key=value lines of a config file into --key=value arguments placed
// before the user's flags, so flags given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out, user;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      user.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#' || line[b] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(lineno) + " is not key=value", lineno, 0);
    }
    std::string key = line.substr(b, eq - b);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    for (char& c : key) if (c == '_') c = '-';
    if (value == "true") extra.push_back("--" + key);
    else if (value != "false") extra.push_back("--" + key + "=" + value);
  }
  // args[0] is the subcommand name.
  out.push_back(user.front());
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), user.begin() + 1, user.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme-value dependence groups: Hill estimates, extremal spectral clustering, "
               "mixture weights and joint exceedance probabilities."};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;

  auto* hill = app.add_subcommand("hill", "Hill tail-index estimate per column (or a Hill plot series)");
  add_input(hill, o, false);
  hill->add_option("-k,--k", o.cfg.hill_k, "upper order statistics used");
  hill->add_option("--k-min", o.k_min, "first k of a Hill plot series");
  hill->add_option("--k-max", o.k_max, "last k of a Hill plot series");
  hill->add_option("--confidence", o.cfg.confidence)->capture_default_str();
  hill->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  auto* stdz = app.add_subcommand("standardize", "Rank transform every column to standard Pareto");
  add_input(stdz, o, false);
  stdz->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  auto* cluster = app.add_subcommand("cluster", "Extremal spectral clustering: eigenvalues and groups");
  add_input(cluster, o, true);
  add_threshold(cluster, o);
  add_clustering(cluster, o);
  add_seed(cluster, o);
  cluster->add_option("-d,--output-dir,--output_dir", o.cfg.output_dir, "writes eigenvalues.csv and groups.txt")
      ->capture_default_str();

  auto* weights = app.add_subcommand("weights", "Mixture weights of given dependence groups");
  add_input(weights, o, true);
  add_threshold(weights, o);
  add_groups(weights, o);
  weights->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  auto* risk = app.add_subcommand("risk", "Joint exceedance probabilities");
  add_input(risk, o, true);
  add_threshold(risk, o);
  add_groups(risk, o);
  add_simulation(risk, o);
  add_seed(risk, o);
  risk->add_option("-q,--query", o.cfg.queries, "'X1,X2:1e5,1e5' (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  risk->add_flag("--raw", o.cfg.raw_queries, "query thresholds are on the input scale");
  risk->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  auto* simulate = app.add_subcommand("simulate", "Simulated tail vectors of one group, all above t");
  add_input(simulate, o, true);
  add_threshold(simulate, o);
  add_simulation(simulate, o);
  add_seed(simulate, o);
  simulate->add_option("-g,--group", o.group, "group as 'X1,X2'")->required();
  simulate->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  ExperimentSpec spec;
  auto* experiment = app.add_subcommand("experiment", "Replicate the 14-dimensional recovery experiment");
  experiment->add_option("-n,--n", spec.n, "sample size")->capture_default_str();
  experiment->add_option("-k,--k", spec.k, "extremes; t = n / k")->capture_default_str();
  experiment->add_option("--nu", spec.nu, "Gumbel parameter")->capture_default_str();
  experiment->add_option("--trials", o.trials)->capture_default_str();
  add_clustering(experiment, o);
  add_seed(experiment, o);
  experiment->add_flag("-v,--verbose", o.verbose, "one line per trial on stderr");
  experiment->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  auto* generate = app.add_subcommand("generate", "Write a sample of the 14-dimensional experiment design");
  generate->add_option("-n,--n", spec.n)->capture_default_str();
  generate->add_option("--nu", spec.nu)->capture_default_str();
  add_seed(generate, o);
  generate->add_option("-o,--output", o.output, "CSV file (stdout when absent)");

  auto* run = app.add_subcommand("run", "Whole pipeline; writes hill.csv, eigenvalues.csv, groups.txt, "
                                        "weights.csv, risk.csv and manifest.json");
  run->add_option("-i,--input", o.cfg.input, "CSV file with a header row");
  run->add_flag("--standardized,--input-standardized,--input_standardized", o.cfg.input_standardized);
  run->add_flag("--synthetic", o.cfg.synthetic, "use a generated experiment sample as input");
  run->add_option("--synthetic-n,--synthetic_n", o.cfg.synthetic_n)->capture_default_str();
  run->add_option("--nu", o.cfg.nu)->capture_default_str();
  add_threshold(run, o);
  add_clustering(run, o);
  add_simulation(run, o);
  run->add_option("--confidence", o.cfg.confidence)->capture_default_str();
  run->add_option("--hill-k,--hill_k", o.cfg.hill_k, "Hill order statistics (defaults to k)");
  run->add_option("-q,--query", o.cfg.queries, "'X1,X2:1e5,1e5' (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  run->add_flag("--raw-queries,--raw_queries", o.cfg.raw_queries);
  add_seed(run, o);
  run->add_option("-d,--output-dir,--output_dir", o.cfg.output_dir)->capture_default_str();
  app.footer("Every subcommand accepts --config FILE with key=value lines; command line flags win.");

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    std::vector<std::string> forward(args.rbegin(), args.rend());
    if (!forward.empty()) forward = expand_config(forward);
    args.assign(forward.rbegin(), forward.rend());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    finish(o);
    if (*hill) {
      const DataMatrix raw = load_csv(o.cfg.input);
      if (o.k_min || o.k_max) {
        if (!o.k_min || !o.k_max) throw InvalidArgument("give both --k-min and --k-max");
        emit(o.output, hill_curve_table(raw, *o.k_min, *o.k_max, o.cfg.confidence));
      } else {
        if (!o.cfg.hill_k) throw InvalidArgument("give --k");
        emit(o.output, hill_table(raw, *o.cfg.hill_k, o.cfg.confidence));
      }
    } else if (*stdz) {
      emit(o.output, to_csv(rank_standardize(load_csv(o.cfg.input))));
    } else if (*cluster) {
      const DataMatrix z = standardized_input(o);
      const ExtremalParams p = [&] {
        ExtremalParams q = o.cfg.extremal_params(0);
        q.t = threshold_of(o, z.rows());
        return q;
      }();
      const ExtremalResult res = run_extremal_clustering(z, p, *o.cfg.seed);
      std::filesystem::create_directories(o.cfg.output_dir);
      const std::string groups = groups_text(res.groups, z.column_names);
      write_text((std::filesystem::path(o.cfg.output_dir) / "eigenvalues.csv").string(),
                 eigenvalue_table(res.eigenvalues));
      write_text((std::filesystem::path(o.cfg.output_dir) / "groups.txt").string(), groups);
      std::cerr << "t=" << format_number(p.t) << " extremes=" << res.extreme_count
                << " clusters=" << res.cluster_count << " groups=" << res.groups.size() << '\n';
      std::cout << groups;
    } else if (*weights) {
      const DataMatrix z = standardized_input(o);
      const WeightTable w = estimate_weights(z, threshold_of(o, z.rows()), groups_of(o, z.column_names));
      emit(o.output, weights_table(w, z.column_names));
    } else if (*risk) {
      const DataMatrix raw = load_csv(o.cfg.input);
      DataMatrix z = raw;
      z.standardized = o.cfg.input_standardized;
      if (!z.standardized) z = rank_standardize(z);
      const double t = threshold_of(o, z.rows());
      const auto groups = groups_of(o, z.column_names);
      TailFitOptions opts;
      opts.bandwidth = o.cfg.bandwidth;
      opts.rows = o.cfg.tail_fit;
      std::vector<RiskEstimate> out;
      for (std::size_t i = 0; i < o.cfg.queries.size(); ++i) {
        ExceedanceQuery q = parse_query(o.cfg.queries[i], z.column_names, o.cfg.raw_queries);
        if (q.raw_scale) q = standardize_query(raw, q, t);
        Rng rng(*o.cfg.seed, 0x7269736bULL + i);
        out.push_back(joint_exceedance_probability(z, groups, q, t, o.cfg.n_sim, rng, opts));
      }
      emit(o.output, risk_table(o.cfg.queries, out, z.column_names));
    } else if (*simulate) {
      const DataMatrix z = standardized_input(o);
      const DependenceGroup g = parse_group(o.group, z.column_names);
      TailFitOptions opts;
      opts.bandwidth = o.cfg.bandwidth;
      opts.rows = o.cfg.tail_fit;
      Rng rng(*o.cfg.seed);
      const TailSimulation sim = simulate_joint_tail(z, g, threshold_of(o, z.rows()), o.cfg.n_sim, rng, opts);
      DataMatrix out;
      out.values = sim.draws;
      for (int j : g.members) out.column_names.push_back(z.column_names[static_cast<std::size_t>(j)]);
      std::cerr << "rejection_rate=" << format_number(sim.rejection_rate())
                << " gpd_scale=" << format_number(sim.radial.scale)
                << " gpd_shape=" << format_number(sim.radial.shape) << '\n';
      emit(o.output, to_csv(out));
    } else if (*experiment) {
      const ExtremalParams p = o.cfg.extremal_params(0);
      const RecoveryTable table = recovery_experiment(
          spec, p, o.trials, *o.cfg.seed, [&](int i, const RecoveryResult& r) {
            if (!o.verbose) return;
            std::cerr << "trial " << i << ": " << to_string(r.classification);
            for (const auto& g : r.missing) std::cerr << " -{" << format_group(g, default_column_names(14)) << '}';
            for (const auto& g : r.spurious) std::cerr << " +{" << format_group(g, default_column_names(14)) << '}';
            std::cerr << '\n';
          });
      CsvTable t;
      t.header = {"outcome", "count"};
      for (auto c : {RecoveryClass::NoError, RecoveryClass::ErrorI, RecoveryClass::ErrorII, RecoveryClass::ErrorI_II}) {
        t.rows.push_back({to_string(c), std::to_string(table.count(c))});
      }
      emit(o.output, t.str());
    } else if (*generate) {
      spec.k = 1;
      Rng rng(*o.cfg.seed);
      emit(o.output, to_csv(experiment_dataset(spec, rng)));
    } else if (*run) {
      const PipelineResult res = run_pipeline(o.cfg);
      std::cerr << "t=" << format_number(res.t) << " extremes=" << res.clustering.extreme_count
                << " clusters=" << res.clustering.cluster_count << " groups=" << res.clustering.groups.size()
                << '\n';
      for (const auto& f : res.files) std::cout << (std::filesystem::path(o.cfg.output_dir) / f).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
