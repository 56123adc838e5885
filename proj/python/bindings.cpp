#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tailgroups/angular.hpp"
#include "tailgroups/error.hpp"
#include "tailgroups/extremal.hpp"
#include "tailgroups/risk.hpp"
#include "tailgroups/spectral.hpp"
#include "tailgroups/synth.hpp"
#include "tailgroups/tail.hpp"
#include "tailgroups/transform.hpp"

namespace py = pybind11;
using namespace tailgroups;

namespace {

DataMatrix as_data(const Eigen::MatrixXd& values, bool standardized) {
  DataMatrix m;
  m.values = values;
  m.column_names = default_column_names(static_cast<int>(values.cols()));
  m.standardized = standardized;
  return m;
}

std::vector<DependenceGroup> as_groups(const std::vector<std::vector<int>>& groups) {
  std::vector<DependenceGroup> out;
  for (const auto& g : groups) out.emplace_back(g);
  return out;
}

std::vector<std::vector<int>> as_lists(const std::vector<DependenceGroup>& groups) {
  std::vector<std::vector<int>> out;
  for (const auto& g : groups) out.push_back(g.members);
  return out;
}

NormChoice norms_of(const std::string& radius, const std::string& angle) {
  return NormChoice{Norm::parse(radius), Norm::parse(angle)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Extremal dependence groups: tail fits, spectral clustering and joint tail risk.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DegenerateSample>(m, "DegenerateSample", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<TailIndexEstimate>(m, "TailIndexEstimate")
      .def_readonly("alpha", &TailIndexEstimate::alpha)
      .def_readonly("k", &TailIndexEstimate::k)
      .def_readonly("ci_low", &TailIndexEstimate::ci_low)
      .def_readonly("ci_high", &TailIndexEstimate::ci_high)
      .def_readonly("confidence", &TailIndexEstimate::confidence)
      .def("__repr__", [](const TailIndexEstimate& e) {
        return "TailIndexEstimate(alpha=" + std::to_string(e.alpha) + ", k=" + std::to_string(e.k) + ")";
      });

  py::class_<GpdParams>(m, "GpdParams")
      .def(py::init([](double threshold, double scale, double shape, double exceed_prob) {
             return GpdParams{threshold, scale, shape, exceed_prob};
           }),
           py::arg("threshold") = 0.0, py::arg("scale") = 1.0, py::arg("shape") = 0.0, py::arg("exceed_prob") = 1.0)
      .def_readwrite("threshold", &GpdParams::threshold)
      .def_readwrite("scale", &GpdParams::scale)
      .def_readwrite("shape", &GpdParams::shape)
      .def_readwrite("exceed_prob", &GpdParams::exceed_prob);

  m.def("hill_estimate",
        [](const std::vector<double>& x, int k, double confidence) { return hill_estimate(x, k, confidence); },
        py::arg("sample"), py::arg("k"), py::arg("confidence") = 0.95);
  m.def("hill_curve",
        [](const std::vector<double>& x, int k_min, int k_max, double confidence) {
          return hill_curve(x, k_min, k_max, confidence);
        },
        py::arg("sample"), py::arg("k_min"), py::arg("k_max"), py::arg("confidence") = 0.95);
  m.def("gpd_fit", [](const std::vector<double>& x, double u) { return gpd_fit(x, u); }, py::arg("sample"),
        py::arg("threshold"));
  m.def("gpd_sample",
        [](const GpdParams& p, int n, std::uint64_t seed) {
          Rng rng(seed);
          return gpd_sample(p, n, rng);
        },
        py::arg("params"), py::arg("n_sim"), py::arg("seed"));
  m.def("gpd_survival", &gpd_survival, py::arg("params"), py::arg("x"));

  m.def("rank_standardize",
        [](const Eigen::MatrixXd& raw) { return rank_standardize(as_data(raw, false)).values; }, py::arg("raw"),
        "Rank transform of every column to the standard Pareto scale.");
  m.def("polar_transform",
        [](const Eigen::VectorXd& z, const std::string& radius_norm, const std::string& angle_norm) {
          const auto p = polar_transform(z, norms_of(radius_norm, angle_norm));
          return py::make_tuple(p.radius, p.angle);
        },
        py::arg("z"), py::arg("radius_norm") = "max", py::arg("angle_norm") = "2");
  m.def("inverse_polar",
        [](double r, const Eigen::VectorXd& a, const std::string& radius_norm, const std::string& angle_norm) {
          return inverse_polar(PolarPoint{r, a}, norms_of(radius_norm, angle_norm));
        },
        py::arg("radius"), py::arg("angle"), py::arg("radius_norm") = "max", py::arg("angle_norm") = "2");

  m.def("laplacian_eigenvalues",
        [](const Eigen::MatrixXd& angles, double sigma, int count) {
          return normalized_laplacian(similarity_matrix(angles, sigma), count).eigenvalues;
        },
        py::arg("angles"), py::arg("sigma"), py::arg("count") = -1,
        "Smallest eigenvalues of the normalized Laplacian of the Gaussian geodesic similarity graph.");
  m.def("eigengap_count",
        [](const Eigen::VectorXd& ev, int max_k, bool relative) {
          LaplacianSpectrum s;
          s.eigenvalues = ev;
          s.graph_size = static_cast<int>(ev.size());
          return eigengap_count(s, max_k, relative ? GapRule::Relative : GapRule::Absolute);
        },
        py::arg("eigenvalues"), py::arg("max_k"), py::arg("relative") = false);
  m.def("spectral_cluster",
        [](const Eigen::MatrixXd& weights, int k, int restarts, std::uint64_t seed) {
          Rng rng(seed);
          return spectral_cluster(SimilarityGraph{weights, 0.0}, k, restarts, rng).clusters;
        },
        py::arg("weights"), py::arg("k"), py::arg("restarts") = 1, py::arg("seed") = 0);

  py::class_<ExtremalParams>(m, "ExtremalParams")
      .def(py::init<>())
      .def_readwrite("t", &ExtremalParams::t)
      .def_readwrite("n_r", &ExtremalParams::n_r)
      .def_readwrite("m_r", &ExtremalParams::m_r)
      .def_readwrite("e_fraction", &ExtremalParams::e_fraction)
      .def_readwrite("sigma", &ExtremalParams::sigma)
      .def_readwrite("kmeans_restarts", &ExtremalParams::kmeans_restarts)
      .def_readwrite("max_clusters", &ExtremalParams::max_clusters);

  m.def("extremal_clustering",
        [](const Eigen::MatrixXd& z, const ExtremalParams& p, std::uint64_t seed) {
          const auto r = run_extremal_clustering(as_data(z, true), p, seed);
          py::dict out;
          out["groups"] = as_lists(r.groups);
          out["eigenvalues"] = r.eigenvalues;
          out["cluster_count"] = r.cluster_count;
          out["extreme_count"] = r.extreme_count;
          return out;
        },
        py::arg("z"), py::arg("params"), py::arg("seed"),
        "Dependence groups (0-based columns) of standardized data.");
  m.def("estimate_weights",
        [](const Eigen::MatrixXd& z, double t, const std::vector<std::vector<int>>& groups) {
          const auto w = estimate_weights(as_data(z, true), t, as_groups(groups));
          py::dict out;
          out["groups"] = as_lists(w.groups);
          out["weights"] = w.weights;
          out["remainder"] = w.remainder;
          out["n_extreme"] = w.n_extreme;
          return out;
        },
        py::arg("z"), py::arg("t"), py::arg("groups"));

  py::class_<RiskEstimate>(m, "RiskEstimate")
      .def_readonly("probability", &RiskEstimate::probability)
      .def_readonly("std_error", &RiskEstimate::std_error)
      .def_readonly("conditioning_prob", &RiskEstimate::conditioning_prob)
      .def_readonly("mc_fraction", &RiskEstimate::mc_fraction)
      .def_readonly("structural_zero", &RiskEstimate::structural_zero)
      .def_readonly("n_sim", &RiskEstimate::n_sim);

  m.def("joint_exceedance_probability",
        [](const Eigen::MatrixXd& z, const std::vector<std::vector<int>>& groups, const std::vector<int>& target,
           const std::vector<double>& thresholds, double t, int n_sim, std::uint64_t seed, bool all_exceed) {
          ExceedanceQuery q{DependenceGroup(target), thresholds, false};
          TailFitOptions opts;
          opts.rows = all_exceed ? TailFitRows::AllExceed : TailFitRows::AnyExceed;
          Rng rng(seed);
          return joint_exceedance_probability(as_data(z, true), as_groups(groups), q, t, n_sim, rng, opts);
        },
        py::arg("z"), py::arg("groups"), py::arg("target"), py::arg("thresholds"), py::arg("t"),
        py::arg("n_sim") = 100000, py::arg("seed") = 0, py::arg("all_exceed") = false,
        "P(Z_j > x_j for j in target); thresholds follow ascending target columns.");
  m.def("simulate_joint_tail",
        [](const Eigen::MatrixXd& z, const std::vector<int>& group, double t, int n_sim, std::uint64_t seed) {
          Rng rng(seed);
          return simulate_joint_tail(as_data(z, true), DependenceGroup(group), t, n_sim, rng).draws;
        },
        py::arg("z"), py::arg("group"), py::arg("t"), py::arg("n_sim"), py::arg("seed") = 0);
  m.def("pair_exceedance_oracle", &pair_exceedance_oracle, py::arg("nu"), py::arg("u"));

  m.def("gumbel_copula_sample",
        [](double nu, int dim, int n, std::uint64_t seed) {
          Rng rng(seed);
          return gumbel_copula_sample(nu, dim, n, rng);
        },
        py::arg("nu"), py::arg("dim"), py::arg("n"), py::arg("seed") = 0);
  m.def("experiment_dataset",
        [](int n, double nu, std::uint64_t seed) {
          ExperimentSpec spec;
          spec.n = n;
          spec.nu = nu;
          spec.k = 1;
          Rng rng(seed);
          return experiment_dataset(spec, rng).values;
        },
        py::arg("n") = 10000, py::arg("nu") = 2.0, py::arg("seed") = 0,
        "The 14-column design with standard Pareto margins.");
  m.def("experiment_ground_truth", [] { return as_lists(experiment_ground_truth()); });
  m.def("classify_recovery",
        [](const std::vector<std::vector<int>>& found, const std::vector<std::vector<int>>& truth) {
          return to_string(classify_recovery(as_groups(found), as_groups(truth)).classification);
        },
        py::arg("found"), py::arg("truth"));
}
