#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "graphrob/dcsbm.hpp"
#include "graphrob/io.hpp"
#include "graphrob/perturbation.hpp"
#include "graphrob/weights.hpp"

namespace graphrob {

enum class ExperimentKind {
  Bias,
  BiasBaselines,
  BpClustering,
  IfHistogram,
  PartialWcut,
  WccEigengap,
  CustomSweep,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

// Either an edge list on disk (optionally with labels) or a DC-SBM draw.
struct GraphSource {
  std::optional<std::filesystem::path> edge_list;
  bool directed = false;
  std::optional<std::filesystem::path> labels;
  std::optional<DcSbmSpec> dcsbm;
};

struct LoadedGraph {
  Graph graph;
  IdMap ids;
  std::optional<Clustering> truth;
  nlohmann::json info;
};

// Relative paths resolve against base_dir. `default_seed` seeds a DC-SBM
// whose config omits its own seed.
GraphSource parse_graph_source(const nlohmann::json& j, const std::filesystem::path& base_dir,
                               std::uint64_t default_seed);
LoadedGraph load_graph(const GraphSource& source);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Bias;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int threads = 1;
  std::optional<GraphSource> graph;
  Scheme scheme = Scheme::Symmetric;
  std::vector<WeightFamily> families;
  std::vector<double> grid;
  int trials = 100;
  double epsilon = 0.05;
  bool relative_epsilon = true;
  double alpha = 0.05;
  double tau = 0.05;
  int K = 0;  // 0: number of planted clusters
  std::string property;
  bool argmax = false;
  int K_max = 8;
  int draws = 1000;
  std::vector<double> rewire_grid;
  std::vector<double> subsample_grid;
  int inner_trials = 50;
  int reassign = 50;
  double spread = 0.1;
  std::vector<double> full_grid;  // wcc-eigengap full-perturbation sweep
  nlohmann::json echo;            // effective config as written to disk
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> threads;
};

// Fills kind-specific defaults and validates. Unknown keys are errors.
// `default_kind` applies when the config has no "experiment" key.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                         const ConfigOverrides& overrides = {},
                                         std::optional<ExperimentKind> default_kind = std::nullopt);

// Writes config.json, report.json, results.csv (plus kind-specific extra
// CSVs) and manifest.json under output_dir. Returns the report.
nlohmann::json run_experiment(const ExperimentConfig& config);

// DC-SBM draw written as graph.edges, graph.labels and graph.json.
nlohmann::json generate_graph_bundle(const GraphSource& source, const std::filesystem::path& out_dir);

}  // namespace graphrob
