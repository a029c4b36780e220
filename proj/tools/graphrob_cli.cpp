// graphrob: node-weight perturbation experiments on graphs.
//
//   graphrob bp-clustering --config exp.json --out results/ --threads 4
//   graphrob ingest-check --edges facebook_combined.txt
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "graphrob/errors.hpp"
#include "graphrob/experiment.hpp"
#include "graphrob/io.hpp"
#include "graphrob/perturbation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace graphrob;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c, bool config_required = true) {
  auto* opt = cmd->add_option("--config", c.config, "experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "root seed, overrides the config");
  cmd->add_option("--out", c.out, "output directory, overrides the config");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

fs::path config_dir(const std::string& path) {
  fs::path p = fs::absolute(path);
  return p.parent_path();
}

ExperimentConfig load_config(const Common& c, std::optional<ExperimentKind> default_kind,
                             std::initializer_list<ExperimentKind> allowed, const char* command) {
  const json j = read_json(c.config);
  ConfigOverrides ov;
  ov.seed = c.seed;
  if (c.out) ov.output_dir = fs::path(*c.out);
  ov.threads = c.threads;
  ExperimentConfig cfg = parse_experiment_config(j, config_dir(c.config), ov, default_kind);
  for (ExperimentKind k : allowed) {
    if (k == cfg.kind) return cfg;
  }
  throw ConfigError("'" + to_string(cfg.kind) + "' experiments are not run by '" + command + "'");
}

int exit_code_for(const std::exception_ptr& e, std::string& category, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    category = "config";
    message = x.what();
    return 2;
  } catch (const DataError& x) {
    category = "data";
    message = x.what();
    return 3;
  } catch (const NumericalError& x) {
    category = "numerical";
    message = x.what();
    return 4;
  } catch (const RejectionExhaustedError& x) {
    category = "numerical";
    message = x.what();
    return 4;
  } catch (const std::invalid_argument& x) {
    category = "config";
    message = x.what();
    return 2;
  } catch (const std::exception& x) {
    category = "internal";
    message = x.what();
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness of graph properties under node-weight perturbation"};
  app.require_subcommand(1);

  Common common;
  std::optional<fs::path> out_dir;

  auto* generate = app.add_subcommand("generate", "draw a DC-SBM graph and write edges + labels");
  add_common(generate, common);
  auto* bias = app.add_subcommand("bias", "bias diagnostics (bias, bias-baselines)");
  add_common(bias, common);
  auto* bp_clustering = app.add_subcommand("bp-clustering", "clustering breakdown sweep");
  add_common(bp_clustering, common);
  auto* bp_property = app.add_subcommand("bp-property", "scalar-property breakdown sweep");
  add_common(bp_property, common);
  auto* influence = app.add_subcommand("influence", "IF^WCut histograms for clean and noisy clusterings");
  add_common(influence, common);
  auto* partial = app.add_subcommand("partial-sweep", "partial perturbation (partial-wcut, wcc-eigengap)");
  add_common(partial, common);

  auto* ingest = app.add_subcommand("ingest-check", "parse an edge list (and labels) and summarize");
  std::string edges_path, labels_path;
  bool directed = false;
  ingest->add_option("--edges", edges_path, "edge list")->required();
  ingest->add_option("--labels", labels_path, "label file");
  ingest->add_flag("--directed", directed, "treat edges as arcs");
  std::string idmap_path;
  ingest->add_option("--id-map", idmap_path, "write the internal/external id map here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const IngestedGraph g = ingest_edge_list(edges_path, directed);
      const Components comp = connected_components(g.graph);
      int isolated = 0;
      for (double d : g.graph.degrees()) isolated += d <= 0.0;
      json summary{{"nodes", g.graph.num_nodes()},
                   {"edges", g.graph.num_edges()},
                   {"directed", directed},
                   {"components", comp.count},
                   {"zero_out_degree", isolated}};
      if (!labels_path.empty()) {
        const Clustering c = ingest_labels(labels_path, g.ids);
        summary["clusters"] = c.num_clusters();
      }
      if (!idmap_path.empty()) write_id_map(idmap_path, g.ids);
      std::cout << summary.dump(2) << '\n';
      return 0;
    }
    if (*generate) {
      const json j = read_json(common.config);
      if (!j.contains("graph")) throw ConfigError("generate needs a 'graph' section");
      std::uint64_t seed = 0;
      if (common.seed) {
        seed = *common.seed;
      } else if (j.contains("seed")) {
        seed = j.at("seed").get<std::uint64_t>();
      } else {
        throw ConfigError("config needs a 'seed' (or pass --seed)");
      }
      const GraphSource src = parse_graph_source(j.at("graph"), config_dir(common.config), seed);
      out_dir = common.out ? fs::path(*common.out) : config_dir(common.config) / j.value("output_dir", "out");
      const json info = generate_graph_bundle(src, *out_dir);
      std::cout << info.dump(2) << '\n';
      return 0;
    }

    ExperimentConfig cfg;
    if (*bias) {
      cfg = load_config(common, ExperimentKind::Bias, {ExperimentKind::Bias, ExperimentKind::BiasBaselines}, "bias");
    } else if (*bp_clustering) {
      cfg = load_config(common, ExperimentKind::BpClustering, {ExperimentKind::BpClustering}, "bp-clustering");
    } else if (*bp_property) {
      cfg = load_config(common, ExperimentKind::CustomSweep, {ExperimentKind::CustomSweep}, "bp-property");
    } else if (*influence) {
      cfg = load_config(common, ExperimentKind::IfHistogram, {ExperimentKind::IfHistogram}, "influence");
    } else {
      cfg = load_config(common, std::nullopt, {ExperimentKind::PartialWcut, ExperimentKind::WccEigengap},
                        "partial-sweep");
    }
    out_dir = cfg.output_dir;
    const json report = run_experiment(cfg);
    std::cout << "wrote " << cfg.output_dir.string() << " (" << to_string(cfg.kind) << ")\n";
    return 0;
  } catch (...) {
    std::string category, message;
    const int code = exit_code_for(std::current_exception(), category, message);
    std::cerr << "graphrob: " << category << " error: " << message << '\n';
    if (out_dir) {
      try {
        write_json(*out_dir / "error.json", {{"category", category}, {"message", message}, {"exit_code", code}});
      } catch (...) {
      }
    }
    return code;
  }
}
