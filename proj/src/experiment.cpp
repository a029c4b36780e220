#include "graphrob/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Core>

#include "graphrob/errors.hpp"
#include "graphrob/influence.hpp"
#include "graphrob/robustness.hpp"
#include "graphrob/stats.hpp"

namespace graphrob {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct KindName {
  ExperimentKind kind;
  const char* name;
};
constexpr KindName kKinds[] = {
    {ExperimentKind::Bias, "bias"},
    {ExperimentKind::BiasBaselines, "bias-baselines"},
    {ExperimentKind::BpClustering, "bp-clustering"},
    {ExperimentKind::IfHistogram, "if-histogram"},
    {ExperimentKind::PartialWcut, "partial-wcut"},
    {ExperimentKind::WccEigengap, "wcc-eigengap"},
    {ExperimentKind::CustomSweep, "custom-sweep"},
};

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    // Rounded so grids print as 0.1, 0.2, ... rather than 0.30000000000000004.
    out.push_back(std::round((lo + (hi - lo) * i / (count - 1)) * 1e12) / 1e12);
  }
  return out;
}

// Typed accessors that turn json type errors into ConfigErrors with the key.
template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path existing_file(const fs::path& base, const std::string& p, const char* what) {
  fs::path path = resolve(base, p);
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path.string());
  return path;
}

std::vector<WeightFamily> parse_families(const json& j) {
  std::vector<WeightFamily> out;
  for (const auto& name : j.get<std::vector<std::string>>()) {
    try {
      out.push_back(parse_weight_family(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) throw ConfigError("'families' is empty");
  return out;
}

void check_ascending(const std::vector<double>& grid, const char* key) {
  if (grid.empty()) throw ConfigError(std::string("'") + key + "' is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError(std::string("'") + key + "' must be strictly ascending");
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

GraphSource parse_graph_source(const json& j, const fs::path& base_dir, std::uint64_t default_seed) {
  check_keys(j, {"edge_list", "directed", "labels", "dcsbm"}, "graph");
  GraphSource src;
  const bool file = j.contains("edge_list"), synth = j.contains("dcsbm");
  if (file == synth) throw ConfigError("graph needs exactly one of 'edge_list' or 'dcsbm'");
  if (file) {
    src.edge_list = existing_file(base_dir, get<std::string>(j, "edge_list", ""), "edge list");
    src.directed = get<bool>(j, "directed", false);
    if (j.contains("labels")) src.labels = existing_file(base_dir, get<std::string>(j, "labels", ""), "label file");
    return src;
  }
  if (j.contains("labels") || j.contains("directed")) {
    throw ConfigError("'labels' and 'directed' apply to edge-list graphs only");
  }
  const json& d = j.at("dcsbm");
  check_keys(d, {"n", "proportions", "block", "planted", "weight_floor", "weight_span", "seed",
                 "max_isolated_retries"},
             "graph.dcsbm");
  DcSbmSpec spec;
  spec.n = get<int>(d, "n", 200);
  spec.proportions = get<std::vector<double>>(d, "proportions", spec.proportions);
  spec.weight_floor = get<double>(d, "weight_floor", 0.5);
  spec.weight_span = get<double>(d, "weight_span", 0.5);
  spec.seed = get<std::uint64_t>(d, "seed", derive_seed(default_seed, {0x6A}));
  spec.max_isolated_retries = get<int>(d, "max_isolated_retries", spec.max_isolated_retries);
  const int K = static_cast<int>(spec.proportions.size());
  if (d.contains("block") && d.contains("planted")) throw ConfigError("give either 'block' or 'planted'");
  if (d.contains("block")) {
    const auto rows = get<std::vector<std::vector<double>>>(d, "block", {});
    if (static_cast<int>(rows.size()) != K) throw ConfigError("'block' must have K rows");
    spec.block.resize(K, K);
    for (int a = 0; a < K; ++a) {
      if (static_cast<int>(rows[a].size()) != K) throw ConfigError("'block' must be K x K");
      for (int b = 0; b < K; ++b) spec.block(a, b) = rows[a][b];
    }
  } else {
    const json planted = d.value("planted", json{{"p", 0.5}, {"q", 0.02}});
    check_keys(planted, {"p", "q", "avg_degree"}, "graph.dcsbm.planted");
    const double mean_w = spec.weight_floor + 0.5 * spec.weight_span;
    spec.block = block_matrix_from_target_gap(K, spec.proportions, get<double>(planted, "p", 0.5),
                                              get<double>(planted, "q", 0.02),
                                              get<double>(planted, "avg_degree", 0.0), spec.n, mean_w)
                     .block;
  }
  spec.validate();
  src.dcsbm = spec;
  return src;
}

LoadedGraph load_graph(const GraphSource& source) {
  LoadedGraph out;
  if (source.dcsbm) {
    DcSbmSample s = generate_dcsbm(*source.dcsbm);
    out.graph = std::move(s.graph);
    out.ids = IdMap::identity(out.graph.num_nodes());
    out.truth = std::move(s.planted);
    Eigen::VectorXd spectrum = population_spectrum(source.dcsbm->block, source.dcsbm->proportions);
    out.info = {{"source", "dcsbm"},
                {"seed", source.dcsbm->seed},
                {"clamped_pairs", s.clamped_pairs},
                {"clamp_rate", s.clamp_rate},
                {"isolated_retries", s.isolated_retries},
                {"population_spectrum", std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size())}};
  } else {
    IngestedGraph g = ingest_edge_list(*source.edge_list, source.directed);
    out.graph = std::move(g.graph);
    out.ids = std::move(g.ids);
    if (source.labels) out.truth = ingest_labels(*source.labels, out.ids);
    out.info = {{"source", "edge_list"}, {"path", source.edge_list->string()}, {"directed", source.directed}};
  }
  out.info["n"] = out.graph.num_nodes();
  out.info["edges"] = out.graph.num_edges();
  return out;
}

ExperimentConfig parse_experiment_config(const json& j, const fs::path& base_dir,
                                         const ConfigOverrides& overrides,
                                         std::optional<ExperimentKind> default_kind) {
  check_keys(j,
             {"experiment", "seed", "output_dir", "threads", "graph", "scheme", "families", "family",
              "grid", "trials", "epsilon", "relative_epsilon", "alpha", "tau", "K", "property",
              "argmax", "K_max", "draws", "rewire_grid", "subsample_grid", "inner_trials",
              "reassign", "spread", "full_grid"},
             "config");
  ExperimentConfig c;
  if (j.contains("experiment")) {
    c.kind = parse_experiment_kind(get<std::string>(j, "experiment", ""));
  } else if (default_kind) {
    c.kind = *default_kind;
  } else {
    throw ConfigError("config needs an 'experiment' kind");
  }
  if (overrides.seed) {
    c.seed = *overrides.seed;
  } else if (j.contains("seed")) {
    c.seed = get<std::uint64_t>(j, "seed", 0);
  } else {
    throw ConfigError("config needs a 'seed' (or pass --seed)");
  }
  c.output_dir = overrides.output_dir ? *overrides.output_dir
                                      : resolve(base_dir, get<std::string>(j, "output_dir", "out"));
  c.threads = overrides.threads ? *overrides.threads : get<int>(j, "threads", 1);
  if (c.threads < 1) throw ConfigError("threads must be >= 1");

  const bool needs_graph = c.kind != ExperimentKind::Bias;
  if (j.contains("graph")) {
    if (!needs_graph) throw ConfigError("the bias experiment takes no graph");
    c.graph = parse_graph_source(j.at("graph"), base_dir, c.seed);
  } else if (needs_graph) {
    // Desk-scale default: the planted five-block DC-SBM.
    c.graph = parse_graph_source(json{{"dcsbm", json::object()}}, base_dir, c.seed);
  }

  // Kind-specific defaults.
  Scheme scheme = Scheme::Symmetric;
  std::vector<std::string> families;
  std::vector<double> grid = linspace(0.0, 0.8, 9);
  c.trials = 100;
  switch (c.kind) {
    case ExperimentKind::Bias:
      families = {"node-resampling", "binary", "gamma", "mixture-gamma-uniform", "mixture-lognormal-uniform"};
      grid = linspace(0.1, 1.0, 10);
      break;
    case ExperimentKind::BiasBaselines:
      scheme = Scheme::Asymmetric;
      families = {"gamma"};
      grid = {0.1, 0.3, 0.5};
      c.trials = 20;
      break;
    case ExperimentKind::BpClustering:
      families = {"node-resampling", "binary", "gamma", "mixture-gamma-uniform"};
      break;
    case ExperimentKind::IfHistogram:
      scheme = Scheme::Asymmetric;
      break;
    case ExperimentKind::PartialWcut:
      scheme = Scheme::Asymmetric;
      grid = linspace(0.5, 1.5, 11);
      c.spread = 0.1;
      break;
    case ExperimentKind::WccEigengap:
      grid = linspace(0.5, 1.5, 11);
      c.spread = 0.25;
      families = {"mixture-binary-gamma"};
      break;
    case ExperimentKind::CustomSweep:
      families = {"gamma"};
      break;
  }
  c.scheme = scheme;
  if (j.contains("scheme")) {
    try {
      c.scheme = parse_scheme(get<std::string>(j, "scheme", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("families") && j.contains("family")) throw ConfigError("give 'families' or 'family', not both");
  if (j.contains("families")) {
    c.families = parse_families(j.at("families"));
  } else if (j.contains("family")) {
    c.families = parse_families(json::array({j.at("family")}));
  } else if (!families.empty()) {  // if-histogram and partial-wcut draw no family
    c.families = parse_families(json(families));
  }
  c.grid = get<std::vector<double>>(j, "grid", grid);
  check_ascending(c.grid, "grid");
  c.trials = get<int>(j, "trials", c.trials);
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  c.epsilon = get<double>(j, "epsilon", c.epsilon);
  c.relative_epsilon = get<bool>(j, "relative_epsilon", c.relative_epsilon);
  c.alpha = get<double>(j, "alpha", c.alpha);
  c.tau = get<double>(j, "tau", c.tau);
  c.K = get<int>(j, "K", 0);
  c.property = get<std::string>(j, "property", c.kind == ExperimentKind::CustomSweep ? "wcut" : "");
  c.argmax = get<bool>(j, "argmax", false);
  c.K_max = get<int>(j, "K_max", 8);
  c.draws = get<int>(j, "draws", c.draws);
  c.rewire_grid = get<std::vector<double>>(j, "rewire_grid", {0.05, 0.1, 0.2, 0.3});
  c.subsample_grid = get<std::vector<double>>(j, "subsample_grid", {0.5, 0.7, 0.8, 0.9});
  c.inner_trials = get<int>(j, "inner_trials", c.inner_trials);
  c.reassign = get<int>(j, "reassign", c.reassign);
  c.spread = get<double>(j, "spread", c.spread);
  c.full_grid = get<std::vector<double>>(j, "full_grid", linspace(0.1, 0.7, 7));

  if (c.kind == ExperimentKind::CustomSweep || c.kind == ExperimentKind::BpClustering) {
    SweepConfig probe;
    probe.grid = c.grid;
    probe.trials = c.trials;
    probe.epsilon = c.epsilon;
    probe.alpha = c.alpha;
    probe.tau = c.tau;
    probe.validate();
  }
  if (c.kind == ExperimentKind::CustomSweep) {
    static const std::set<std::string> props{"wcut", "f_l", "f_u", "f_e"};
    if (!props.count(c.property)) throw ConfigError("'property' must be wcut, f_l, f_u or f_e");
    if (c.argmax && c.property == "wcut") throw ConfigError("argmax sweeps need a spectral property");
    if (c.families.size() != 1) throw ConfigError("custom-sweep takes a single family");
  }
  if (c.draws < 1 || c.inner_trials < 1) throw ConfigError("draws and inner_trials must be >= 1");
  if (c.K_max < 2) throw ConfigError("K_max must be >= 2");
  if (c.reassign < 0) throw ConfigError("reassign must be >= 0");

  // Echo with the effective values; output_dir is omitted so that the echo
  // is independent of where the bundle lands.
  c.echo = j;
  c.echo["experiment"] = to_string(c.kind);
  c.echo["seed"] = c.seed;
  c.echo.erase("output_dir");
  c.echo.erase("threads");
  return c;
}

namespace {

std::vector<std::string> cells(std::initializer_list<std::string> v) { return v; }

int resolve_K(const ExperimentConfig& c, const LoadedGraph& g) {
  if (c.K > 0) return c.K;
  if (g.truth) return g.truth->num_clusters();
  throw ConfigError("experiment needs 'K' (the graph has no labels)");
}

SweepConfig sweep_for(const ExperimentConfig& c, WeightFamily family, std::uint64_t seed) {
  SweepConfig s;
  s.grid = c.grid;
  s.trials = c.trials;
  s.scheme = c.scheme;
  s.family = family;
  s.epsilon = c.epsilon;
  s.relative_epsilon = c.relative_epsilon;
  s.alpha = c.alpha;
  s.tau = c.tau;
  s.seed = seed;
  s.threads = c.threads;
  return s;
}

json run_bias(const ExperimentConfig& c) {
  CsvWriter csv(c.output_dir / "results.csv", {"family", "grid_index", "sigma_w", "trial", "diagnostic"});
  json families = json::array();
  for (std::size_t fi = 0; fi < c.families.size(); ++fi) {
    const WeightFamily fam = c.families[fi];
    json points = json::array();
    std::vector<std::vector<double>> values(c.grid.size(), std::vector<double>(c.trials));
    std::vector<WeightDistribution> dists;
    for (double sd : c.grid) dists.push_back(distribution_for_sd(fam, sd, c.draws));
    const int G = static_cast<int>(c.grid.size());
    parallel_for(G * c.trials, c.threads, [&](int task) {
      const int gi = task / c.trials, t = task % c.trials;
      Rng rng = make_rng(c.seed, {fi, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
      values[gi][t] = bias_diagnostic(dists[gi], c.draws, rng, c.draws).estimate;
    });
    for (int gi = 0; gi < G; ++gi) {
      for (int t = 0; t < c.trials; ++t) {
        csv.row(cells({to_string(fam), std::to_string(gi), format_number(c.grid[gi]), std::to_string(t),
                       format_number(values[gi][t])}));
      }
      json p{{"sigma_w", c.grid[gi]},
             {"distribution", describe(dists[gi])},
             {"mean", mean(values[gi])},
             {"quantiles", to_json(summarize_quantiles(values[gi]))}};
      if (auto cf = bias_closed_form(dists[gi], c.draws)) p["closed_form"] = *cf;
      points.push_back(p);
    }
    families.push_back({{"family", to_string(fam)}, {"points", points}});
  }
  csv.close();
  return {{"draws_per_trial", c.draws}, {"families", families}};
}

json run_bias_baselines(const ExperimentConfig& c, const LoadedGraph& lg) {
  const Graph& g = lg.graph;
  CsvWriter csv(c.output_dir / "results.csv", {"method", "grid_index", "level", "trial", "mean_ratio"});
  json methods = json::array();
  struct Method {
    std::string name;
    std::vector<double> grid;
    std::function<LaplacianBias(double, Rng&)> run;
  };
  std::vector<Method> list;
  list.push_back({"edge-rewire", c.rewire_grid,
                  [&](double a, Rng& r) { return rewire_laplacian_bias(g, a, c.inner_trials, r); }});
  list.push_back({"node-subsample", c.subsample_grid,
                  [&](double b, Rng& r) { return subsample_laplacian_bias(g, b, c.inner_trials, r); }});
  for (WeightFamily fam : c.families) {
    list.push_back({to_string(fam) + "-" + to_string(c.scheme), c.grid, [&, fam](double sd, Rng& r) {
                      return empirical_laplacian_bias(g, c.scheme, distribution_for_sd(fam, sd, g.num_nodes()),
                                                      c.inner_trials, r);
                    }});
  }
  for (std::size_t mi = 0; mi < list.size(); ++mi) {
    const Method& m = list[mi];
    const int G = static_cast<int>(m.grid.size());
    std::vector<std::vector<double>> ratio(G, std::vector<double>(c.trials, std::nan("")));
    parallel_for(G * c.trials, c.threads, [&](int task) {
      const int gi = task / c.trials, t = task % c.trials;
      Rng rng = make_rng(c.seed, {mi, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
      ratio[gi][t] = m.run(m.grid[gi], rng).mean_ratio();
    });
    json points = json::array();
    for (int gi = 0; gi < G; ++gi) {
      for (int t = 0; t < c.trials; ++t) {
        csv.row(cells({m.name, std::to_string(gi), format_number(m.grid[gi]), std::to_string(t),
                       format_number(ratio[gi][t])}));
      }
      points.push_back({{"level", m.grid[gi]},
                        {"mean", mean(ratio[gi])},
                        {"quantiles", to_json(summarize_quantiles(ratio[gi]))}});
    }
    methods.push_back({{"method", m.name}, {"points", points}});
  }
  csv.close();
  return {{"inner_trials", c.inner_trials}, {"methods", methods}};
}

json run_bp_clustering(const ExperimentConfig& c, const LoadedGraph& lg) {
  const int K = resolve_K(c, lg);
  CsvWriter csv(c.output_dir / "results.csv", {"family", "grid_index", "sigma_w", "trial", "metric", "value"});
  json reports = json::array();
  for (std::size_t fi = 0; fi < c.families.size(); ++fi) {
    const SweepConfig s = sweep_for(c, c.families[fi], derive_seed(c.seed, {fi}));
    RobustnessReport r = bp_clustering(lg.graph, K, lg.truth ? &*lg.truth : nullptr, s);
    append_csv(csv, r, {to_string(c.families[fi])});
    json jr = to_json(r);
    jr["family"] = to_string(c.families[fi]);
    reports.push_back(jr);
  }
  csv.close();
  return {{"K", K}, {"scheme", to_string(c.scheme)}, {"tau", c.tau}, {"reports", reports}};
}

json influence_summary(const InfluenceVector& v) {
  const Quantiles q = summarize_quantiles(v.values);
  int positive = 0;
  for (double x : v.values) positive += x > 0.0;
  return {{"quantiles", to_json(q)}, {"iqr", q.iqr()}, {"positive", positive}, {"mean", mean(v.values)}};
}

json run_if_histogram(const ExperimentConfig& c, const LoadedGraph& lg) {
  const int K = resolve_K(c, lg);
  const Graph& g = lg.graph;
  Rng rng = make_rng(c.seed, {0});
  const Clustering clean = spectral_clustering(laplacian(g), K, rng);
  if (c.reassign > g.num_nodes()) throw ConfigError("'reassign' exceeds the node count");
  if (K < 2) throw ConfigError("if-histogram needs K >= 2");

  // Move `reassign` distinct nodes to a different, uniformly chosen cluster.
  Rng noise = make_rng(c.seed, {1});
  std::vector<int> order(g.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), noise);
  std::vector<int> labels = clean.labels();
  std::uniform_int_distribution<int> other(0, K - 2);
  for (int r = 0; r < c.reassign; ++r) {
    const int i = order[r];
    const int pick = other(noise);
    labels[i] = pick >= labels[i] ? pick + 1 : pick;
  }
  const Clustering noisy = Clustering::compact(labels);

  auto influence = [&](const Clustering& cl) {
    return c.scheme == Scheme::Asymmetric ? if_wcut_asymmetric(g, cl) : if_wcut_symmetric(g, cl);
  };
  const InfluenceVector a = influence(clean), b = influence(noisy);
  CsvWriter csv(c.output_dir / "results.csv", {"clustering", "node", "influence"});
  for (int t = 0; t < g.num_nodes(); ++t) {
    csv.row(cells({"clean", std::to_string(lg.ids.external[t]), format_number(a[t])}));
  }
  for (int t = 0; t < g.num_nodes(); ++t) {
    csv.row(cells({"noisy", std::to_string(lg.ids.external[t]), format_number(b[t])}));
  }
  csv.close();
  return {{"K", K},
          {"scheme", to_string(c.scheme)},
          {"reassigned", c.reassign},
          {"wcut_clean", wcut(g, clean)},
          {"wcut_noisy", wcut(g, noisy)},
          {"clean", influence_summary(a)},
          {"noisy", influence_summary(b)}};
}

PartialSweepConfig partial_for(const ExperimentConfig& c, PartialSweepConfig::Law law) {
  PartialSweepConfig p;
  p.law = law;
  p.grid = c.grid;
  p.spread = c.spread;
  p.trials = c.trials;
  p.scheme = c.scheme;
  p.seed = c.seed;
  p.threads = c.threads;
  return p;
}

json run_partial_wcut(const ExperimentConfig& c, const LoadedGraph& lg) {
  if (!lg.truth) throw ConfigError("partial-wcut needs reference labels (a DC-SBM graph or a label file)");
  const Clustering& truth = *lg.truth;
  const int K = truth.num_clusters();
  const std::vector<int> subset = select_positive_wcut_influence(lg.graph, truth, c.scheme);
  const std::uint64_t cluster_seed = derive_seed(c.seed, {0xC1u});
  std::vector<NamedProperty> props{
      make_property("wcut", K, &truth),
      {"misclass_true", [&truth, K, cluster_seed](const Graph& pg) {
         Rng rng(cluster_seed);
         LaplacianOptions opts;
         opts.drop_isolated = true;
         const Laplacian lap = laplacian(pg, opts);
         const Clustering found = spectral_clustering(lap, K, rng);
         return misclassification(found, static_cast<int>(lap.kept_nodes().size()) == truth.size()
                                              ? truth
                                              : truth.restrict_to(lap.kept_nodes()));
       }}};
  const auto reports = partial_sweep(lg.graph, subset, "IF^WCut > 0", props,
                                     partial_for(c, PartialSweepConfig::Law::GammaMeanShift));
  CsvWriter csv(c.output_dir / "results.csv", {"grid_index", "mean_weight", "trial", "property", "value"});
  json out = json::array();
  for (const auto& r : reports) {
    append_csv(csv, r, {});
    out.push_back(to_json(r));
  }
  csv.close();
  return {{"selector", "IF^WCut > 0"}, {"selected", subset.size()}, {"variance", c.spread},
          {"scheme", to_string(c.scheme)}, {"reports", out}};
}

json run_wcc_eigengap(const ExperimentConfig& c, const LoadedGraph& lg) {
  const int K = resolve_K(c, lg);
  const std::vector<int> subset = select_bad_wcc_influence(lg.graph, K);
  std::vector<NamedProperty> props{make_property("f_l", K), make_property("f_u", K),
                                   make_property("f_e", K)};
  const auto reports = partial_sweep(lg.graph, subset, "bad wCC influence", props,
                                     partial_for(c, PartialSweepConfig::Law::UniformWindow));
  CsvWriter csv(c.output_dir / "results.csv", {"grid_index", "lower_bound", "trial", "property", "value"});
  json partial = json::array();
  for (const auto& r : reports) {
    append_csv(csv, r, {});
    partial.push_back(to_json(r));
  }
  csv.close();

  // Full perturbation: where does the best K move?
  SweepConfig s = sweep_for(c, c.families.front(), derive_seed(c.seed, {0xF0}));
  s.grid = c.full_grid;
  CsvWriter am(c.output_dir / "argmax.csv", {"property", "grid_index", "sigma_w", "trial", "argmax_K"});
  json argmax = json::array();
  for (SpectralProperty which : {SpectralProperty::FLower, SpectralProperty::FUpper, SpectralProperty::FEigengap}) {
    const ArgmaxReport r = bp_argmax_k(lg.graph, which, c.K_max, s);
    for (std::size_t gi = 0; gi < r.grid.size(); ++gi) {
      for (std::size_t t = 0; t < r.argmax[gi].size(); ++t) {
        am.row(cells({r.property, std::to_string(gi), format_number(r.grid[gi]), std::to_string(t),
                      std::to_string(r.argmax[gi][t])}));
      }
    }
    argmax.push_back(to_json(r));
  }
  am.close();
  return {{"K", K},
          {"selector", "IF^{f_u} < 0 or IF^{f_l} > 0 or IF^{f_e} < 0"},
          {"selected", subset.size()},
          {"window_width", c.spread},
          {"scheme", to_string(c.scheme)},
          {"partial", partial},
          {"full_family", to_string(c.families.front())},
          {"argmax", argmax}};
}

json run_custom_sweep(const ExperimentConfig& c, const LoadedGraph& lg) {
  const SweepConfig s = sweep_for(c, c.families.front(), c.seed);
  if (c.argmax) {
    const ArgmaxReport r = bp_argmax_k(lg.graph, parse_spectral_property(c.property), c.K_max, s);
    CsvWriter csv(c.output_dir / "results.csv", {"grid_index", "sigma_w", "trial", "property", "argmax_K"});
    for (std::size_t gi = 0; gi < r.grid.size(); ++gi) {
      for (std::size_t t = 0; t < r.argmax[gi].size(); ++t) {
        csv.row(cells({std::to_string(gi), format_number(r.grid[gi]), std::to_string(t), r.property,
                       std::to_string(r.argmax[gi][t])}));
      }
    }
    csv.close();
    return to_json(r);
  }
  int K = c.K;
  std::optional<Clustering> fixed;
  if (c.property == "wcut") {
    if (lg.truth) {
      fixed = *lg.truth;
    } else {
      if (K < 2) throw ConfigError("wcut without labels needs 'K' for spectral clustering");
      Rng rng = make_rng(c.seed, {0xC1u});
      fixed = spectral_clustering(laplacian(lg.graph), K, rng);
    }
  } else {
    K = resolve_K(c, lg);
  }
  const RobustnessReport r = bp_scalar(lg.graph, make_property(c.property, K, fixed ? &*fixed : nullptr), s);
  CsvWriter csv(c.output_dir / "results.csv", {"grid_index", "sigma_w", "trial", "property", "value"});
  append_csv(csv, r, {});
  csv.close();
  json out = to_json(r);
  out["family"] = to_string(c.families.front());
  out["scheme"] = to_string(c.scheme);
  return out;
}

}  // namespace

json run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(config.output_dir);
  write_json(config.output_dir / "config.json", config.echo);

  std::optional<LoadedGraph> lg;
  if (config.graph) lg = load_graph(*config.graph);

  json body;
  switch (config.kind) {
    case ExperimentKind::Bias: body = run_bias(config); break;
    case ExperimentKind::BiasBaselines: body = run_bias_baselines(config, *lg); break;
    case ExperimentKind::BpClustering: body = run_bp_clustering(config, *lg); break;
    case ExperimentKind::IfHistogram: body = run_if_histogram(config, *lg); break;
    case ExperimentKind::PartialWcut: body = run_partial_wcut(config, *lg); break;
    case ExperimentKind::WccEigengap: body = run_wcc_eigengap(config, *lg); break;
    case ExperimentKind::CustomSweep: body = run_custom_sweep(config, *lg); break;
  }
  json report{{"experiment", to_string(config.kind)}, {"seed", config.seed}, {"result", body}};
  if (lg) report["graph"] = lg->info;
  write_json(config.output_dir / "report.json", report);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_json(config.output_dir / "manifest.json",
             {{"tool", "graphrob"},
              {"version", kVersion},
              {"experiment", to_string(config.kind)},
              {"seed", config.seed},
              {"threads", config.threads},
              {"wall_time_seconds", wall},
              {"compiler", __VERSION__},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION)},
              {"files", {"config.json", "report.json", "results.csv"}}});
  return report;
}

json generate_graph_bundle(const GraphSource& source, const fs::path& out_dir) {
  if (!source.dcsbm) throw ConfigError("generate needs a 'dcsbm' graph source");
  const LoadedGraph lg = load_graph(source);
  fs::create_directories(out_dir);
  write_edge_list(out_dir / "graph.edges", lg.graph, lg.ids);
  write_labels(out_dir / "graph.labels", *lg.truth, lg.ids);
  const DcSbmSpec& spec = *source.dcsbm;
  std::vector<std::vector<double>> block(spec.num_blocks());
  for (int a = 0; a < spec.num_blocks(); ++a) {
    for (int b = 0; b < spec.num_blocks(); ++b) block[a].push_back(spec.block(a, b));
  }
  json info = lg.info;
  info["proportions"] = spec.proportions;
  info["block"] = block;
  info["weight_floor"] = spec.weight_floor;
  info["weight_span"] = spec.weight_span;
  write_json(out_dir / "graph.json", info);
  return info;
}

}  // namespace graphrob
