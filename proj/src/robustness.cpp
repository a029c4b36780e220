#include "graphrob/robustness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "graphrob/errors.hpp"

namespace graphrob {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void SweepConfig::validate() const {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
      throw ConfigError("sweep grid values must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("sweep grid must be strictly ascending");
  }
  if (trials < 1) throw ConfigError("trials per grid point must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

void PartialSweepConfig::validate() const {
  if (grid.empty()) throw ConfigError("partial sweep grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("partial sweep grid must be strictly ascending");
  }
  for (double g : grid) {
    if (!(g > 0.0) && law == Law::GammaMeanShift) throw ConfigError("E(w) grid values must be > 0");
    if (!(g >= 0.0)) throw ConfigError("uniform window lower bounds must be >= 0");
  }
  if (!(spread >= 0.0)) throw ConfigError("partial sweep spread must be >= 0");
  if (trials < 1) throw ConfigError("trials per grid point must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

std::string Breakdown::to_string() const {
  switch (kind) {
    case Kind::All: return "all";
    case Kind::None: return "none";
    case Kind::Value: break;
  }
  std::ostringstream os;
  os << value;
  return os.str();
}

double Breakdown::numeric() const {
  if (kind == Kind::All) return std::numeric_limits<double>::infinity();
  if (kind == Kind::None) return -std::numeric_limits<double>::infinity();
  return value;
}

NamedProperty make_property(const std::string& name, int K, const Clustering* fixed) {
  if (name == "wcut") {
    if (!fixed) throw ConfigError("property 'wcut' needs a fixed clustering");
    return {name, wcut_property(*fixed)};
  }
  if (name == "f_l" || name == "f_u" || name == "f_e") {
    if (K < 1) throw ConfigError("property '" + name + "' needs K >= 1");
    return {name, spectral_property(parse_spectral_property(name), K)};
  }
  throw ConfigError("unknown property '" + name + "' (expected wcut, f_l, f_u or f_e)");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> finite_only(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (std::isfinite(x)) out.push_back(x);
  }
  return out;
}

// Fills mean, quantiles, validity and exceedance from the raw samples.
void summarize(GridPoint& p, double baseline, double eps_abs, std::vector<std::string>& warnings,
               const std::string& property) {
  const std::vector<double> ok = finite_only(p.samples);
  p.failures = static_cast<int>(p.samples.size() - ok.size());
  p.valid = 2 * p.failures <= static_cast<int>(p.samples.size()) && !ok.empty();
  if (!p.valid) {
    std::ostringstream os;
    os << property << ": " << p.failures << " of " << p.samples.size()
       << " trials failed at level " << p.level << "; point excluded";
    warnings.push_back(os.str());
  }
  if (ok.empty()) {
    p.mean = kNaN;
    p.exceedance = kNaN;
    p.quantiles = {kNaN, kNaN, kNaN, kNaN, kNaN};
    return;
  }
  p.mean = mean(ok);
  p.quantiles = summarize_quantiles(ok);
  int exceed = 0;
  for (double x : ok) {
    if (std::abs(x - baseline) > eps_abs) ++exceed;
  }
  p.exceedance = static_cast<double>(exceed) / static_cast<double>(ok.size());
}

// Largest grid value before the first valid point whose rate exceeds alpha.
Breakdown prefix_breakdown(const std::vector<GridPoint>& points, double alpha) {
  Breakdown bp;
  const GridPoint* last_ok = nullptr;
  for (const GridPoint& p : points) {
    if (!p.valid) continue;
    if (p.exceedance > alpha) {
      if (!last_ok) return {Breakdown::Kind::None, p.level};
      return {Breakdown::Kind::Value, last_ok->level};
    }
    last_ok = &p;
  }
  if (!last_ok) return {Breakdown::Kind::None, 0.0};
  return {Breakdown::Kind::All, last_ok->level};
}

std::vector<double> smooth(const std::vector<GridPoint>& points) {
  std::vector<double> rates;
  for (const GridPoint& p : points) {
    if (p.valid) rates.push_back(p.exceedance);
  }
  return isotonic_increasing(rates);
}

double tolerance_for(const SweepConfig& c, double baseline) {
  if (!std::isfinite(c.epsilon)) return c.epsilon;
  if (c.relative_epsilon && std::abs(baseline) >= 1e-9) return c.epsilon * std::abs(baseline);
  return c.epsilon;
}

}  // namespace

RobustnessReport bp_scalar(const Graph& g, const NamedProperty& property, const SweepConfig& config) {
  config.validate();
  RobustnessReport report;
  report.property = property.name;
  report.baseline = property.fn(g);
  report.epsilon_abs = tolerance_for(config, report.baseline);

  const int G = static_cast<int>(config.grid.size()), M = config.trials;
  const int n = g.num_nodes();
  report.points.resize(G);
  std::vector<WeightDistribution> dists;
  for (int gi = 0; gi < G; ++gi) {
    report.points[gi].level = config.grid[gi];
    report.points[gi].samples.assign(M, kNaN);
    dists.push_back(distribution_for_sd(config.family, config.grid[gi], n));
  }
  std::vector<int> rejections(static_cast<std::size_t>(G) * M, 0);

  parallel_for(G * M, config.threads, [&](int task) {
    const int gi = task / M, t = task % M;
    Rng rng = make_rng(config.seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
    try {
      PerturbationDraw draw = draw_perturbation(g, dists[gi], config.scheme, rng, config.max_attempts);
      rejections[task] = draw.rejections;
      report.points[gi].samples[t] = property.fn(draw.graph.adjacency());
    } catch (const std::exception&) {
      // counted as a failure by summarize
    }
  });

  for (int gi = 0; gi < G; ++gi) {
    GridPoint& p = report.points[gi];
    for (int t = 0; t < M; ++t) p.rejections += rejections[static_cast<std::size_t>(gi) * M + t];
    summarize(p, report.baseline, report.epsilon_abs, report.warnings, report.property);
  }
  report.smoothed_exceedance = smooth(report.points);
  report.breakdown = prefix_breakdown(report.points, config.alpha);
  return report;
}

RobustnessReport bp_clustering(const Graph& g, int K, const Clustering* truth,
                               const SweepConfig& config) {
  config.validate();
  if (truth && truth->size() != g.num_nodes()) {
    throw std::invalid_argument("planted clustering does not cover the graph");
  }
  RobustnessReport report;
  report.property = "misclassification";
  report.baseline = 0.0;
  report.epsilon_abs = config.epsilon;  // absolute: the baseline is 0

  // k-means starts from the same stream in every trial, so any change in the
  // partition comes from the weights.
  const auto kmeans_rng = [&] { return make_rng(config.seed, {0xC1u}); };
  Rng base_rng = kmeans_rng();
  const Clustering spc = spectral_clustering(laplacian(g), K, base_rng);

  const int G = static_cast<int>(config.grid.size()), M = config.trials;
  const int n = g.num_nodes();
  report.points.resize(G);
  std::vector<WeightDistribution> dists;
  for (int gi = 0; gi < G; ++gi) {
    GridPoint& p = report.points[gi];
    p.level = config.grid[gi];
    p.samples.assign(M, kNaN);
    p.misclass_spc.assign(M, kNaN);
    if (truth) p.misclass_true.assign(M, kNaN);
    dists.push_back(distribution_for_sd(config.family, config.grid[gi], n));
  }
  std::vector<int> rejections(static_cast<std::size_t>(G) * M, 0);

  parallel_for(G * M, config.threads, [&](int task) {
    const int gi = task / M, t = task % M;
    Rng rng = make_rng(config.seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
    GridPoint& p = report.points[gi];
    try {
      PerturbationDraw draw = draw_perturbation(g, dists[gi], config.scheme, rng, config.max_attempts);
      rejections[task] = draw.rejections;
      const Laplacian lap = laplacian(draw.graph);
      Rng km = kmeans_rng();
      const Clustering found = spectral_clustering(lap, K, km);
      const std::vector<int>& kept = lap.kept_nodes();
      const bool all_kept = static_cast<int>(kept.size()) == n;
      const double m_spc = misclassification(found, all_kept ? spc : spc.restrict_to(kept));
      p.misclass_spc[t] = m_spc;
      p.samples[t] = m_spc;
      if (truth) p.misclass_true[t] = misclassification(found, all_kept ? *truth : truth->restrict_to(kept));
    } catch (const std::exception&) {
    }
  });

  for (int gi = 0; gi < G; ++gi) {
    GridPoint& p = report.points[gi];
    for (int t = 0; t < M; ++t) p.rejections += rejections[static_cast<std::size_t>(gi) * M + t];
    summarize(p, 0.0, report.epsilon_abs, report.warnings, report.property);
    const std::vector<double> spc_ok = finite_only(p.misclass_spc);
    if (!spc_ok.empty()) p.misclass_spc_quantiles = summarize_quantiles(spc_ok);
    if (truth) {
      const std::vector<double> true_ok = finite_only(p.misclass_true);
      if (!true_ok.empty()) p.misclass_true_quantiles = summarize_quantiles(true_ok);
    }
  }
  report.smoothed_exceedance = smooth(report.points);

  report.breakdown = {Breakdown::Kind::All, 0.0};
  bool any_valid = false;
  for (const GridPoint& p : report.points) {
    if (!p.valid) continue;
    any_valid = true;
    report.breakdown.value = p.level;
    if (p.misclass_spc_quantiles && p.misclass_spc_quantiles->iqr() > config.tau) {
      report.breakdown = {Breakdown::Kind::Value, p.level};
      break;
    }
  }
  if (!any_valid) report.breakdown = {Breakdown::Kind::None, 0.0};
  return report;
}

namespace {

int argmax_k(const SpectralData& s, SpectralProperty which, int K_max) {
  int best = 2;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int K = 2; K <= K_max; ++K) {
    double v = 0.0;
    switch (which) {
      case SpectralProperty::FLower: v = f_lower(s, K); break;
      case SpectralProperty::FUpper: v = f_upper(s, K); break;
      case SpectralProperty::FEigengap: v = f_eigengap(s, K); break;
    }
    if (v > best_value) {
      best_value = v;
      best = K;
    }
  }
  return best;
}

SpectralData spectrum_for(const Graph& g, int K_max) {
  LaplacianOptions opts;
  opts.drop_isolated = true;
  const Laplacian lap = laplacian(g, opts);
  if (lap.size() < K_max + 1) throw NumericalError("too few nodes left for K_max + 1 eigenvalues");
  return eigs_smallest(lap, K_max + 1);
}

}  // namespace

ArgmaxReport bp_argmax_k(const Graph& g, SpectralProperty which, int K_max,
                         const SweepConfig& config) {
  config.validate();
  if (K_max < 2) throw ConfigError("K_max must be >= 2");
  ArgmaxReport report;
  report.property = to_string(which);
  report.grid = config.grid;
  report.baseline_K = argmax_k(spectrum_for(g, K_max), which, K_max);

  const int G = static_cast<int>(config.grid.size()), M = config.trials;
  const int n = g.num_nodes();
  report.argmax.assign(G, std::vector<int>(M, -1));
  std::vector<WeightDistribution> dists;
  for (int gi = 0; gi < G; ++gi) dists.push_back(distribution_for_sd(config.family, config.grid[gi], n));

  parallel_for(G * M, config.threads, [&](int task) {
    const int gi = task / M, t = task % M;
    Rng rng = make_rng(config.seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
    try {
      PerturbationDraw draw = draw_perturbation(g, dists[gi], config.scheme, rng, config.max_attempts);
      report.argmax[gi][t] = argmax_k(spectrum_for(draw.graph.adjacency(), K_max), which, K_max);
    } catch (const std::exception&) {
    }
  });

  report.breakdown = {Breakdown::Kind::All, config.grid.back()};
  for (int gi = 0; gi < G; ++gi) {
    std::vector<int> ok;
    for (int k : report.argmax[gi]) {
      if (k > 0) ok.push_back(k);
    }
    if (ok.empty()) {
      report.median_argmax.push_back(-1);
      continue;
    }
    std::sort(ok.begin(), ok.end());
    const int med = ok[(ok.size() - 1) / 2];
    report.median_argmax.push_back(med);
    if (med != report.baseline_K && report.breakdown.kind == Breakdown::Kind::All) {
      report.breakdown = {Breakdown::Kind::Value, config.grid[gi]};
    }
  }
  return report;
}

std::vector<int> select_positive_wcut_influence(const Graph& g, const Clustering& c, Scheme scheme) {
  const InfluenceVector inf =
      scheme == Scheme::Asymmetric ? if_wcut_asymmetric(g, c) : if_wcut_symmetric(g, c);
  std::vector<int> out;
  for (int t = 0; t < inf.size(); ++t) {
    if (inf[t] > 0.0) out.push_back(t);
  }
  return out;
}

std::vector<int> select_bad_wcc_influence(const Graph& g, int K) {
  const SpectralData s = eigs_smallest(laplacian(g), std::min(g.num_nodes(), K + 2));
  const InfluenceVector fl = if_composite(g, s, K, SpectralProperty::FLower);
  const InfluenceVector fu = if_composite(g, s, K, SpectralProperty::FUpper);
  const InfluenceVector fe = if_composite(g, s, K, SpectralProperty::FEigengap);
  std::vector<int> out;
  for (int t = 0; t < g.num_nodes(); ++t) {
    if (fu[t] < 0.0 || fl[t] > 0.0 || fe[t] < 0.0) out.push_back(t);
  }
  return out;
}

std::vector<RobustnessReport> partial_sweep(const Graph& g, const std::vector<int>& subset,
                                            const std::string& selector_name,
                                            const std::vector<NamedProperty>& properties,
                                            const PartialSweepConfig& config) {
  config.validate();
  if (subset.empty()) {
    throw ConfigError("node selector '" + selector_name + "' selected no nodes");
  }
  if (properties.empty()) throw ConfigError("partial sweep needs at least one property");
  const int G = static_cast<int>(config.grid.size()), M = config.trials;
  const int P = static_cast<int>(properties.size()), n = g.num_nodes();

  std::vector<PartialWeightModel> models;
  for (double level : config.grid) {
    models.push_back(config.law == PartialSweepConfig::Law::GammaMeanShift
                         ? PartialWeightModel::mean_shift(subset, level, config.spread)
                         : PartialWeightModel::uniform_window(subset, level, config.spread));
  }

  std::vector<RobustnessReport> reports(P);
  for (int p = 0; p < P; ++p) {
    reports[p].property = properties[p].name;
    reports[p].baseline = properties[p].fn(g);
    reports[p].points.resize(G);
    for (int gi = 0; gi < G; ++gi) {
      reports[p].points[gi].level = config.grid[gi];
      reports[p].points[gi].mean_weight = models[gi].mean();
      reports[p].points[gi].samples.assign(M, kNaN);
    }
  }
  std::vector<int> rejections(static_cast<std::size_t>(G) * M, 0);

  parallel_for(G * M, config.threads, [&](int task) {
    const int gi = task / M, t = task % M;
    Rng rng = make_rng(config.seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(t)});
    const PartialWeightModel& model = models[gi];
    try {
      PerturbationDraw draw = draw_perturbation(
          g, [&](Rng& r) { return model.sample(n, r); }, config.scheme, rng, config.max_attempts);
      rejections[task] = draw.rejections;
      for (int p = 0; p < P; ++p) {
        try {
          reports[p].points[gi].samples[t] = properties[p].fn(draw.graph.adjacency());
        } catch (const std::exception&) {
        }
      }
    } catch (const std::exception&) {
    }
  });

  for (int p = 0; p < P; ++p) {
    for (int gi = 0; gi < G; ++gi) {
      GridPoint& pt = reports[p].points[gi];
      for (int t = 0; t < M; ++t) pt.rejections += rejections[static_cast<std::size_t>(gi) * M + t];
      // No tolerance in a partial sweep: exceedance is the fraction of
      // trials that moved at all.
      summarize(pt, reports[p].baseline, 0.0, reports[p].warnings, reports[p].property);
    }
    reports[p].smoothed_exceedance = smooth(reports[p].points);
    reports[p].breakdown = {Breakdown::Kind::All, config.grid.back()};
  }
  return reports;
}

}  // namespace graphrob
