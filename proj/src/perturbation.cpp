#include "graphrob/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace graphrob {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Asymmetric ? "asymmetric" : "symmetric";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "asymmetric") return Scheme::Asymmetric;
  if (name == "symmetric") return Scheme::Symmetric;
  throw std::invalid_argument("unknown perturbation scheme '" + name + "'");
}

NegativeAffinityError::NegativeAffinityError(int i, int j, double factor)
    : std::domain_error("negative affinity on edge (" + std::to_string(i) + ", " +
                        std::to_string(j) + "): w_i + w_j - 1 = " + std::to_string(factor)),
      i_(i),
      j_(j) {}

namespace {

void check_weights(const Graph& g, const WeightVector& w) {
  if (w.size() != g.num_nodes()) {
    throw std::invalid_argument("weight vector has length " + std::to_string(w.size()) +
                                " but the graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
  for (int i = 0; i < w.size(); ++i) {
    if (!(w.w[i] >= 0.0) || !std::isfinite(w.w[i])) {
      throw std::invalid_argument("weight of node " + std::to_string(i) +
                                  " is negative or non-finite");
    }
  }
}

// Rebuilds g with each arc value replaced by factor(i, j) * A_ij; zero
// products are not stored.
template <class Factor>
Graph scale_arcs(const Graph& g, bool directed, Factor factor) {
  const int n = g.num_nodes();
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  col.reserve(g.num_arcs());
  val.reserve(g.num_arcs());
  for (int i = 0; i < n; ++i) {
    auto cols = g.neighbors(i);
    auto vals = g.weights(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const double v = factor(i, cols[p]) * vals[p];
      if (v != 0.0) {
        col.push_back(cols[p]);
        val.push_back(v);
      }
    }
    row_ptr[i + 1] = col.size();
  }
  return Graph::from_csr(n, directed, std::move(row_ptr), std::move(col), std::move(val));
}

}  // namespace

PerturbedGraph perturb_asymmetric(const Graph& g, const WeightVector& w) {
  check_weights(g, w);
  PerturbedGraph pg;
  pg.scheme_ = Scheme::Asymmetric;
  pg.weights_ = w;
  // Outgoing arcs of i carry w_i; the result is directed even for
  // undirected input.
  pg.adjacency_ = scale_arcs(g, true, [&](int i, int) { return w.w[i]; });
  pg.degrees_.resize(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    pg.degrees_[i] = w.w[i] * g.degree(i);
    if (pg.degrees_[i] == 0.0) pg.zero_degree_.push_back(i);
  }
  return pg;
}

PerturbedGraph perturb_symmetric(const Graph& g, const WeightVector& w) {
  check_weights(g, w);
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int j : g.neighbors(i)) {
      const double f = w.w[i] + w.w[j] - 1.0;
      if (f < 0.0) throw NegativeAffinityError(i, j, f);
    }
  }
  PerturbedGraph pg;
  pg.scheme_ = Scheme::Symmetric;
  pg.weights_ = w;
  pg.adjacency_ = scale_arcs(g, g.directed(), [&](int i, int j) { return w.w[i] + w.w[j] - 1.0; });
  pg.degrees_ = pg.adjacency_.degrees();
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (pg.degrees_[i] == 0.0) pg.zero_degree_.push_back(i);
  }
  return pg;
}

PerturbedGraph perturb(const Graph& g, const WeightVector& w, Scheme scheme) {
  return scheme == Scheme::Asymmetric ? perturb_asymmetric(g, w) : perturb_symmetric(g, w);
}

Laplacian laplacian(const PerturbedGraph& pg, int dense_threshold) {
  LaplacianOptions opts;
  opts.dense_threshold = dense_threshold;
  opts.drop_isolated = true;
  return laplacian(pg.adjacency(), opts);
}

PerturbationDraw draw_perturbation(const Graph& g, const WeightSampler& sampler, Scheme scheme,
                                   Rng& rng, int max_attempts) {
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  int rejections = 0;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    WeightVector w = sampler(rng);
    if (scheme == Scheme::Asymmetric) return {perturb_asymmetric(g, w), rejections};
    try {
      return {perturb_symmetric(g, w), rejections};
    } catch (const NegativeAffinityError&) {
      ++rejections;
    }
  }
  throw RejectionExhaustedError("symmetric perturbation: every one of " +
                                std::to_string(max_attempts) +
                                " weight draws produced a negative affinity");
}

PerturbationDraw draw_perturbation(const Graph& g, const WeightDistribution& dist, Scheme scheme,
                                   Rng& rng, int max_attempts) {
  validate(dist);
  const int n = g.num_nodes();
  return draw_perturbation(
      g, [&](Rng& r) { return sample_weights(dist, n, r); }, scheme, rng, max_attempts);
}

Graph baseline_edge_rewire(const Graph& g, double alpha, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("rewire fraction must be in [0, 1]");
  const int n = g.num_nodes();
  std::vector<Edge> edges = g.edges();
  const std::size_t m = edges.size();
  const std::size_t k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(m) - 1e-12));
  if (k == 0) return g;

  const bool directed = g.directed();
  auto key = [&](int i, int j) {
    if (!directed && i > j) std::swap(i, j);
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j);
  };
  const std::uint64_t pairs = directed ? static_cast<std::uint64_t>(n) * (n - 1)
                                       : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (pairs - m < k) {
    throw std::invalid_argument("graph too dense to relocate " + std::to_string(k) +
                                " edges: only " + std::to_string(pairs - m) + " free node pairs");
  }

  // Partial Fisher-Yates picks the moved edges.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t a = 0; a < k; ++a) {
    std::uniform_int_distribution<std::size_t> pick(a, m - 1);
    std::swap(order[a], order[pick(rng)]);
  }

  std::unordered_set<std::uint64_t> occupied;
  occupied.reserve(2 * (m + k));
  for (const Edge& e : edges) occupied.insert(key(e.source, e.target));

  std::vector<Edge> placed;
  placed.reserve(k);
  const bool sparse_enough = (pairs - m) * 2 >= pairs;
  std::vector<std::uint64_t> free_pairs;
  if (!sparse_enough) {
    for (int i = 0; i < n; ++i) {
      for (int j = directed ? 0 : i + 1; j < n; ++j) {
        if (i != j && !occupied.count(key(i, j))) free_pairs.push_back(key(i, j));
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      std::uniform_int_distribution<std::size_t> pick(a, free_pairs.size() - 1);
      std::swap(free_pairs[a], free_pairs[pick(rng)]);
    }
  }
  std::uniform_int_distribution<int> node(0, n - 1);
  for (std::size_t a = 0; a < k; ++a) {
    int i, j;
    if (sparse_enough) {
      do {
        i = node(rng);
        j = node(rng);
      } while (i == j || occupied.count(key(i, j)));
      occupied.insert(key(i, j));
    } else {
      i = static_cast<int>(free_pairs[a] / n);
      j = static_cast<int>(free_pairs[a] % n);
    }
    placed.push_back({i, j, edges[order[a]].weight});
  }

  std::vector<Edge> result;
  result.reserve(m);
  for (std::size_t a = k; a < m; ++a) result.push_back(edges[order[a]]);
  result.insert(result.end(), placed.begin(), placed.end());
  return build_graph(n, result, directed);
}

Subsample baseline_node_subsample(const Graph& g, double beta, Rng& rng) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("subsample fraction must be in (0, 1]");
  const int n = g.num_nodes();
  const int k = static_cast<int>(std::ceil(beta * n - 1e-12));
  if (k < 1) throw std::invalid_argument("node subsample is empty");
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  for (int a = 0; a < k; ++a) {
    std::uniform_int_distribution<int> pick(a, n - 1);
    std::swap(nodes[a], nodes[pick(rng)]);
  }
  nodes.resize(k);
  std::sort(nodes.begin(), nodes.end());
  Subsample out;
  out.graph = induced_subgraph(g, nodes);
  out.nodes = std::move(nodes);
  return out;
}

double LaplacianBias::mean_ratio() const {
  double s = 0.0;
  int count = 0;
  for (const auto& e : entries) {
    if (e.samples == 0 || e.original == 0.0) continue;
    s += e.mean / e.original;
    ++count;
  }
  return count ? s / count : 1.0;
}

namespace {

// Accumulates per-edge means of L~_ij across trials. `draw` returns the
// perturbed Laplacian and, for each Laplacian row, the original node id.
class EntryAccumulator {
 public:
  explicit EntryAccumulator(const Graph& g) : n_(g.num_nodes()) {
    const Laplacian base = laplacian(g);
    const Eigen::MatrixXd l = base.to_dense();
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : g.edges()) {
      const int i = std::min(e.source, e.target), j = std::max(e.source, e.target);
      if (!seen.emplace(i, j).second) continue;
      EntryBias eb;
      eb.i = i;
      eb.j = j;
      eb.original = l(i, j);
      bias_.entries.push_back(eb);
    }
    sum_.assign(bias_.entries.size(), 0.0);
    sumsq_.assign(bias_.entries.size(), 0.0);
  }

  // Entries whose endpoints survive but whose edge is gone count as 0;
  // entries with a missing endpoint are skipped.
  void add(const Laplacian& lap, const std::vector<int>& original_ids) {
    std::vector<int> row(n_, -1);
    for (int r = 0; r < lap.size(); ++r) row[original_ids[lap.kept_nodes()[r]]] = r;
    for (std::size_t e = 0; e < bias_.entries.size(); ++e) {
      const int ri = row[bias_.entries[e].i], rj = row[bias_.entries[e].j];
      if (ri < 0 || rj < 0) continue;
      const double v = lap.is_dense() ? lap.dense()(ri, rj) : lap.sparse().coeff(ri, rj);
      sum_[e] += v;
      sumsq_[e] += v * v;
      ++bias_.entries[e].samples;
    }
    ++bias_.trials;
  }

  LaplacianBias finish() {
    for (std::size_t e = 0; e < bias_.entries.size(); ++e) {
      auto& eb = bias_.entries[e];
      if (eb.samples == 0) continue;
      const double k = static_cast<double>(eb.samples);
      eb.mean = sum_[e] / k;
      const double var = eb.samples > 1 ? std::max(0.0, (sumsq_[e] - k * eb.mean * eb.mean) / (k - 1)) : 0.0;
      eb.std_error = std::sqrt(var / k);
    }
    return bias_;
  }

  LaplacianBias& bias() { return bias_; }

 private:
  int n_;
  LaplacianBias bias_;
  std::vector<double> sum_, sumsq_;
};

std::vector<int> identity_ids(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

LaplacianBias empirical_laplacian_bias(const Graph& g, Scheme scheme, const WeightSampler& sampler,
                                       int trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  EntryAccumulator acc(g);
  const std::vector<int> ids = identity_ids(g.num_nodes());
  for (int t = 0; t < trials; ++t) {
    try {
      PerturbationDraw d = draw_perturbation(g, sampler, scheme, rng);
      acc.bias().rejections += d.rejections;
      acc.add(laplacian(d.graph), ids);
    } catch (const RejectionExhaustedError&) {
      ++acc.bias().failed_trials;
    }
  }
  return acc.finish();
}

LaplacianBias empirical_laplacian_bias(const Graph& g, Scheme scheme,
                                       const WeightDistribution& dist, int trials, Rng& rng) {
  validate(dist);
  const int n = g.num_nodes();
  return empirical_laplacian_bias(
      g, scheme, [&](Rng& r) { return sample_weights(dist, n, r); }, trials, rng);
}

LaplacianBias rewire_laplacian_bias(const Graph& g, double alpha, int trials, Rng& rng) {
  EntryAccumulator acc(g);
  const std::vector<int> ids = identity_ids(g.num_nodes());
  LaplacianOptions opts;
  opts.drop_isolated = true;
  for (int t = 0; t < trials; ++t) acc.add(laplacian(baseline_edge_rewire(g, alpha, rng), opts), ids);
  return acc.finish();
}

LaplacianBias subsample_laplacian_bias(const Graph& g, double beta, int trials, Rng& rng) {
  EntryAccumulator acc(g);
  LaplacianOptions opts;
  opts.drop_isolated = true;
  for (int t = 0; t < trials; ++t) {
    Subsample s = baseline_node_subsample(g, beta, rng);
    acc.add(laplacian(s.graph, opts), s.nodes);
  }
  return acc.finish();
}

}  // namespace graphrob
