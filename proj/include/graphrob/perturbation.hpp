#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphrob/graph.hpp"
#include "graphrob/rng.hpp"
#include "graphrob/weights.hpp"

namespace graphrob {

enum class Scheme { Asymmetric, Symmetric };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

// w_i + w_j - 1 < 0 on an edge under the symmetric scheme.
class NegativeAffinityError : public std::domain_error {
 public:
  NegativeAffinityError(int i, int j, double factor);
  int source() const { return i_; }
  int target() const { return j_; }

 private:
  int i_, j_;
};

// Symmetric-scheme rejection sampling ran out of attempts.
class RejectionExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A graph whose edge values have been redistributed from node weights.
// Asymmetric: A~_ij = w_i A_ij, d~_i = w_i d_i.
// Symmetric:  A~_ij = (w_i + w_j - 1) A_ij.
class PerturbedGraph {
 public:
  const Graph& adjacency() const { return adjacency_; }
  const WeightVector& weights() const { return weights_; }
  Scheme scheme() const { return scheme_; }
  // Perturbed out-degrees d~.
  const std::vector<double>& degrees() const { return degrees_; }
  // Nodes with d~_i = 0; removed when the Laplacian is built.
  const std::vector<int>& zero_degree_nodes() const { return zero_degree_; }

 private:
  friend PerturbedGraph perturb_asymmetric(const Graph&, const WeightVector&);
  friend PerturbedGraph perturb_symmetric(const Graph&, const WeightVector&);
  Graph adjacency_;
  WeightVector weights_;
  Scheme scheme_ = Scheme::Asymmetric;
  std::vector<double> degrees_;
  std::vector<int> zero_degree_;
};

PerturbedGraph perturb_asymmetric(const Graph& g, const WeightVector& w);
PerturbedGraph perturb_symmetric(const Graph& g, const WeightVector& w);
PerturbedGraph perturb(const Graph& g, const WeightVector& w, Scheme scheme);

// Laplacian of the perturbed graph; zero-degree nodes are dropped.
Laplacian laplacian(const PerturbedGraph& pg, int dense_threshold = 2000);

using WeightSampler = std::function<WeightVector(Rng&)>;

struct PerturbationDraw {
  PerturbedGraph graph;
  int rejections = 0;
};

// Draws weights and perturbs. Under the symmetric scheme a draw with a
// negative edge factor is rejected and the whole vector redrawn, up to
// max_attempts draws in total.
PerturbationDraw draw_perturbation(const Graph& g, const WeightSampler& sampler, Scheme scheme,
                                   Rng& rng, int max_attempts = 100);
PerturbationDraw draw_perturbation(const Graph& g, const WeightDistribution& dist, Scheme scheme,
                                   Rng& rng, int max_attempts = 100);

// Moves ceil(alpha |E|) uniformly chosen edges (with their weights) to
// uniformly chosen node pairs that are not edges of the input.
Graph baseline_edge_rewire(const Graph& g, double alpha, Rng& rng);

struct Subsample {
  Graph graph;
  std::vector<int> nodes;  // original ids, ascending
};

// Induced subgraph on ceil(beta n) nodes drawn without replacement.
Subsample baseline_node_subsample(const Graph& g, double beta, Rng& rng);

struct EntryBias {
  int i = 0;
  int j = 0;
  double original = 0.0;  // L_ij
  double mean = 0.0;      // Monte-Carlo mean of L~_ij
  double std_error = 0.0;
  long samples = 0;
  double deviation() const { return mean - original; }
};

struct LaplacianBias {
  std::vector<EntryBias> entries;  // one per edge i < j of the input
  int trials = 0;
  int rejections = 0;
  int failed_trials = 0;
  // Average over edges of mean(L~_ij) / L_ij.
  double mean_ratio() const;
};

LaplacianBias empirical_laplacian_bias(const Graph& g, Scheme scheme,
                                       const WeightDistribution& dist, int trials, Rng& rng);
LaplacianBias empirical_laplacian_bias(const Graph& g, Scheme scheme,
                                       const WeightSampler& sampler, int trials, Rng& rng);

// Same accumulation for the baseline perturbations. Entries for edges whose
// endpoints were not sampled are skipped; a removed edge contributes 0.
LaplacianBias rewire_laplacian_bias(const Graph& g, double alpha, int trials, Rng& rng);
LaplacianBias subsample_laplacian_bias(const Graph& g, double beta, int trials, Rng& rng);

}  // namespace graphrob
