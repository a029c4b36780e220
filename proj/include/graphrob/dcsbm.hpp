#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "graphrob/graph.hpp"
#include "graphrob/spectral.hpp"

namespace graphrob {

// Degree-corrected SBM: edge (i, j), i < j, with probability
// min(1, w_i w_j B_{k(i) k(j)}), w_i = floor + span * Uniform(0, 1).
struct DcSbmSpec {
  int n = 200;
  std::vector<double> proportions{0.1, 0.2, 0.3, 0.2, 0.2};
  Eigen::MatrixXd block;
  double weight_floor = 0.5;
  double weight_span = 0.5;
  std::uint64_t seed = 0;
  int max_isolated_retries = 100;
  // Specs whose edge probabilities clamp at 1 for more than this fraction
  // of pairs are rejected.
  double max_clamp_rate = 0.01;

  int num_blocks() const { return static_cast<int>(proportions.size()); }
  void validate() const;
};

struct DcSbmSample {
  Graph graph;
  Clustering planted;
  std::vector<double> node_weights;
  long clamped_pairs = 0;
  double clamp_rate = 0.0;
  int isolated_retries = 0;
};

// Block sizes are round(pi_k n) with the remainder given to the largest
// blocks. Nodes are laid out block by block. Whole graphs are redrawn while
// isolated nodes remain, up to max_isolated_retries, then DataError.
DcSbmSample generate_dcsbm(const DcSbmSpec& spec);

std::vector<int> block_sizes(int n, const std::vector<double>& proportions);

struct PlantedPartition {
  Eigen::MatrixXd block;
  // Smallest-first eigenvalues of the population block Laplacian.
  Eigen::VectorXd population_spectrum;
};

// B = q + (p - q) I, scaled so the expected average degree is `avg_degree`
// (no scaling when avg_degree <= 0). Throws ConfigError when the scaled
// entries leave [0, 1].
PlantedPartition block_matrix_from_target_gap(int K, const std::vector<double>& proportions,
                                              double p, double q, double avg_degree = 0.0,
                                              int n = 0, double mean_weight = 1.0);

// 1 - eig(Dg^{-1/2} Pi^{1/2} B Pi^{1/2} Dg^{-1/2}), Dg = diag(B pi).
Eigen::VectorXd population_spectrum(const Eigen::MatrixXd& block, const std::vector<double>& proportions);

}  // namespace graphrob
