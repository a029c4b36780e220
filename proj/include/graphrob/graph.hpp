#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace graphrob {

struct Edge {
  int source;
  int target;
  double weight = 1.0;
};

// Immutable weighted adjacency in CSR form. Undirected graphs store both
// directions. Out-degrees are cached at construction.
class Graph {
 public:
  Graph() = default;

  int num_nodes() const { return n_; }
  bool directed() const { return directed_; }
  // Number of stored arcs (undirected edges count twice).
  std::size_t num_arcs() const { return col_.size(); }
  // Undirected edge count (i < j) or arc count for directed graphs.
  std::size_t num_edges() const;

  std::span<const int> neighbors(int i) const {
    return {col_.data() + row_ptr_[i], col_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> weights(int i) const {
    return {val_.data() + row_ptr_[i], val_.data() + row_ptr_[i + 1]};
  }
  // A_ij, zero when absent.
  double weight(int i, int j) const;

  const std::vector<double>& degrees() const { return degree_; }
  double degree(int i) const { return degree_[i]; }

  // Arc list (i, j, A_ij) in row-major order.
  std::vector<Edge> arcs() const;
  // Edge list with i < j for undirected graphs; arcs for directed ones.
  std::vector<Edge> edges() const;

  Eigen::MatrixXd dense_adjacency() const;

  // Internal constructor used by build_graph and the perturbation module;
  // rows must be sorted by column with no duplicates.
  static Graph from_csr(int n, bool directed, std::vector<std::size_t> row_ptr,
                        std::vector<int> col, std::vector<double> val);

 private:
  int n_ = 0;
  bool directed_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<double> degree_;
};

// Validates and assembles a graph. Undirected input lists each edge once
// and is mirrored. Zero-weight entries are not stored.
Graph build_graph(int n, std::span<const Edge> edges, bool directed);

// Induced subgraph on `nodes` (ascending, unique); node k of the result is
// nodes[k] of the input.
Graph induced_subgraph(const Graph& g, std::span<const int> nodes);

struct LaplacianOptions {
  // Dense storage up to this many nodes, sparse above.
  int dense_threshold = 2000;
  // Remove zero-degree nodes (repeatedly, on the induced remainder) instead
  // of failing. Used for perturbed graphs where a zero weight deletes a node.
  bool drop_isolated = false;
};

// L = I - (A + A^T) / 2 scaled by D^{-1/2} on both sides, over the kept
// nodes. Symmetric by construction.
class Laplacian {
 public:
  int size() const { return static_cast<int>(kept_.size()); }
  // Original node id for each row.
  const std::vector<int>& kept_nodes() const { return kept_; }
  int num_dropped() const { return num_original_ - size(); }
  int num_original() const { return num_original_; }

  bool is_dense() const { return dense_storage_; }
  const Eigen::MatrixXd& dense() const { return dense_; }
  const Eigen::SparseMatrix<double>& sparse() const { return sparse_; }
  Eigen::MatrixXd to_dense() const;

  // y = L x
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double frobenius_norm() const;

 private:
  friend Laplacian laplacian(const Graph&, const LaplacianOptions&);
  int num_original_ = 0;
  std::vector<int> kept_;
  bool dense_storage_ = true;
  Eigen::MatrixXd dense_;
  Eigen::SparseMatrix<double> sparse_;
};

Laplacian laplacian(const Graph& g, const LaplacianOptions& options = {});

struct Components {
  int count = 0;
  std::vector<int> label;  // contiguous from 0, in order of first node
};

// Weakly connected components over the symmetrized edge set.
Components connected_components(const Graph& g);

}  // namespace graphrob
