#include "graphrob/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "graphrob/errors.hpp"

namespace graphrob {

std::size_t Graph::num_edges() const {
  return directed_ ? col_.size() : col_.size() / 2;
}

double Graph::weight(int i, int j) const {
  auto cols = neighbors(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return val_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<Edge> Graph::arcs() const {
  std::vector<Edge> out;
  out.reserve(col_.size());
  for (int i = 0; i < n_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      out.push_back({i, col_[p], val_[p]});
    }
  }
  return out;
}

std::vector<Edge> Graph::edges() const {
  if (directed_) return arcs();
  std::vector<Edge> out;
  out.reserve(col_.size() / 2);
  for (int i = 0; i < n_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (i < col_[p]) out.push_back({i, col_[p], val_[p]});
    }
  }
  return out;
}

Eigen::MatrixXd Graph::dense_adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      a(i, col_[p]) = val_[p];
    }
  }
  return a;
}

Graph Graph::from_csr(int n, bool directed, std::vector<std::size_t> row_ptr,
                      std::vector<int> col, std::vector<double> val) {
  Graph g;
  g.n_ = n;
  g.directed_ = directed;
  g.row_ptr_ = std::move(row_ptr);
  g.col_ = std::move(col);
  g.val_ = std::move(val);
  g.degree_.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t p = g.row_ptr_[i]; p < g.row_ptr_[i + 1]; ++p) s += g.val_[p];
    g.degree_[i] = s;
  }
  return g;
}

Graph build_graph(int n, std::span<const Edge> edges, bool directed) {
  if (n < 0) throw std::invalid_argument("node count must be non-negative");
  std::vector<Edge> arcs;
  arcs.reserve(directed ? edges.size() : 2 * edges.size());
  for (const Edge& e : edges) {
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
      throw std::invalid_argument("edge (" + std::to_string(e.source) + ", " +
                                  std::to_string(e.target) +
                                  ") has a node id outside [0, " +
                                  std::to_string(n) + ")");
    }
    if (e.source == e.target) {
      throw std::invalid_argument("self-loop at node " + std::to_string(e.source));
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("edge (" + std::to_string(e.source) + ", " +
                                  std::to_string(e.target) +
                                  ") has negative or non-finite weight");
    }
    if (e.weight == 0.0) continue;
    arcs.push_back(e);
    if (!directed) arcs.push_back({e.target, e.source, e.weight});
  }
  std::sort(arcs.begin(), arcs.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (std::size_t k = 1; k < arcs.size(); ++k) {
    if (arcs[k].source == arcs[k - 1].source && arcs[k].target == arcs[k - 1].target) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(arcs[k].source) +
                                  ", " + std::to_string(arcs[k].target) + ")");
    }
  }
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<int> col(arcs.size());
  std::vector<double> val(arcs.size());
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    ++row_ptr[arcs[k].source + 1];
    col[k] = arcs[k].target;
    val[k] = arcs[k].weight;
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return Graph::from_csr(n, directed, std::move(row_ptr), std::move(col), std::move(val));
}

Graph induced_subgraph(const Graph& g, std::span<const int> nodes) {
  std::vector<int> index(g.num_nodes(), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k > 0 && nodes[k] <= nodes[k - 1]) {
      throw std::invalid_argument("induced_subgraph: node list must be ascending and unique");
    }
    index[nodes[k]] = static_cast<int>(k);
  }
  const int m = static_cast<int>(nodes.size());
  std::vector<std::size_t> row_ptr(m + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  for (int k = 0; k < m; ++k) {
    auto cols = g.neighbors(nodes[k]);
    auto vals = g.weights(nodes[k]);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      int j = index[cols[p]];
      if (j < 0) continue;
      col.push_back(j);
      val.push_back(vals[p]);
    }
    row_ptr[k + 1] = col.size();
  }
  return Graph::from_csr(m, g.directed(), std::move(row_ptr), std::move(col), std::move(val));
}

namespace {

// Ascending node ids that survive repeated removal of zero-out-degree nodes.
std::vector<int> peel_isolated(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<char> alive(n, 1);
  std::vector<double> deg = g.degrees();
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    if (deg[i] <= 0.0) queue.push_back(i);
  }
  // Removing node i lowers the out-degree of every j with A_ji > 0. For
  // undirected graphs those are exactly i's neighbors; for directed graphs we
  // need the reverse adjacency.
  std::vector<std::vector<std::pair<int, double>>> incoming;
  if (g.directed()) {
    incoming.resize(n);
    for (int j = 0; j < n; ++j) {
      auto cols = g.neighbors(j);
      auto vals = g.weights(j);
      for (std::size_t p = 0; p < cols.size(); ++p) incoming[cols[p]].push_back({j, vals[p]});
    }
  }
  while (!queue.empty()) {
    int i = queue.back();
    queue.pop_back();
    if (!alive[i]) continue;
    alive[i] = 0;
    auto visit = [&](int j, double a_ji) {
      if (!alive[j]) return;
      deg[j] -= a_ji;
      if (deg[j] <= 1e-14 * std::max(1.0, g.degree(j))) queue.push_back(j);
    };
    if (g.directed()) {
      for (auto [j, a] : incoming[i]) visit(j, a);
    } else {
      auto cols = g.neighbors(i);
      auto vals = g.weights(i);
      for (std::size_t p = 0; p < cols.size(); ++p) visit(cols[p], vals[p]);
    }
  }
  std::vector<int> kept;
  for (int i = 0; i < n; ++i) {
    if (alive[i]) kept.push_back(i);
  }
  return kept;
}

}  // namespace

Laplacian laplacian(const Graph& input, const LaplacianOptions& options) {
  Laplacian lap;
  lap.num_original_ = input.num_nodes();
  Graph reduced;
  const Graph* g = &input;
  if (options.drop_isolated) {
    lap.kept_ = peel_isolated(input);
    if (static_cast<int>(lap.kept_.size()) != input.num_nodes()) {
      reduced = induced_subgraph(input, lap.kept_);
      g = &reduced;
    }
  } else {
    for (int i = 0; i < input.num_nodes(); ++i) {
      if (input.degree(i) <= 0.0) throw IsolatedNodeError(i);
    }
    lap.kept_.resize(input.num_nodes());
    std::iota(lap.kept_.begin(), lap.kept_.end(), 0);
  }

  const int n = g->num_nodes();
  std::vector<double> inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(g->degree(i));

  // Off-diagonal affinity: -(A_ij + A_ji) / (2 sqrt(d_i d_j)).
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g->num_arcs() + n);
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
  for (int i = 0; i < n; ++i) {
    auto cols = g->neighbors(i);
    auto vals = g->weights(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const int j = cols[p];
      const double v = -0.5 * vals[p] * inv_sqrt[i] * inv_sqrt[j];
      triplets.emplace_back(i, j, v);
      triplets.emplace_back(j, i, v);
    }
  }
  lap.dense_storage_ = n <= options.dense_threshold;
  if (lap.dense_storage_) {
    lap.dense_ = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : triplets) lap.dense_(t.row(), t.col()) += t.value();
  } else {
    lap.sparse_.resize(n, n);
    lap.sparse_.setFromTriplets(triplets.begin(), triplets.end());
    lap.sparse_.makeCompressed();
  }
  return lap;
}

Eigen::MatrixXd Laplacian::to_dense() const {
  return dense_storage_ ? dense_ : Eigen::MatrixXd(sparse_);
}

Eigen::VectorXd Laplacian::apply(const Eigen::VectorXd& x) const {
  if (dense_storage_) return dense_ * x;
  return sparse_ * x;
}

double Laplacian::frobenius_norm() const {
  return dense_storage_ ? dense_.norm() : sparse_.norm();
}

Components connected_components(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighbors(i)) {
      int a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  Components out;
  out.label.assign(n, -1);
  std::vector<int> root_label(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (root_label[r] < 0) root_label[r] = out.count++;
    out.label[i] = root_label[r];
  }
  return out;
}

}  // namespace graphrob
