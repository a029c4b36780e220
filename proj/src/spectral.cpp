#include "graphrob/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "graphrob/errors.hpp"

namespace graphrob {

Clustering::Clustering(std::vector<int> labels, int K) : labels_(std::move(labels)), K_(K) {
  if (K < 1) throw std::invalid_argument("clustering needs K >= 1");
  std::vector<int> sizes(K, 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= K) {
      throw std::invalid_argument("node " + std::to_string(i) + " has label " +
                                  std::to_string(labels_[i]) + " outside [0, " +
                                  std::to_string(K) + ")");
    }
    ++sizes[labels_[i]];
  }
  for (int k = 0; k < K; ++k) {
    if (sizes[k] == 0) throw std::invalid_argument("cluster " + std::to_string(k) + " is empty");
  }
}

Clustering Clustering::compact(const std::vector<int>& raw_labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> labels(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(raw_labels[i], static_cast<int>(remap.size()));
    labels[i] = it->second;
  }
  return Clustering(std::move(labels), std::max<int>(1, static_cast<int>(remap.size())));
}

std::vector<std::vector<int>> Clustering::members() const {
  std::vector<std::vector<int>> out(K_);
  for (int i = 0; i < size(); ++i) out[labels_[i]].push_back(i);
  return out;
}

Clustering Clustering::restrict_to(const std::vector<int>& nodes) const {
  std::vector<int> raw;
  raw.reserve(nodes.size());
  for (int i : nodes) raw.push_back(labels_.at(i));
  return compact(raw);
}

namespace {

struct KMeansRun {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
  bool ok = false;
};

KMeansRun kmeans_once(const Eigen::MatrixXd& x, int K, Rng& rng, const KMeansOptions& opts) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(K, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = x.row(first(rng));
  for (int c = 1; c < K; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(i) - centers.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng), acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
  }

  KMeansRun run;
  run.labels.assign(n, -1);
  std::vector<double> dist(n, 0.0);
  int reseeds = 0;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = (x.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < K; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      dist[i] = bd;
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, x.cols());
    std::vector<int> counts(K, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(run.labels[i]) += x.row(i);
      ++counts[run.labels[i]];
    }
    bool reseeded = false;
    for (int c = 0; c < K; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move its center to the worst-fit point.
      if (++reseeds > opts.max_reseeds) return run;
      Eigen::Index far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      centers.row(c) = x.row(far);
      dist[far] = 0.0;
      reseeded = true;
    }
    if (!changed && !reseeded) break;
  }
  std::vector<int> counts(K, 0);
  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ++counts[run.labels[i]];
    run.inertia += (x.row(i) - centers.row(run.labels[i])).squaredNorm();
  }
  run.ok = std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; });
  return run;
}

}  // namespace

Clustering kmeans(const Eigen::MatrixXd& points, int K, Rng& rng, const KMeansOptions& options) {
  if (K < 1 || points.rows() < K) {
    throw std::invalid_argument("k-means needs 1 <= K <= number of points");
  }
  std::vector<std::uint64_t> seeds(options.restarts);
  for (auto& s : seeds) s = rng();
  KMeansRun best;
  for (int r = 0; r < options.restarts; ++r) {
    Rng local(seeds[r]);
    KMeansRun run = kmeans_once(points, K, local, options);
    if (run.ok && run.inertia < best.inertia) best = std::move(run);
  }
  if (!best.ok) {
    throw NumericalError("k-means left an empty cluster in every one of " +
                         std::to_string(options.restarts) + " restarts");
  }
  return Clustering::compact(best.labels);
}

Clustering spectral_clustering(const Laplacian& lap, int K, Rng& rng, const KMeansOptions& options) {
  if (K < 2) throw std::invalid_argument("spectral clustering needs K >= 2");
  if (lap.size() < K) throw std::invalid_argument("spectral clustering needs n >= K");
  SpectralData spec = eigs_smallest(lap, K);
  Eigen::MatrixXd embedding = spec.vectors;
  for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  return kmeans(embedding, K, rng, options);
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  // Hungarian method with potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("assignment cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

double misclassification(const Clustering& a, const Clustering& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("clusterings cover " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " nodes");
  }
  if (a.size() == 0) return 0.0;
  const int K = std::max(a.num_clusters(), b.num_clusters());
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < a.size(); ++i) overlap(a.label(i), b.label(i)) += 1.0;
  const std::vector<int> match = min_cost_assignment(-overlap);
  double agree = 0.0;
  for (int k = 0; k < K; ++k) agree += overlap(k, match[k]);
  return 1.0 - agree / a.size();
}

}  // namespace graphrob
