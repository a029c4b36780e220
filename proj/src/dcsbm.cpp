#include "graphrob/dcsbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "graphrob/errors.hpp"
#include "graphrob/rng.hpp"

namespace graphrob {

namespace {

void validate_proportions(const std::vector<double>& pi) {
  if (pi.empty()) throw ConfigError("DC-SBM needs at least one block");
  double total = 0.0;
  for (double x : pi) {
    if (!(x > 0.0)) throw ConfigError("block proportions must be > 0");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("block proportions must sum to 1");
}

}  // namespace

void DcSbmSpec::validate() const {
  validate_proportions(proportions);
  const int K = num_blocks();
  if (n < K) throw ConfigError("DC-SBM needs n >= K");
  if (block.rows() != K || block.cols() != K) {
    throw ConfigError("block matrix must be " + std::to_string(K) + "x" + std::to_string(K));
  }
  for (int a = 0; a < K; ++a) {
    for (int b = 0; b < K; ++b) {
      if (!(block(a, b) >= 0.0) || !std::isfinite(block(a, b))) {
        throw ConfigError("block matrix entries must be finite and >= 0");
      }
      if (block(a, b) != block(b, a)) throw ConfigError("block matrix must be symmetric");
    }
  }
  if (!(weight_floor >= 0.0) || !(weight_span >= 0.0)) {
    throw ConfigError("degree weights need floor >= 0 and span >= 0");
  }
  if (max_isolated_retries < 0) throw ConfigError("max_isolated_retries must be >= 0");
}

std::vector<int> block_sizes(int n, const std::vector<double>& proportions) {
  const int K = static_cast<int>(proportions.size());
  std::vector<int> sizes(K);
  int assigned = 0;
  for (int k = 0; k < K; ++k) {
    sizes[k] = static_cast<int>(std::floor(proportions[k] * n + 0.5));
    assigned += sizes[k];
  }
  // Fix rounding drift on the largest blocks, earliest first.
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return proportions[a] > proportions[b]; });
  for (int i = 0; assigned != n; i = (i + 1) % K) {
    const int k = order[i];
    if (assigned < n) {
      ++sizes[k];
      ++assigned;
    } else if (sizes[k] > 1) {
      --sizes[k];
      --assigned;
    }
  }
  return sizes;
}

DcSbmSample generate_dcsbm(const DcSbmSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const std::vector<int> sizes = block_sizes(n, spec.proportions);
  std::vector<int> labels;
  for (int k = 0; k < spec.num_blocks(); ++k) labels.insert(labels.end(), sizes[k], k);

  for (int attempt = 0; attempt <= spec.max_isolated_retries; ++attempt) {
    Rng rng = make_rng(spec.seed, {static_cast<std::uint64_t>(attempt)});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DcSbmSample out;
    out.node_weights.resize(n);
    for (double& w : out.node_weights) w = spec.weight_floor + spec.weight_span * unit(rng);

    std::vector<Edge> edges;
    std::vector<int> degree(n, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double prob = out.node_weights[i] * out.node_weights[j] * spec.block(labels[i], labels[j]);
        if (prob > 1.0) {
          prob = 1.0;
          ++out.clamped_pairs;
        }
        if (unit(rng) < prob) {
          edges.push_back({i, j, 1.0});
          ++degree[i];
          ++degree[j];
        }
      }
    }
    const long pairs = static_cast<long>(n) * (n - 1) / 2;
    out.clamp_rate = pairs > 0 ? static_cast<double>(out.clamped_pairs) / pairs : 0.0;
    if (out.clamp_rate > spec.max_clamp_rate) {
      throw ConfigError("DC-SBM spec clamps " + std::to_string(out.clamped_pairs) + " of " +
                        std::to_string(pairs) + " edge probabilities at 1");
    }
    if (std::find(degree.begin(), degree.end(), 0) != degree.end()) continue;
    out.graph = build_graph(n, edges, false);
    out.planted = Clustering(labels, spec.num_blocks());
    out.isolated_retries = attempt;
    return out;
  }
  throw DataError("DC-SBM draw still had isolated nodes after " +
                  std::to_string(spec.max_isolated_retries) + " retries");
}

Eigen::VectorXd population_spectrum(const Eigen::MatrixXd& block, const std::vector<double>& proportions) {
  validate_proportions(proportions);
  const int K = static_cast<int>(proportions.size());
  if (block.rows() != K || block.cols() != K) throw ConfigError("block matrix size mismatch");
  Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(proportions.data(), K);
  const Eigen::VectorXd dg = block * pi;
  for (int k = 0; k < K; ++k) {
    if (!(dg(k) > 0.0)) throw ConfigError("block " + std::to_string(k) + " has zero expected degree");
  }
  Eigen::MatrixXd m(K, K);
  for (int a = 0; a < K; ++a) {
    for (int b = 0; b < K; ++b) {
      m(a, b) = std::sqrt(pi(a) * pi(b)) * block(a, b) / std::sqrt(dg(a) * dg(b));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  // Largest eigenvalues of m give the smallest of 1 - m.
  Eigen::VectorXd out(K);
  for (int k = 0; k < K; ++k) out(k) = 1.0 - es.eigenvalues()(K - 1 - k);
  return out;
}

PlantedPartition block_matrix_from_target_gap(int K, const std::vector<double>& proportions,
                                              double p, double q, double avg_degree, int n,
                                              double mean_weight) {
  if (K < 1 || static_cast<int>(proportions.size()) != K) {
    throw ConfigError("planted partition needs K proportions");
  }
  if (!(p > 0.0 && p < 1.0) || !(q >= 0.0 && q < 1.0)) {
    throw ConfigError("planted partition intensities must lie in (0, 1)");
  }
  PlantedPartition out;
  out.block = Eigen::MatrixXd::Constant(K, K, q);
  out.block.diagonal().array() = p;
  if (avg_degree > 0.0) {
    if (n < 2) throw ConfigError("degree scaling needs n >= 2");
    Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(proportions.data(), K);
    const double expected = (n - 1) * mean_weight * mean_weight * pi.dot(out.block * pi);
    out.block *= avg_degree / expected;
  }
  if (out.block.maxCoeff() > 1.0 || out.block.minCoeff() < 0.0) {
    throw ConfigError("scaled block matrix leaves [0, 1]");
  }
  out.population_spectrum = population_spectrum(out.block, proportions);
  return out;
}

}  // namespace graphrob
