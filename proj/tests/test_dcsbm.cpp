#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "graphrob/dcsbm.hpp"
#include "graphrob/errors.hpp"
#include "graphrob/rng.hpp"
#include "graphrob/spectral.hpp"
#include "graphrob/stats.hpp"

using namespace graphrob;

namespace {

DcSbmSpec planted_spec(std::uint64_t seed, double p = 0.5, double q = 0.02) {
  DcSbmSpec spec;
  spec.seed = seed;
  spec.block = block_matrix_from_target_gap(5, spec.proportions, p, q).block;
  return spec;
}

}  // namespace

TEST(BlockSizes, RoundsToN) {
  EXPECT_EQ(block_sizes(200, {0.1, 0.2, 0.3, 0.2, 0.2}), (std::vector<int>{20, 40, 60, 40, 40}));
  const std::vector<int> s = block_sizes(7, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(std::accumulate(s.begin(), s.end(), 0), 7);
  for (int x : s) EXPECT_GE(x, 2);
}

TEST(DcSbm, SymmetricSimpleAndLaidOutByBlock) {
  const DcSbmSample s = generate_dcsbm(planted_spec(3));
  const Eigen::MatrixXd a = s.graph.dense_adjacency();
  EXPECT_EQ((a - a.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(((a.array() == 0.0) || (a.array() == 1.0)).all());
  EXPECT_EQ(s.planted.label(0), 0);
  EXPECT_EQ(s.planted.label(20), 1);
  EXPECT_EQ(s.planted.label(199), 4);
  for (double w : s.node_weights) {
    EXPECT_GE(w, 0.5);
    EXPECT_LT(w, 1.0);
  }
  for (double d : s.graph.degrees()) EXPECT_GT(d, 0.0);
  EXPECT_EQ(s.clamped_pairs, 0);
}

TEST(DcSbm, Deterministic) {
  const DcSbmSample a = generate_dcsbm(planted_spec(11)), b = generate_dcsbm(planted_spec(11));
  EXPECT_EQ(a.graph.dense_adjacency(), b.graph.dense_adjacency());
  EXPECT_EQ(a.node_weights, b.node_weights);
  const DcSbmSample c = generate_dcsbm(planted_spec(12));
  EXPECT_NE(a.graph.dense_adjacency(), c.graph.dense_adjacency());
}

TEST(DcSbm, DiagonalBlocksDisconnect) {
  DcSbmSpec spec = planted_spec(5);
  spec.block = Eigen::MatrixXd::Identity(5, 5) * 0.6;
  const DcSbmSample s = generate_dcsbm(spec);
  EXPECT_EQ(connected_components(s.graph).count >= 5, true);
  for (const Edge& e : s.graph.edges()) EXPECT_EQ(s.planted.label(e.source), s.planted.label(e.target));
  const SpectralData sp = eigs_smallest(laplacian(s.graph), 6);
  EXPECT_LE(std::abs(f_lower(sp, 5)), 1e-9);
}

TEST(DcSbm, SpectralClusteringRecoversPlanted) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DcSbmSample s = generate_dcsbm(planted_spec(seed));
    Rng rng(seed);
    const Clustering c = spectral_clustering(laplacian(s.graph), 5, rng);
    EXPECT_LE(misclassification(c, s.planted), 0.05) << seed;
  }
}

TEST(DcSbm, ExpectedDegree) {
  // Given the drawn degree weights, E(sum_i d_i) = 2 sum_{i<j} min(1, w_i w_j B).
  // Redraws for isolated nodes are rare at this density.
  std::vector<double> diff;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DcSbmSpec spec = planted_spec(1000 + seed, 0.3, 0.03);
    const DcSbmSample s = generate_dcsbm(spec);
    const std::vector<int>& lab = s.planted.labels();
    double expected = 0.0;
    for (int i = 0; i < spec.n; ++i) {
      for (int j = i + 1; j < spec.n; ++j) {
        expected += 2.0 * std::min(1.0, s.node_weights[i] * s.node_weights[j] * spec.block(lab[i], lab[j]));
      }
    }
    const double realized = std::accumulate(s.graph.degrees().begin(), s.graph.degrees().end(), 0.0);
    diff.push_back((realized - expected) / spec.n);
  }
  EXPECT_LE(std::abs(mean(diff)), 4.0 * standard_error(diff));
}

TEST(DcSbm, RejectsBadSpecs) {
  DcSbmSpec spec = planted_spec(1);
  spec.proportions = {0.5, 0.6};
  EXPECT_THROW(generate_dcsbm(spec), ConfigError);
  spec = planted_spec(1);
  spec.block(0, 1) = 0.3;
  EXPECT_THROW(generate_dcsbm(spec), ConfigError);
  spec = planted_spec(1);
  spec.block = Eigen::MatrixXd::Constant(5, 5, 3.0);  // clamps every pair
  EXPECT_THROW(generate_dcsbm(spec), ConfigError);
  spec = planted_spec(1);
  spec.block = Eigen::MatrixXd::Constant(5, 5, 1e-6);
  spec.max_isolated_retries = 2;
  EXPECT_THROW(generate_dcsbm(spec), DataError);
}

TEST(PopulationSpectrum, EqualProportions) {
  // B / (p + (K-1) q) has eigenvalues 1 and (p - q) / (p + (K-1) q) (K-1 times).
  const std::vector<double> pi(5, 0.2);
  const Eigen::VectorXd s = block_matrix_from_target_gap(5, pi, 0.2, 0.02).population_spectrum;
  EXPECT_NEAR(s(0), 0.0, 1e-12);
  for (int k = 1; k < 5; ++k) EXPECT_NEAR(s(k), 1.0 - 0.18 / 0.28, 1e-12);
  const Eigen::VectorXd flat = block_matrix_from_target_gap(5, pi, 0.2, 0.2).population_spectrum;
  for (int k = 1; k < 5; ++k) EXPECT_NEAR(flat(k), 1.0, 1e-12);
  const Eigen::VectorXd split = block_matrix_from_target_gap(5, pi, 0.2, 0.0).population_spectrum;
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(split(k), 0.0, 1e-12);
}

TEST(PopulationSpectrum, GapShrinksWithBetweenIntensity) {
  // The bulk of a large graph's spectrum sits near 1, so 1 - lambda_K is the
  // population stand-in for the K-th eigengap.
  const std::vector<double> pi{0.1, 0.2, 0.3, 0.2, 0.2};
  double previous = 2.0;
  for (double q : {0.0, 0.01, 0.02, 0.05, 0.1, 0.15}) {
    const Eigen::VectorXd s = block_matrix_from_target_gap(5, pi, 0.2, q).population_spectrum;
    const double gap = 1.0 - s(4);
    EXPECT_LT(gap, previous) << q;
    EXPECT_GE(gap, -1e-12);
    previous = gap;
  }
}

TEST(PlantedPartition, DegreeScaling) {
  const std::vector<double> pi{0.1, 0.2, 0.3, 0.2, 0.2};
  const PlantedPartition pp = block_matrix_from_target_gap(5, pi, 0.5, 0.05, 10.0, 200, 0.75);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(pi.data(), 5);
  EXPECT_NEAR(199 * 0.75 * 0.75 * v.dot(pp.block * v), 10.0, 1e-9);
  EXPECT_NEAR(pp.block(0, 0) / pp.block(0, 1), 10.0, 1e-12);
  EXPECT_THROW(block_matrix_from_target_gap(5, pi, 0.5, 0.05, 500.0, 200, 0.75), ConfigError);
  EXPECT_THROW(block_matrix_from_target_gap(5, pi, 1.5, 0.05), ConfigError);
}
