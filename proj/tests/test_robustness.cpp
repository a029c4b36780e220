#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "graphrob/dcsbm.hpp"
#include "graphrob/errors.hpp"
#include "graphrob/robustness.hpp"

using namespace graphrob;

namespace {

SweepConfig small_sweep(std::vector<double> grid, int trials = 20) {
  SweepConfig c;
  c.grid = std::move(grid);
  c.trials = trials;
  c.seed = 42;
  return c;
}

DcSbmSample planted(std::uint64_t seed, int n = 120) {
  DcSbmSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.block = block_matrix_from_target_gap(5, spec.proportions, 0.5, 0.02).block;
  return generate_dcsbm(spec);
}

std::vector<double> medians(const RobustnessReport& r) {
  std::vector<double> out;
  for (const GridPoint& p : r.points) out.push_back(p.quantiles.q50);
  return out;
}

}  // namespace

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(57);
  parallel_for(57, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsAfterJoining) {
  std::atomic<int> done{0};
  EXPECT_THROW(parallel_for(20, 3,
                            [&](int i) {
                              ++done;
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_EQ(done.load(), 20);
}

TEST(SweepConfig, Validation) {
  SweepConfig c = small_sweep({0.1, 0.2});
  EXPECT_NO_THROW(c.validate());
  c.grid = {0.2, 0.1};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_sweep({});
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_sweep({0.1});
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_sweep({0.1});
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_sweep({0.1});
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Breakdown, Ordering) {
  const Breakdown all{Breakdown::Kind::All, 0.5}, none{Breakdown::Kind::None, 0.0},
      mid{Breakdown::Kind::Value, 0.3};
  EXPECT_GT(all.numeric(), mid.numeric());
  EXPECT_LT(none.numeric(), mid.numeric());
  EXPECT_EQ(all.to_string(), "all");
  EXPECT_EQ(none.to_string(), "none");
  EXPECT_EQ(mid.to_string(), "0.3");
}

TEST(BpScalar, InfiniteToleranceNeverBreaks) {
  const Graph g = fixtures::barbell6();
  const Clustering c({0, 0, 0, 1, 1, 1}, 2);
  SweepConfig cfg = small_sweep({0.1, 0.3, 0.5});
  cfg.epsilon = std::numeric_limits<double>::infinity();
  const RobustnessReport r = bp_scalar(g, make_property("wcut", 2, &c), cfg);
  EXPECT_EQ(r.breakdown.kind, Breakdown::Kind::All);
  EXPECT_EQ(r.breakdown.value, 0.5);
  for (const GridPoint& p : r.points) EXPECT_EQ(p.exceedance, 0.0);
}

TEST(BpScalar, ZeroGridHasZeroDeltas) {
  const Graph g = fixtures::connected_enough(30, 0.2, 3);
  for (const std::string name : {"f_l", "f_u", "f_e"}) {
    const RobustnessReport r = bp_scalar(g, make_property(name, 2), small_sweep({0.0}, 5));
    for (double x : r.points[0].samples) EXPECT_NEAR(x, r.baseline, 1e-12) << name;
    EXPECT_EQ(r.breakdown.kind, Breakdown::Kind::All);
    EXPECT_EQ(r.breakdown.value, 0.0);
  }
}

TEST(BpScalar, DisjointTrianglesKeepZeroLowerSum) {
  const RobustnessReport r =
      bp_scalar(fixtures::two_triangles(), make_property("f_l", 2), small_sweep({0.1, 0.2, 0.3}));
  EXPECT_NEAR(r.baseline, 0.0, 1e-12);
  for (const GridPoint& p : r.points) {
    for (double x : p.samples) EXPECT_LE(std::abs(x), 1e-9);
  }
  EXPECT_EQ(r.breakdown.kind, Breakdown::Kind::All);
}

TEST(BpScalar, BreaksAtLargeNoise) {
  const Graph g = fixtures::barbell6();
  const Clustering c({0, 0, 0, 1, 1, 1}, 2);
  SweepConfig cfg = small_sweep({0.001, 0.3, 0.6, 0.9}, 50);
  cfg.scheme = Scheme::Asymmetric;
  const RobustnessReport r = bp_scalar(g, make_property("wcut", 2, &c), cfg);
  EXPECT_EQ(r.points[0].exceedance, 0.0);
  EXPECT_EQ(r.breakdown.kind, Breakdown::Kind::Value);
  EXPECT_EQ(r.breakdown.value, 0.001);
  ASSERT_EQ(r.smoothed_exceedance.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GE(r.smoothed_exceedance[i], r.smoothed_exceedance[i - 1]);
}

TEST(BpScalar, FailingPropertyMarksPointsInvalid) {
  const Graph g = fixtures::barbell6();
  // Fails whenever node 0 got a weight below 1.
  NamedProperty p{"picky", [](const Graph& h) {
                    if (h.degree(0) < 2.0) throw NumericalError("picky");
                    return 0.0;
                  }};
  SweepConfig cfg = small_sweep({0.0, 0.5}, 40);
  cfg.scheme = Scheme::Asymmetric;
  const RobustnessReport r = bp_scalar(g, p, cfg);
  EXPECT_TRUE(r.points[0].valid);
  EXPECT_EQ(r.points[0].failures, 0);
  EXPECT_GT(r.points[1].failures, 0);
  EXPECT_EQ(r.points[1].valid, 2 * r.points[1].failures <= 40);
  if (!r.points[1].valid) ASSERT_EQ(r.warnings.size(), 1u);
}

TEST(BpScalar, ThreadCountDoesNotChangeResults) {
  const Graph g = fixtures::connected_enough(40, 0.15, 9, true);
  SweepConfig a = small_sweep({0.2, 0.5}, 16), b = a;
  b.threads = 3;
  const RobustnessReport ra = bp_scalar(g, make_property("f_e", 3), a);
  const RobustnessReport rb = bp_scalar(g, make_property("f_e", 3), b);
  for (int gi = 0; gi < 2; ++gi) {
    for (int t = 0; t < 16; ++t) {
      const double x = ra.points[gi].samples[t], y = rb.points[gi].samples[t];
      EXPECT_TRUE(x == y || (std::isnan(x) && std::isnan(y)));
    }
  }
}

TEST(BpClustering, NoNoiseNoError) {
  const DcSbmSample s = planted(1);
  SweepConfig cfg = small_sweep({0.0, 0.2}, 8);
  const RobustnessReport r = bp_clustering(s.graph, 5, &s.planted, cfg);
  for (double m : r.points[0].misclass_spc) EXPECT_EQ(m, 0.0);
  for (double m : r.points[0].misclass_true) EXPECT_LE(m, 0.05);
  ASSERT_TRUE(r.points[1].misclass_spc_quantiles.has_value());
  ASSERT_TRUE(r.points[1].misclass_true_quantiles.has_value());
  EXPECT_EQ(r.points[1].misclass_spc.size(), 8u);
}

TEST(BpClustering, HeavyNoiseBreaks) {
  const DcSbmSample s = planted(2);
  SweepConfig cfg = small_sweep({0.0, 1.5, 3.0}, 20);
  cfg.scheme = Scheme::Asymmetric;
  const RobustnessReport r = bp_clustering(s.graph, 5, nullptr, cfg);
  EXPECT_EQ(r.breakdown.kind, Breakdown::Kind::Value);
  EXPECT_GT(r.breakdown.value, 0.0);
  EXPECT_TRUE(r.points[0].misclass_true.empty());
}

TEST(ArgmaxK, StableWithoutNoise) {
  // Three loosely joined cliques: the eigengap peaks at K = 3.
  std::vector<Edge> e;
  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) e.push_back({6 * b + i, 6 * b + j});
    }
  }
  e.push_back({5, 6});
  e.push_back({11, 12});
  const Graph g = fixtures::undirected(18, e);
  const ArgmaxReport r = bp_argmax_k(g, SpectralProperty::FEigengap, 6, small_sweep({0.0, 0.1}, 10));
  EXPECT_EQ(r.baseline_K, 3);
  EXPECT_EQ(r.median_argmax[0], 3);
  EXPECT_EQ(r.median_argmax[1], 3);
  EXPECT_EQ(r.breakdown.kind, Breakdown::Kind::All);
  EXPECT_THROW(bp_argmax_k(g, SpectralProperty::FEigengap, 1, small_sweep({0.0})), ConfigError);
}

TEST(Selectors, PositiveWCutInfluence) {
  const Clustering c({0, 0, 0, 1, 1, 1}, 2);
  EXPECT_EQ(select_positive_wcut_influence(fixtures::barbell6(), c, Scheme::Asymmetric),
            (std::vector<int>{2, 3}));
  EXPECT_TRUE(select_positive_wcut_influence(fixtures::two_triangles(), c, Scheme::Asymmetric).empty());
}

TEST(Selectors, BadWccInfluenceMatchesSigns) {
  const Graph g = fixtures::connected_enough(25, 0.2, 5);
  const int K = 2;
  const std::vector<int> bad = select_bad_wcc_influence(g, K);
  const SpectralData s = eigs_smallest(laplacian(g), K + 2);
  const InfluenceVector fu = if_composite(g, s, K, SpectralProperty::FUpper);
  const InfluenceVector fl = if_composite(g, s, K, SpectralProperty::FLower);
  const InfluenceVector fe = if_composite(g, s, K, SpectralProperty::FEigengap);
  std::size_t next = 0;
  for (int t = 0; t < 25; ++t) {
    const bool is_bad = fu[t] < 0 || fl[t] > 0 || fe[t] < 0;
    if (is_bad) {
      ASSERT_LT(next, bad.size());
      EXPECT_EQ(bad[next++], t);
    }
  }
  EXPECT_EQ(next, bad.size());
}

TEST(PartialSweep, EmptySelectionNamesSelector) {
  PartialSweepConfig cfg;
  cfg.grid = {1.0};
  try {
    partial_sweep(fixtures::barbell6(), {}, "if_wcut>0", {make_property("f_l", 2)}, cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("if_wcut>0"), std::string::npos);
  }
}

TEST(PartialSweep, UnitMeanCentersOnBaseline) {
  const DcSbmSample s = planted(4);
  const std::vector<int> subset = select_positive_wcut_influence(s.graph, s.planted, Scheme::Asymmetric);
  ASSERT_FALSE(subset.empty());
  PartialSweepConfig cfg;
  cfg.grid = {1.0};
  cfg.spread = 0.01;
  cfg.trials = 60;
  cfg.seed = 3;
  const auto reports = partial_sweep(s.graph, subset, "if_wcut>0", {make_property("wcut", 5, &s.planted)}, cfg);
  const RobustnessReport& r = reports[0];
  std::vector<double> delta;
  for (double x : r.points[0].samples) delta.push_back(x - r.baseline);
  // Second-order drift is O(variance); allow it on top of 4 SE.
  EXPECT_LE(std::abs(mean(delta)), 4 * standard_error(delta) + 1e-3 * r.baseline);
  EXPECT_DOUBLE_EQ(r.points[0].mean_weight, 1.0);
}

TEST(PartialSweep, WCutRisesWithBadInfluenceWeights) {
  const DcSbmSample s = planted(6);
  const std::vector<int> subset = select_positive_wcut_influence(s.graph, s.planted, Scheme::Asymmetric);
  PartialSweepConfig cfg;
  cfg.grid = {0.5, 0.75, 1.0, 1.25, 1.5};
  cfg.trials = 20;
  cfg.seed = 8;
  const auto reports = partial_sweep(s.graph, subset, "if_wcut>0", {make_property("wcut", 5, &s.planted)}, cfg);
  const std::vector<double> med = medians(reports[0]);
  for (std::size_t i = 1; i < med.size(); ++i) EXPECT_GT(med[i], med[i - 1]);
  EXPECT_GT(spearman(cfg.grid, med), 0.9);
}

TEST(PartialSweep, SameDrawsForEveryProperty) {
  const Graph g = fixtures::barbell6();
  PartialSweepConfig cfg;
  cfg.grid = {0.8, 1.2};
  cfg.trials = 5;
  const NamedProperty fl = make_property("f_l", 2);
  const auto one = partial_sweep(g, {2, 3}, "bridge", {fl}, cfg);
  const auto two = partial_sweep(g, {2, 3}, "bridge", {make_property("f_u", 2), fl}, cfg);
  EXPECT_EQ(one[0].points[1].samples, two[1].points[1].samples);
}

TEST(MakeProperty, Errors) {
  EXPECT_THROW(make_property("wcut", 2), ConfigError);
  EXPECT_THROW(make_property("f_x", 2), ConfigError);
  EXPECT_THROW(make_property("f_l", 0), ConfigError);
}
