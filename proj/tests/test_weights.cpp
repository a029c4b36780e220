#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "graphrob/weights.hpp"

using namespace graphrob;

namespace {

const WeightFamily kRandomFamilies[] = {
    WeightFamily::NodeResampling,          WeightFamily::Binary,
    WeightFamily::Gamma,                   WeightFamily::MixtureGammaUniform,
    WeightFamily::MixtureLognormalUniform, WeightFamily::MixtureBinaryGamma,
};

struct Moments {
  double mean, sd, se;
  double var_se;  // standard error of the sample variance, from the 4th moment
};

Moments moments(const std::vector<double>& w) {
  const double n = static_cast<double>(w.size());
  const double m = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : w) ss += (x - m) * (x - m);
  const double var = ss / (n - 1);
  double m4 = 0.0;
  for (double x : w) m4 += std::pow(x - m, 4);
  m4 /= n;
  return {m, std::sqrt(var), std::sqrt(var / n), std::sqrt(std::max(0.0, m4 - var * var) / n)};
}

}  // namespace

TEST(Weights, BinaryParameters) {
  BinaryWeights b{0.5, 0.5};
  EXPECT_DOUBLE_EQ(b.high(), 1.5);
  EXPECT_DOUBLE_EQ(analytic_sd(b), 0.5);
}

TEST(Weights, NodeResamplingSd) {
  EXPECT_NEAR(analytic_sd(NodeResampling{400}, 100), std::sqrt(99.0 / 400.0), 1e-15);
  EXPECT_NEAR(analytic_sd(NodeResampling{400}, 100), 0.4975, 1e-4);
}

TEST(Weights, NodeResamplingSumsToN) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const WeightVector w = sample_weights(NodeResampling{137}, 100, rng);
    double total = 0.0;
    for (double x : w.w) {
      total += x;
      // m n / N with integer m.
      const double m = x * 137 / 100;
      EXPECT_NEAR(m, std::round(m), 1e-9);
    }
    EXPECT_NEAR(total, 100.0, 1e-9);
  }
}

TEST(Weights, ConstantIsAllOnes) {
  Rng rng(1);
  const WeightVector w = sample_weights(distribution_for_sd(WeightFamily::Gamma, 0.0), 20, rng);
  for (double x : w.w) EXPECT_EQ(x, 1.0);
  EXPECT_EQ(w.sample_sd, 0.0);
}

TEST(Weights, SameSeedSameVector) {
  const WeightDistribution d = GammaWeights{4.0};
  EXPECT_EQ(sample_weights(d, 50, 99).w, sample_weights(d, 50, 99).w);
  EXPECT_NE(sample_weights(d, 50, 99).w, sample_weights(d, 50, 100).w);
}

TEST(Weights, RejectsInvalidParameters) {
  EXPECT_THROW(validate(BinaryWeights{0.5, 1.0}), std::invalid_argument);
  EXPECT_THROW(validate(BinaryWeights{1.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(validate(GammaWeights{0.0}), std::invalid_argument);
  EXPECT_THROW(validate(NodeResampling{0}), std::invalid_argument);
  EXPECT_THROW(validate(MixtureWeights{MixtureKind::GammaUniform, 1.0, 0.1}), std::invalid_argument);
}

// Mean 1 and the requested sd for every family across a grid, 1e5 draws.
TEST(Weights, MeanOneAndTargetSdAcrossGrid) {
  const int n = 200;
  for (WeightFamily fam : kRandomFamilies) {
    for (double sd : {0.1, 0.3, 0.5, 0.8, 1.0}) {
      const WeightDistribution d = distribution_for_sd(fam, sd, n);
      EXPECT_NEAR(analytic_sd(d, n), sd, fam == WeightFamily::NodeResampling ? 0.02 * sd : 1e-9)
          << to_string(fam) << " sd " << sd;
      Rng rng(17);
      std::vector<double> all;
      while (all.size() < 100000) {
        const WeightVector w = sample_weights(d, n, rng);
        all.insert(all.end(), w.w.begin(), w.w.end());
      }
      const Moments m = moments(all);
      EXPECT_LT(std::abs(m.mean - 1.0), 4 * m.se) << to_string(fam) << " sd " << sd;
      const double target_var = analytic_sd(d, n) * analytic_sd(d, n);
      EXPECT_LT(std::abs(m.sd * m.sd - target_var), 4 * m.var_se + 1e-3 * target_var)
          << to_string(fam) << " sd " << sd;
      for (double x : all) {
        if (fam == WeightFamily::NodeResampling) {
          ASSERT_GE(x, 0.0);
        } else {
          ASSERT_GT(x, 0.0);
        }
      }
    }
  }
}

TEST(BiasDiagnostic, BinaryClosedForm) {
  const BinaryWeights b{0.5, 0.5};
  const double a = 0.5, hi = 1.5, p = 0.5;
  const double expected = (p * std::sqrt(a) + (1 - p) * std::sqrt(hi)) * (p / std::sqrt(a) + (1 - p) / std::sqrt(hi));
  ASSERT_TRUE(bias_closed_form(b).has_value());
  EXPECT_NEAR(*bias_closed_form(b), expected, 1e-15);
  EXPECT_NEAR(expected, 1.07736, 1e-5);
  Rng rng(5);
  const BiasEstimate e = bias_diagnostic(b, 100000, rng);
  EXPECT_LT(std::abs(e.estimate - expected), 4 * e.std_error);
}

TEST(BiasDiagnostic, GammaClosedForm) {
  const double expected = std::tgamma(4.5) * std::tgamma(3.5) / (std::tgamma(4.0) * std::tgamma(4.0));
  ASSERT_TRUE(bias_closed_form(GammaWeights{4.0}).has_value());
  EXPECT_NEAR(*bias_closed_form(GammaWeights{4.0}), expected, 1e-12);
  EXPECT_NEAR(expected, 1.0738, 1e-4);
  Rng rng(6);
  const BiasEstimate e = bias_diagnostic(GammaWeights{4.0}, 100000, rng);
  EXPECT_LT(std::abs(e.estimate - expected), 4 * e.std_error);
}

TEST(BiasDiagnostic, NodeResamplingClosedFormMatchesMonteCarlo) {
  const NodeResampling d{50};
  const auto cf = bias_closed_form(d, 40);
  ASSERT_TRUE(cf.has_value());
  Rng rng(8);
  const BiasEstimate e = bias_diagnostic(d, 200000, rng, 40);
  EXPECT_LT(std::abs(e.estimate - *cf), 4 * e.std_error + 1e-3);
}

TEST(BiasDiagnostic, ExactlyOneAtZeroVariance) {
  Rng rng(2);
  EXPECT_EQ(bias_diagnostic(ConstantWeights{}, 1000, rng).estimate, 1.0);
  EXPECT_EQ(*bias_closed_form(ConstantWeights{}), 1.0);
}

TEST(BiasDiagnostic, JensenAcrossFamilies) {
  for (WeightFamily fam : kRandomFamilies) {
    for (double sd : {0.1, 0.5, 1.0}) {
      Rng rng(12);
      const BiasEstimate e = bias_diagnostic(distribution_for_sd(fam, sd, 500), 20000, rng, 500);
      EXPECT_GE(e.estimate, 1.0) << to_string(fam) << " sd " << sd;
    }
  }
}

TEST(PartialWeights, DeterministicLimit) {
  const PartialWeightModel m = PartialWeightModel::mean_shift({3}, 2.0, 0.0);
  Rng rng(1);
  EXPECT_EQ(m.sample(6, rng).w, (std::vector<double>{1, 1, 1, 2, 1, 1}));
}

TEST(PartialWeights, MeanAndVarianceTargeted) {
  // mu = 0.1, v = 0.1 is Gamma(shape 0.1, scale 1).
  const PartialWeightModel m = make_partial_mean_shift({0, 1, 2, 3}, 0.1, 0.1);
  Rng rng(4);
  std::vector<double> draws;
  for (int rep = 0; rep < 50000; ++rep) {
    const WeightVector w = m.sample(6, rng);
    EXPECT_EQ(w.w[4], 1.0);
    EXPECT_EQ(w.w[5], 1.0);
    draws.insert(draws.end(), w.w.begin(), w.w.begin() + 4);
  }
  const Moments mo = moments(draws);
  EXPECT_LT(std::abs(mo.mean - 0.1), 4 * mo.se);
  EXPECT_NEAR(mo.sd * mo.sd, 0.1, 0.01);
}

TEST(PartialWeights, FullSubsetAtMeanOne) {
  std::vector<int> all(100);
  std::iota(all.begin(), all.end(), 0);
  const PartialWeightModel m = make_partial_mean_shift(all, 1.0, 0.25);
  Rng rng(9);
  std::vector<double> draws;
  for (int rep = 0; rep < 500; ++rep) {
    const WeightVector w = m.sample(100, rng);
    draws.insert(draws.end(), w.w.begin(), w.w.end());
  }
  const Moments mo = moments(draws);
  EXPECT_LT(std::abs(mo.mean - 1.0), 4 * mo.se);
  EXPECT_NEAR(mo.sd, 0.5, 0.01);
}

TEST(PartialWeights, UniformWindow) {
  const PartialWeightModel m = PartialWeightModel::uniform_window({0}, 0.7, 0.25);
  EXPECT_DOUBLE_EQ(m.mean(), 0.825);
  Rng rng(3);
  for (int rep = 0; rep < 1000; ++rep) {
    const double w = m.sample(2, rng).w[0];
    ASSERT_GE(w, 0.7);
    ASSERT_LE(w, 0.95);
  }
}

TEST(PartialWeights, EmptySubsetRejected) {
  EXPECT_THROW(make_partial_mean_shift({}, 1.0, 0.1), std::invalid_argument);
}
