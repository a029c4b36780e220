#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "graphrob/rng.hpp"

namespace graphrob {

// Node-weight laws. Every law has mean exactly 1.

// w_i = 1 for every node (sigma_w = 0).
struct ConstantWeights {};

// Multinomial resampling of n nodes with `sample_size` trials: w_i = m_i n / N.
// Can emit w_i = 0, which acts as a node deletion.
struct NodeResampling {
  int sample_size = 1;
};

// P(w = low) = p, P(w = high) = 1 - p with high = (1 - low p) / (1 - p).
struct BinaryWeights {
  double low = 0.5;
  double p = 0.5;
  double high() const { return (1.0 - low * p) / (1.0 - p); }
};

// Gamma(shape, scale = 1 / shape); sigma_w^2 = 1 / shape.
struct GammaWeights {
  double shape = 1.0;
};

enum class MixtureKind {
  GammaUniform,      // lower: Uniform(0, 1); upper: 1 + Gamma
  LognormalUniform,  // lower: Uniform(0, 1); upper: 1 + LogNormal
  BinaryGamma,       // lower: point mass at `low`; upper: 1 + Gamma
};

// With probability p the lower component (mean `low`, support in (0, 1)),
// otherwise the upper component with mean b = (1 - low p) / (1 - p) and
// standard deviation sigma_plus, supported on (1, inf). The upper component
// is 1 + X with X moment-matched to mean b - 1 and variance sigma_plus^2.
struct MixtureWeights {
  MixtureKind kind = MixtureKind::GammaUniform;
  double p = 0.5;
  double sigma_plus = 0.1;
  double low = 0.5;  // forced to 0.5 for the Uniform(0, 1) lower component
  double lower_mean() const;
  double lower_variance() const;
  double upper_mean() const { return (1.0 - lower_mean() * p) / (1.0 - p); }
};

using WeightDistribution =
    std::variant<ConstantWeights, NodeResampling, BinaryWeights, GammaWeights, MixtureWeights>;

enum class WeightFamily {
  Constant,
  NodeResampling,
  Binary,
  Gamma,
  MixtureGammaUniform,
  MixtureLognormalUniform,
  MixtureBinaryGamma,
};

std::string to_string(WeightFamily family);
WeightFamily parse_weight_family(const std::string& name);
WeightFamily family_of(const WeightDistribution& dist);
std::string describe(const WeightDistribution& dist);

// Throws std::invalid_argument on an invalid parameter combination.
void validate(const WeightDistribution& dist);

// Analytic standard deviation. NodeResampling needs the node count n.
double analytic_sd(const WeightDistribution& dist, int n = 0);

// Member of `family` with standard deviation `sd` (for n nodes when the
// family is NodeResampling). sd = 0 gives ConstantWeights. Mixture
// parameters are chosen by a fixed rule so that sd maps to one law:
//   GammaUniform / LognormalUniform: p solves p/3 + p^2/(4(1-p)) = sd^2/2
//     (capped at 0.5); sigma_plus takes the remaining variance.
//   BinaryGamma: low = 0.51, sigma_plus^2 = min(0.1, sd^2/2), p solved.
//   Binary: low = 0.5, p = 4 sd^2 / (1 + 4 sd^2).
WeightDistribution distribution_for_sd(WeightFamily family, double sd, int n = 0);

struct WeightVector {
  std::vector<double> w;
  WeightDistribution source = ConstantWeights{};
  double sample_sd = 0.0;
  int size() const { return static_cast<int>(w.size()); }
};

WeightVector make_weight_vector(std::vector<double> w, WeightDistribution source);

// n i.i.d. draws (multinomial counts for NodeResampling).
WeightVector sample_weights(const WeightDistribution& dist, int n, Rng& rng);
WeightVector sample_weights(const WeightDistribution& dist, int n, std::uint64_t seed);

// One marginal draw; NodeResampling needs n.
double sample_one(const WeightDistribution& dist, Rng& rng, int n = 0);

struct BiasEstimate {
  double estimate = 1.0;
  double std_error = 0.0;
  std::optional<double> closed_form;
};

// E(sqrt(w)) * E(1 / sqrt(w)). Zero draws (NodeResampling) are deleted
// nodes and are left out of both factors.
BiasEstimate bias_diagnostic(const WeightDistribution& dist, int trials, Rng& rng, int n = 0);
std::optional<double> bias_closed_form(const WeightDistribution& dist, int n = 0);

// Weights for a subset of nodes; all other nodes keep w = 1.
class PartialWeightModel {
 public:
  // Gamma with the given mean and variance (shape mean^2/variance, scale
  // variance/mean). variance = 0 is the deterministic limit.
  static PartialWeightModel mean_shift(std::vector<int> subset, double mean, double variance);
  // Uniform(lower, lower + width).
  static PartialWeightModel uniform_window(std::vector<int> subset, double lower, double width);

  WeightVector sample(int n, Rng& rng) const;
  double mean() const;
  const std::vector<int>& subset() const { return subset_; }

 private:
  enum class Law { GammaMeanShift, UniformWindow };
  PartialWeightModel(Law law, std::vector<int> subset, double a, double b);
  Law law_;
  std::vector<int> subset_;
  double a_;
  double b_;
};

PartialWeightModel make_partial_mean_shift(std::vector<int> subset, double mean, double variance);

}  // namespace graphrob
