#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphrob/graph.hpp"
#include "graphrob/influence.hpp"
#include "graphrob/perturbation.hpp"
#include "graphrob/spectral.hpp"
#include "graphrob/stats.hpp"
#include "graphrob/weights.hpp"

namespace graphrob {

// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
// go to per-index slots; the first exception is rethrown after joining.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct SweepConfig {
  std::vector<double> grid;  // sigma_w, ascending
  int trials = 100;
  Scheme scheme = Scheme::Symmetric;
  WeightFamily family = WeightFamily::Gamma;
  // Tolerance on |f(G~) - f(G)|. Relative tolerances scale by |f(G)|, and
  // fall back to absolute when |f(G)| < 1e-9.
  double epsilon = 0.05;
  bool relative_epsilon = true;
  double alpha = 0.05;
  // Clustering breakdown: IQR of misclassification above tau.
  double tau = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  int max_attempts = 100;  // symmetric-scheme rejection cap
  void validate() const;
};

struct Breakdown {
  enum class Kind { Value, All, None };
  Kind kind = Kind::None;
  double value = 0.0;  // grid value for Value and All
  std::string to_string() const;
  // +inf for All, -inf for None; for ordering comparisons.
  double numeric() const;
};

struct GridPoint {
  double level = 0.0;  // sigma_w, or the partial-law parameter
  double mean_weight = 1.0;
  std::vector<double> samples;  // M values, NaN for failed trials
  int failures = 0;
  int rejections = 0;
  bool valid = true;
  double mean = 0.0;
  Quantiles quantiles;
  double exceedance = 0.0;  // P^(|delta f| > eps) over successful trials
  // Clustering sweeps only.
  std::vector<double> misclass_spc;
  std::vector<double> misclass_true;
  std::optional<Quantiles> misclass_spc_quantiles;
  std::optional<Quantiles> misclass_true_quantiles;
};

struct RobustnessReport {
  std::string property;
  double baseline = 0.0;
  double epsilon_abs = 0.0;
  std::vector<GridPoint> points;
  std::vector<double> smoothed_exceedance;  // isotonic fit over valid points
  Breakdown breakdown;
  std::vector<std::string> warnings;
};

struct NamedProperty {
  std::string name;
  PropertyFn fn;
};

// "wcut" needs the fixed clustering; "f_l", "f_u", "f_e" need K.
NamedProperty make_property(const std::string& name, int K, const Clustering* fixed = nullptr);

RobustnessReport bp_scalar(const Graph& g, const NamedProperty& property, const SweepConfig& config);

// Perturb, re-cluster, compare against the unperturbed spectral clustering
// (and the planted one when given). Breakdown is the first sigma_w whose
// misclassification IQR exceeds tau.
RobustnessReport bp_clustering(const Graph& g, int K, const Clustering* truth,
                               const SweepConfig& config);

struct ArgmaxReport {
  std::string property;
  int baseline_K = 0;
  std::vector<double> grid;
  std::vector<std::vector<int>> argmax;  // per point, per trial; -1 on failure
  std::vector<int> median_argmax;        // lower median of successful trials
  Breakdown breakdown;                   // first sigma_w where the median moves
};

// argmax over K in [2, K_max] of f_u / f_l / f_e per trial.
ArgmaxReport bp_argmax_k(const Graph& g, SpectralProperty which, int K_max,
                         const SweepConfig& config);

// Node selection for partial perturbation.
std::vector<int> select_positive_wcut_influence(const Graph& g, const Clustering& c, Scheme scheme);
// IF^{f_u} < 0 or IF^{f_l} > 0 or IF^{f_e} < 0.
std::vector<int> select_bad_wcc_influence(const Graph& g, int K);

struct PartialSweepConfig {
  enum class Law { GammaMeanShift, UniformWindow };
  Law law = Law::GammaMeanShift;
  // GammaMeanShift: grid holds E(w), `spread` is the variance.
  // UniformWindow: grid holds the lower bound, `spread` is the width.
  std::vector<double> grid;
  double spread = 0.1;
  int trials = 100;
  Scheme scheme = Scheme::Asymmetric;
  std::uint64_t seed = 0;
  int threads = 1;
  int max_attempts = 100;
  void validate() const;
};

// One report per property; all properties see the same weight draws.
std::vector<RobustnessReport> partial_sweep(const Graph& g, const std::vector<int>& subset,
                                            const std::string& selector_name,
                                            const std::vector<NamedProperty>& properties,
                                            const PartialSweepConfig& config);

}  // namespace graphrob
