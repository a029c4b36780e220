#include "graphrob/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace graphrob {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kResamplingLow = 0.51;

// Moment-matched positive variate with mean m and standard deviation s.
double draw_upper_excess(MixtureKind kind, double m, double s, Rng& rng) {
  if (s == 0.0) return m;
  if (kind == MixtureKind::LognormalUniform) {
    const double sigma2 = std::log1p((s * s) / (m * m));
    const double mu = std::log(m) - 0.5 * sigma2;
    std::lognormal_distribution<double> d(mu, std::sqrt(sigma2));
    return d(rng);
  }
  std::gamma_distribution<double> d((m * m) / (s * s), (s * s) / m);
  return d(rng);
}

double population_sd(const std::vector<double>& w) {
  if (w.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  double ss = 0.0;
  for (double x : w) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(w.size() - 1));
}

double log_binomial_pmf(int k, int trials, double p) {
  return std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) +
         k * std::log(p) + (trials - k) * std::log1p(-p);
}

// Smallest p in (0, hi) with f(p) = target, for increasing f.
template <class F>
double bisect_increasing(F f, double target, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double MixtureWeights::lower_mean() const {
  return kind == MixtureKind::BinaryGamma ? low : 0.5;
}

double MixtureWeights::lower_variance() const {
  return kind == MixtureKind::BinaryGamma ? 0.0 : 1.0 / 12.0;
}

std::string to_string(WeightFamily family) {
  switch (family) {
    case WeightFamily::Constant: return "constant";
    case WeightFamily::NodeResampling: return "node-resampling";
    case WeightFamily::Binary: return "binary";
    case WeightFamily::Gamma: return "gamma";
    case WeightFamily::MixtureGammaUniform: return "mixture-gamma-uniform";
    case WeightFamily::MixtureLognormalUniform: return "mixture-lognormal-uniform";
    case WeightFamily::MixtureBinaryGamma: return "mixture-binary-gamma";
  }
  return "unknown";
}

WeightFamily parse_weight_family(const std::string& name) {
  for (auto f : {WeightFamily::Constant, WeightFamily::NodeResampling, WeightFamily::Binary,
                 WeightFamily::Gamma, WeightFamily::MixtureGammaUniform,
                 WeightFamily::MixtureLognormalUniform, WeightFamily::MixtureBinaryGamma}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown weight family '" + name + "'");
}

WeightFamily family_of(const WeightDistribution& dist) {
  return std::visit(
      overloaded{
          [](const ConstantWeights&) { return WeightFamily::Constant; },
          [](const NodeResampling&) { return WeightFamily::NodeResampling; },
          [](const BinaryWeights&) { return WeightFamily::Binary; },
          [](const GammaWeights&) { return WeightFamily::Gamma; },
          [](const MixtureWeights& m) {
            switch (m.kind) {
              case MixtureKind::GammaUniform: return WeightFamily::MixtureGammaUniform;
              case MixtureKind::LognormalUniform: return WeightFamily::MixtureLognormalUniform;
              case MixtureKind::BinaryGamma: break;
            }
            return WeightFamily::MixtureBinaryGamma;
          },
      },
      dist);
}

std::string describe(const WeightDistribution& dist) {
  std::ostringstream os;
  os << to_string(family_of(dist));
  std::visit(overloaded{
                 [](const ConstantWeights&) {},
                 [&](const NodeResampling& d) { os << "(N=" << d.sample_size << ")"; },
                 [&](const BinaryWeights& d) { os << "(a=" << d.low << ",p=" << d.p << ")"; },
                 [&](const GammaWeights& d) { os << "(shape=" << d.shape << ")"; },
                 [&](const MixtureWeights& d) {
                   os << "(low=" << d.lower_mean() << ",b=" << d.upper_mean() << ",p=" << d.p
                      << ",sigma_plus=" << d.sigma_plus << ")";
                 },
             },
             dist);
  return os.str();
}

void validate(const WeightDistribution& dist) {
  std::visit(overloaded{
                 [](const ConstantWeights&) {},
                 [](const NodeResampling& d) {
                   if (d.sample_size < 1)
                     throw std::invalid_argument("node resampling needs sample size N >= 1");
                 },
                 [](const BinaryWeights& d) {
                   if (!(d.low > 0.0 && d.low < 1.0))
                     throw std::invalid_argument("binary weights need 0 < a < 1");
                   if (!(d.p > 0.0 && d.p < 1.0))
                     throw std::invalid_argument("binary weights need 0 < p < 1");
                 },
                 [](const GammaWeights& d) {
                   if (!(d.shape > 0.0) || !std::isfinite(d.shape))
                     throw std::invalid_argument("gamma weights need shape > 0");
                 },
                 [](const MixtureWeights& d) {
                   if (!(d.p > 0.0 && d.p < 1.0))
                     throw std::invalid_argument("mixture weights need 0 < p < 1");
                   if (!(d.sigma_plus >= 0.0))
                     throw std::invalid_argument("mixture weights need sigma_plus >= 0");
                   if (d.kind == MixtureKind::BinaryGamma && !(d.low > 0.0 && d.low < 1.0))
                     throw std::invalid_argument("mixture lower point mass must lie in (0, 1)");
                 },
             },
             dist);
}

double analytic_sd(const WeightDistribution& dist, int n) {
  return std::visit(
      overloaded{
          [](const ConstantWeights&) { return 0.0; },
          [n](const NodeResampling& d) {
            if (n < 1) throw std::invalid_argument("node resampling sd needs the node count");
            return std::sqrt(static_cast<double>(n - 1) / d.sample_size);
          },
          [](const BinaryWeights& d) {
            const double b = d.high();
            return std::sqrt(d.p * (d.low - 1) * (d.low - 1) + (1 - d.p) * (b - 1) * (b - 1));
          },
          [](const GammaWeights& d) { return std::sqrt(1.0 / d.shape); },
          [](const MixtureWeights& d) {
            // Law of total variance over the two components.
            const double a = d.lower_mean(), b = d.upper_mean();
            const double var = d.p * (d.lower_variance() + (a - 1) * (a - 1)) +
                               (1 - d.p) * (d.sigma_plus * d.sigma_plus + (b - 1) * (b - 1));
            return std::sqrt(var);
          },
      },
      dist);
}

WeightDistribution distribution_for_sd(WeightFamily family, double sd, int n) {
  if (!(sd >= 0.0) || !std::isfinite(sd)) throw std::invalid_argument("sigma_w must be >= 0");
  if (sd == 0.0 || family == WeightFamily::Constant) return ConstantWeights{};
  const double var = sd * sd;
  switch (family) {
    case WeightFamily::Constant: break;
    case WeightFamily::NodeResampling: {
      if (n < 2) throw std::invalid_argument("node resampling needs n >= 2");
      const double N = std::round(static_cast<double>(n - 1) / var);
      if (N > static_cast<double>(std::numeric_limits<int>::max()))
        throw std::invalid_argument("sigma_w too small for node resampling");
      return NodeResampling{static_cast<int>(std::max(1.0, N))};
    }
    case WeightFamily::Binary:
      return BinaryWeights{0.5, 4.0 * var / (1.0 + 4.0 * var)};
    case WeightFamily::Gamma:
      return GammaWeights{1.0 / var};
    case WeightFamily::MixtureGammaUniform:
    case WeightFamily::MixtureLognormalUniform: {
      auto fixed = [](double p) { return p / 3.0 + 0.25 * p * p / (1.0 - p); };
      const double p = fixed(0.5) <= 0.5 * var ? 0.5 : bisect_increasing(fixed, 0.5 * var, 0.0, 0.5);
      const double sigma_plus = std::sqrt(std::max(0.0, (var - fixed(p)) / (1.0 - p)));
      MixtureWeights m;
      m.kind = family == WeightFamily::MixtureGammaUniform ? MixtureKind::GammaUniform
                                                           : MixtureKind::LognormalUniform;
      m.p = p;
      m.sigma_plus = sigma_plus;
      m.low = 0.5;
      return m;
    }
    case WeightFamily::MixtureBinaryGamma: {
      MixtureWeights m;
      m.kind = MixtureKind::BinaryGamma;
      m.low = kResamplingLow;
      const double s2 = std::min(0.1, 0.5 * var);
      const double c = (1.0 - m.low) * (1.0 - m.low);
      auto total = [&](double p) { return c * p / (1.0 - p) + (1.0 - p) * s2; };
      m.p = bisect_increasing(total, var, 0.0, 1.0 - 1e-12);
      m.sigma_plus = std::sqrt(s2);
      return m;
    }
  }
  return ConstantWeights{};
}

WeightVector make_weight_vector(std::vector<double> w, WeightDistribution source) {
  WeightVector v;
  v.sample_sd = population_sd(w);
  v.w = std::move(w);
  v.source = source;
  return v;
}

double sample_one(const WeightDistribution& dist, Rng& rng, int n) {
  return std::visit(
      overloaded{
          [](const ConstantWeights&) { return 1.0; },
          [&](const NodeResampling& d) {
            if (n < 1) throw std::invalid_argument("node resampling draw needs the node count");
            std::binomial_distribution<int> count(d.sample_size, 1.0 / n);
            return static_cast<double>(count(rng)) * n / d.sample_size;
          },
          [&](const BinaryWeights& d) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            return u(rng) < d.p ? d.low : d.high();
          },
          [&](const GammaWeights& d) {
            std::gamma_distribution<double> g(d.shape, 1.0 / d.shape);
            return g(rng);
          },
          [&](const MixtureWeights& d) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            if (u(rng) < d.p) {
              if (d.kind == MixtureKind::BinaryGamma) return d.low;
              double x = 0.0;
              while (x == 0.0) x = u(rng);
              return x;
            }
            return 1.0 + draw_upper_excess(d.kind, d.upper_mean() - 1.0, d.sigma_plus, rng);
          },
      },
      dist);
}

WeightVector sample_weights(const WeightDistribution& dist, int n, Rng& rng) {
  validate(dist);
  if (n < 0) throw std::invalid_argument("node count must be non-negative");
  std::vector<double> w(n, 1.0);
  if (const auto* r = std::get_if<NodeResampling>(&dist)) {
    std::vector<int> counts(n, 0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < r->sample_size; ++k) ++counts[pick(rng)];
    for (int i = 0; i < n; ++i) w[i] = static_cast<double>(counts[i]) * n / r->sample_size;
  } else {
    for (int i = 0; i < n; ++i) w[i] = sample_one(dist, rng, n);
  }
  return make_weight_vector(std::move(w), dist);
}

WeightVector sample_weights(const WeightDistribution& dist, int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_weights(dist, n, rng);
}

std::optional<double> bias_closed_form(const WeightDistribution& dist, int n) {
  return std::visit(
      overloaded{
          [](const ConstantWeights&) -> std::optional<double> { return 1.0; },
          [n](const NodeResampling& d) -> std::optional<double> {
            if (n < 1) return std::nullopt;
            // Marginal count m ~ Binomial(N, 1/n); w = m n / N.
            const int N = d.sample_size;
            const double p = 1.0 / n;
            const double mean = N * p, sd = std::sqrt(N * p * (1 - p));
            const int hi = std::min(N, static_cast<int>(mean + 40 * sd + 10));
            const double scale = static_cast<double>(n) / N;
            double e_sqrt = 0.0, e_inv = 0.0, p_pos = 0.0;
            for (int m = 1; m <= hi; ++m) {
              const double pm = std::exp(log_binomial_pmf(m, N, p));
              const double w = m * scale;
              e_sqrt += pm * std::sqrt(w);
              e_inv += pm / std::sqrt(w);
              p_pos += pm;
            }
            if (p_pos <= 0.0) return std::nullopt;
            // Conditioned on w > 0, as in bias_diagnostic.
            return (e_sqrt / p_pos) * (e_inv / p_pos);
          },
          [](const BinaryWeights& d) -> std::optional<double> {
            const double a = d.low, b = d.high(), p = d.p;
            return (p * std::sqrt(a) + (1 - p) * std::sqrt(b)) *
                   (p / std::sqrt(a) + (1 - p) / std::sqrt(b));
          },
          [](const GammaWeights& d) -> std::optional<double> {
            // E(w^s) = Gamma(a + s) / (Gamma(a) a^s); the a^s factors cancel.
            if (d.shape <= 0.5) return std::numeric_limits<double>::infinity();
            return std::exp(std::lgamma(d.shape + 0.5) + std::lgamma(d.shape - 0.5) -
                            2.0 * std::lgamma(d.shape));
          },
          [](const MixtureWeights&) -> std::optional<double> { return std::nullopt; },
      },
      dist);
}

BiasEstimate bias_diagnostic(const WeightDistribution& dist, int trials, Rng& rng, int n) {
  validate(dist);
  if (trials < 2) throw std::invalid_argument("bias diagnostic needs at least 2 trials");
  BiasEstimate out;
  out.closed_form = bias_closed_form(dist, n);
  if (std::holds_alternative<ConstantWeights>(dist)) {
    out.estimate = 1.0;
    out.std_error = 0.0;
    return out;
  }
  // Zero draws (node resampling) delete the node, so both factors are taken
  // over the positive draws only; that keeps the Jensen bound >= 1.
  double mean_s = 0, m2_s = 0, mean_r = 0, m2_r = 0, co = 0;
  long used = 0;
  for (int k = 0; k < trials; ++k) {
    const double w = sample_one(dist, rng, n);
    if (!(w > 0.0)) continue;
    const double s = std::sqrt(w), r = 1.0 / s;
    ++used;
    const double ds = s - mean_s;
    mean_s += ds / used;
    m2_s += ds * (s - mean_s);
    const double dr = r - mean_r;
    mean_r += dr / used;
    m2_r += dr * (r - mean_r);
    co += ds * (r - mean_r);
  }
  if (used < 2) {
    out.estimate = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  out.estimate = mean_s * mean_r;
  // Delta method for a product of two means over the same draws.
  const double var_s = m2_s / (used - 1), var_r = m2_r / (used - 1), cov = co / (used - 1);
  const double var = (mean_r * mean_r * var_s + mean_s * mean_s * var_r + 2.0 * mean_s * mean_r * cov) / used;
  out.std_error = std::sqrt(std::max(0.0, var));
  return out;
}

PartialWeightModel::PartialWeightModel(Law law, std::vector<int> subset, double a, double b)
    : law_(law), subset_(std::move(subset)), a_(a), b_(b) {}

PartialWeightModel PartialWeightModel::mean_shift(std::vector<int> subset, double mean,
                                                  double variance) {
  if (subset.empty()) throw std::invalid_argument("partial perturbation needs a non-empty subset");
  if (!(mean > 0.0)) throw std::invalid_argument("partial perturbation needs mean > 0");
  if (!(variance >= 0.0)) throw std::invalid_argument("partial perturbation needs variance >= 0");
  return PartialWeightModel(Law::GammaMeanShift, std::move(subset), mean, variance);
}

PartialWeightModel PartialWeightModel::uniform_window(std::vector<int> subset, double lower,
                                                      double width) {
  if (subset.empty()) throw std::invalid_argument("partial perturbation needs a non-empty subset");
  if (!(lower >= 0.0) || !(width >= 0.0))
    throw std::invalid_argument("uniform window needs lower >= 0 and width >= 0");
  return PartialWeightModel(Law::UniformWindow, std::move(subset), lower, width);
}

double PartialWeightModel::mean() const {
  return law_ == Law::GammaMeanShift ? a_ : a_ + 0.5 * b_;
}

WeightVector PartialWeightModel::sample(int n, Rng& rng) const {
  std::vector<double> w(n, 1.0);
  for (int i : subset_) {
    if (i < 0 || i >= n) throw std::invalid_argument("partial subset node out of range");
    double x;
    if (law_ == Law::GammaMeanShift) {
      if (b_ == 0.0) {
        x = a_;
      } else {
        std::gamma_distribution<double> g(a_ * a_ / b_, b_ / a_);
        x = g(rng);
      }
    } else {
      std::uniform_real_distribution<double> u(a_, a_ + b_);
      x = b_ == 0.0 ? a_ : u(rng);
    }
    w[i] = x;
  }
  return make_weight_vector(std::move(w), ConstantWeights{});
}

PartialWeightModel make_partial_mean_shift(std::vector<int> subset, double mean, double variance) {
  return PartialWeightModel::mean_shift(std::move(subset), mean, variance);
}

}  // namespace graphrob
