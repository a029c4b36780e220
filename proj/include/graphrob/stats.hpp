#pragma once

#include <vector>

namespace graphrob {

// Linear interpolation between order statistics (R type 7).
double quantile(std::vector<double> values, double p);

struct Quantiles {
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
  double iqr() const { return q75 - q25; }
};

Quantiles summarize_quantiles(const std::vector<double>& values);

double mean(const std::vector<double>& values);
// Sample standard deviation / sqrt(n); 0 for fewer than two values.
double standard_error(const std::vector<double>& values);

// Non-decreasing least-squares fit (pool adjacent violators).
std::vector<double> isotonic_increasing(const std::vector<double>& values,
                                        const std::vector<double>& weights = {});

// Pearson correlation of average ranks. NaN when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace graphrob
