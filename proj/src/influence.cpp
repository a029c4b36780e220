#include "graphrob/influence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "graphrob/errors.hpp"

namespace graphrob {

ClusterAggregates cluster_aggregates(const Graph& g, const Clustering& c) {
  if (c.size() != g.num_nodes()) {
    throw std::invalid_argument("clustering covers " + std::to_string(c.size()) +
                                " nodes but the graph has " + std::to_string(g.num_nodes()));
  }
  const int n = g.num_nodes(), K = c.num_clusters();
  ClusterAggregates agg;
  agg.volume.assign(K, 0.0);
  agg.internal.assign(K, 0.0);
  agg.outgoing.assign(K, 0.0);
  agg.out_mass = Eigen::MatrixXd::Zero(n, K);
  agg.in_mass = Eigen::MatrixXd::Zero(n, K);
  for (int i = 0; i < n; ++i) {
    const int ki = c.label(i);
    agg.volume[ki] += g.degree(i);
    auto cols = g.neighbors(i);
    auto vals = g.weights(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const int j = cols[p], kj = c.label(j);
      agg.out_mass(i, kj) += vals[p];
      agg.in_mass(j, ki) += vals[p];
      if (ki == kj) {
        agg.internal[ki] += vals[p];
      } else {
        agg.outgoing[ki] += vals[p];
      }
    }
  }
  return agg;
}

namespace {

void require_positive_volumes(const ClusterAggregates& agg) {
  for (std::size_t k = 0; k < agg.volume.size(); ++k) {
    if (!(agg.volume[k] > 0.0)) {
      throw std::invalid_argument("cluster " + std::to_string(k) + " has zero volume");
    }
  }
}

}  // namespace

double wcut(const Graph& g, const Clustering& c) {
  const ClusterAggregates agg = cluster_aggregates(g, c);
  require_positive_volumes(agg);
  double total = 0.0;
  for (std::size_t k = 0; k < agg.volume.size(); ++k) total += 1.0 - agg.internal[k] / agg.volume[k];
  return total;
}

double wcut(const PerturbedGraph& pg, const Clustering& c) { return wcut(pg.adjacency(), c); }

std::string to_string(InfluenceProperty p) {
  switch (p) {
    case InfluenceProperty::WCutAsymmetric: return "wcut-asymmetric";
    case InfluenceProperty::WCutSymmetric: return "wcut-symmetric";
    case InfluenceProperty::EigenvalueSymmetric: return "eigenvalue-symmetric";
    case InfluenceProperty::FLower: return "f_l";
    case InfluenceProperty::FUpper: return "f_u";
    case InfluenceProperty::FEigengap: return "f_e";
  }
  return "unknown";
}

std::string to_string(SpectralProperty p) {
  switch (p) {
    case SpectralProperty::FLower: return "f_l";
    case SpectralProperty::FUpper: return "f_u";
    case SpectralProperty::FEigengap: return "f_e";
  }
  return "unknown";
}

SpectralProperty parse_spectral_property(const std::string& name) {
  if (name == "f_l") return SpectralProperty::FLower;
  if (name == "f_u") return SpectralProperty::FUpper;
  if (name == "f_e") return SpectralProperty::FEigengap;
  throw std::invalid_argument("unknown spectral property '" + name + "'");
}

InfluenceVector if_wcut_asymmetric(const Graph& g, const Clustering& c) {
  const ClusterAggregates agg = cluster_aggregates(g, c);
  require_positive_volumes(agg);
  InfluenceVector out;
  out.property = InfluenceProperty::WCutAsymmetric;
  out.values.resize(g.num_nodes());
  for (int t = 0; t < g.num_nodes(); ++t) {
    const int k = c.label(t);
    const double Dk = agg.volume[k];
    out.values[t] = (g.degree(t) * agg.internal[k] - agg.out_mass(t, k) * Dk) / (Dk * Dk);
  }
  return out;
}

InfluenceVector if_wcut_symmetric(const Graph& g, const Clustering& c) {
  const ClusterAggregates agg = cluster_aggregates(g, c);
  require_positive_volumes(agg);
  const int K = c.num_clusters();
  InfluenceVector out;
  out.property = InfluenceProperty::WCutSymmetric;
  out.values.resize(g.num_nodes());
  for (int t = 0; t < g.num_nodes(); ++t) {
    const int k0 = c.label(t);
    double value = 0.0;
    // Volume of every cluster grows by its in-mass towards t; t's own cluster
    // also gains d_t.
    for (int k = 0; k < K; ++k) {
      const double dvol = agg.in_mass(t, k) + (k == k0 ? g.degree(t) : 0.0);
      value += agg.internal[k] * dvol / (agg.volume[k] * agg.volume[k]);
    }
    value -= (agg.out_mass(t, k0) + agg.in_mass(t, k0)) / agg.volume[k0];
    out.values[t] = value;
  }
  return out;
}

double multiplicity_threshold(const Graph& g) {
  double sq = 0.0;
  int positive = 0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) > 0.0) ++positive;
  }
  sq += positive;
  // Off-diagonal entries of L, from the symmetrized affinity.
  for (int i = 0; i < g.num_nodes(); ++i) {
    auto cols = g.neighbors(i);
    auto vals = g.weights(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const int j = cols[p];
      if (!(g.degree(j) > 0.0)) continue;
      const double a = 0.5 * (vals[p] + g.weight(j, i)) / std::sqrt(g.degree(i) * g.degree(j));
      // Each unordered pair is visited from both sides when both arcs
      // exist; count each visit once per orientation.
      if (g.weight(j, i) > 0.0) {
        sq += a * a;
      } else {
        sq += 2.0 * a * a;
      }
    }
  }
  return 1e-8 * std::sqrt(sq);
}

namespace {

void require_undirected(const Graph& g, const char* what) {
  if (g.directed()) {
    throw std::invalid_argument(std::string(what) + " is defined for undirected graphs only");
  }
}

void require_simple(const SpectralData& s, int k, int n, double threshold) {
  if (k < 1 || k > s.count()) {
    throw std::invalid_argument("eigenvalue index " + std::to_string(k) + " outside the " +
                                std::to_string(s.count()) + " computed eigenpairs");
  }
  if (k == s.count() && k < n) {
    throw std::invalid_argument("need lambda_" + std::to_string(k + 1) +
                                " to check that lambda_" + std::to_string(k) + " is simple");
  }
  double gap = std::numeric_limits<double>::infinity();
  if (k > 1) gap = std::min(gap, s.lambda(k) - s.lambda(k - 1));
  if (k < s.count()) gap = std::min(gap, s.lambda(k + 1) - s.lambda(k));
  if (gap <= threshold) throw MultiplicityError(k, gap, threshold);
}

}  // namespace

InfluenceVector if_eigenvalue_symmetric(const Graph& g, const SpectralData& spectrum, int k,
                                        const EigenInfluenceOptions& options) {
  require_undirected(g, "the eigenvalue influence function");
  const int n = g.num_nodes();
  if (spectrum.vectors.rows() != n) {
    throw std::invalid_argument("spectrum does not match the graph size");
  }
  InfluenceVector out;
  out.property = InfluenceProperty::EigenvalueSymmetric;
  out.index = k;
  out.values.assign(n, 0.0);
  if (k < 1 || k > spectrum.count()) {
    throw std::invalid_argument("eigenvalue index " + std::to_string(k) + " outside the " +
                                std::to_string(spectrum.count()) + " computed eigenpairs");
  }
  const double lambda = spectrum.lambda(k);
  if (std::abs(lambda) < options.zero_tolerance) return out;
  require_simple(spectrum, k, n, multiplicity_threshold(g));

  const Eigen::VectorXd v = spectrum.vectors.col(k - 1);
  // sum_i v_i^2 P_it with P_it = A_it / d_i; A symmetric so A_it = A_ti.
  for (int t = 0; t < n; ++t) {
    double s = 0.0;
    auto cols = g.neighbors(t);
    auto vals = g.weights(t);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const int i = cols[p];
      s += v(i) * v(i) * vals[p] / g.degree(i);
    }
    out.values[t] = (1.0 - lambda) * (s - v(t) * v(t));
  }
  return out;
}

InfluenceVector if_composite(const Graph& g, const SpectralData& spectrum, int K,
                             SpectralProperty which, const EigenInfluenceOptions& options) {
  if (K < 1 || K + 1 > spectrum.count()) {
    throw std::invalid_argument("composite influence needs K+1 = " + std::to_string(K + 1) +
                                " eigenpairs, have " + std::to_string(spectrum.count()));
  }
  const int n = g.num_nodes();
  std::vector<InfluenceVector> parts;
  for (int k = 1; k <= K + 1; ++k) {
    // Only eigenvalues that enter the formula need derivatives.
    const bool needed = which == SpectralProperty::FEigengap ? (k >= K) : (which == SpectralProperty::FUpper || k <= K);
    parts.push_back(needed ? if_eigenvalue_symmetric(g, spectrum, k, options) : InfluenceVector{});
  }
  InfluenceVector out;
  out.index = K;
  out.values.assign(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double lower = 0.0;
    if (which != SpectralProperty::FEigengap) {
      for (int k = 1; k <= K; ++k) lower += parts[k - 1][t];
    }
    switch (which) {
      case SpectralProperty::FLower:
        out.values[t] = lower;
        break;
      case SpectralProperty::FUpper:
        out.values[t] = parts[K][t] - lower;
        break;
      case SpectralProperty::FEigengap:
        out.values[t] = parts[K][t] - parts[K - 1][t];
        break;
    }
  }
  out.property = which == SpectralProperty::FLower   ? InfluenceProperty::FLower
                 : which == SpectralProperty::FUpper ? InfluenceProperty::FUpper
                                                     : InfluenceProperty::FEigengap;
  return out;
}

double finite_difference_if(const Graph& g, const PropertyFn& property, Scheme scheme, int t,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (t < 0 || t >= g.num_nodes()) throw std::invalid_argument("node out of range");
  std::vector<double> w(g.num_nodes(), 1.0);
  w[t] = 1.0 + h;
  const double up = property(perturb(g, make_weight_vector(w, ConstantWeights{}), scheme).adjacency());
  w[t] = 1.0 - h;
  const double down = property(perturb(g, make_weight_vector(w, ConstantWeights{}), scheme).adjacency());
  return (up - down) / (2.0 * h);
}

PropertyFn wcut_property(Clustering c) {
  return [c = std::move(c)](const Graph& g) { return wcut(g, c); };
}

PropertyFn eigenvalue_property(int k) {
  return [k](const Graph& g) {
    LaplacianOptions opts;
    opts.drop_isolated = true;
    const Laplacian lap = laplacian(g, opts);
    return eigs_smallest(lap, k).lambda(k);
  };
}

PropertyFn spectral_property(SpectralProperty which, int K) {
  return [which, K](const Graph& g) {
    LaplacianOptions opts;
    opts.drop_isolated = true;
    const SpectralData s = eigs_smallest(laplacian(g, opts), K + 1);
    switch (which) {
      case SpectralProperty::FLower: return f_lower(s, K);
      case SpectralProperty::FUpper: return f_upper(s, K);
      case SpectralProperty::FEigengap: return f_eigengap(s, K);
    }
    return 0.0;
  };
}

AsymmetricEigenCheck if_eigenvalue_asymmetric_is_zero(const Graph& g, int k, double h,
                                                      double tolerance) {
  require_undirected(g, "the asymmetric eigenvalue check");
  const int n = g.num_nodes();
  const SpectralData s = eigs_smallest(laplacian(g), std::min(n, k + 1));
  require_simple(s, k, n, multiplicity_threshold(g));
  AsymmetricEigenCheck out;
  out.k = k;
  const PropertyFn lambda_k = eigenvalue_property(k);
  std::vector<int> offending;
  for (int t = 0; t < n; ++t) {
    const double d = finite_difference_if(g, lambda_k, Scheme::Asymmetric, t, h);
    out.derivatives.push_back(d);
    out.max_abs = std::max(out.max_abs, std::abs(d));
    if (std::abs(d) > tolerance) offending.push_back(t);
  }
  if (!offending.empty()) {
    std::ostringstream os;
    os << "asymmetric derivative of lambda_" << k << " exceeds " << tolerance << " at node(s)";
    for (int t : offending) os << ' ' << t << " (" << out.derivatives[t] << ")";
    throw NumericalError(os.str());
  }
  return out;
}

}  // namespace graphrob
