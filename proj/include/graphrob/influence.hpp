#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphrob/graph.hpp"
#include "graphrob/perturbation.hpp"
#include "graphrob/spectral.hpp"

namespace graphrob {

// Per-cluster masses of a graph under a clustering.
struct ClusterAggregates {
  std::vector<double> volume;    // D_k = sum_{i in C_k} d_i
  std::vector<double> internal;  // D_kk = sum_{i,j in C_k} A_ij
  std::vector<double> outgoing;  // D_{k,not k} = sum_{i in C_k, j not in C_k} A_ij
  Eigen::MatrixXd out_mass;      // (i, k): d_ik = sum_{j in C_k} A_ij
  Eigen::MatrixXd in_mass;       // (i, k): d_ki = sum_{j in C_k} A_ji
};

ClusterAggregates cluster_aggregates(const Graph& g, const Clustering& c);

// sum_k (1 - D_kk / D_k). Throws std::invalid_argument on a zero-volume cluster.
double wcut(const Graph& g, const Clustering& c);
double wcut(const PerturbedGraph& pg, const Clustering& c);

enum class InfluenceProperty {
  WCutAsymmetric,
  WCutSymmetric,
  EigenvalueSymmetric,
  FLower,
  FUpper,
  FEigengap,
};

std::string to_string(InfluenceProperty p);

// d f / d w_t at w = 1, one entry per node.
struct InfluenceVector {
  std::vector<double> values;
  InfluenceProperty property = InfluenceProperty::WCutAsymmetric;
  int index = 0;  // k for eigenvalues, K for composites, 0 otherwise
  int size() const { return static_cast<int>(values.size()); }
  double operator[](int t) const { return values[t]; }
};

// (d_t D_kk - d_tk D_k) / D_k^2 with k the cluster of t.
InfluenceVector if_wcut_asymmetric(const Graph& g, const Clustering& c);

// sum_k D_kk (d_kt + [k = k0] d_t) / D_k^2 - (d_{t k0} + d_{k0 t}) / D_k0,
// k0 the cluster of t.
InfluenceVector if_wcut_symmetric(const Graph& g, const Clustering& c);

// Gap below which neighbouring eigenvalues count as one: 1e-8 ||L||_F.
double multiplicity_threshold(const Graph& g);

struct EigenInfluenceOptions {
  // Eigenvalues below this are component indicators; their derivative is 0
  // because a positive perturbation keeps the components disconnected.
  double zero_tolerance = 1e-9;
};

// (1 - lambda_k) (sum_i v_i^2 P_it - v_t^2), P = D^{-1} A, for the k-th
// smallest eigenvalue (1-based) of the undirected graph's Laplacian.
// `spectrum` must come from laplacian(g) and hold at least k+1 pairs
// unless k = n. Throws MultiplicityError when lambda_k is not simple.
InfluenceVector if_eigenvalue_symmetric(const Graph& g, const SpectralData& spectrum, int k,
                                        const EigenInfluenceOptions& options = {});

enum class SpectralProperty { FLower, FUpper, FEigengap };
std::string to_string(SpectralProperty p);
SpectralProperty parse_spectral_property(const std::string& name);

// Composite IFs from the eigenvalue IFs; needs K+1 eigenpairs.
InfluenceVector if_composite(const Graph& g, const SpectralData& spectrum, int K,
                             SpectralProperty which, const EigenInfluenceOptions& options = {});

using PropertyFn = std::function<double(const Graph&)>;

// (f(1 + h e_t) - f(1 - h e_t)) / 2h with f evaluated on the perturbed
// adjacency under `scheme`.
double finite_difference_if(const Graph& g, const PropertyFn& property, Scheme scheme, int t,
                            double h);

// Property closures on a (perturbed) adjacency. Spectral ones drop
// zero-degree nodes.
PropertyFn wcut_property(Clustering c);
PropertyFn eigenvalue_property(int k);
PropertyFn spectral_property(SpectralProperty which, int K);

struct AsymmetricEigenCheck {
  int k = 0;
  std::vector<double> derivatives;  // finite differences per node
  double max_abs = 0.0;
};

// Central differences of lambda_k under asymmetric perturbation for every
// node. Throws std::invalid_argument for directed graphs, MultiplicityError
// when lambda_k is not simple, and NumericalError naming the offending
// nodes when any |derivative| exceeds `tolerance`.
AsymmetricEigenCheck if_eigenvalue_asymmetric_is_zero(const Graph& g, int k, double h = 1e-5,
                                                      double tolerance = 1e-6);

}  // namespace graphrob
