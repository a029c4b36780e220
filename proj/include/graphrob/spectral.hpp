#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "graphrob/graph.hpp"
#include "graphrob/rng.hpp"

namespace graphrob {

// Smallest eigenpairs of a Laplacian, ascending. Column k of `vectors`
// belongs to values[k]. Each eigenvector's largest-magnitude entry is
// positive.
struct SpectralData {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int count() const { return static_cast<int>(values.size()); }
  // 1-based access: lambda(1) is the smallest eigenvalue.
  double lambda(int k) const { return values(k - 1); }
};

struct EigenOptions {
  double tolerance = 1e-10;
  // Matrix-vector product budget for the iterative path; 0 means max(10 n, 3000).
  long max_matvecs = 0;
  std::uint64_t seed = 0x5EED;
};

// Dense symmetric solve when the Laplacian is stored densely, deflated
// Lanczos with full reorthogonalization otherwise.
SpectralData eigs_smallest(const Laplacian& lap, int m, const EigenOptions& options = {});

SpectralData eigs_smallest_dense(const Eigen::MatrixXd& symmetric, int m);

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// m smallest eigenpairs of a symmetric operator whose spectrum lies in
// [-shift_bound, shift_bound]. Throws NumericalError when the budget runs out.
SpectralData eigs_smallest_lanczos(const LinearOperator& op, int n, int m, double shift_bound,
                                   const EigenOptions& options = {});

double f_lower(const SpectralData& spectrum, int K);     // sum of the K smallest
double f_upper(const SpectralData& spectrum, int K);     // lambda_{K+1} - f_lower
double f_eigengap(const SpectralData& spectrum, int K);  // lambda_{K+1} - lambda_K

class Clustering {
 public:
  Clustering() = default;
  // labels in [0, K), every cluster non-empty.
  Clustering(std::vector<int> labels, int K);
  // Relabels arbitrary ids to 0..K-1 in order of first appearance.
  static Clustering compact(const std::vector<int>& raw_labels);

  int size() const { return static_cast<int>(labels_.size()); }
  int num_clusters() const { return K_; }
  int label(int i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  std::vector<std::vector<int>> members() const;
  // Labels restricted to `nodes`, compacted.
  Clustering restrict_to(const std::vector<int>& nodes) const;

  bool operator==(const Clustering& other) const = default;

 private:
  std::vector<int> labels_;
  int K_ = 0;
};

struct KMeansOptions {
  int restarts = 20;
  int max_iterations = 300;
  // Empty-cluster reseeds allowed per restart before the restart is abandoned.
  int max_reseeds = 10;
};

// k-means on the rows of `points`: k-means++ seeding, Lloyd iterations,
// best inertia over restarts (ties keep the earliest restart). Restart seeds
// are drawn from `rng` up front. Labels are canonical (first appearance).
Clustering kmeans(const Eigen::MatrixXd& points, int K, Rng& rng, const KMeansOptions& options = {});

// K smallest eigenvectors, rows scaled to unit length (zero rows kept), then
// k-means. Labels refer to the Laplacian's kept nodes.
Clustering spectral_clustering(const Laplacian& lap, int K, Rng& rng,
                               const KMeansOptions& options = {});

// Minimum over label bijections of the fraction of disagreeing nodes.
double misclassification(const Clustering& a, const Clustering& b);

// Optimal assignment for a square cost matrix; returns column per row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

}  // namespace graphrob
