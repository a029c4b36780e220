#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "graphrob/errors.hpp"
#include "graphrob/spectral.hpp"

namespace graphrob {

namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

void check_count(int n, int m) {
  if (m < 1 || m > n) {
    throw std::invalid_argument("requested " + std::to_string(m) + " eigenpairs of a " +
                                std::to_string(n) + "-node Laplacian");
  }
}

// Against the basis and then the locked block, twice. Ending on the locked
// block matters: the basis carries rounding-level locked components that the
// operator amplifies every step.
void project_out(Eigen::VectorXd& v, const Eigen::MatrixXd& basis, Eigen::Index cols,
                 const Eigen::MatrixXd& locked, Eigen::Index nlocked) {
  for (int pass = 0; pass < 2; ++pass) {
    if (cols > 0) v -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * v);
    if (nlocked > 0) v -= locked.leftCols(nlocked) * (locked.leftCols(nlocked).transpose() * v);
  }
}

}  // namespace

SpectralData eigs_smallest_dense(const Eigen::MatrixXd& symmetric, int m) {
  check_count(static_cast<int>(symmetric.rows()), m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver failed");
  SpectralData out;
  out.values = solver.eigenvalues().head(m);
  out.vectors = solver.eigenvectors().leftCols(m);
  fix_signs(out.vectors);
  return out;
}

namespace {

struct RitzSet {
  std::vector<double> theta;  // descending
  Eigen::MatrixXd vectors;
};

// Thick-restart Lanczos for the `want` largest eigenpairs of a symmetric
// operator b restricted to the orthogonal complement of `locked`. Every
// Krylov vector is reorthogonalized twice against the locked block and the
// current basis. Each cycle does a Rayleigh-Ritz step on the explicit
// projection V^T B V, keeps the best `keep` Ritz vectors and continues from
// the last residual direction.
RitzSet thick_restart(const LinearOperator& b, int n, int want, const Eigen::MatrixXd& locked,
                      Eigen::Index nlocked, double tol, long& matvecs, long budget, Rng& rng) {
  const int space = static_cast<int>(std::min<long>(n - nlocked, std::max(2 * want + 20, 40)));
  const int keep = std::min(space - 1, want + std::max(want, 10));
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd V(n, space), W(n, space);

  auto fresh = [&](Eigen::Index cols) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = gauss(rng);
      project_out(v, V, cols, locked, nlocked);
      const double norm = v.norm();
      if (norm > 1e-8) return Eigen::VectorXd(v / norm);
    }
    throw NumericalError("Lanczos could not extend the Krylov basis");
  };

  Eigen::VectorXd v = fresh(0);
  Eigen::Index j = 0;
  for (;;) {
    while (j < space) {
      V.col(j) = v;
      W.col(j) = b(v);
      ++matvecs;
      ++j;
      if (j == space) break;
      Eigen::VectorXd f = W.col(j - 1);
      project_out(f, V, j, locked, nlocked);
      const double beta = f.norm();
      v = beta > 1e-10 * std::max(1.0, W.col(j - 1).norm()) ? Eigen::VectorXd(f / beta) : fresh(j);
    }
    // Continuation vector: the residual direction of the full basis.
    Eigen::VectorXd f = W.col(j - 1);
    project_out(f, V, j, locked, nlocked);

    Eigen::MatrixXd H = V.leftCols(j).transpose() * W.leftCols(j);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::MatrixXd S(j, j);
    std::vector<double> theta(j);
    for (Eigen::Index c = 0; c < j; ++c) {
      S.col(c) = es.eigenvectors().col(j - 1 - c);
      theta[c] = es.eigenvalues()(j - 1 - c);
    }
    const Eigen::MatrixXd Y = V.leftCols(j) * S.leftCols(std::min<Eigen::Index>(j, keep));
    const Eigen::MatrixXd BY = W.leftCols(j) * S.leftCols(std::min<Eigen::Index>(j, keep));
    bool done = j == n - nlocked;
    if (!done) {
      done = true;
      for (int c = 0; c < want && c < j; ++c) {
        if ((BY.col(c) - theta[c] * Y.col(c)).norm() > tol) {
          done = false;
          break;
        }
      }
    }
    if (done) {
      RitzSet out;
      const int count = std::min<int>(want, static_cast<int>(j));
      out.theta.assign(theta.begin(), theta.begin() + count);
      out.vectors = Y.leftCols(count);
      return out;
    }
    if (matvecs >= budget) {
      throw NumericalError("Lanczos did not converge within " + std::to_string(budget) +
                           " matrix-vector products");
    }
    const Eigen::Index k = std::min<Eigen::Index>(j - 1, keep);
    V.leftCols(k) = Y.leftCols(k);
    W.leftCols(k) = BY.leftCols(k);
    j = k;
    project_out(f, V, k, locked, nlocked);
    const double fn = f.norm();
    v = fn > 1e-10 ? Eigen::VectorXd(f / fn) : fresh(k);
  }
}

}  // namespace

SpectralData eigs_smallest_lanczos(const LinearOperator& op, int n, int m, double shift_bound,
                                   const EigenOptions& options) {
  check_count(n, m);
  // Largest eigenvalues of B = shift I - A are the smallest of A.
  const double shift = shift_bound;
  LinearOperator apply_b = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return shift * x - op(x); };
  const double tol = options.tolerance * std::max(1.0, 2.0 * shift_bound);
  const long budget = options.max_matvecs > 0 ? options.max_matvecs : std::max(10L * n, 3000L);
  long matvecs = 0;
  Rng rng(options.seed);

  Eigen::MatrixXd locked(n, m);
  RitzSet found = thick_restart(apply_b, n, m, locked, 0, tol, matvecs, budget, rng);
  locked.leftCols(m) = found.vectors;
  std::vector<double> theta = found.theta;

  // A Krylov space from one start vector sees one copy of each repeated
  // eigenvalue. Probe the complement of the accepted vectors until nothing
  // there beats the weakest accepted pair.
  for (int round = 0; round < m && m < n; ++round) {
    RitzSet probe = thick_restart(apply_b, n, 1, locked, m, tol, matvecs, budget, rng);
    const auto weakest = std::min_element(theta.begin(), theta.end());
    if (!(probe.theta[0] > *weakest + tol)) break;
    const Eigen::Index slot = weakest - theta.begin();
    locked.col(slot) = probe.vectors.col(0);
    *weakest = probe.theta[0];
    // The replaced column is orthogonal to the rest; tidy up rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < m; ++c) {
        if (c == slot) continue;
        locked.col(slot) -= locked.col(c).dot(locked.col(slot)) * locked.col(c);
      }
    }
    locked.col(slot).normalize();
  }

  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return theta[a] > theta[b]; });
  SpectralData out;
  out.values.resize(m);
  out.vectors.resize(n, m);
  for (int i = 0; i < m; ++i) {
    out.vectors.col(i) = locked.col(order[i]);
    // Rayleigh quotient on the original operator.
    out.values(i) = out.vectors.col(i).dot(op(out.vectors.col(i)));
  }
  fix_signs(out.vectors);
  return out;
}

SpectralData eigs_smallest(const Laplacian& lap, int m, const EigenOptions& options) {
  check_count(lap.size(), m);
  if (lap.is_dense()) return eigs_smallest_dense(lap.dense(), m);
  const auto& a = lap.sparse();
  return eigs_smallest_lanczos([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; },
                               lap.size(), m, 2.0, options);
}

double f_lower(const SpectralData& spectrum, int K) {
  if (K < 1 || K + 1 > spectrum.count()) {
    throw std::invalid_argument("need at least K+1 = " + std::to_string(K + 1) +
                                " eigenvalues, have " + std::to_string(spectrum.count()));
  }
  return spectrum.values.head(K).sum();
}

double f_upper(const SpectralData& spectrum, int K) {
  return spectrum.lambda(K + 1) - f_lower(spectrum, K);
}

double f_eigengap(const SpectralData& spectrum, int K) {
  f_lower(spectrum, K);  // validates K
  return spectrum.lambda(K + 1) - spectrum.lambda(K);
}

}  // namespace graphrob
