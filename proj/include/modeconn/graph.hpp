#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "modeconn/error.hpp"

namespace modeconn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Edge = std::pair<int, int>;

/// Node-classification dataset: undirected simple graph, dense real
/// features, one label per node, disjoint train/test masks.
struct GraphDataset {
  int n = 0;
  std::vector<Edge> edges;     // undirected pairs, u < v, no duplicates
  Matrix X;                    // n x d
  std::vector<int> Y;          // labels in {0..C-1}
  std::vector<std::uint8_t> train_mask;
  std::vector<std::uint8_t> test_mask;
  int C = 0;

  int d() const { return static_cast<int>(X.cols()); }

  /// Throws invalid_params when any structural invariant is broken.
  void validate() const;
};

/// Symmetric normalized aggregation operator. Entries live in [0,1];
/// off-diagonal values are constructed once and mirrored, so symmetry is
/// bit-exact.
struct NormalizedAdjacency {
  int n = 0;
  SparseMatrix mat;  // n x n

  static NormalizedAdjacency from_triplets(
      int n, const std::vector<Eigen::Triplet<double>>& triplets);

  bool is_symmetric() const;
};

/// Renormalized operator D~^{-1/2} (A + I) D~^{-1/2} with D~ the degree
/// matrix of A + I. `add_self_loops = false` drops the +I (zero-degree
/// nodes then get an all-zero row).
NormalizedAdjacency normalize_adjacency(const GraphDataset& g,
                                        bool add_self_loops = true);

/// Row-normalized D^{-1}(A + I): the mean-aggregation operator.
SparseMatrix row_normalized_adjacency(const GraphDataset& g);

/// Fraction of edges whose endpoints share a label. Errors on an
/// edgeless graph.
double edge_homophily(const GraphDataset& g);

struct DegreeStats {
  int d_min = 0;
  double d_mean = 0.0;
};

/// Min and mean degree of A, self-loops excluded.
DegreeStats degree_stats(const GraphDataset& g);

/// Largest singular value of X: power iteration on X^T X, relative
/// tolerance 1e-10.
double feature_spectral_norm(const Matrix& X);

/// Power iteration for a symmetric operator given as a matvec. Returns
/// the dominant eigenvalue (largest magnitude, signed) and writes the
/// corresponding unit eigenvector into `v` when non-null. Deterministic:
/// the start vector comes from a fixed-seed stream.
double power_iteration_sym(const std::function<void(const Vector&, Vector&)>& matvec,
                           int n, double rel_tol = 1e-10, int max_iter = 20000,
                           Vector* v = nullptr);

/// Spectral norm (largest |eigenvalue|) of a dense symmetric matrix via
/// power iteration.
double spectral_norm_sym(const Matrix& M, double rel_tol = 1e-10);

}  // namespace modeconn
