#include "modeconn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "modeconn/rng.hpp"

namespace modeconn {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_params: return "invalid_params";
    case Errc::no_edges: return "no_edges";
    case Errc::empty_mask: return "empty_mask";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::training_diverged: return "training_diverged";
    case Errc::range_error: return "range_error";
    case Errc::collinear_modes: return "collinear_modes";
    case Errc::isolated_node: return "isolated_node";
    case Errc::invalid_split: return "invalid_split";
    case Errc::undefined_correlation: return "undefined_correlation";
    case Errc::incompatible_domains: return "incompatible_domains";
    case Errc::parse_error: return "parse_error";
    case Errc::corrupt_checkpoint: return "corrupt_checkpoint";
    case Errc::not_symmetric: return "not_symmetric";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

void GraphDataset::validate() const {
  if (n <= 0) fail(Errc::invalid_params, "graph has no nodes");
  if (X.rows() != n) fail(Errc::invalid_params, "feature row count != n");
  if (X.cols() < 1) fail(Errc::invalid_params, "feature dimension d must be >= 1");
  if (C < 2) fail(Errc::invalid_params, "class count C must be >= 2");
  if (static_cast<int>(Y.size()) != n)
    fail(Errc::invalid_params, "label count != n");
  if (static_cast<int>(train_mask.size()) != n ||
      static_cast<int>(test_mask.size()) != n)
    fail(Errc::invalid_params, "mask length != n");
  for (int i = 0; i < n; ++i) {
    if (Y[i] < 0 || Y[i] >= C)
      fail(Errc::invalid_params, "label out of range at node " + std::to_string(i));
    if (train_mask[i] && test_mask[i])
      fail(Errc::invalid_params, "train and test masks overlap at node " + std::to_string(i));
  }
  std::set<Edge> seen;
  for (const auto& [u, v] : edges) {
    if (u == v) fail(Errc::invalid_params, "self-loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n || v >= n)
      fail(Errc::invalid_params, "edge endpoint out of range");
    Edge key = u < v ? Edge{u, v} : Edge{v, u};
    if (!seen.insert(key).second)
      fail(Errc::invalid_params, "duplicate edge (" + std::to_string(u) + "," +
                                     std::to_string(v) + ")");
  }
  if (!X.allFinite()) fail(Errc::invalid_params, "non-finite feature value");
}

NormalizedAdjacency NormalizedAdjacency::from_triplets(
    int n, const std::vector<Eigen::Triplet<double>>& triplets) {
  NormalizedAdjacency a;
  a.n = n;
  a.mat.resize(n, n);
  a.mat.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

bool NormalizedAdjacency::is_symmetric() const {
  SparseMatrix t = SparseMatrix(mat.transpose());
  for (int k = 0; k < mat.outerSize(); ++k) {
    SparseMatrix::InnerIterator it(mat, k), jt(t, k);
    for (; it && jt; ++it, ++jt) {
      if (it.col() != jt.col() || it.value() != jt.value()) return false;
    }
    if (it || jt) return false;
  }
  return true;
}

static std::vector<int> plain_degrees(const GraphDataset& g) {
  std::vector<int> deg(g.n, 0);
  for (const auto& [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

NormalizedAdjacency normalize_adjacency(const GraphDataset& g, bool add_self_loops) {
  g.validate();
  std::vector<int> deg = plain_degrees(g);
  std::vector<double> inv_sqrt(g.n);
  for (int i = 0; i < g.n; ++i) {
    int di = deg[i] + (add_self_loops ? 1 : 0);
    inv_sqrt[i] = di > 0 ? 1.0 / std::sqrt(static_cast<double>(di)) : 0.0;
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.edges.size() + g.n);
  for (const auto& [u, v] : g.edges) {
    double w = inv_sqrt[u] * inv_sqrt[v];
    trip.emplace_back(u, v, w);
    trip.emplace_back(v, u, w);  // mirrored, same value: bit-exact symmetry
  }
  if (add_self_loops) {
    for (int i = 0; i < g.n; ++i) {
      trip.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
    }
  }
  return NormalizedAdjacency::from_triplets(g.n, trip);
}

SparseMatrix row_normalized_adjacency(const GraphDataset& g) {
  g.validate();
  std::vector<int> deg = plain_degrees(g);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.edges.size() + g.n);
  for (const auto& [u, v] : g.edges) {
    trip.emplace_back(u, v, 1.0 / (deg[u] + 1));
    trip.emplace_back(v, u, 1.0 / (deg[v] + 1));
  }
  for (int i = 0; i < g.n; ++i) trip.emplace_back(i, i, 1.0 / (deg[i] + 1));
  SparseMatrix m(g.n, g.n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double edge_homophily(const GraphDataset& g) {
  if (g.edges.empty()) fail(Errc::no_edges, "homophily undefined on an edgeless graph");
  std::size_t same = 0;
  for (const auto& [u, v] : g.edges) {
    if (g.Y[u] == g.Y[v]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

DegreeStats degree_stats(const GraphDataset& g) {
  std::vector<int> deg = plain_degrees(g);
  DegreeStats s;
  s.d_min = deg.empty() ? 0 : *std::min_element(deg.begin(), deg.end());
  s.d_mean = g.n > 0 ? 2.0 * static_cast<double>(g.edges.size()) / g.n : 0.0;
  return s;
}

double power_iteration_sym(const std::function<void(const Vector&, Vector&)>& matvec,
                           int n, double rel_tol, int max_iter, Vector* out_v) {
  // Deterministic start: fixed-seed stream, so the same operator always
  // walks the same trajectory.
  Rng rng(0x5EED5EEDULL);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_double() + 0.5;
  v.normalize();
  Vector w(n);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    matvec(v, w);
    double next = v.dot(w);  // Rayleigh quotient
    double norm = w.norm();
    if (norm == 0.0) {
      lambda = 0.0;
      break;
    }
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  if (out_v) *out_v = v;
  return lambda;
}

double spectral_norm_sym(const Matrix& M, double rel_tol) {
  if (M.rows() != M.cols()) fail(Errc::dimension_mismatch, "matrix must be square");
  auto matvec = [&M](const Vector& x, Vector& y) { y.noalias() = M * x; };
  return std::abs(power_iteration_sym(matvec, static_cast<int>(M.rows()), rel_tol));
}

double feature_spectral_norm(const Matrix& X) {
  if (X.rows() == 0 || X.cols() == 0)
    fail(Errc::invalid_params, "spectral norm of an empty matrix");
  // Power-iterate on X^T X; ||X||_2 = sqrt(lambda_max).
  auto matvec = [&X](const Vector& v, Vector& y) { y.noalias() = X.transpose() * (X * v); };
  double lambda = power_iteration_sym(matvec, static_cast<int>(X.cols()), 1e-10);
  return std::sqrt(std::max(0.0, lambda));
}

}  // namespace modeconn
