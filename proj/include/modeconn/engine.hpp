#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modeconn/graph.hpp"
#include "modeconn/model.hpp"

namespace modeconn {

enum class Which { train, test };
enum class Reduction { mean, sum };

/// Aggregation step of one layer: identity (mlp), the symmetric
/// normalized adjacency (gcn), or the row-normalized one (sage_mean).
struct AggregationOp {
  bool identity = true;
  SparseMatrix A;
  SparseMatrix At;  // adjoint, cached for backprop

  Matrix apply(const Matrix& H) const { return identity ? H : Matrix(A * H); }
  Matrix apply_adjoint(const Matrix& G) const { return identity ? G : Matrix(At * G); }
};

AggregationOp make_aggregation(Arch arch, const GraphDataset& g,
                               const NormalizedAdjacency& a);

/// Full record of one evaluation-mode forward pass. H has L+1 entries:
/// H[0] = X, H[1..L-1] the hidden states, H[L] = Z (the last layer has no
/// nonlinearity). Each row of P sums to 1 within 1e-9.
struct ForwardTrace {
  std::vector<Matrix> H;
  Matrix Z;
  Matrix P;
};

ForwardTrace forward(const ModelParams& p, const GraphDataset& g,
                     const NormalizedAdjacency& a);
ForwardTrace forward(const ModelParams& p, const Matrix& X, const AggregationOp& op);

Matrix softmax_rows(const Matrix& Z);

/// Mean (default) or summed cross-entropy over the masked nodes, in nats.
/// Probabilities are clamped below at 1e-12 before the log.
double masked_cross_entropy(const ForwardTrace& tr, const GraphDataset& g,
                            Which which, Reduction reduction = Reduction::mean);

/// Fraction of masked nodes whose argmax row matches the label; argmax
/// ties break toward the smallest class index.
double masked_accuracy(const ForwardTrace& tr, const GraphDataset& g, Which which);

using Gradients = std::vector<Matrix>;

/// Exact reverse-mode gradients of masked_cross_entropy with respect to
/// every weight matrix.
Gradients backward(const ModelParams& p, const GraphDataset& g,
                   const NormalizedAdjacency& a, Which which,
                   Reduction reduction = Reduction::mean);

/// Loss and gradients at `p` over an explicit node set (evaluation-mode
/// forward; no dropout). The workhorse behind backward, training, and
/// curve fitting.
std::pair<double, Gradients> loss_and_gradients(const ModelParams& p,
                                                const GraphDataset& g,
                                                const AggregationOp& op,
                                                const std::vector<int>& nodes,
                                                Reduction reduction = Reduction::mean);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 200;
  double lr = 0.01;
  enum class Optimizer { sgd, adam };
  Optimizer optimizer = Optimizer::adam;
  AdamParams adam;
  double weight_decay = 5e-4;
  InitSpec init;
  std::uint64_t data_order_seed = 0;   // shuffles minibatch order
  double minibatch_fraction = 0.0;     // 0 = full batch
  double dropout = 0.0;                // in [0,1), applied to layer inputs
  std::vector<int> hidden_dims = {64};
  Activation activation;
  Reduction reduction = Reduction::mean;

  void validate() const;
};

TrainConfig::Optimizer optimizer_from_string(const std::string& s);
std::string to_string(TrainConfig::Optimizer o);

struct ModeMetrics {
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double generalization_gap = 0.0;  // test_loss - train_loss, exactly
};

struct Provenance {
  std::string graph_id;
  TrainConfig config;
  int epochs_run = 0;
  std::uint64_t seed = 0;
};

/// A trained parameter point together with its final metrics.
struct Mode {
  ModelParams params;
  ModeMetrics metrics;
  Provenance provenance;
};

ModeMetrics evaluate_metrics(const ModelParams& p, const GraphDataset& g,
                             const AggregationOp& op);

/// Full-batch (or minibatched) training, deterministic given (cfg, seed).
/// Throws training_diverged with the epoch index if the loss goes
/// non-finite.
Mode train_mode(const GraphDataset& g, const TrainConfig& cfg, Arch arch,
                std::uint64_t seed, const std::string& graph_id = "");

std::vector<int> mask_nodes(const GraphDataset& g, Which which);

}  // namespace modeconn
