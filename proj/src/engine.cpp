#include "modeconn/engine.hpp"

#include <algorithm>
#include <cmath>

#include "modeconn/rng.hpp"

namespace modeconn {

AggregationOp make_aggregation(Arch arch, const GraphDataset& g,
                               const NormalizedAdjacency& a) {
  AggregationOp op;
  switch (arch) {
    case Arch::mlp:
      op.identity = true;
      break;
    case Arch::gcn:
      if (a.n != g.n) fail(Errc::dimension_mismatch, "adjacency size != graph size");
      op.identity = false;
      op.A = a.mat;
      op.At = a.mat;  // symmetric operator
      break;
    case Arch::sage_mean:
      op.identity = false;
      op.A = row_normalized_adjacency(g);
      op.At = SparseMatrix(op.A.transpose());
      break;
  }
  return op;
}

Matrix softmax_rows(const Matrix& Z) {
  Matrix P(Z.rows(), Z.cols());
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    double m = Z.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < Z.cols(); ++c) {
      double e = std::exp(Z(i, c) - m);
      P(i, c) = e;
      sum += e;
    }
    P.row(i) /= sum;
  }
  return P;
}

ForwardTrace forward(const ModelParams& p, const Matrix& X, const AggregationOp& op) {
  p.validate();
  if (p.layer_dims.front() != X.cols())
    fail(Errc::dimension_mismatch, "feature dimension does not match layer_dims[0]");
  const int L = p.num_layers();
  ForwardTrace tr;
  tr.H.reserve(L + 1);
  tr.H.push_back(X);
  for (int l = 0; l < L; ++l) {
    Matrix S = op.apply(tr.H.back()) * p.weights[l];
    if (l < L - 1) {
      tr.H.push_back(S.unaryExpr([&p](double x) { return p.activation.apply(x); }));
    } else {
      tr.Z = std::move(S);
      tr.H.push_back(tr.Z);  // H[L] = Z: the head has no nonlinearity
    }
  }
  tr.P = softmax_rows(tr.Z);
  return tr;
}

ForwardTrace forward(const ModelParams& p, const GraphDataset& g,
                     const NormalizedAdjacency& a) {
  g.validate();
  if (p.layer_dims.back() != g.C)
    fail(Errc::dimension_mismatch, "output dimension does not match class count");
  return forward(p, g.X, make_aggregation(p.arch, g, a));
}

std::vector<int> mask_nodes(const GraphDataset& g, Which which) {
  const auto& mask = which == Which::train ? g.train_mask : g.test_mask;
  std::vector<int> nodes;
  for (int i = 0; i < g.n; ++i)
    if (mask[i]) nodes.push_back(i);
  return nodes;
}

static constexpr double kProbFloor = 1e-12;

static double cross_entropy_over(const Matrix& P, const std::vector<int>& Y,
                                 const std::vector<int>& nodes, Reduction reduction) {
  if (nodes.empty()) fail(Errc::empty_mask, "cross-entropy over an empty mask");
  double total = 0.0;
  for (int i : nodes) {
    total -= std::log(std::max(P(i, Y[i]), kProbFloor));
  }
  return reduction == Reduction::mean ? total / static_cast<double>(nodes.size())
                                      : total;
}

double masked_cross_entropy(const ForwardTrace& tr, const GraphDataset& g,
                            Which which, Reduction reduction) {
  return cross_entropy_over(tr.P, g.Y, mask_nodes(g, which), reduction);
}

double masked_accuracy(const ForwardTrace& tr, const GraphDataset& g, Which which) {
  std::vector<int> nodes = mask_nodes(g, which);
  if (nodes.empty()) fail(Errc::empty_mask, "accuracy over an empty mask");
  int correct = 0;
  for (int i : nodes) {
    int best = 0;
    for (int c = 1; c < tr.P.cols(); ++c) {
      if (tr.P(i, c) > tr.P(i, best)) best = c;  // ties keep the smaller index
    }
    if (best == g.Y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

// Shared forward/backward core. dropout_masks, when present, holds one
// inverted-dropout mask per layer input (entries 0 or 1/(1-p)).
static std::pair<double, Gradients> reverse_pass(
    const ModelParams& p, const Matrix& X, const AggregationOp& op,
    const std::vector<int>& Y, const std::vector<int>& nodes, Reduction reduction,
    const std::vector<Matrix>* dropout_masks) {
  p.validate();
  if (nodes.empty()) fail(Errc::empty_mask, "gradient over an empty mask");
  const int L = p.num_layers();

  std::vector<Matrix> inputs(L);   // layer inputs after dropout
  std::vector<Matrix> agg_in(L);   // aggregated layer inputs
  std::vector<Matrix> preact(L);   // pre-activations
  Matrix H = X;
  for (int l = 0; l < L; ++l) {
    if (dropout_masks) H = H.cwiseProduct((*dropout_masks)[l]);
    inputs[l] = H;
    agg_in[l] = op.apply(inputs[l]);
    preact[l] = agg_in[l] * p.weights[l];
    if (l < L - 1)
      H = preact[l].unaryExpr([&p](double x) { return p.activation.apply(x); });
  }
  const Matrix& Z = preact[L - 1];
  Matrix P = softmax_rows(Z);
  double loss = cross_entropy_over(P, Y, nodes, reduction);

  // dL/dZ = (P - Y) on masked rows (CE Jacobian), 0 elsewhere.
  Matrix dZ = Matrix::Zero(Z.rows(), Z.cols());
  double scale =
      reduction == Reduction::mean ? 1.0 / static_cast<double>(nodes.size()) : 1.0;
  for (int i : nodes) {
    dZ.row(i) = P.row(i) * scale;
    dZ(i, Y[i]) -= scale;
  }

  Gradients grads(L);
  Matrix dS = std::move(dZ);  // the head is linear: dS_{L-1} = dZ
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // dH_{l+1} arrives in dS; multiply by the activation derivative.
      dS = dS.cwiseProduct(
          preact[l].unaryExpr([&p](double x) { return p.activation.deriv(x); }));
    }
    grads[l].noalias() = agg_in[l].transpose() * dS;
    if (l > 0) {
      Matrix dH = op.apply_adjoint(dS * p.weights[l].transpose());
      if (dropout_masks) dH = dH.cwiseProduct((*dropout_masks)[l]);
      dS = std::move(dH);
    }
  }
  return {loss, std::move(grads)};
}

std::pair<double, Gradients> loss_and_gradients(const ModelParams& p,
                                                const GraphDataset& g,
                                                const AggregationOp& op,
                                                const std::vector<int>& nodes,
                                                Reduction reduction) {
  return reverse_pass(p, g.X, op, g.Y, nodes, reduction, nullptr);
}

Gradients backward(const ModelParams& p, const GraphDataset& g,
                   const NormalizedAdjacency& a, Which which, Reduction reduction) {
  AggregationOp op = make_aggregation(p.arch, g, a);
  return reverse_pass(p, g.X, op, g.Y, mask_nodes(g, which), reduction, nullptr)
      .second;
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(Errc::invalid_params, "epochs must be >= 1");
  if (lr < 0.0) fail(Errc::invalid_params, "learning rate must be >= 0");
  if (weight_decay < 0.0) fail(Errc::invalid_params, "weight decay must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0)
    fail(Errc::invalid_params, "dropout must lie in [0,1)");
  if (minibatch_fraction < 0.0 || minibatch_fraction > 1.0)
    fail(Errc::invalid_params, "minibatch fraction must lie in [0,1]");
  for (int h : hidden_dims)
    if (h < 1) fail(Errc::invalid_params, "hidden dims must be >= 1");
}

TrainConfig::Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return TrainConfig::Optimizer::sgd;
  if (s == "adam") return TrainConfig::Optimizer::adam;
  fail(Errc::invalid_params, "unknown optimizer '" + s + "'");
}

std::string to_string(TrainConfig::Optimizer o) {
  return o == TrainConfig::Optimizer::sgd ? "sgd" : "adam";
}

ModeMetrics evaluate_metrics(const ModelParams& p, const GraphDataset& g,
                             const AggregationOp& op) {
  ForwardTrace tr = forward(p, g.X, op);
  ModeMetrics m;
  m.train_loss = cross_entropy_over(tr.P, g.Y, mask_nodes(g, Which::train),
                                    Reduction::mean);
  m.test_loss =
      cross_entropy_over(tr.P, g.Y, mask_nodes(g, Which::test), Reduction::mean);
  m.train_acc = masked_accuracy(tr, g, Which::train);
  m.test_acc = masked_accuracy(tr, g, Which::test);
  m.generalization_gap = m.test_loss - m.train_loss;
  return m;
}

namespace {

struct OptimizerState {
  std::vector<Matrix> m, v;
  int t = 0;

  void init_like(const ModelParams& p) {
    for (const auto& W : p.weights) {
      m.push_back(Matrix::Zero(W.rows(), W.cols()));
      v.push_back(Matrix::Zero(W.rows(), W.cols()));
    }
  }

  void step(ModelParams& p, const Gradients& grads, const TrainConfig& cfg) {
    ++t;
    for (int l = 0; l < p.num_layers(); ++l) {
      Matrix g = grads[l] + cfg.weight_decay * p.weights[l];
      if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
        p.weights[l] -= cfg.lr * g;
      } else {
        const auto& a = cfg.adam;
        m[l] = a.beta1 * m[l] + (1.0 - a.beta1) * g;
        v[l] = a.beta2 * v[l] + (1.0 - a.beta2) * g.cwiseProduct(g);
        double bc1 = 1.0 - std::pow(a.beta1, t);
        double bc2 = 1.0 - std::pow(a.beta2, t);
        p.weights[l] -=
            (cfg.lr / bc1) *
            (m[l].array() / ((v[l] / bc2).cwiseSqrt().array() + a.eps)).matrix();
      }
    }
  }
};

std::vector<Matrix> draw_dropout_masks(const ModelParams& p, Eigen::Index n,
                                       double rate, Rng& rng) {
  std::vector<Matrix> masks;
  double keep = 1.0 - rate;
  for (int l = 0; l < p.num_layers(); ++l) {
    Matrix M(n, p.layer_dims[l]);
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        M(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    masks.push_back(std::move(M));
  }
  return masks;
}

}  // namespace

Mode train_mode(const GraphDataset& g, const TrainConfig& cfg, Arch arch,
                std::uint64_t seed, const std::string& graph_id) {
  cfg.validate();
  g.validate();
  std::vector<int> dims;
  dims.push_back(g.d());
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(g.C);

  ModelParams params = init_params(arch, dims, cfg.activation, cfg.init, seed);
  NormalizedAdjacency adj = normalize_adjacency(g);
  AggregationOp op = make_aggregation(arch, g, adj);

  std::vector<int> train_nodes = mask_nodes(g, Which::train);
  if (train_nodes.empty()) fail(Errc::empty_mask, "no training nodes");

  OptimizerState opt;
  opt.init_like(params);
  Rng order_rng(seed ^ Rng::mix(cfg.data_order_seed), rng_stream::data_order);
  Rng dropout_rng(seed, rng_stream::dropout);

  const bool minibatched =
      cfg.minibatch_fraction > 0.0 && cfg.minibatch_fraction < 1.0;
  const std::size_t batch_size =
      minibatched ? std::max<std::size_t>(
                        1, static_cast<std::size_t>(std::llround(
                               cfg.minibatch_fraction * train_nodes.size())))
                  : train_nodes.size();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = train_nodes;
    if (minibatched) order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      std::size_t stop = std::min(order.size(), start + batch_size);
      std::vector<int> batch(order.begin() + start, order.begin() + stop);
      std::vector<Matrix> masks;
      const std::vector<Matrix>* mask_ptr = nullptr;
      if (cfg.dropout > 0.0) {
        masks = draw_dropout_masks(params, g.n, cfg.dropout, dropout_rng);
        mask_ptr = &masks;
      }
      auto [loss, grads] =
          reverse_pass(params, g.X, op, g.Y, batch, cfg.reduction, mask_ptr);
      if (!std::isfinite(loss))
        fail_at(Errc::training_diverged,
                "loss became non-finite at epoch " + std::to_string(epoch), epoch);
      opt.step(params, grads, cfg);
    }
  }

  Mode mode;
  mode.params = std::move(params);
  mode.metrics = evaluate_metrics(mode.params, g, op);
  mode.provenance = {graph_id, cfg, cfg.epochs, seed};
  return mode;
}

}  // namespace modeconn
