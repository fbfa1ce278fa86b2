#include <doctest.h>

#include <cmath>

#include "modeconn/csbm.hpp"
#include "modeconn/engine.hpp"
#include "test_support.hpp"

using namespace modeconn;
using testsupport::finite_difference_gradients;
using testsupport::max_gradient_mismatch;
using testsupport::random_graph;
using testsupport::random_model;

TEST_CASE("flatten/unflatten round-trips bit-exactly") {
  Rng rng(1);
  ModelParams p = random_model(Arch::gcn, {5, 7, 3}, Activation::relu(), rng);
  Vector flat = p.flatten();
  ModelParams q = p;
  for (auto& W : q.weights) W.setZero();
  q.assign_from_flat(flat);
  for (int l = 0; l < p.num_layers(); ++l)
    CHECK((p.weights[l] - q.weights[l]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("all-zero weights give uniform softmax") {
  Rng rng(2);
  GraphDataset g = random_graph(6, 4, 3, rng);
  NormalizedAdjacency a = normalize_adjacency(g);
  ModelParams p = random_model(Arch::gcn, {4, 5, 3}, Activation::relu(), rng);
  for (auto& W : p.weights) W.setZero();
  ForwardTrace tr = forward(p, g, a);
  for (int i = 0; i < g.n; ++i)
    for (int c = 0; c < 3; ++c)
      CHECK(tr.P(i, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("edgeless graph with identity weights passes features through") {
  GraphDataset g;
  g.n = 3;
  g.C = 3;
  g.X = Matrix::Random(3, 3);
  g.Y = {0, 1, 2};
  g.train_mask = {1, 1, 0};
  g.test_mask = {0, 0, 1};
  NormalizedAdjacency a = normalize_adjacency(g);  // self-loops only: identity
  ModelParams p;
  p.arch = Arch::gcn;
  p.layer_dims = {3, 3};
  p.weights = {Matrix::Identity(3, 3)};
  ForwardTrace tr = forward(p, g, a);
  CHECK((tr.Z - g.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gcn forward equals a dense reference computation") {
  Rng rng(3);
  GraphDataset g = random_graph(5, 3, 2, rng);
  NormalizedAdjacency a = normalize_adjacency(g);
  ModelParams p = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ForwardTrace tr = forward(p, g, a);

  Matrix A = Matrix(a.mat);
  Matrix H1 = (A * g.X * p.weights[0])
                  .unaryExpr([](double x) { return x > 0 ? x : 0.0; });
  Matrix Z = A * H1 * p.weights[1];
  CHECK((tr.Z - Z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("masked cross-entropy hand cases") {
  GraphDataset g;
  g.n = 3;
  g.C = 2;
  g.X = Matrix::Zero(3, 1);
  g.Y = {0, 1, 0};
  g.train_mask = {1, 1, 1};
  g.test_mask = {0, 0, 0};
  ForwardTrace tr;
  tr.P.resize(3, 2);
  SUBCASE("perfect prediction") {
    tr.P << 1, 0, 0, 1, 1, 0;
    CHECK(masked_cross_entropy(tr, g, Which::train) == 0.0);
  }
  SUBCASE("uniform probabilities give ln 2") {
    tr.P.setConstant(0.5);
    CHECK(masked_cross_entropy(tr, g, Which::train) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("three-node hand case") {
    tr.P << 0.7, 0.3, 0.2, 0.8, 0.5, 0.5;
    double expect = -(std::log(0.7) + std::log(0.8) + std::log(0.5)) / 3.0;
    CHECK(masked_cross_entropy(tr, g, Which::train) ==
          doctest::Approx(expect).epsilon(1e-12));
    CHECK(masked_accuracy(tr, g, Which::train) == 1.0);
  }
  SUBCASE("sum reduction restores the unscaled loss") {
    tr.P << 0.7, 0.3, 0.2, 0.8, 0.5, 0.5;
    double mean = masked_cross_entropy(tr, g, Which::train, Reduction::mean);
    double sum = masked_cross_entropy(tr, g, Which::train, Reduction::sum);
    CHECK(sum == doctest::Approx(3.0 * mean).epsilon(1e-12));
  }
  SUBCASE("empty mask errors") {
    tr.P.setConstant(0.5);
    CHECK_THROWS_AS(masked_cross_entropy(tr, g, Which::test), Error);
    CHECK_THROWS_AS(masked_accuracy(tr, g, Which::test), Error);
  }
}

TEST_CASE("accuracy extremes") {
  GraphDataset g;
  g.n = 3;
  g.C = 2;
  g.X = Matrix::Zero(3, 1);
  g.Y = {0, 1, 0};
  g.train_mask = {1, 1, 1};
  g.test_mask = {0, 0, 0};
  ForwardTrace tr;
  tr.P.resize(3, 2);
  tr.P << 1, 0, 0, 1, 1, 0;  // all correct
  CHECK(masked_accuracy(tr, g, Which::train) == 1.0);
  tr.P << 0, 1, 1, 0, 0, 1;  // all wrong
  CHECK(masked_accuracy(tr, g, Which::train) == 0.0);
}

TEST_CASE("accuracy argmax ties break toward the smaller class") {
  GraphDataset g;
  g.n = 2;
  g.C = 2;
  g.X = Matrix::Zero(2, 1);
  g.Y = {0, 1};
  g.train_mask = {1, 1};
  g.test_mask = {0, 0};
  ForwardTrace tr;
  tr.P.resize(2, 2);
  tr.P.setConstant(0.5);
  CHECK(masked_accuracy(tr, g, Which::train) == 0.5);  // only node 0 right
}

TEST_CASE("softmax rows sum to one for wild logits") {
  Rng rng(4);
  Matrix Z(200, 5);
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
      Z(i, j) = 200.0 * rng.next_gaussian();
  Matrix P = softmax_rows(Z);
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    CHECK(std::abs(P.row(i).sum() - 1.0) < 1e-9);
}

TEST_CASE("zero-weight single-layer mlp gradient has the closed form") {
  Rng rng(5);
  GraphDataset g = random_graph(6, 3, 2, rng);
  NormalizedAdjacency a = normalize_adjacency(g);
  ModelParams p;
  p.arch = Arch::mlp;
  p.layer_dims = {3, 2};
  p.weights = {Matrix::Zero(3, 2)};
  Gradients grads = backward(p, g, a, Which::train);

  std::vector<int> nodes = mask_nodes(g, Which::train);
  Matrix dZ = Matrix::Zero(g.n, 2);
  for (int i : nodes) {
    dZ(i, 0) = 0.5;
    dZ(i, 1) = 0.5;
    dZ(i, g.Y[i]) -= 1.0;
  }
  Matrix expect = g.X.transpose() * dZ / static_cast<double>(nodes.size());
  CHECK((grads[0] - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic gradients match central finite differences") {
  const Activation acts[] = {Activation::relu(), Activation::leaky_relu(0.2),
                             Activation::elu(1.0)};
  const Arch archs[] = {Arch::gcn, Arch::sage_mean, Arch::mlp};
  Rng rng(6);
  for (Arch arch : archs) {
    for (const Activation& act : acts) {
      GraphDataset g = random_graph(6, 3, 2, rng);
      NormalizedAdjacency a = normalize_adjacency(g);
      ModelParams p = random_model(arch, {3, 4, 2}, act, rng);
      Gradients analytic = backward(p, g, a, Which::train);
      Gradients fd = finite_difference_gradients(p, g, a, Which::train);
      CHECK(max_gradient_mismatch(analytic, fd) < 1e-5);
    }
  }
}

TEST_CASE("backward is deterministic across calls") {
  Rng rng(7);
  GraphDataset g = random_graph(5, 3, 2, rng);
  NormalizedAdjacency a = normalize_adjacency(g);
  ModelParams p = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  Gradients g1 = backward(p, g, a, Which::train);
  Gradients g2 = backward(p, g, a, Which::train);
  for (std::size_t l = 0; l < g1.size(); ++l)
    CHECK((g1[l] - g2[l]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lr=0 leaves the initialization untouched") {
  CsbmParams cp;
  cp.n = 60;
  GraphDataset g = generate_csbm(cp, 13);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 5;
  Mode m = train_mode(g, cfg, Arch::gcn, 99);
  ModelParams init = init_params(Arch::gcn, {g.d(), 64, g.C}, cfg.activation,
                                 cfg.init, 99);
  CHECK((m.params.flatten() - init.flatten()).cwiseAbs().maxCoeff() == 0.0);
  AggregationOp op = make_aggregation(Arch::gcn, g, normalize_adjacency(g));
  ModeMetrics initial = evaluate_metrics(init, g, op);
  CHECK(m.metrics.train_loss == initial.train_loss);
  CHECK(m.metrics.test_acc == initial.test_acc);
}

TEST_CASE("an easily separable CSBM instance trains past 0.95 accuracy") {
  CsbmParams cp;
  cp.n = 400;
  cp.p_in = 0.9;
  cp.p_out = 0.1;
  cp.sigma = 0.1;
  GraphDataset g = generate_csbm(cp, 3);
  TrainConfig cfg;
  Mode m = train_mode(g, cfg, Arch::gcn, 1);
  CHECK(m.metrics.train_acc >= 0.95);
  CHECK(m.metrics.generalization_gap ==
        m.metrics.test_loss - m.metrics.train_loss);
}

TEST_CASE("data order is a no-op under full batch") {
  CsbmParams cp;
  cp.n = 80;
  GraphDataset g = generate_csbm(cp, 17);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.data_order_seed = 1;
  Mode a = train_mode(g, cfg, Arch::gcn, 5);
  cfg.data_order_seed = 2;
  Mode b = train_mode(g, cfg, Arch::gcn, 5);
  CHECK((a.params.flatten() - b.params.flatten()).cwiseAbs().maxCoeff() == 0.0);

  // With minibatching the order seed does change the endpoint.
  cfg.minibatch_fraction = 0.5;
  Mode c = train_mode(g, cfg, Arch::gcn, 5);
  cfg.data_order_seed = 1;
  Mode d = train_mode(g, cfg, Arch::gcn, 5);
  CHECK((c.params.flatten() - d.params.flatten()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("training mode twice with one seed is bit-identical") {
  CsbmParams cp;
  cp.n = 60;
  GraphDataset g = generate_csbm(cp, 19);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.dropout = 0.3;
  Mode a = train_mode(g, cfg, Arch::gcn, 11);
  Mode b = train_mode(g, cfg, Arch::gcn, 11);
  CHECK((a.params.flatten() - b.params.flatten()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exploding training reports the diverging epoch") {
  CsbmParams cp;
  cp.n = 60;
  GraphDataset g = generate_csbm(cp, 23);
  TrainConfig cfg;
  cfg.optimizer = TrainConfig::Optimizer::sgd;
  cfg.lr = 1e10;
  cfg.epochs = 50;
  cfg.activation = Activation::leaky_relu(0.5);
  bool threw = false;
  try {
    train_mode(g, cfg, Arch::gcn, 1);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == Errc::training_diverged);
    CHECK(e.index >= 0);
    CHECK(e.index < 50);
  }
  CHECK(threw);
}

TEST_CASE("cross-entropy is sqrt(2)-Lipschitz in the logits") {
  Rng rng(8);
  const int C = 4;
  for (int trial = 0; trial < 10000; ++trial) {
    Matrix z(1, C), zp(1, C);
    for (int c = 0; c < C; ++c) {
      z(0, c) = 3.0 * rng.next_gaussian();
      zp(0, c) = 3.0 * rng.next_gaussian();
    }
    int y = static_cast<int>(rng.next_below(C));
    double la = -std::log(softmax_rows(z)(0, y));
    double lb = -std::log(softmax_rows(zp)(0, y));
    double dist = (z - zp).norm();
    CHECK(std::abs(la - lb) <= std::sqrt(2.0) * dist + 1e-12);
  }
}

TEST_CASE("hidden states obey the layer norm bound") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    GraphDataset g = random_graph(8, 4, 2, rng);
    NormalizedAdjacency a = normalize_adjacency(g);
    ModelParams p = random_model(Arch::gcn, {4, 6, 2}, Activation::relu(), rng);
    ForwardTrace tr = forward(p, g, a);
    double a_norm = spectral_norm_sym(Matrix(a.mat));
    CHECK(a_norm <= 1.0 + 1e-9);
    double bound = g.X.norm();
    for (const auto& W : p.weights) bound *= a_norm * feature_spectral_norm(W);
    CHECK(tr.H.back().norm() <= bound + 1e-9);
  }
}
