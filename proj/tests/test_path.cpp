#include <doctest.h>

#include <cmath>

#include "modeconn/csbm.hpp"
#include "modeconn/path.hpp"
#include "test_support.hpp"

using namespace modeconn;
using testsupport::random_graph;
using testsupport::random_model;

namespace {

PathProfile profile_from_losses(std::vector<double> alphas,
                                std::vector<double> losses) {
  PathProfile p;
  p.alphas = std::move(alphas);
  p.train_loss = losses;
  p.test_loss = losses;
  p.train_acc.assign(losses.size(), 1.0);
  p.test_acc.assign(losses.size(), 1.0);
  return p;
}

}  // namespace

TEST_CASE("path endpoints are bit-identical for both kinds") {
  Rng rng(31);
  ModelParams a = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams b = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams c = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  for (const PathSpec& spec :
       {PathSpec::linear(a, b), PathSpec::bezier(a, b, c)}) {
    CHECK((point_on_path(spec, 0.0).flatten() - a.flatten()).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((point_on_path(spec, 1.0).flatten() - b.flatten()).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("midpoint combinations") {
  Rng rng(32);
  ModelParams a = random_model(Arch::mlp, {2, 3, 2}, Activation::relu(), rng);
  ModelParams b = random_model(Arch::mlp, {2, 3, 2}, Activation::relu(), rng);
  ModelParams c = random_model(Arch::mlp, {2, 3, 2}, Activation::relu(), rng);
  Vector mid = point_on_path(PathSpec::linear(a, b), 0.5).flatten();
  CHECK((mid - 0.5 * (a.flatten() + b.flatten())).cwiseAbs().maxCoeff() < 1e-15);
  Vector bez = point_on_path(PathSpec::bezier(a, b, c), 0.5).flatten();
  Vector expect = 0.25 * a.flatten() + 0.5 * c.flatten() + 0.25 * b.flatten();
  CHECK((bez - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("alpha outside [0,1] is a range error") {
  Rng rng(33);
  ModelParams a = random_model(Arch::mlp, {2, 2}, Activation::relu(), rng);
  PathSpec spec = PathSpec::linear(a, a);
  CHECK_THROWS_AS(point_on_path(spec, -0.01), Error);
  CHECK_THROWS_AS(point_on_path(spec, 1.01), Error);
  try {
    point_on_path(spec, 2.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::range_error);
  }
}

TEST_CASE("evaluate_path on identical endpoints is constant") {
  Rng rng(34);
  GraphDataset g = random_graph(8, 3, 2, rng);
  NormalizedAdjacency adj = normalize_adjacency(g);
  ModelParams a = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  PathProfile prof = evaluate_path(PathSpec::linear(a, a), g, adj, 7);
  for (double v : prof.train_loss) CHECK(v == prof.train_loss[0]);
  for (double v : prof.test_acc) CHECK(v == prof.test_acc[0]);
}

TEST_CASE("grid_size=3 equals manual evaluation at 0, 1/2, 1") {
  Rng rng(35);
  GraphDataset g = random_graph(8, 3, 2, rng);
  NormalizedAdjacency adj = normalize_adjacency(g);
  ModelParams a = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams b = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  PathSpec spec = PathSpec::linear(a, b);
  PathProfile prof = evaluate_path(spec, g, adj, 3);
  REQUIRE(prof.alphas.size() == 3);
  CHECK(prof.alphas[1] == 0.5);
  for (int i = 0; i < 3; ++i) {
    ModelParams p = point_on_path(spec, prof.alphas[i]);
    double loss = masked_cross_entropy(forward(p, g, adj), g, Which::train);
    CHECK(prof.train_loss[i] == loss);
  }
  CHECK_THROWS_AS(evaluate_path(spec, g, adj, 2), Error);
}

TEST_CASE("profile endpoints reproduce the trained mode metrics") {
  CsbmParams cp;
  cp.n = 80;
  GraphDataset g = generate_csbm(cp, 41);
  NormalizedAdjacency adj = normalize_adjacency(g);
  TrainConfig cfg;
  cfg.epochs = 40;
  Mode ma = train_mode(g, cfg, Arch::gcn, 1);
  Mode mb = train_mode(g, cfg, Arch::gcn, 2);
  PathProfile prof =
      evaluate_path(PathSpec::linear(ma.params, mb.params), g, adj, 5);
  CHECK(std::abs(prof.train_loss.front() - ma.metrics.train_loss) < 1e-10);
  CHECK(std::abs(prof.test_loss.back() - mb.metrics.test_loss) < 1e-10);
  CHECK(std::abs(prof.train_acc.front() - ma.metrics.train_acc) < 1e-10);
}

TEST_CASE("loss_barrier hand cases") {
  SUBCASE("constant profile") {
    auto prof = profile_from_losses({0, 0.5, 1}, {2, 2, 2});
    BarrierReport rep = loss_barrier(prof, Which::train);
    CHECK(rep.loss_barrier == 0.0);
    CHECK(rep.acc_barrier == 0.0);
  }
  SUBCASE("bump profile 1,3,2") {
    auto prof = profile_from_losses({0, 0.5, 1}, {1, 3, 2});
    BarrierReport rep = loss_barrier(prof, Which::train);
    CHECK(rep.loss_barrier == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(rep.argmax_alpha == 0.5);
    CHECK(rep.deviation[1] == doctest::Approx(1.5).epsilon(1e-15));
  }
  SUBCASE("convex-along-path profile attains zero at the endpoints") {
    auto prof = profile_from_losses({0, 0.5, 1}, {1, 1.2, 2});
    BarrierReport rep = loss_barrier(prof, Which::train);
    CHECK(rep.loss_barrier == 0.0);
    CHECK(rep.deviation[1] == doctest::Approx(-0.3).epsilon(1e-12));
  }
}

TEST_CASE("barrier is nonnegative and swap-symmetric on random profiles") {
  Rng rng(36);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 5 + static_cast<int>(rng.next_below(20));
    std::vector<double> alphas, losses;
    for (int i = 0; i < m; ++i) {
      alphas.push_back(static_cast<double>(i) / (m - 1));
      losses.push_back(std::abs(rng.next_gaussian()) * 3.0);
    }
    auto prof = profile_from_losses(alphas, losses);
    BarrierReport rep = loss_barrier(prof, Which::train);
    CHECK(rep.loss_barrier >= 0.0);

    // Reverse the curve: the barrier of the endpoint-swapped path.
    auto rev = prof;
    std::reverse(rev.train_loss.begin(), rev.train_loss.end());
    std::reverse(rev.test_loss.begin(), rev.test_loss.end());
    std::reverse(rev.train_acc.begin(), rev.train_acc.end());
    std::reverse(rev.test_acc.begin(), rev.test_acc.end());
    BarrierReport swapped = loss_barrier(rev, Which::train);
    CHECK(std::abs(rep.loss_barrier - swapped.loss_barrier) < 1e-12);
  }
}

TEST_CASE("bezier with midpoint control traces the segment") {
  Rng rng(37);
  ModelParams a = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams b = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams mid = a;
  mid.assign_from_flat(0.5 * (a.flatten() + b.flatten()));
  PathSpec bez = PathSpec::bezier(a, b, mid);
  PathSpec lin = PathSpec::linear(a, b);
  // Every Bezier sample must sit on the segment: compare against a
  // refined set of linear samples.
  for (int i = 0; i <= 16; ++i) {
    Vector p = point_on_path(bez, i / 16.0).flatten();
    double best = 1e300;
    for (int j = 0; j <= 256; ++j) {
      double d = (p - point_on_path(lin, j / 256.0).flatten()).norm();
      best = std::min(best, d);
    }
    CHECK(best < 1e-9);
  }
}

TEST_CASE("zero bezier steps keep the control at the midpoint") {
  Rng rng(38);
  GraphDataset g = random_graph(8, 3, 2, rng);
  NormalizedAdjacency adj = normalize_adjacency(g);
  ModelParams a = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams b = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  TrainConfig cfg;
  cfg.epochs = 0;
  ModelParams control = train_bezier_control(a, b, g, adj, cfg, 1);
  Vector mid = 0.5 * (a.flatten() + b.flatten());
  CHECK((control.flatten() - mid).cwiseAbs().maxCoeff() == 0.0);

  // The resulting curve coincides with the segment, so the profiles match.
  PathProfile bez = evaluate_path(PathSpec::bezier(a, b, control), g, adj, 9);
  PathProfile lin = evaluate_path(PathSpec::linear(a, b), g, adj, 9);
  for (std::size_t i = 0; i < bez.alphas.size(); ++i)
    CHECK(std::abs(bez.train_loss[i] - lin.train_loss[i]) < 1e-9);
}

TEST_CASE("training the control on a flat pair keeps the barrier near zero") {
  CsbmParams cp;
  cp.n = 80;
  GraphDataset g = generate_csbm(cp, 43);
  NormalizedAdjacency adj = normalize_adjacency(g);
  TrainConfig cfg;
  cfg.epochs = 60;
  Mode m = train_mode(g, cfg, Arch::gcn, 9);
  TrainConfig bez_cfg;
  bez_cfg.epochs = 50;
  ModelParams control =
      train_bezier_control(m.params, m.params, g, adj, bez_cfg, 2);
  PathProfile prof =
      evaluate_path(PathSpec::bezier(m.params, m.params, control), g, adj, 9);
  BarrierReport rep = loss_barrier(prof, Which::train);
  CHECK(rep.loss_barrier < 0.05);
}

TEST_CASE("trained bezier beats the linear path when a barrier exists") {
  CsbmParams cp;
  cp.n = 300;
  cp.d = 16;
  cp.p_in = 0.11;
  cp.p_out = 0.09;
  cp.sigma = 1.5;
  GraphDataset g = generate_csbm(cp, 2);
  NormalizedAdjacency adj = normalize_adjacency(g);
  TrainConfig cfg;
  cfg.epochs = 200;
  Mode ma = train_mode(g, cfg, Arch::gcn, 100);
  Mode mb = train_mode(g, cfg, Arch::gcn, 200);
  PathProfile lin = evaluate_path(PathSpec::linear(ma.params, mb.params), g, adj);
  double linear_barrier = loss_barrier(lin, Which::train).loss_barrier;
  REQUIRE(linear_barrier > 0.1);
  TrainConfig bez_cfg;
  bez_cfg.epochs = 200;
  ModelParams control =
      train_bezier_control(ma.params, mb.params, g, adj, bez_cfg, 7);
  PathProfile bez =
      evaluate_path(PathSpec::bezier(ma.params, mb.params, control), g, adj);
  double bezier_barrier = loss_barrier(bez, Which::train).loss_barrier;
  CHECK(bezier_barrier < linear_barrier);
}

TEST_CASE("landscape plane anchors and grid") {
  Rng rng(39);
  GraphDataset g = random_graph(8, 3, 2, rng);
  NormalizedAdjacency adj = normalize_adjacency(g);
  ModelParams a = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  ModelParams b = random_model(Arch::gcn, {3, 4, 2}, Activation::relu(), rng);
  // Third anchor above the segment midpoint, so its x-projection stays
  // inside [0, |b-a|] and theta_a sits at the grid corner.
  ModelParams c = a;
  {
    Vector off = 0.5 * (a.flatten() + b.flatten());
    for (Eigen::Index i = 0; i < off.size(); ++i)
      off[i] += 0.1 * rng.next_gaussian();
    c.assign_from_flat(off);
  }

  SUBCASE("grid point at theta_a reproduces its loss") {
    // extent=1 puts the anchors on the grid boundary, so (0,0) is a node.
    LandscapeGrid grid = landscape_plane(a, b, c, g, adj, 3, 3, 1.0);
    double loss_a = masked_cross_entropy(forward(a, g, adj), g, Which::train);
    bool found = false;
    for (std::size_t i = 0; i < grid.ys.size(); ++i)
      for (std::size_t j = 0; j < grid.xs.size(); ++j)
        if (grid.xs[j] == 0.0 && grid.ys[i] == 0.0) {
          found = true;
          CHECK(std::abs(grid.loss(i, j) - loss_a) < 1e-10);
        }
    CHECK(found);
  }

  SUBCASE("collinear anchors are rejected") {
    ModelParams mid = a;
    mid.assign_from_flat(0.5 * (a.flatten() + b.flatten()));
    CHECK_THROWS_AS(landscape_plane(a, b, mid, g, adj, 3, 3), Error);
    try {
      landscape_plane(a, b, mid, g, adj, 3, 3);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::collinear_modes);
    }
  }

  SUBCASE("3x3 grid equals nine independent forward evaluations") {
    LandscapeGrid grid = landscape_plane(a, b, c, g, adj, 3, 3, 1.2);
    // Recompute the frame independently.
    Vector fa = a.flatten();
    Vector u = b.flatten() - fa;
    Vector eu = u / u.norm();
    Vector w = c.flatten() - fa;
    Vector v = w - w.dot(eu) * eu;
    Vector ev = v / v.norm();
    ModelParams probe = a;
    for (std::size_t i = 0; i < grid.ys.size(); ++i) {
      for (std::size_t j = 0; j < grid.xs.size(); ++j) {
        probe.assign_from_flat(fa + grid.xs[j] * eu + grid.ys[i] * ev);
        double loss =
            masked_cross_entropy(forward(probe, g, adj), g, Which::train);
        CHECK(std::abs(grid.loss(i, j) - loss) < 1e-12);
      }
    }
  }
}
