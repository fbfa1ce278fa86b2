#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <set>

#include "modeconn/csbm.hpp"

using namespace modeconn;

TEST_CASE("p_in=1 p_out=0 gives two disjoint cliques") {
  CsbmParams p;
  p.n = 6;
  p.d = 2;
  p.p_in = 1.0;
  p.p_out = 0.0;
  GraphDataset g = generate_csbm(p, 5);
  CHECK(g.edges.size() == 6);  // 2 * C(3,2)
  for (const auto& [u, v] : g.edges) CHECK(g.Y[u] == g.Y[v]);
}

TEST_CASE("sigma=0 puts every feature row exactly on its class mean") {
  CsbmParams p;
  p.n = 8;
  p.d = 3;
  p.sigma = 0.0;
  p.mu_gap = 2.0;
  GraphDataset g = generate_csbm(p, 9);
  for (int i = 0; i < g.n; ++i) {
    CHECK(g.X(i, 0) == (g.Y[i] == 0 ? -1.0 : 1.0));
    CHECK(g.X(i, 1) == 0.0);
    CHECK(g.X(i, 2) == 0.0);
  }
}

TEST_CASE("intra-class degree concentrates at (n/2-1) p_in") {
  CsbmParams p;
  p.n = 2000;
  p.p_in = 0.8;
  p.p_out = 0.2;
  // Total intra-class edges are Binomial(2*C(1000,2), 0.8); the mean over
  // 20 seeds must sit within the single-draw 3-sigma band.
  const double pairs = 2.0 * (1000.0 * 999.0 / 2.0);
  const double expect = pairs * 0.8;
  const double sd = std::sqrt(pairs * 0.8 * 0.2);
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GraphDataset g = generate_csbm(p, seed);
    double intra = 0.0;
    for (const auto& [u, v] : g.edges)
      if (g.Y[u] == g.Y[v]) intra += 1.0;
    total += intra;
  }
  CHECK(std::abs(total / 20.0 - expect) < 3.0 * sd);
}

TEST_CASE("expected_spectrum closed forms") {
  SUBCASE("p_in == p_out boundary") {
    CsbmParams p;
    p.p_in = p.p_out = 0.3;
    p.warn_boundary = true;
    auto s = expected_spectrum(p);
    CHECK(s.lambda2 == 0.0);
    CHECK(s.delta == 1.0);
  }
  SUBCASE("p_out == 0 disconnected communities") {
    CsbmParams p;
    p.p_in = 0.5;
    p.p_out = 0.0;
    auto s = expected_spectrum(p);
    CHECK(s.lambda2 == 1.0);
    CHECK(s.delta == 0.0);
  }
  SUBCASE("0.8 / 0.2 matches the dense eigendecomposition at n=200") {
    CsbmParams p;
    p.n = 200;
    p.p_in = 0.8;
    p.p_out = 0.2;
    auto s = expected_spectrum(p);
    CHECK(s.lambda2 == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(s.delta == doctest::Approx(0.4).epsilon(1e-15));
    Matrix M = expected_normalized_matrix(p);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(M, Eigen::EigenvaluesOnly);
    std::vector<double> eigs(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + p.n);
    std::sort(eigs.begin(), eigs.end(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    CHECK(std::abs(eigs[0] - 1.0) < 1e-10);
    CHECK(std::abs(eigs[1] - s.lambda2) < 1e-10);
  }
}

TEST_CASE("sweep_grid axes") {
  CsbmParams base;
  base.p_in = 0.8;
  base.p_out = 0.2;
  SUBCASE("density holds homophily fixed") {
    auto grid = sweep_grid(SweepAxis::density, {0.2, 0.4}, base);
    REQUIRE(grid.size() == 2);
    CHECK(grid[0].p_in == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(grid[0].p_out == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(grid[1].p_in == doctest::Approx(0.32).epsilon(1e-15));
    CHECK(grid[1].p_out == doctest::Approx(0.08).epsilon(1e-15));
  }
  SUBCASE("homophily 0.5 boundary is flagged") {
    auto grid = sweep_grid(SweepAxis::homophily, {0.5}, base);
    REQUIRE(grid.size() == 1);
    CHECK(grid[0].p_in == grid[0].p_out);
    CHECK(grid[0].warn_boundary);
  }
  SUBCASE("sigma sweep varies only sigma") {
    auto grid = sweep_grid(SweepAxis::sigma, {0.0, 1.0, 2.0}, base);
    REQUIRE(grid.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(grid[i].sigma == static_cast<double>(i));
      CHECK(grid[i].p_in == base.p_in);
      CHECK(grid[i].p_out == base.p_out);
    }
  }
  SUBCASE("out-of-range probability combinations error out") {
    CHECK_THROWS_AS(sweep_grid(SweepAxis::density, {2.0}, base), Error);
  }
}

TEST_CASE("generation is deterministic given the seed") {
  CsbmParams p;
  p.n = 300;
  GraphDataset a = generate_csbm(p, 123);
  GraphDataset b = generate_csbm(p, 123);
  CHECK(a.edges == b.edges);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.train_mask == b.train_mask);
  CHECK(a.test_mask == b.test_mask);
  GraphDataset c = generate_csbm(p, 124);
  CHECK(a.edges != c.edges);
}

TEST_CASE("sampled homophily converges to p_in/(p_in+p_out)") {
  CsbmParams p;
  p.n = 4000;
  p.p_in = 0.8;
  p.p_out = 0.2;
  GraphDataset g = generate_csbm(p, 77);
  CHECK(std::abs(edge_homophily(g) - 0.8) < 0.02);
}

TEST_CASE("odd n is rejected") {
  CsbmParams p;
  p.n = 7;
  CHECK_THROWS_AS(generate_csbm(p, 1), Error);
  try {
    generate_csbm(p, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_params);
  }
}

TEST_CASE("stratified masks hit the configured fractions") {
  CsbmParams p;
  p.n = 400;
  GraphDataset g = generate_csbm(p, 21);
  int train = 0, test = 0;
  for (int i = 0; i < g.n; ++i) {
    train += g.train_mask[i];
    test += g.test_mask[i];
  }
  CHECK(train == 40);   // 10% of 400, stratified 20 + 20
  CHECK(test == 80);
  for (int c = 0; c < 2; ++c) {
    int per_class = 0;
    for (int i = 0; i < g.n; ++i)
      if (g.Y[i] == c) per_class += g.train_mask[i];
    CHECK(per_class == 20);
  }
}
