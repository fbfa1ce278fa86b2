#include "modeconn/csbm.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "modeconn/rng.hpp"

namespace modeconn {

double CsbmParams::separability() const {
  return sigma > 0.0 ? mu_gap / sigma : std::numeric_limits<double>::infinity();
}

void CsbmParams::validate() const {
  if (n < 2 || n % 2 != 0)
    fail(Errc::invalid_params, "n must be even and >= 2, got " + std::to_string(n));
  if (d < 1) fail(Errc::invalid_params, "d must be >= 1");
  if (p_out < 0.0 || p_in > 1.0)
    fail(Errc::invalid_params, "edge probabilities must lie in [0,1]");
  if (p_in <= 0.0) fail(Errc::invalid_params, "p_in must be positive");
  if (p_in < p_out) fail(Errc::invalid_params, "p_in must be >= p_out");
  if (p_in == p_out && !warn_boundary)
    fail(Errc::invalid_params, "p_in == p_out only allowed as a flagged boundary case");
  if (sigma < 0.0) fail(Errc::invalid_params, "sigma must be >= 0");
  if (mu_gap < 0.0) fail(Errc::invalid_params, "mu_gap must be >= 0");
  if (train_frac < 0.0 || test_frac < 0.0 || train_frac + test_frac > 1.0)
    fail(Errc::invalid_params, "train/test fractions must be >= 0 and sum to <= 1");
}

GraphDataset generate_csbm(const CsbmParams& params, std::uint64_t seed) {
  params.validate();
  const int n = params.n;
  const int half = n / 2;

  GraphDataset g;
  g.n = n;
  g.C = 2;
  g.Y.resize(n);
  for (int i = 0; i < n; ++i) g.Y[i] = i < half ? 0 : 1;

  Rng edge_rng(seed, rng_stream::edges);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      double p = (g.Y[u] == g.Y[v]) ? params.p_in : params.p_out;
      if (edge_rng.bernoulli(p)) g.edges.emplace_back(u, v);
    }
  }

  Rng feat_rng(seed, rng_stream::features);
  g.X.resize(n, params.d);
  const double mu = params.mu_gap / 2.0;
  for (int i = 0; i < n; ++i) {
    double mean0 = g.Y[i] == 0 ? -mu : mu;
    for (int j = 0; j < params.d; ++j) {
      double noise = params.sigma * feat_rng.next_gaussian();
      g.X(i, j) = (j == 0 ? mean0 : 0.0) + noise;
    }
  }

  // Stratified split: shuffle each class, take the leading block as train
  // and the next as test.
  g.train_mask.assign(n, 0);
  g.test_mask.assign(n, 0);
  Rng mask_rng(seed, rng_stream::masks);
  for (int c = 0; c < 2; ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (g.Y[i] == c) members.push_back(i);
    mask_rng.shuffle(members);
    auto k_train = static_cast<std::size_t>(
        std::llround(params.train_frac * static_cast<double>(members.size())));
    auto k_test = static_cast<std::size_t>(
        std::llround(params.test_frac * static_cast<double>(members.size())));
    if (params.train_frac > 0.0 && k_train == 0) k_train = 1;
    if (params.test_frac > 0.0 && k_test == 0) k_test = 1;
    if (k_train + k_test > members.size())
      fail(Errc::invalid_params, "split fractions exceed class size");
    for (std::size_t i = 0; i < k_train; ++i) g.train_mask[members[i]] = 1;
    for (std::size_t i = k_train; i < k_train + k_test; ++i)
      g.test_mask[members[i]] = 1;
  }

  g.validate();
  return g;
}

ExpectedSpectrum expected_spectrum(const CsbmParams& params) {
  if (params.density() <= 0.0)
    fail(Errc::invalid_params, "expected spectrum needs density > 0");
  ExpectedSpectrum s;
  s.lambda1 = 1.0;
  s.lambda2 = (params.p_in - params.p_out) / (params.p_in + params.p_out);
  s.delta = 2.0 * params.p_out / (params.p_in + params.p_out);
  return s;
}

Matrix expected_normalized_matrix(const CsbmParams& params) {
  params.validate();
  const int n = params.n;
  const int half = n / 2;
  // Rank-2 block matrix scaled by its top eigenvalue (n/2)(p_in + p_out),
  // so the nonzero eigenvalues are exactly 1 and (p_in-p_out)/(p_in+p_out).
  const double scale = (static_cast<double>(half)) * (params.p_in + params.p_out);
  const double a = params.p_in / scale;
  const double b = params.p_out / scale;
  Matrix M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      bool same = (i < half) == (j < half);
      M(i, j) = same ? a : b;
    }
  }
  return M;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "density") return SweepAxis::density;
  if (s == "homophily") return SweepAxis::homophily;
  if (s == "sigma") return SweepAxis::sigma;
  fail(Errc::invalid_params, "unknown sweep axis '" + s + "'");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::density: return "density";
    case SweepAxis::homophily: return "homophily";
    case SweepAxis::sigma: return "sigma";
  }
  return "?";
}

std::vector<CsbmParams> sweep_grid(SweepAxis axis, const std::vector<double>& values,
                                   const CsbmParams& base) {
  base.validate();
  std::vector<CsbmParams> grid;
  grid.reserve(values.size());
  for (double v : values) {
    CsbmParams p = base;
    switch (axis) {
      case SweepAxis::density: {
        double h = base.homophily();
        p.p_in = h * v;
        p.p_out = (1.0 - h) * v;
        break;
      }
      case SweepAxis::homophily: {
        double dens = base.density();
        p.p_in = v * dens;
        p.p_out = (1.0 - v) * dens;
        if (v == 0.5) p.warn_boundary = true;
        break;
      }
      case SweepAxis::sigma:
        p.sigma = v;
        break;
    }
    if (p.p_in < 0.0 || p.p_in > 1.0 || p.p_out < 0.0 || p.p_out > 1.0)
      fail(Errc::invalid_params,
           "sweep value " + std::to_string(v) + " pushes edge probabilities outside [0,1]");
    p.validate();
    grid.push_back(p);
  }
  return grid;
}

}  // namespace modeconn
