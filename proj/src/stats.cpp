#include "modeconn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modeconn {

static bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

static double pearson_of(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

// Average ranks: tied values share the mean of the rank positions they
// would have occupied.
static std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationReport correlations(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    fail(Errc::invalid_params, "correlation inputs differ in length");
  if (xs.size() < 3) fail(Errc::invalid_params, "need at least 3 pairs");
  if (is_constant(xs) || is_constant(ys))
    fail(Errc::undefined_correlation, "correlation of a constant sequence");

  CorrelationReport rep;
  rep.sample_count = static_cast<int>(xs.size());
  rep.pearson = pearson_of(xs, ys);
  rep.spearman = pearson_of(midranks(xs), midranks(ys));

  // R^2 from the y-on-x least-squares fit, computed independently of
  // pearson so the r_squared == pearson^2 identity is a real check.
  const auto n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = sxy / sxx;
  double intercept = my - slope * mx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double fit = intercept + slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  rep.r_squared = 1.0 - ss_res / ss_tot;
  return rep;
}

double wasserstein1(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    fail(Errc::invalid_params, "wasserstein distance of an empty sample");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const std::size_t na = sa.size(), nb = sb.size();
  if (na == nb) {
    double total = 0.0;
    for (std::size_t i = 0; i < na; ++i) total += std::abs(sa[i] - sb[i]);
    return total / static_cast<double>(na);
  }
  // Quantile functions are step functions with breakpoints at integer
  // multiples of 1/na and 1/nb; walk the merged breakpoints exactly
  // using the common denominator na*nb.
  const std::uint64_t denom = static_cast<std::uint64_t>(na) * nb;
  std::uint64_t pos = 0;
  std::size_t ia = 0, ib = 0;
  double total = 0.0;
  while (pos < denom) {
    std::uint64_t next_a = static_cast<std::uint64_t>(ia + 1) * nb;
    std::uint64_t next_b = static_cast<std::uint64_t>(ib + 1) * na;
    std::uint64_t next = std::min(next_a, next_b);
    total += static_cast<double>(next - pos) * std::abs(sa[ia] - sb[ib]);
    pos = next;
    if (next == next_a) ++ia;
    if (next == next_b) ++ib;
  }
  return total / static_cast<double>(denom);
}

// Piecewise-linear resample of (grid, values) onto query points.
static std::vector<double> resample_linear(const std::vector<double>& grid,
                                           const std::vector<double>& values,
                                           const std::vector<double>& queries) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (double q : queries) {
    auto hi = std::lower_bound(grid.begin(), grid.end(), q);
    if (hi == grid.begin()) {
      out.push_back(values.front());
      continue;
    }
    if (hi == grid.end()) {
      out.push_back(values.back());
      continue;
    }
    std::size_t j = static_cast<std::size_t>(hi - grid.begin());
    double x0 = grid[j - 1], x1 = grid[j];
    double t = x1 > x0 ? (q - x0) / (x1 - x0) : 0.0;
    out.push_back((1.0 - t) * values[j - 1] + t * values[j]);
  }
  return out;
}

double mode_connectivity_distance(const PathProfile& pa, const PathProfile& pb,
                                  Which which) {
  if (pa.alphas == pb.alphas) return wasserstein1(pa.loss(which), pb.loss(which));
  std::vector<double> grid = pa.alphas;
  grid.insert(grid.end(), pb.alphas.begin(), pb.alphas.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return wasserstein1(resample_linear(pa.alphas, pa.loss(which), grid),
                      resample_linear(pb.alphas, pb.loss(which), grid));
}

double generalization_gap(const Mode& mode) {
  return mode.metrics.test_loss - mode.metrics.train_loss;
}

DomainPairReport vanilla_transfer(const GraphDataset& source,
                                  const GraphDataset& target,
                                  const TrainConfig& cfg, std::uint64_t seed,
                                  Arch arch) {
  if (source.d() != target.d() || source.C != target.C)
    fail(Errc::incompatible_domains,
         "source and target must share feature dimension and class count");

  Mode model = train_mode(source, cfg, arch, seed, "source");

  NormalizedAdjacency adj_s = normalize_adjacency(source);
  NormalizedAdjacency adj_t = normalize_adjacency(target);
  ForwardTrace tr_s = forward(model.params, source, adj_s);
  ForwardTrace tr_t = forward(model.params, target, adj_t);

  DomainPairReport rep;
  rep.source_loss = masked_cross_entropy(tr_s, source, Which::test);
  rep.target_loss = masked_cross_entropy(tr_t, target, Which::test);
  rep.delta_da = rep.target_loss - rep.source_loss;

  // Same derived seeds on both domains: identical domains then produce
  // identical profiles and d_mc = 0.
  Mode s1 = train_mode(source, cfg, arch, seed + 1, "source");
  Mode s2 = train_mode(source, cfg, arch, seed + 2, "source");
  Mode t1 = train_mode(target, cfg, arch, seed + 1, "target");
  Mode t2 = train_mode(target, cfg, arch, seed + 2, "target");
  PathProfile prof_s = evaluate_path(
      PathSpec::linear(std::move(s1.params), std::move(s2.params)), source, adj_s);
  PathProfile prof_t = evaluate_path(
      PathSpec::linear(std::move(t1.params), std::move(t2.params)), target, adj_t);
  rep.d_mc = mode_connectivity_distance(prof_s, prof_t, Which::train);
  return rep;
}

CorrelationReport transferability_check(const std::vector<DomainPairReport>& pairs) {
  if (pairs.size() < 3) fail(Errc::invalid_params, "need at least 3 transfer pairs");
  std::vector<double> d_mc, delta_da;
  for (const auto& p : pairs) {
    d_mc.push_back(p.d_mc);
    delta_da.push_back(p.delta_da);
  }
  return correlations(d_mc, delta_da);
}

}  // namespace modeconn
