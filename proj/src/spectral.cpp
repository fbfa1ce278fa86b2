#include "modeconn/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "modeconn/engine.hpp"
#include "modeconn/rng.hpp"

namespace modeconn {

void BoundConstants::validate() const {
  if (C_L < 0.0 || C1 <= 0.0 || C2 <= 0.0 || L_F <= 0.0 || !std::isfinite(L_ell))
    fail(Errc::invalid_params, "bound constants out of range");
}

static constexpr int kDenseEigenLimit = 2000;

static std::vector<double> top_by_magnitude(std::vector<double> eigs, int k) {
  std::sort(eigs.begin(), eigs.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  if (static_cast<int>(eigs.size()) > k) eigs.resize(k);
  return eigs;
}

// Deflated power iteration: peel off the k dominant eigenpairs of a
// symmetric operator, re-orthogonalizing against found vectors each step.
static std::vector<double> deflated_top_eigenvalues(const SparseMatrix& A, int n,
                                                    int k, double tol) {
  std::vector<double> lambdas;
  std::vector<Vector> vectors;
  for (int j = 0; j < k && j < n; ++j) {
    Rng rng(0xE16E5ULL + j);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.next_double() - 0.5;
    for (const auto& u : vectors) v -= u.dot(v) * u;
    double vn = v.norm();
    if (vn == 0.0) break;
    v /= vn;
    double lambda = 0.0;
    Vector w(n);
    for (int it = 0; it < 50000; ++it) {
      w.noalias() = A * v;
      for (std::size_t i = 0; i < vectors.size(); ++i)
        w -= lambdas[i] * vectors[i].dot(v) * vectors[i];
      for (const auto& u : vectors) w -= u.dot(w) * u;
      double next = v.dot(w);
      double wn = w.norm();
      if (wn == 0.0) {
        lambda = 0.0;
        break;
      }
      v = w / wn;
      if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
        lambda = next;
        break;
      }
      lambda = next;
    }
    lambdas.push_back(lambda);
    vectors.push_back(v);
  }
  return lambdas;
}

static void finish_report(SpectralReport& rep) {
  if (rep.top_eigenvalues.size() >= 2)
    rep.delta = 1.0 - std::abs(rep.top_eigenvalues[1]);
  else
    rep.delta = 1.0;
}

SpectralReport spectral_gap_iterative(const NormalizedAdjacency& a, int k,
                                      double tol) {
  if (k < 2) fail(Errc::invalid_params, "need k >= 2 eigenvalues");
  if (!a.is_symmetric())
    fail(Errc::not_symmetric, "spectral gap requires a symmetric operator");
  SpectralReport rep;
  rep.n = a.n;
  rep.top_eigenvalues = deflated_top_eigenvalues(a.mat, a.n, k, tol);
  finish_report(rep);
  return rep;
}

SpectralReport spectral_gap(const NormalizedAdjacency& a, int k) {
  if (k < 2) fail(Errc::invalid_params, "need k >= 2 eigenvalues");
  if (!a.is_symmetric())
    fail(Errc::not_symmetric, "spectral gap requires a symmetric operator");
  if (a.n > kDenseEigenLimit) return spectral_gap_iterative(a, k, 1e-8);
  SpectralReport rep;
  rep.n = a.n;
  Matrix dense(a.mat);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense, Eigen::EigenvaluesOnly);
  std::vector<double> eigs(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + a.n);
  rep.top_eigenvalues = top_by_magnitude(std::move(eigs), k);
  finish_report(rep);
  return rep;
}

double effective_propagation(double delta, int n, int d_min,
                             const BoundConstants& c) {
  if (d_min < 1)
    fail(Errc::isolated_node, "effective propagation undefined with d_min = 0");
  return 1.0 - delta + c.C2 * std::sqrt(std::log(static_cast<double>(n)) / d_min);
}

LayerwiseBoundResult layerwise_barrier_bound(const ModelParams& theta_a,
                                const ModelParams& theta_b, double x_norm,
                                double lambda_eff, const BoundConstants& c,
                                int lambda_grid) {
  if (!theta_a.same_shape(theta_b))
    fail(Errc::dimension_mismatch, "bound endpoints have different shapes");
  if (lambda_grid < 2) fail(Errc::invalid_params, "lambda grid needs >= 2 points");
  c.validate();
  const int L = theta_a.num_layers();

  std::vector<double> norm_a(L), norm_b(L), norm_diff(L);
  for (int l = 0; l < L; ++l) {
    norm_a[l] = feature_spectral_norm(theta_a.weights[l]);
    norm_b[l] = feature_spectral_norm(theta_b.weights[l]);
    Matrix diff = theta_a.weights[l] - theta_b.weights[l];
    norm_diff[l] = diff.isZero(0.0) ? 0.0 : feature_spectral_norm(diff);
  }

  // N_l = min of the two downstream norm products; empty product = 1.
  double weight_term = 0.0;
  for (int l = 0; l < L; ++l) {
    double prod_a = 1.0, prod_b = 1.0;
    for (int j = l + 1; j < L; ++j) {
      prod_a *= norm_a[j];
      prod_b *= norm_b[j];
    }
    weight_term += std::min(prod_a, prod_b) * norm_diff[l];
  }

  LayerwiseBoundResult res;
  res.weight_term = weight_term;
  res.endpoint0 = c.C_L;
  res.endpoint1 = c.L_ell * lambda_eff * x_norm * weight_term;
  res.bound = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < lambda_grid; ++i) {
    double lambda = static_cast<double>(i) / (lambda_grid - 1);
    double value = (1.0 - lambda) * c.C_L + lambda * res.endpoint1;
    res.bound = std::max(res.bound, value);
  }
  return res;
}

double csbm_bound(const CsbmParams& params, int n, int d, int d_min,
                  const BoundConstants& c) {
  c.validate();
  if (n < 2 || d < 1) fail(Errc::invalid_params, "need n >= 2 and d >= 1");
  if (d_min < 1) fail(Errc::isolated_node, "csbm bound undefined with d_min = 0");
  double h = params.homophily();
  double log_n = std::log(static_cast<double>(n));
  double concentration = c.C2 * std::sqrt(log_n / d_min);
  double homophily_term = (h - 0.5) * (h - 0.5) / c.C1 * params.density();
  return params.sigma * std::sqrt(d * log_n) * (concentration - homophily_term);
}

double barrier_lower_bound(const ModelParams& theta_a, const ModelParams& theta_b,
                           double L_F) {
  if (!theta_a.same_shape(theta_b))
    fail(Errc::dimension_mismatch, "lower bound endpoints have different shapes");
  if (L_F <= 0.0) fail(Errc::invalid_params, "L_F must be positive");
  double sq = (theta_a.flatten() - theta_b.flatten()).squaredNorm();
  return L_F / 8.0 * sq;
}

double estimate_curvature_lf(double midpoint_deviation, double delta_theta_sq) {
  if (delta_theta_sq <= 0.0)
    fail(Errc::invalid_params, "coincident endpoints have no curvature estimate");
  return 8.0 * midpoint_deviation / delta_theta_sq;
}

double generalization_bound(double barrier, int n, int m, int T, double rho,
                            double delta_conf) {
  if (m <= 0 || m >= n) fail(Errc::invalid_split, "need 0 < m < n");
  if (T < 2) fail(Errc::invalid_params, "need T >= 2");
  if (delta_conf <= 0.0 || delta_conf >= 1.0)
    fail(Errc::invalid_params, "confidence delta must lie in (0,1)");
  double nn = static_cast<double>(n);
  return 8.0 * barrier * std::pow(nn, 1.5) /
         (static_cast<double>(m) * (nn - m)) * std::log(static_cast<double>(T)) *
         std::pow(static_cast<double>(T), rho) * std::log(1.0 / delta_conf);
}

double rate_case_term(double alpha, int T, double delta_conf, double L_F,
                      int m, int u) {
  if (alpha <= 0.0 || alpha > 1.0)
    fail(Errc::invalid_params, "learning-rate exponent must lie in (0,1]");
  if (T < 2) fail(Errc::invalid_params, "need T >= 2");
  if (delta_conf <= 0.0 || delta_conf >= 1.0)
    fail(Errc::invalid_params, "confidence delta must lie in (0,1)");
  if (m < 1 || u < 1) fail(Errc::invalid_split, "need m >= 1 and u >= 1");
  double base = L_F * std::pow(static_cast<double>(m + u), 1.5) /
                (static_cast<double>(m) * u);
  double log_T = std::log(static_cast<double>(T));
  double log_d = std::log(1.0 / delta_conf);
  double tT = static_cast<double>(T);
  if (alpha < 0.5)
    return base * std::sqrt(log_T) * std::pow(tT, 0.5 - alpha) * log_d +
           std::pow(tT, -alpha);
  if (alpha == 0.5) return base * log_T * log_d + std::pow(tT, -alpha);
  if (alpha < 1.0) return base * std::sqrt(log_T) * log_d + std::pow(tT, -alpha);
  return base * std::sqrt(log_T) * log_d + log_T * log_d * log_d * log_d / tT;
}

double activation_lipschitz(const Activation& act) {
  switch (act.kind) {
    case Activation::Kind::relu: return 1.0;
    case Activation::Kind::leaky_relu: return std::max(1.0, act.alpha);
    case Activation::Kind::elu: return std::max(1.0, act.alpha);
  }
  return 1.0;
}

double bernstein_epsilon(double R, double sigma_sq, int n, double delta_conf) {
  if (R < 0.0 || sigma_sq < 0.0 || n < 1 || delta_conf <= 0.0 || delta_conf >= 1.0)
    fail(Errc::invalid_params, "bernstein inputs out of range");
  double log_term = std::log(2.0 * n / delta_conf);
  return std::sqrt(2.0 * sigma_sq * log_term) + 2.0 * R * log_term / 3.0;
}

BoundReport make_bound_report(const ModelParams& theta_a, const ModelParams& theta_b,
                              const GraphDataset& g, const NormalizedAdjacency& a,
                              const BoundConstants& c,
                              const std::optional<CsbmParams>& csbm,
                              double measured_barrier, int T, double rho,
                              double delta_conf) {
  c.validate();
  DegreeStats deg = degree_stats(g);
  SpectralReport spec = spectral_gap(a, 2);
  spec.d_min = deg.d_min;
  spec.lambda_eff = effective_propagation(spec.delta, g.n, deg.d_min, c);
  double x_norm = feature_spectral_norm(g.X);

  BoundReport rep;
  LayerwiseBoundResult t32 =
      layerwise_barrier_bound(theta_a, theta_b, x_norm, spec.lambda_eff, c);
  rep.layerwise = t32.bound;
  rep.graph_property = c.L_ell * spec.lambda_eff * x_norm;
  if (csbm.has_value()) {
    rep.csbm_raw = csbm_bound(*csbm, g.n, g.d(), deg.d_min, c);
    rep.csbm_clamped = std::max(0.0, rep.csbm_raw);
  }
  rep.lower_bound = barrier_lower_bound(theta_a, theta_b, c.L_F);
  int m = static_cast<int>(mask_nodes(g, Which::train).size());
  rep.gen_bound = generalization_bound(measured_barrier, g.n, m, T, rho, delta_conf);

  rep.inputs_echo["C_L"] = c.C_L;
  rep.inputs_echo["C1"] = c.C1;
  rep.inputs_echo["C2"] = c.C2;
  rep.inputs_echo["L_ell"] = c.L_ell;
  rep.inputs_echo["L_F"] = c.L_F;
  rep.inputs_echo["n"] = g.n;
  rep.inputs_echo["m"] = m;
  rep.inputs_echo["d"] = g.d();
  rep.inputs_echo["d_min"] = deg.d_min;
  rep.inputs_echo["d_mean"] = deg.d_mean;
  rep.inputs_echo["delta"] = spec.delta;
  rep.inputs_echo["lambda_eff"] = spec.lambda_eff;
  rep.inputs_echo["x_norm"] = x_norm;
  rep.inputs_echo["weight_term"] = t32.weight_term;
  rep.inputs_echo["layerwise_at0"] = t32.endpoint0;
  rep.inputs_echo["layerwise_at1"] = t32.endpoint1;
  rep.inputs_echo["measured_barrier"] = measured_barrier;
  rep.inputs_echo["T"] = T;
  rep.inputs_echo["rho"] = rho;
  rep.inputs_echo["delta_conf"] = delta_conf;
  if (csbm.has_value()) {
    rep.inputs_echo["p_in"] = csbm->p_in;
    rep.inputs_echo["p_out"] = csbm->p_out;
    rep.inputs_echo["sigma"] = csbm->sigma;
    rep.inputs_echo["homophily"] = csbm->homophily();
    rep.inputs_echo["density"] = csbm->density();
  }
  return rep;
}

}  // namespace modeconn
