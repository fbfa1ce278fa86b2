#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modeconn/csbm.hpp"
#include "modeconn/model.hpp"

namespace modeconn {

/// Measured spectrum of an aggregation operator. delta = 1 - |lambda_2|
/// with lambda_2 the second-largest eigenvalue by magnitude. d_min and
/// lambda_eff are filled by the caller once graph degrees and constants
/// are known (see effective_propagation).
struct SpectralReport {
  std::vector<double> top_eigenvalues;  // k largest by magnitude
  double delta = 0.0;
  double lambda_eff = std::numeric_limits<double>::quiet_NaN();
  int d_min = 0;
  int n = 0;
};

/// Constants entering the bound evaluators. All big-O expressions are
/// evaluated with implied constant 1 and natural logarithms.
struct BoundConstants {
  double C_L = 0.0;           // curvature term
  double C1 = 1.0;            // community-separation constant
  double C2 = 1.0;            // concentration constant
  double L_ell = std::sqrt(2.0);  // loss Lipschitz constant
  double L_F = 1.0;           // curvature lower-bound constant

  void validate() const;
};

/// Top-k eigenvalues by magnitude: dense symmetric solver when
/// n <= 2000, deflated power iteration (tolerance 1e-8) above that.
/// Throws on non-symmetric input.
SpectralReport spectral_gap(const NormalizedAdjacency& a, int k);

/// The deflated-power-iteration route on its own; the dense and
/// iterative paths must agree within 1e-6 on overlap instances.
SpectralReport spectral_gap_iterative(const NormalizedAdjacency& a, int k,
                                      double tol = 1e-8);

/// lambda_eff = 1 - delta + C2 * sqrt(log(n) / d_min).
double effective_propagation(double delta, int n, int d_min,
                             const BoundConstants& c);

struct LayerwiseBoundResult {
  double bound = 0.0;      // max over the lambda grid
  double endpoint0 = 0.0;  // value at lambda = 0 (= C_L)
  double endpoint1 = 0.0;  // value at lambda = 1
  double weight_term = 0.0;  // sum_l N_l * ||Wa_l - Wb_l||
};

/// Layer-norm barrier bound: max over a uniform lambda grid of
/// (1-lambda) C_L + lambda L_ell lambda_eff ||X|| sum_l N_l ||dW_l||,
/// where N_l is the smaller downstream spectral-norm product of the two
/// endpoints (empty product = 1). Affine in lambda, so the grid max
/// equals the larger endpoint.
LayerwiseBoundResult layerwise_barrier_bound(const ModelParams& theta_a,
                                const ModelParams& theta_b, double x_norm,
                                double lambda_eff, const BoundConstants& c,
                                int lambda_grid = 101);

/// Community-model barrier bound:
/// sigma sqrt(d log n) [C2 sqrt(log n / d_min) - ((h-1/2)^2/C1)(p_in+p_out)].
/// May be negative; reports clamp at zero but keep the raw value.
double csbm_bound(const CsbmParams& params, int n, int d, int d_min,
                  const BoundConstants& c);

/// (L_F / 8) ||theta_a - theta_b||^2.
double barrier_lower_bound(const ModelParams& theta_a, const ModelParams& theta_b,
                           double L_F);

/// Empirical curvature constant 8 * (midpoint chord deviation) / ||dtheta||^2.
double estimate_curvature_lf(double midpoint_deviation, double delta_theta_sq);

/// 8 B n^{3/2} / (m(n-m)) * log(c(T)) T^rho log(1/delta), with c(T) = T.
double generalization_bound(double barrier, int n, int m, int T, double rho,
                            double delta_conf);

/// Per-regime convergence term for learning-rate exponent alpha in (0,1]:
/// L_F (m+u)^{3/2}/(mu) * log(T)^q * T^r * log(1/delta) + tail, with
/// (q, r) = (1/2, 1/2-alpha) on (0,1/2), (1, 0) at 1/2, (1/2, 0) on
/// (1/2,1]; the alpha = 1 tail is log(T) log^3(1/delta) / T.
double rate_case_term(double alpha, int T, double delta_conf, double L_F,
                      int m, int u);

/// Lipschitz constant of the activation: 1 for relu, max(1, alpha) for
/// leaky relu and elu.
double activation_lipschitz(const Activation& act);

/// Matrix-deviation radius sqrt(2 sigma^2 log(2n/delta)) +
/// 2 R log(2n/delta) / 3, reported from user-supplied R and sigma^2.
double bernstein_epsilon(double R, double sigma_sq, int n, double delta_conf);

/// Every evaluated bound plus the inputs that produced it, so a reader
/// can rescale constants without rerunning.
struct BoundReport {
  double layerwise = 0.0;
  double graph_property = 0.0;
  double csbm_raw = std::numeric_limits<double>::quiet_NaN();
  double csbm_clamped = std::numeric_limits<double>::quiet_NaN();
  double lower_bound = 0.0;
  double gen_bound = 0.0;
  std::map<std::string, double> inputs_echo;
};

BoundReport make_bound_report(const ModelParams& theta_a, const ModelParams& theta_b,
                              const GraphDataset& g, const NormalizedAdjacency& a,
                              const BoundConstants& c,
                              const std::optional<CsbmParams>& csbm,
                              double measured_barrier, int T, double rho,
                              double delta_conf);

}  // namespace modeconn
