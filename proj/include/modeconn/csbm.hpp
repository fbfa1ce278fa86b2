#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modeconn/graph.hpp"

namespace modeconn {

/// Two-class contextual stochastic block model. Class means sit at
/// -(mu_gap/2) and +(mu_gap/2) along the first feature axis; features are
/// N(mean, sigma^2 I). Homophily h = p_in/(p_in+p_out) must stay in
/// (0.5, 1]; the h = 0.5 boundary is only accepted when `warn_boundary`
/// is set (sweeps emit it flagged).
struct CsbmParams {
  int n = 400;          // even
  int d = 16;
  double p_in = 0.8;
  double p_out = 0.2;
  double sigma = 1.0;
  double mu_gap = 2.0;
  double train_frac = 0.1;  // labeled fraction per class
  double test_frac = 0.2;
  bool warn_boundary = false;

  double homophily() const { return p_in / (p_in + p_out); }
  double density() const { return p_in + p_out; }
  double separability() const;  // mu_gap / sigma

  void validate() const;
};

/// Closed-form spectrum of the expected normalized adjacency:
/// lambda1 = 1, lambda2 = (p_in-p_out)/(p_in+p_out), delta = 1 - lambda2.
struct ExpectedSpectrum {
  double lambda1 = 1.0;
  double lambda2 = 0.0;
  double delta = 1.0;
};

GraphDataset generate_csbm(const CsbmParams& params, std::uint64_t seed);

ExpectedSpectrum expected_spectrum(const CsbmParams& params);

/// Dense expected normalized adjacency (block matrix scaled so the top
/// eigenvalue is exactly 1). Used as the comparison point for Weyl and
/// concentration checks.
Matrix expected_normalized_matrix(const CsbmParams& params);

enum class SweepAxis { density, homophily, sigma };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis axis);

/// One-axis parameter grid. Density sweeps hold h fixed, homophily sweeps
/// hold p fixed, sigma sweeps hold both.
std::vector<CsbmParams> sweep_grid(SweepAxis axis, const std::vector<double>& values,
                                   const CsbmParams& base);

}  // namespace modeconn
