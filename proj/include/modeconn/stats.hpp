#pragma once

#include <cstdint>
#include <vector>

#include "modeconn/engine.hpp"
#include "modeconn/path.hpp"

namespace modeconn {

struct CorrelationReport {
  double pearson = 0.0;
  double spearman = 0.0;
  double r_squared = 0.0;
  int sample_count = 0;
};

/// Pearson, Spearman (average ranks with midrank ties), and the R^2 of
/// the y-on-x least-squares fit. Needs >= 3 pairs; constant input is an
/// undefined-correlation error.
CorrelationReport correlations(const std::vector<double>& xs,
                               const std::vector<double>& ys);

/// Exact 1-D optimal transport between empirical distributions: mean
/// |sorted difference| for equal sizes, merged-quantile CDF integration
/// otherwise.
double wasserstein1(const std::vector<double>& a, const std::vector<double>& b);

/// W1 between two loss-over-alpha profiles, treating grid samples as
/// equal-weight draws. Mismatched grids are resampled onto the union
/// grid by linear interpolation first.
double mode_connectivity_distance(const PathProfile& pa, const PathProfile& pb,
                                  Which which);

double generalization_gap(const Mode& mode);

/// Source-trained model evaluated on both domains, plus the path-space
/// discrepancy between them.
struct DomainPairReport {
  double d_mc = 0.0;
  double delta_da = 0.0;  // target_loss - source_loss, exactly
  double source_loss = 0.0;
  double target_loss = 0.0;
};

/// Trains on the source train mask, evaluates the frozen model on both
/// test masks, and trains a mode pair per domain to produce the two
/// path profiles behind d_MC (train-loss curves, 25-point grid). Both
/// domains use the derived mode seeds seed+1/seed+2, so a target equal
/// to the source gives d_mc = 0.
DomainPairReport vanilla_transfer(const GraphDataset& source,
                                  const GraphDataset& target,
                                  const TrainConfig& cfg, std::uint64_t seed,
                                  Arch arch = Arch::gcn);

/// Correlates d_MC against delta_da over a batch of transfer runs.
CorrelationReport transferability_check(const std::vector<DomainPairReport>& pairs);

}  // namespace modeconn
