#pragma once

#include <cstdint>
#include <vector>

#include "modeconn/engine.hpp"

namespace modeconn {

/// Interpolation family between two modes: the straight segment or a
/// quadratic Bezier curve with one learnable control point.
struct PathSpec {
  enum class Kind { linear, bezier };
  Kind kind = Kind::linear;
  ModelParams theta_a;
  ModelParams theta_b;
  ModelParams control;  // required for bezier

  static PathSpec linear(ModelParams a, ModelParams b);
  static PathSpec bezier(ModelParams a, ModelParams b, ModelParams control);
  void validate() const;
};

/// Loss/accuracy samples along a path. The grid is strictly increasing
/// and includes both endpoints.
struct PathProfile {
  std::vector<double> alphas;
  std::vector<double> train_loss;
  std::vector<double> test_loss;
  std::vector<double> train_acc;
  std::vector<double> test_acc;

  const std::vector<double>& loss(Which which) const {
    return which == Which::train ? train_loss : test_loss;
  }
  const std::vector<double>& acc(Which which) const {
    return which == Which::train ? train_acc : test_acc;
  }
};

struct BarrierReport {
  double loss_barrier = 0.0;
  double acc_barrier = 0.0;
  double argmax_alpha = 0.0;
  std::vector<double> deviation;  // loss(phi(alpha)) - chord, per grid point
};

/// Point at parameter alpha in [0,1]. Exactly theta_a at 0 and theta_b
/// at 1 (bit-identical), for both path kinds.
ModelParams point_on_path(const PathSpec& spec, double alpha);

PathProfile evaluate_path(const PathSpec& spec, const GraphDataset& g,
                          const NormalizedAdjacency& a, int grid_size = 25);

/// Max excess of path loss over the endpoint chord (Definition-style
/// barrier; zero at both endpoints, so never negative on the grid). The
/// accuracy barrier is the max chord-minus-curve accuracy deficit.
BarrierReport loss_barrier(const PathProfile& profile, Which which);

/// Fits the Bezier control point by stochastic descent on the expected
/// path loss: each step samples one alpha ~ U(0,1) and scales the
/// gradient at phi(alpha) by the Bernstein factor 2*alpha*(1-alpha).
/// cfg.epochs counts steps here and may be zero (control stays at the
/// segment midpoint). Endpoints are never touched.
ModelParams train_bezier_control(const ModelParams& theta_a,
                                 const ModelParams& theta_b,
                                 const GraphDataset& g,
                                 const NormalizedAdjacency& a,
                                 const TrainConfig& cfg, std::uint64_t seed);

/// Train-loss samples over the plane spanned by three parameter sets,
/// Gram-Schmidt orthonormalized around theta_a.
struct LandscapeGrid {
  std::vector<double> xs;  // nx coordinates
  std::vector<double> ys;  // ny coordinates
  Matrix loss;             // ny x nx, loss(ys[i], xs[j])
  double anchor_x[3] = {0, 0, 0};
  double anchor_y[3] = {0, 0, 0};
};

LandscapeGrid landscape_plane(const ModelParams& theta_a, const ModelParams& theta_b,
                              const ModelParams& theta_c, const GraphDataset& g,
                              const NormalizedAdjacency& a, int nx, int ny,
                              double extent = 1.2);

}  // namespace modeconn
