#include "modeconn/path.hpp"

#include <cmath>

#include "modeconn/rng.hpp"

namespace modeconn {

PathSpec PathSpec::linear(ModelParams a, ModelParams b) {
  PathSpec s;
  s.kind = Kind::linear;
  s.theta_a = std::move(a);
  s.theta_b = std::move(b);
  s.validate();
  return s;
}

PathSpec PathSpec::bezier(ModelParams a, ModelParams b, ModelParams control) {
  PathSpec s;
  s.kind = Kind::bezier;
  s.theta_a = std::move(a);
  s.theta_b = std::move(b);
  s.control = std::move(control);
  s.validate();
  return s;
}

void PathSpec::validate() const {
  theta_a.validate();
  theta_b.validate();
  if (!theta_a.same_shape(theta_b))
    fail(Errc::dimension_mismatch, "path endpoints have different shapes");
  if (kind == Kind::bezier) {
    control.validate();
    if (!control.same_shape(theta_a))
      fail(Errc::dimension_mismatch, "bezier control shape differs from endpoints");
  }
}

ModelParams point_on_path(const PathSpec& spec, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    fail(Errc::range_error, "alpha must lie in [0,1], got " + std::to_string(alpha));
  if (alpha == 0.0) return spec.theta_a;
  if (alpha == 1.0) return spec.theta_b;
  ModelParams out = spec.theta_a;
  Vector fa = spec.theta_a.flatten();
  Vector fb = spec.theta_b.flatten();
  // Incremental forms: coincident endpoints reproduce theta_a exactly at
  // every alpha (the Bernstein weights only scale the differences).
  if (spec.kind == PathSpec::Kind::linear) {
    out.assign_from_flat(fa + alpha * (fb - fa));
  } else {
    Vector fc = spec.control.flatten();
    double w_ctrl = 2.0 * alpha * (1.0 - alpha);
    double w_end = alpha * alpha;
    out.assign_from_flat(fa + w_ctrl * (fc - fa) + w_end * (fb - fa));
  }
  return out;
}

PathProfile evaluate_path(const PathSpec& spec, const GraphDataset& g,
                          const NormalizedAdjacency& a, int grid_size) {
  spec.validate();
  if (grid_size < 3) fail(Errc::invalid_params, "grid_size must be >= 3");
  AggregationOp op = make_aggregation(spec.theta_a.arch, g, a);
  PathProfile prof;
  for (int i = 0; i < grid_size; ++i) {
    double alpha = static_cast<double>(i) / (grid_size - 1);
    ModelParams p = point_on_path(spec, alpha);
    ForwardTrace tr = forward(p, g.X, op);
    prof.alphas.push_back(alpha);
    prof.train_loss.push_back(masked_cross_entropy(tr, g, Which::train));
    prof.test_loss.push_back(masked_cross_entropy(tr, g, Which::test));
    prof.train_acc.push_back(masked_accuracy(tr, g, Which::train));
    prof.test_acc.push_back(masked_accuracy(tr, g, Which::test));
  }
  return prof;
}

BarrierReport loss_barrier(const PathProfile& profile, Which which) {
  const auto& loss = profile.loss(which);
  const auto& acc = profile.acc(which);
  if (loss.size() < 2 || loss.size() != profile.alphas.size())
    fail(Errc::invalid_params, "profile needs aligned alpha/loss sequences");
  const double l0 = loss.front(), l1 = loss.back();
  const double a0 = acc.front(), a1 = acc.back();
  BarrierReport rep;
  rep.deviation.reserve(loss.size());
  for (std::size_t i = 0; i < loss.size(); ++i) {
    double alpha = profile.alphas[i];
    // Chord in incremental form: a flat profile deviates by exactly zero.
    double dev = loss[i] - (l0 + alpha * (l1 - l0));
    rep.deviation.push_back(dev);
    if (i == 0 || dev > rep.loss_barrier) {
      rep.loss_barrier = dev;
      rep.argmax_alpha = alpha;
    }
    double acc_deficit = (a0 + alpha * (a1 - a0)) - acc[i];
    if (acc_deficit > rep.acc_barrier) rep.acc_barrier = acc_deficit;
  }
  return rep;
}

ModelParams train_bezier_control(const ModelParams& theta_a,
                                 const ModelParams& theta_b,
                                 const GraphDataset& g,
                                 const NormalizedAdjacency& a,
                                 const TrainConfig& cfg, std::uint64_t seed) {
  if (!theta_a.same_shape(theta_b))
    fail(Errc::dimension_mismatch, "bezier endpoints have different shapes");
  if (cfg.epochs < 0) fail(Errc::invalid_params, "step count must be >= 0");

  ModelParams control = theta_a;
  control.assign_from_flat(0.5 * (theta_a.flatten() + theta_b.flatten()));

  AggregationOp op = make_aggregation(theta_a.arch, g, a);
  std::vector<int> train_nodes = mask_nodes(g, Which::train);
  Rng alpha_rng(seed, rng_stream::path_alpha);

  // Adam state over the control point only.
  std::vector<Matrix> m, v;
  for (const auto& W : control.weights) {
    m.push_back(Matrix::Zero(W.rows(), W.cols()));
    v.push_back(Matrix::Zero(W.rows(), W.cols()));
  }

  PathSpec spec = PathSpec::bezier(theta_a, theta_b, control);
  for (int step = 0; step < cfg.epochs; ++step) {
    double alpha = alpha_rng.next_double();
    spec.control = control;
    ModelParams point = point_on_path(spec, alpha);
    auto [loss, grads] = loss_and_gradients(point, g, op, train_nodes, cfg.reduction);
    if (!std::isfinite(loss))
      fail_at(Errc::training_diverged,
              "bezier fit diverged at step " + std::to_string(step), step);
    double bernstein = 2.0 * alpha * (1.0 - alpha);
    for (int l = 0; l < control.num_layers(); ++l) {
      Matrix gl = bernstein * grads[l] + cfg.weight_decay * control.weights[l];
      if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
        control.weights[l] -= cfg.lr * gl;
      } else {
        const auto& ap = cfg.adam;
        m[l] = ap.beta1 * m[l] + (1.0 - ap.beta1) * gl;
        v[l] = ap.beta2 * v[l] + (1.0 - ap.beta2) * gl.cwiseProduct(gl);
        double bc1 = 1.0 - std::pow(ap.beta1, step + 1);
        double bc2 = 1.0 - std::pow(ap.beta2, step + 1);
        control.weights[l] -=
            (cfg.lr / bc1) *
            (m[l].array() / ((v[l] / bc2).cwiseSqrt().array() + ap.eps)).matrix();
      }
    }
  }
  return control;
}

LandscapeGrid landscape_plane(const ModelParams& theta_a, const ModelParams& theta_b,
                              const ModelParams& theta_c, const GraphDataset& g,
                              const NormalizedAdjacency& a, int nx, int ny,
                              double extent) {
  if (!theta_a.same_shape(theta_b) || !theta_a.same_shape(theta_c))
    fail(Errc::dimension_mismatch, "plane anchors have different shapes");
  if (nx < 2 || ny < 2) fail(Errc::invalid_params, "grid must be at least 2x2");

  Vector fa = theta_a.flatten();
  Vector u = theta_b.flatten() - fa;
  double nu = u.norm();
  if (nu < 1e-12) fail(Errc::collinear_modes, "theta_b coincides with theta_a");
  Vector eu = u / nu;
  Vector w = theta_c.flatten() - fa;
  double proj = w.dot(eu);
  Vector v = w - proj * eu;
  double nv = v.norm();
  if (nv < 1e-12)
    fail(Errc::collinear_modes, "third anchor lies on the line through the endpoints");
  Vector ev = v / nv;

  LandscapeGrid grid;
  grid.anchor_x[0] = 0.0;
  grid.anchor_y[0] = 0.0;
  grid.anchor_x[1] = nu;
  grid.anchor_y[1] = 0.0;
  grid.anchor_x[2] = proj;
  grid.anchor_y[2] = nv;

  double xmin = std::min({0.0, nu, proj});
  double xmax = std::max({0.0, nu, proj});
  double ymin = 0.0, ymax = nv;
  double cx = 0.5 * (xmin + xmax), hx = 0.5 * (xmax - xmin) * extent;
  double cy = 0.5 * (ymin + ymax), hy = 0.5 * (ymax - ymin) * extent;

  for (int j = 0; j < nx; ++j)
    grid.xs.push_back(cx - hx + 2.0 * hx * j / (nx - 1));
  for (int i = 0; i < ny; ++i)
    grid.ys.push_back(cy - hy + 2.0 * hy * i / (ny - 1));

  AggregationOp op = make_aggregation(theta_a.arch, g, a);
  grid.loss.resize(ny, nx);
  ModelParams point = theta_a;
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      point.assign_from_flat(fa + grid.xs[j] * eu + grid.ys[i] * ev);
      ForwardTrace tr = forward(point, g.X, op);
      grid.loss(i, j) = masked_cross_entropy(tr, g, Which::train);
    }
  }
  return grid;
}

}  // namespace modeconn
