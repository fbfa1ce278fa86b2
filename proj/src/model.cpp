#include "modeconn/model.hpp"

#include <cmath>

#include "modeconn/rng.hpp"

namespace modeconn {

Arch arch_from_string(const std::string& s) {
  if (s == "gcn") return Arch::gcn;
  if (s == "sage_mean" || s == "sage") return Arch::sage_mean;
  if (s == "mlp") return Arch::mlp;
  fail(Errc::invalid_params, "unknown architecture '" + s + "'");
}

std::string to_string(Arch a) {
  switch (a) {
    case Arch::gcn: return "gcn";
    case Arch::sage_mean: return "sage_mean";
    case Arch::mlp: return "mlp";
  }
  return "?";
}

double Activation::apply(double x) const {
  switch (kind) {
    case Kind::relu: return x > 0.0 ? x : 0.0;
    case Kind::leaky_relu: return x > 0.0 ? x : alpha * x;
    case Kind::elu: return x > 0.0 ? x : alpha * (std::exp(x) - 1.0);
  }
  return x;
}

double Activation::deriv(double x) const {
  switch (kind) {
    case Kind::relu: return x > 0.0 ? 1.0 : 0.0;
    case Kind::leaky_relu: return x > 0.0 ? 1.0 : alpha;
    case Kind::elu: return x > 0.0 ? 1.0 : alpha * std::exp(x);
  }
  return 1.0;
}

Activation activation_from_string(const std::string& s) {
  // Accepted forms: relu, leaky_relu:0.2, elu:1.0
  auto colon = s.find(':');
  std::string name = s.substr(0, colon);
  double alpha = 0.0;
  if (colon != std::string::npos) alpha = std::stod(s.substr(colon + 1));
  if (name == "relu") return Activation::relu();
  if (name == "leaky_relu")
    return Activation::leaky_relu(colon == std::string::npos ? 0.01 : alpha);
  if (name == "elu") return Activation::elu(colon == std::string::npos ? 1.0 : alpha);
  fail(Errc::invalid_params, "unknown activation '" + s + "'");
}

std::string to_string(const Activation& act) {
  switch (act.kind) {
    case Activation::Kind::relu: return "relu";
    case Activation::Kind::leaky_relu: return "leaky_relu:" + std::to_string(act.alpha);
    case Activation::Kind::elu: return "elu:" + std::to_string(act.alpha);
  }
  return "?";
}

std::size_t ModelParams::param_count() const {
  std::size_t total = 0;
  for (const auto& W : weights) total += static_cast<std::size_t>(W.size());
  return total;
}

void ModelParams::validate() const {
  if (layer_dims.size() < 2) fail(Errc::invalid_params, "need at least one layer");
  if (weights.size() + 1 != layer_dims.size())
    fail(Errc::dimension_mismatch, "weight count does not match layer_dims");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l] || weights[l].cols() != layer_dims[l + 1])
      fail(Errc::dimension_mismatch, "weight " + std::to_string(l) + " shape breaks the chain");
    if (!weights[l].allFinite())
      fail(Errc::invalid_params, "non-finite weight in layer " + std::to_string(l));
  }
}

Vector ModelParams::flatten() const {
  Vector flat(param_count());
  Eigen::Index offset = 0;
  for (const auto& W : weights) {
    flat.segment(offset, W.size()) = Eigen::Map<const Vector>(W.data(), W.size());
    offset += W.size();
  }
  return flat;
}

void ModelParams::assign_from_flat(const Vector& flat) {
  if (static_cast<std::size_t>(flat.size()) != param_count())
    fail(Errc::dimension_mismatch, "flat vector length does not match parameter count");
  Eigen::Index offset = 0;
  for (auto& W : weights) {
    Eigen::Map<Vector>(W.data(), W.size()) = flat.segment(offset, W.size());
    offset += W.size();
  }
}

bool ModelParams::same_shape(const ModelParams& other) const {
  return arch == other.arch && layer_dims == other.layer_dims;
}

ModelParams init_params(Arch arch, const std::vector<int>& layer_dims,
                        const Activation& act, const InitSpec& init,
                        std::uint64_t base_seed) {
  if (layer_dims.size() < 2) fail(Errc::invalid_params, "need at least one layer");
  ModelParams p;
  p.arch = arch;
  p.layer_dims = layer_dims;
  p.activation = act;
  Rng rng(base_seed ^ Rng::mix(init.seed), rng_stream::init);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    int fan_in = layer_dims[l];
    int fan_out = layer_dims[l + 1];
    double a = init.kind == InitSpec::Kind::glorot
                   ? std::sqrt(6.0 / (fan_in + fan_out))
                   : init.scale;
    Matrix W(fan_in, fan_out);
    for (int j = 0; j < fan_out; ++j) {
      for (int i = 0; i < fan_in; ++i) {
        W(i, j) = a * (2.0 * rng.next_double() - 1.0);
      }
    }
    p.weights.push_back(std::move(W));
  }
  return p;
}

}  // namespace modeconn
