#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modeconn/graph.hpp"

namespace modeconn {

enum class Arch { gcn, sage_mean, mlp };

Arch arch_from_string(const std::string& s);
std::string to_string(Arch a);

/// Pointwise nonlinearity. ReLU's subgradient at 0 is taken as 0.
struct Activation {
  enum class Kind { relu, leaky_relu, elu };
  Kind kind = Kind::relu;
  double alpha = 0.01;  // slope (leaky) or scale (elu); ignored by relu

  double apply(double x) const;
  double deriv(double x) const;  // derivative at pre-activation x

  static Activation relu() { return {Kind::relu, 0.0}; }
  static Activation leaky_relu(double a) { return {Kind::leaky_relu, a}; }
  static Activation elu(double a) { return {Kind::elu, a}; }
};

Activation activation_from_string(const std::string& s);
std::string to_string(const Activation& act);

/// Layer-indexed weight stack for one architecture. weights[l] has shape
/// (layer_dims[l] x layer_dims[l+1]); the flat view concatenates layers in
/// order, each column-major, and round-trips bit-exactly.
struct ModelParams {
  Arch arch = Arch::gcn;
  std::vector<int> layer_dims;  // [d, d1, ..., C]
  std::vector<Matrix> weights;
  Activation activation;

  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t param_count() const;
  void validate() const;

  Vector flatten() const;
  void assign_from_flat(const Vector& flat);

  bool same_shape(const ModelParams& other) const;
};

struct InitSpec {
  enum class Kind { glorot, uniform };
  Kind kind = Kind::glorot;
  double scale = 0.1;        // half-width for uniform init
  std::uint64_t seed = 0;

  static InitSpec glorot(std::uint64_t seed) { return {Kind::glorot, 0.0, seed}; }
  static InitSpec uniform(double scale, std::uint64_t seed) {
    return {Kind::uniform, scale, seed};
  }
};

/// Fresh weights for the given shape. Glorot draws U(-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)); uniform draws U(-scale, scale).
ModelParams init_params(Arch arch, const std::vector<int>& layer_dims,
                        const Activation& act, const InitSpec& init,
                        std::uint64_t base_seed);

}  // namespace modeconn
