#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tpn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Points = Eigen::Matrix<double, 3, Eigen::Dynamic>;  // rows: t, x, mu

/// Dense tanh MLP psi(t, x, mu). weights[l] maps layer l to layer l+1
/// (shape sizes[l+1] x sizes[l]); the last layer is affine only.
struct NetworkParams {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::size_t num_layers() const noexcept { return weights.size(); }
  std::size_t num_parameters() const noexcept;
};

/// Parameter-shaped accumulator for d(loss)/d(weights, biases).
struct GradientBuffer {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static GradientBuffer zeros_like(const NetworkParams& params);
  GradientBuffer& operator+=(const GradientBuffer& other);
  void set_zero();
  bool all_finite() const;
};

/// Network output with its input partials.
struct Jet3 {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
  double d_mu = 0.0;
};

std::vector<int> default_layer_sizes();

void validate_layer_sizes(std::span<const int> layer_sizes);
void validate_params(const NetworkParams& params);

/// Glorot-uniform weights, zero biases, deterministic in seed.
NetworkParams init_params(std::span<const int> layer_sizes, std::uint64_t seed);

double forward(const NetworkParams& params, double t, double x, double mu);
Jet3 forward_jet(const NetworkParams& params, double t, double x, double mu);

/// Cached activations of a batched forward pass carrying K tangent directions.
///
/// Every activation matrix is laid out as (1 + K) column blocks of width
/// batch: block 0 holds values, block k holds the derivative of those values
/// along the k-th input tangent. Biases only enter block 0.
struct ForwardTape {
  int batch = 0;
  int tangents = 0;
  std::vector<Matrix> activations;  // activations[0] is the stacked input

  /// Final-layer output, 1 x (1 + K) * batch.
  const Matrix& output() const { return activations.back(); }
};

/// Evaluates the network at `points` (3 x B). `tangent_dirs` holds K input
/// tangent fields, each 3 x B; pass none for a value-only pass.
ForwardTape forward_batch(const NetworkParams& params, const Points& points,
                          std::span<const Points> tangent_dirs = {});

/// Reverse pass over a tape. `output_adjoint` is d(loss)/d(output) laid out
/// like ForwardTape::output(); the parameter gradient is added to `grad`.
void backward_batch(const NetworkParams& params, const ForwardTape& tape,
                    const RowVector& output_adjoint, GradientBuffer& grad);

/// Elementwise tanh shared by the batched passes.
void tanh_inplace(Eigen::Ref<Matrix> z);

/// Binary checkpoint: magic "TPNCKPT1", u32 layer count, u32 sizes, then each
/// layer's weights (row-major) followed by its biases, fp64 little-endian.
void save_params(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_params(const std::filesystem::path& path);

/// Flat views used by the optimizer; order is layer, weights then biases.
std::vector<double> flatten(const NetworkParams& params);
std::vector<double> flatten(const GradientBuffer& grad);
void unflatten(std::span<const double> flat, NetworkParams& params);

}  // namespace tpn
