#include "network.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "error.hpp"

namespace tpn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> checkpoint_magic = {'T', 'P', 'N', 'C', 'K', 'P', 'T', '1'};

std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

std::size_t NetworkParams::num_parameters() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

GradientBuffer GradientBuffer::zeros_like(const NetworkParams& params) {
  GradientBuffer g;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(params.weights[l].rows(), params.weights[l].cols()));
    g.biases.push_back(Vector::Zero(params.biases[l].size()));
  }
  return g;
}

GradientBuffer& GradientBuffer::operator+=(const GradientBuffer& other) {
  require(weights.size() == other.weights.size(), "GradientBuffer: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

void GradientBuffer::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

bool GradientBuffer::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

std::vector<int> default_layer_sizes() { return {3, 64, 64, 64, 64, 64, 64, 1}; }

void validate_layer_sizes(std::span<const int> layer_sizes) {
  require(layer_sizes.size() >= 3, "layer_sizes needs at least an input, one hidden and an output layer");
  require(layer_sizes.front() == 3, "layer_sizes must start with 3 (inputs t, x, mu)");
  require(layer_sizes.back() == 1, "layer_sizes must end with 1 (scalar output)");
  for (int m : layer_sizes) require(m >= 1, "layer_sizes entries must be positive");
}

void validate_params(const NetworkParams& params) {
  validate_layer_sizes(params.layer_sizes);
  const std::size_t layers = params.layer_sizes.size() - 1;
  require(params.weights.size() == layers && params.biases.size() == layers,
          "network parameters do not match layer_sizes");
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = params.weights[l];
    const int rows = params.layer_sizes[l + 1];
    const int cols = params.layer_sizes[l];
    if (w.rows() != rows || w.cols() != cols || params.biases[l].size() != rows) {
      fail(ErrorCode::invalid_argument, "layer " + std::to_string(l) + ": expected weights " +
                                            shape_str(rows, cols) + ", got " + shape_str(w.rows(), w.cols()));
    }
    if (!w.allFinite() || !params.biases[l].allFinite()) {
      fail(ErrorCode::non_finite, "layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
}

NetworkParams init_params(std::span<const int> layer_sizes, std::uint64_t seed) {
  validate_layer_sizes(layer_sizes);
  NetworkParams p;
  p.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double scale = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-scale, scale);
    Matrix w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(fan_out));
  }
  return p;
}

// The per-point paths below use plain loops in a fixed order so that the
// value channel of forward_jet reproduces forward bit for bit.

double forward(const NetworkParams& params, double t, double x, double mu) {
  std::vector<double> a = {t, x, mu};
  std::vector<double> z;
  const std::size_t layers = params.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = params.weights[l];
    const auto& b = params.biases[l];
    z.assign(w.rows(), 0.0);
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      double acc = b[j];
      for (Eigen::Index i = 0; i < w.cols(); ++i) acc += w(j, i) * a[i];
      z[j] = (l + 1 < layers) ? std::tanh(acc) : acc;
    }
    if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
      fail(ErrorCode::non_finite, "forward: non-finite activation at layer " + std::to_string(l));
    }
    a.swap(z);
  }
  return a[0];
}

Jet3 forward_jet(const NetworkParams& params, double t, double x, double mu) {
  std::vector<double> a = {t, x, mu};
  // da[c * width + i]: derivative of unit i w.r.t. input c.
  std::vector<double> da = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::vector<double> z, dz;
  const std::size_t layers = params.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = params.weights[l];
    const auto& b = params.biases[l];
    const auto rows = w.rows();
    const auto cols = w.cols();
    const bool hidden = l + 1 < layers;
    z.assign(rows, 0.0);
    dz.assign(3 * rows, 0.0);
    for (Eigen::Index j = 0; j < rows; ++j) {
      double acc = b[j];
      for (Eigen::Index i = 0; i < cols; ++i) acc += w(j, i) * a[i];
      const double v = hidden ? std::tanh(acc) : acc;
      const double slope = hidden ? 1.0 - v * v : 1.0;
      for (int c = 0; c < 3; ++c) {
        double d = 0.0;
        for (Eigen::Index i = 0; i < cols; ++i) d += w(j, i) * da[c * cols + i];
        dz[c * rows + j] = slope * d;
      }
      z[j] = v;
    }
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (!std::isfinite(z[k]) || !std::isfinite(dz[k]) || !std::isfinite(dz[rows + k]) ||
          !std::isfinite(dz[2 * rows + k])) {
        fail(ErrorCode::non_finite, "forward_jet: non-finite activation at layer " + std::to_string(l));
      }
    }
    a.swap(z);
    da.swap(dz);
  }
  return Jet3{a[0], da[0], da[1], da[2]};
}

void tanh_inplace(Eigen::Ref<Matrix> z) {
  // tanh(z) = sign(z) (1 - e) / (1 + e), e = exp(-2|z|); vectorizes through exp.
  Eigen::ArrayXXd e = (-2.0 * z.array().abs()).exp();
  z.array() = ((1.0 - e) / (1.0 + e)) * z.array().sign();
}

ForwardTape forward_batch(const NetworkParams& params, const Points& points, std::span<const Points> tangent_dirs) {
  const auto batch = points.cols();
  const auto blocks = static_cast<Eigen::Index>(1 + tangent_dirs.size());
  ForwardTape tape;
  tape.batch = static_cast<int>(batch);
  tape.tangents = static_cast<int>(tangent_dirs.size());
  tape.activations.reserve(params.num_layers() + 1);

  Matrix input(3, blocks * batch);
  input.leftCols(batch) = points;
  for (std::size_t k = 0; k < tangent_dirs.size(); ++k) {
    require(tangent_dirs[k].cols() == batch, "forward_batch: tangent batch size mismatch");
    input.middleCols((k + 1) * batch, batch) = tangent_dirs[k];
  }
  tape.activations.push_back(std::move(input));

  const std::size_t layers = params.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z;
    z.noalias() = params.weights[l] * tape.activations.back();
    z.leftCols(batch).colwise() += params.biases[l];
    if (l + 1 < layers) {
      tanh_inplace(z.leftCols(batch));
      if (blocks > 1) {
        const Eigen::ArrayXXd slope = 1.0 - z.leftCols(batch).array().square();
        for (Eigen::Index k = 1; k < blocks; ++k) z.middleCols(k * batch, batch).array() *= slope;
      }
    }
    tape.activations.push_back(std::move(z));
  }

  if (!tape.output().allFinite()) {
    for (std::size_t l = 1; l < tape.activations.size(); ++l) {
      if (!tape.activations[l].allFinite()) {
        fail(ErrorCode::non_finite, "forward_batch: non-finite activation at layer " + std::to_string(l - 1));
      }
    }
  }
  return tape;
}

void backward_batch(const NetworkParams& params, const ForwardTape& tape, const RowVector& output_adjoint,
                    GradientBuffer& grad) {
  const Eigen::Index batch = tape.batch;
  const Eigen::Index blocks = 1 + tape.tangents;
  require(output_adjoint.size() == blocks * batch, "backward_batch: adjoint size mismatch");
  const std::size_t layers = params.num_layers();

  Matrix adj = output_adjoint;
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 < layers) {
      // Undo tanh on the value block and the slope product on tangent blocks:
      // T_k = s * Z_k with s = 1 - V^2, so dT_k/dZ_v = -2 V T_k.
      const Matrix& out = tape.activations[l + 1];
      const auto value = out.leftCols(batch).array();
      const Eigen::ArrayXXd slope = 1.0 - value.square();
      Eigen::ArrayXXd coupling = Eigen::ArrayXXd::Zero(out.rows(), batch);
      for (Eigen::Index k = 1; k < blocks; ++k) {
        coupling += out.middleCols(k * batch, batch).array() * adj.middleCols(k * batch, batch).array();
        adj.middleCols(k * batch, batch).array() *= slope;
      }
      adj.leftCols(batch).array() = slope * adj.leftCols(batch).array() - 2.0 * value * coupling;
    }
    const Matrix& in = tape.activations[l];
    grad.weights[l].noalias() += adj * in.transpose();
    grad.biases[l].noalias() += adj.leftCols(batch).rowwise().sum();
    if (l > 0) {
      Matrix next;
      next.noalias() = params.weights[l].transpose() * adj;
      adj.swap(next);
    }
  }
}

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
  validate_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open checkpoint for writing: " + path.string());
  out.write(checkpoint_magic.data(), checkpoint_magic.size());
  const auto count = static_cast<std::uint32_t>(params.layer_sizes.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (int m : params.layer_sizes) {
    const auto size = static_cast<std::uint32_t>(m);
    out.write(reinterpret_cast<const char*>(&size), sizeof(size));
  }
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double v = w(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    out.write(reinterpret_cast<const char*>(params.biases[l].data()),
              static_cast<std::streamsize>(params.biases[l].size() * sizeof(double)));
  }
  if (!out) fail(ErrorCode::io, "failed writing checkpoint: " + path.string());
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != checkpoint_magic) fail(ErrorCode::io, "not a checkpoint file: " + path.string());

  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count < 3 || count > 1024) fail(ErrorCode::io, "corrupt checkpoint header: " + path.string());
  NetworkParams p;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t size = 0;
    in.read(reinterpret_cast<char*>(&size), sizeof(size));
    if (!in || size == 0 || size > (1u << 20)) fail(ErrorCode::io, "corrupt checkpoint header: " + path.string());
    p.layer_sizes.push_back(static_cast<int>(size));
  }
  validate_layer_sizes(p.layer_sizes);
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    Matrix w(p.layer_sizes[l + 1], p.layer_sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) in.read(reinterpret_cast<char*>(&w(r, c)), sizeof(double));
    Vector b(p.layer_sizes[l + 1]);
    in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
    if (!in) fail(ErrorCode::io, "truncated checkpoint: " + path.string());
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorCode::io, "trailing bytes in checkpoint: " + path.string());
  return p;
}

std::vector<double> flatten(const NetworkParams& params) {
  std::vector<double> flat;
  flat.reserve(params.num_parameters());
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    for (Eigen::Index j = 0; j < params.biases[l].size(); ++j) flat.push_back(params.biases[l][j]);
  }
  return flat;
}

std::vector<double> flatten(const GradientBuffer& grad) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    const auto& w = grad.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    for (Eigen::Index j = 0; j < grad.biases[l].size(); ++j) flat.push_back(grad.biases[l][j]);
  }
  return flat;
}

void unflatten(std::span<const double> flat, NetworkParams& params) {
  require(flat.size() == params.num_parameters(), "unflatten: size mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    auto& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
    for (Eigen::Index j = 0; j < params.biases[l].size(); ++j) params.biases[l][j] = flat[k++];
  }
}

}  // namespace tpn
