#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "activeuwb/random.hpp"

namespace activeuwb {

enum class OutputTransform : std::uint8_t { identity = 0, tanh_scaled = 1 };

/// Fully connected network with ReLU hidden layers. Inputs and outputs are
/// column-batched (features x batch). All parameters live in one contiguous
/// vector: for each layer, the weight matrix in row-major order followed by
/// its bias, which is also the checkpoint order.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using WeightMap = Eigen::Map<RowMajorMatrix>;
  using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;
  using BiasMap = Eigen::Map<Vector>;
  using ConstBiasMap = Eigen::Map<const Vector>;

  /// Intermediate values of a forward pass, needed by backward().
  struct Cache {
    Matrix input;
    std::vector<Matrix> pre;   // pre-activation of every layer
    std::vector<Matrix> post;  // post-activation of every layer
  };

  Mlp() = default;
  /// `widths` = {input, hidden..., output}. For tanh_scaled, `bounds` holds
  /// one positive bound per output (a single value is broadcast).
  explicit Mlp(std::vector<int> widths, OutputTransform transform = OutputTransform::identity,
               std::vector<Scalar> bounds = {});

  int input_size() const { return widths_.front(); }
  int output_size() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& widths() const { return widths_; }
  OutputTransform transform() const { return transform_; }
  const Vector& bounds() const { return bounds_; }

  std::size_t num_parameters() const { return static_cast<std::size_t>(params_.size()); }
  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  WeightMap weight(int layer);
  ConstWeightMap weight(int layer) const;
  BiasMap bias(int layer);
  ConstBiasMap bias(int layer) const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_uniform(Rng& rng);

  /// Throws ShapeMismatch if input.rows() != input_size().
  Matrix forward(const Matrix& input) const;
  Matrix forward(const Matrix& input, Cache& cache) const;

  /// Reverse pass for upstream = dL/d(output). Adds the parameter gradient
  /// into `param_grad` when non-null (it is resized and zeroed if empty) and
  /// writes dL/d(input) into `input_grad` when non-null.
  void backward(const Cache& cache, const Matrix& upstream, Vector* param_grad, Matrix* input_grad = nullptr) const;

  /// Convenience wrapper returning the parameter gradient.
  Vector parameter_gradient(const Cache& cache, const Matrix& upstream) const;

 private:
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  OutputTransform transform_ = OutputTransform::identity;
  Vector bounds_;
  Vector params_;
};

/// Adam with bias correction over a flat parameter vector.
template <typename Scalar>
class Adam {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Adam() = default;
  Adam(std::size_t n, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Vector& params, const Vector& grad);

  long steps() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_ = 3e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Vector m_, v_;
};

/// target <- tau * source + (1 - tau) * target.
template <typename Scalar>
void polyak_update(Mlp<Scalar>& target, const Mlp<Scalar>& source, double tau);

extern template class Mlp<float>;
extern template class Mlp<double>;
extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace activeuwb
