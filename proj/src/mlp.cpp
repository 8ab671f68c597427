#include "activeuwb/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "activeuwb/errors.hpp"

namespace activeuwb {

template <typename Scalar>
Mlp<Scalar>::Mlp(std::vector<int> widths, OutputTransform transform, std::vector<Scalar> bounds)
    : widths_(std::move(widths)), transform_(transform) {
  if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("Mlp: layer widths must be positive");
  }
  std::size_t total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(widths_[l + 1]) * (widths_[l] + 1);
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(total));

  if (transform_ == OutputTransform::tanh_scaled) {
    if (bounds.size() == 1) bounds.assign(output_size(), bounds.front());
    if (bounds.size() != static_cast<std::size_t>(output_size())) {
      throw ShapeMismatch("Mlp: tanh_scaled needs one bound per output");
    }
    bounds_ = Eigen::Map<const Vector>(bounds.data(), output_size());
    if ((bounds_.array() <= Scalar(0)).any()) throw std::invalid_argument("Mlp: bounds must be positive");
  }
}

template <typename Scalar>
typename Mlp<Scalar>::WeightMap Mlp<Scalar>::weight(int l) {
  return WeightMap(params_.data() + offsets_[l], widths_[l + 1], widths_[l]);
}

template <typename Scalar>
typename Mlp<Scalar>::ConstWeightMap Mlp<Scalar>::weight(int l) const {
  return ConstWeightMap(params_.data() + offsets_[l], widths_[l + 1], widths_[l]);
}

template <typename Scalar>
typename Mlp<Scalar>::BiasMap Mlp<Scalar>::bias(int l) {
  return BiasMap(params_.data() + offsets_[l] + static_cast<std::size_t>(widths_[l + 1]) * widths_[l], widths_[l + 1]);
}

template <typename Scalar>
typename Mlp<Scalar>::ConstBiasMap Mlp<Scalar>::bias(int l) const {
  return ConstBiasMap(params_.data() + offsets_[l] + static_cast<std::size_t>(widths_[l + 1]) * widths_[l],
                      widths_[l + 1]);
}

template <typename Scalar>
void Mlp<Scalar>::init_uniform(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = weight(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
    auto b = bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = static_cast<Scalar>(dist(rng));
  }
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward(const Matrix& input) const {
  Cache scratch;
  return forward(input, scratch);
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward(const Matrix& input, Cache& cache) const {
  if (input.rows() != input_size()) {
    throw ShapeMismatch("Mlp::forward: expected " + std::to_string(input_size()) + " input rows, got " +
                        std::to_string(input.rows()));
  }
  const int n = num_layers();
  cache.input = input;
  cache.pre.resize(n);
  cache.post.resize(n);
  const Matrix* a = &cache.input;
  for (int l = 0; l < n; ++l) {
    cache.pre[l].noalias() = weight(l) * (*a);
    cache.pre[l].colwise() += bias(l);
    if (l + 1 < n) {
      cache.post[l] = cache.pre[l].cwiseMax(Scalar(0));
    } else if (transform_ == OutputTransform::tanh_scaled) {
      cache.post[l] = bounds_.asDiagonal() * cache.pre[l].array().tanh().matrix();
    } else {
      cache.post[l] = cache.pre[l];
    }
    a = &cache.post[l];
  }
  return cache.post.back();
}

template <typename Scalar>
void Mlp<Scalar>::backward(const Cache& cache, const Matrix& upstream, Vector* param_grad, Matrix* input_grad) const {
  const int n = num_layers();
  if (upstream.rows() != output_size() || upstream.cols() != cache.input.cols()) {
    throw ShapeMismatch("Mlp::backward: upstream gradient shape does not match the cached forward pass");
  }
  if (param_grad && param_grad->size() != params_.size()) *param_grad = Vector::Zero(params_.size());

  Matrix delta;
  if (transform_ == OutputTransform::tanh_scaled) {
    const auto t = cache.pre.back().array().tanh();
    delta = (bounds_.asDiagonal() * upstream).array() * (Scalar(1) - t * t);
  } else {
    delta = upstream;
  }
  for (int l = n - 1; l >= 0; --l) {
    const Matrix& a_prev = l == 0 ? cache.input : cache.post[l - 1];
    if (param_grad) {
      WeightMap gw(param_grad->data() + offsets_[l], widths_[l + 1], widths_[l]);
      gw.noalias() += delta * a_prev.transpose();
      BiasMap gb(param_grad->data() + offsets_[l] + static_cast<std::size_t>(widths_[l + 1]) * widths_[l],
                 widths_[l + 1]);
      gb += delta.rowwise().sum();
    }
    if (l > 0) {
      Matrix next = weight(l).transpose() * delta;
      delta = next.cwiseProduct((cache.pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    } else if (input_grad) {
      input_grad->noalias() = weight(0).transpose() * delta;
    }
  }
}

template <typename Scalar>
typename Mlp<Scalar>::Vector Mlp<Scalar>::parameter_gradient(const Cache& cache, const Matrix& upstream) const {
  Vector g = Vector::Zero(params_.size());
  backward(cache, upstream, &g);
  return g;
}

template <typename Scalar>
Adam<Scalar>::Adam(std::size_t n, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_ = Vector::Zero(static_cast<Eigen::Index>(n));
  v_ = Vector::Zero(static_cast<Eigen::Index>(n));
}

template <typename Scalar>
void Adam<Scalar>::step(Vector& params, const Vector& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw ShapeMismatch("Adam::step: size mismatch");
  ++t_;
  const Scalar b1 = static_cast<Scalar>(beta1_), b2 = static_cast<Scalar>(beta2_);
  m_ = b1 * m_ + (Scalar(1) - b1) * grad;
  v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const Scalar step = static_cast<Scalar>(lr_ / c1);
  const Scalar root_c2 = static_cast<Scalar>(std::sqrt(c2));
  params.array() -= step * m_.array() / (v_.array().sqrt() / root_c2 + static_cast<Scalar>(eps_));
}

template <typename Scalar>
void polyak_update(Mlp<Scalar>& target, const Mlp<Scalar>& source, double tau) {
  if (target.num_parameters() != source.num_parameters()) throw ShapeMismatch("polyak_update: size mismatch");
  if (tau == 1.0) {
    target.parameters() = source.parameters();
    return;
  }
  const Scalar t = static_cast<Scalar>(tau);
  target.parameters() = t * source.parameters() + (Scalar(1) - t) * target.parameters();
}

template class Mlp<float>;
template class Mlp<double>;
template class Adam<float>;
template class Adam<double>;
template void polyak_update<float>(Mlp<float>&, const Mlp<float>&, double);
template void polyak_update<double>(Mlp<double>&, const Mlp<double>&, double);

}  // namespace activeuwb
