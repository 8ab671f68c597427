#include "activeuwb/replay.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "activeuwb/errors.hpp"

namespace activeuwb {

template <typename Scalar>
ReplayBuffer<Scalar>::ReplayBuffer(std::size_t capacity, int obs_dim, int critic_obs_dim, int action_dim)
    : capacity_(capacity), obs_dim_(obs_dim), critic_dim_(critic_obs_dim), action_dim_(action_dim) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  if (obs_dim <= 0 || critic_obs_dim <= 0 || action_dim <= 0) {
    throw std::invalid_argument("ReplayBuffer: dimensions must be positive");
  }
  const auto n = static_cast<Eigen::Index>(capacity);
  obs_.setZero(obs_dim, n);
  next_obs_.setZero(obs_dim, n);
  critic_obs_.setZero(critic_obs_dim, n);
  next_critic_obs_.setZero(critic_obs_dim, n);
  actions_.setZero(action_dim, n);
  rewards_.setZero(1, n);
  dones_.setZero(1, n);
}

namespace {
template <typename M>
void put(M& dst, std::size_t col, std::span<const double> src, const char* what) {
  if (static_cast<Eigen::Index>(src.size()) != dst.rows()) {
    throw ShapeMismatch(std::string("ReplayBuffer::add: wrong length for ") + what);
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = static_cast<typename M::Scalar>(src[i]);
  }
}
}  // namespace

template <typename Scalar>
void ReplayBuffer<Scalar>::add(std::span<const double> obs, std::span<const double> critic_obs,
                               std::span<const double> action, double reward, std::span<const double> next_obs,
                               std::span<const double> next_critic_obs, bool done) {
  put(obs_, head_, obs, "obs");
  put(critic_obs_, head_, critic_obs, "critic_obs");
  put(actions_, head_, action, "action");
  put(next_obs_, head_, next_obs, "next_obs");
  put(next_critic_obs_, head_, next_critic_obs, "next_critic_obs");
  rewards_(0, head_) = static_cast<Scalar>(reward);
  dones_(0, head_) = done ? Scalar(1) : Scalar(0);
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++inserted_;
}

template <typename Scalar>
std::vector<std::size_t> ReplayBuffer<Scalar>::sample_indices(std::size_t batch, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

template <typename Scalar>
TransitionBatch<Scalar> ReplayBuffer<Scalar>::gather(std::span<const std::size_t> idx) const {
  const auto b = static_cast<Eigen::Index>(idx.size());
  TransitionBatch<Scalar> out;
  out.obs.resize(obs_dim_, b);
  out.next_obs.resize(obs_dim_, b);
  out.critic_obs.resize(critic_dim_, b);
  out.next_critic_obs.resize(critic_dim_, b);
  out.actions.resize(action_dim_, b);
  out.rewards.resize(1, b);
  out.dones.resize(1, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto s = static_cast<Eigen::Index>(idx[j]);
    if (idx[j] >= size_) throw std::out_of_range("ReplayBuffer::gather: index beyond fill");
    out.obs.col(j) = obs_.col(s);
    out.next_obs.col(j) = next_obs_.col(s);
    out.critic_obs.col(j) = critic_obs_.col(s);
    out.next_critic_obs.col(j) = next_critic_obs_.col(s);
    out.actions.col(j) = actions_.col(s);
    out.rewards(0, j) = rewards_(0, s);
    out.dones(0, j) = dones_(0, s);
  }
  return out;
}

template <typename Scalar>
TransitionBatch<Scalar> ReplayBuffer<Scalar>::sample(std::size_t batch, Rng& rng) const {
  const auto idx = sample_indices(batch, rng);
  return gather(idx);
}

template class ReplayBuffer<float>;
template class ReplayBuffer<double>;

}  // namespace activeuwb
