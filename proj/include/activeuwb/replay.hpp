#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "activeuwb/random.hpp"

namespace activeuwb {

/// Column-batched transitions (one column per sample).
template <typename Scalar>
struct TransitionBatch {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix obs;              // actor observation
  Matrix critic_obs;       // privileged critic observation
  Matrix actions;          // normalized to [-1, 1]
  Matrix rewards;          // 1 x B
  Matrix next_obs;
  Matrix next_critic_obs;
  Matrix dones;            // 1 x B, 1 for terminal (not time-limit) transitions

  Eigen::Index size() const { return rewards.cols(); }
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling (with
/// replacement).
template <typename Scalar>
class ReplayBuffer {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  ReplayBuffer(std::size_t capacity, int obs_dim, int critic_obs_dim, int action_dim);

  void add(std::span<const double> obs, std::span<const double> critic_obs, std::span<const double> action,
           double reward, std::span<const double> next_obs, std::span<const double> next_critic_obs, bool done);

  TransitionBatch<Scalar> sample(std::size_t batch, Rng& rng) const;
  /// Indices that sample() would draw with the same generator state.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;
  TransitionBatch<Scalar> gather(std::span<const std::size_t> indices) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// Total number of add() calls.
  std::size_t inserted() const { return inserted_; }
  /// Slot the next add() writes to.
  std::size_t head() const { return head_; }
  double reward_at(std::size_t slot) const { return static_cast<double>(rewards_(0, slot)); }

 private:
  std::size_t capacity_;
  int obs_dim_, critic_dim_, action_dim_;
  Matrix obs_, critic_obs_, actions_, rewards_, next_obs_, next_critic_obs_, dones_;
  std::size_t size_ = 0, head_ = 0, inserted_ = 0;
};

extern template class ReplayBuffer<float>;
extern template class ReplayBuffer<double>;

}  // namespace activeuwb
