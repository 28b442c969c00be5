#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "etgl/common.hpp"
#include "etgl/rng.hpp"

namespace etgl {

// Processed episode step. The critic target is
//   y = ret + bootstrap * gamma^horizon * Q'(terminal_state, mu'(terminal_state, goal), goal).
struct Transition {
  Vec state;
  Vec goal;
  Vec action;
  double ret = 0.0;     // accumulated (discounted) reward R
  Vec terminal_state;   // s_T (s_{t+1} for one-step transitions)
  bool bootstrap = true;
  int horizon = 1;      // T - t
  bool episode_success = false;
};

// D_beta: reservoir-retention buffer for all transitions.
class ReservoirBuffer {
 public:
  explicit ReservoirBuffer(std::size_t capacity);

  // Algorithm R: append while not full, otherwise replace a uniform slot with
  // probability capacity / seen.
  void insert(Transition t, Rng& rng);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t seen() const { return seen_; }
  bool empty() const { return items_.empty(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  const Transition& sample(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<Transition> items_;
};

// D_e: FIFO buffer holding transitions of goal-reaching episodes only.
class FifoBuffer {
 public:
  explicit FifoBuffer(std::size_t capacity);

  // Throws ContractError for a transition from an unsuccessful episode.
  void insert(Transition t);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }  // 0 = oldest
  const Transition& sample(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct SamplingSplit {
  int from_exploration = 0;  // mini-batches drawn from D_beta
  int from_exploitation = 0;  // mini-batches drawn from D_e

  friend bool operator==(const SamplingSplit&, const SamplingSplit&) = default;
};

// tau_e = i / E (clamped to [0,1]); max(floor((1 - tau_e) C), 1) batches from D_beta.
SamplingSplit sampling_split(std::int64_t episode, std::int64_t total_episodes, int minibatches);

using Minibatch = std::vector<const Transition*>;

// Batches sampled with replacement from their designated buffer. All batches
// come from D_beta when D_e is empty.
std::vector<Minibatch> draw_minibatches(const ReservoirBuffer& exploration,
                                        const FifoBuffer& exploitation, SamplingSplit split,
                                        std::size_t batch_size, Rng& rng);

}  // namespace etgl
