#include "etgl/replay.hpp"

#include <algorithm>
#include <cmath>

namespace etgl {

ReservoirBuffer::ReservoirBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "ReservoirBuffer: capacity must be positive");
}

void ReservoirBuffer::insert(Transition t, Rng& rng) {
  ++seen_;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  const std::uint64_t j = rng.index(seen_);
  if (j < capacity_) items_[j] = std::move(t);
}

const Transition& ReservoirBuffer::sample(Rng& rng) const {
  require(!items_.empty(), "ReservoirBuffer::sample: buffer is empty");
  return items_[rng.index(items_.size())];
}

FifoBuffer::FifoBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "FifoBuffer: capacity must be positive");
}

void FifoBuffer::insert(Transition t) {
  require(t.episode_success, "FifoBuffer::insert: transition is not from a successful episode");
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

const Transition& FifoBuffer::sample(Rng& rng) const {
  require(!items_.empty(), "FifoBuffer::sample: buffer is empty");
  return items_[rng.index(items_.size())];
}

SamplingSplit sampling_split(std::int64_t episode, std::int64_t total_episodes, int minibatches) {
  require(total_episodes > 0, "sampling_split: total episodes must be positive");
  require(episode >= 0, "sampling_split: negative episode index");
  require(minibatches >= 1, "sampling_split: need at least one mini-batch");
  // floor(tau_beta * C) = floor((E - i) * C / E), computed exactly in integers.
  const std::int64_t i = std::min(episode, total_episodes);
  const std::int64_t scaled = (total_episodes - i) * minibatches / total_episodes;
  const int from_beta = static_cast<int>(std::max<std::int64_t>(scaled, 1));
  return {from_beta, minibatches - from_beta};
}

std::vector<Minibatch> draw_minibatches(const ReservoirBuffer& exploration,
                                        const FifoBuffer& exploitation, SamplingSplit split,
                                        std::size_t batch_size, Rng& rng) {
  require(batch_size >= 1, "draw_minibatches: batch size must be positive");
  require(split.from_exploration >= 0 && split.from_exploitation >= 0,
          "draw_minibatches: negative split");
  if (exploitation.empty()) {
    split.from_exploration += split.from_exploitation;
    split.from_exploitation = 0;
  }
  if (split.from_exploration > 0 && exploration.empty()) {
    throw ContractError("draw_minibatches: exploration buffer is empty");
  }
  std::vector<Minibatch> batches;
  batches.reserve(split.from_exploration + split.from_exploitation);
  for (int b = 0; b < split.from_exploration; ++b) {
    Minibatch batch(batch_size);
    for (auto& p : batch) p = &exploration.sample(rng);
    batches.push_back(std::move(batch));
  }
  for (int b = 0; b < split.from_exploitation; ++b) {
    Minibatch batch(batch_size);
    for (auto& p : batch) p = &exploitation.sample(rng);
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace etgl
