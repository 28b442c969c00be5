#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "etgl/common.hpp"
#include "etgl/envs.hpp"
#include "etgl/hashing.hpp"
#include "etgl/rng.hpp"

namespace etgl {

// Finite action sequence executed open-loop.
struct ExplorationOption {
  std::vector<Vec> actions;

  std::size_t length() const { return actions.size(); }
};

// Source of uniform discrete choices for the tree search. Production code
// draws from an Rng; exhaustive enumeration scripts the choices instead.
class IndexSource {
 public:
  virtual ~IndexSource() = default;
  virtual std::size_t pick(std::size_t n) = 0;  // uniform in [0, n)
};

class RngIndexSource final : public IndexSource {
 public:
  explicit RngIndexSource(Rng& rng) : rng_(rng) {}
  std::size_t pick(std::size_t n) override { return rng_.index(n); }

 private:
  Rng& rng_;
};

struct Expansion {
  Vec action;
  Vec next_state;
};

// Produces a child of `state`, or nothing when no transition is available.
using Expander = std::function<std::optional<Expansion>(const Vec& state, IndexSource& picks)>;

struct SearchNode {
  Vec state;
  Vec action;  // action from the parent; empty for the root
  int parent = -1;
  std::uint64_t count = 0;  // n(phi(state)) when the node was added
};

struct SearchTrace {
  std::vector<SearchNode> nodes;  // nodes[0] is the root, then in discovery order
  int selected = 0;               // node whose root path becomes the option
  bool early_exit = false;        // selected node has a zero count
  int iterations = 0;

  ExplorationOption option() const;  // actions root -> selected
};

// Budgeted tree search. Each iteration samples a node uniformly from the
// (only growing) frontier and expands it; returns as soon as a child with a
// zero visit count appears, otherwise selects the least-visited node after
// `budget` iterations (strict comparison, so ties keep the earliest node,
// starting from the root). An expansion that yields nothing consumes the
// iteration.
SearchTrace tree_search(const Vec& root, const SimHasher& hasher, const CountTable& counts,
                        int budget, const Expander& expand, IndexSource& picks);

// Expansion through B_M: a uniformly chosen stored transition (s', a, r, s'')
// from the bucket of the node supplies the child s'' with label a.
Expander buffer_expander(const ModelBuffer& model);

// Expansion through the true transition function with a uniform action.
Expander model_expander(const TransitionModel& model, Rng& rng);

// Replay-buffer search. Nothing is returned when the root's bucket is empty
// or the search ends at the root; the caller then takes one random action.
std::optional<ExplorationOption> generate_option_buffer(const Vec& state, const SimHasher& hasher,
                                                        const CountTable& counts,
                                                        const ModelBuffer& model, int budget,
                                                        Rng& rng);

// Perfect-model search. A search that ends at the root yields a single
// uniformly random action.
ExplorationOption generate_option_model(const Vec& state, const SimHasher& hasher,
                                        const CountTable& counts, const TransitionModel& model,
                                        int budget, Rng& rng);

// One uniform random action repeated n ~ Uniform{1..budget} times.
ExplorationOption ez_greedy_option(int budget, const Box& action_box, Rng& rng);

struct EpsilonSchedule {
  double epsilon = 1.0;
  double decay_rate = 0.9999988;
  double floor = 0.0;

  void decay() { epsilon = std::max(epsilon * decay_rate, floor); }
};

// Remaining actions of the option being executed.
struct OptionState {
  ExplorationOption option;
  std::size_t next = 0;

  bool active() const { return next < option.actions.size(); }
  std::size_t remaining() const { return option.actions.size() - next; }
  void clear() {
    option.actions.clear();
    next = 0;
  }
};

using GreedyPolicy = std::function<Vec(const Vec& state, const Vec& goal)>;
using OptionGenerator = std::function<std::optional<ExplorationOption>(const Vec& state, Rng& rng)>;

// An active option always supplies the next action. Otherwise, with
// probability epsilon an option is generated and its first action emitted
// (a uniform random action if none is produced); else the greedy action.
// Actions are clipped to the action box.
Vec select_action(const GreedyPolicy& greedy, const Vec& state, const Vec& goal,
                  const EpsilonSchedule& schedule, OptionState& option_state,
                  const OptionGenerator& generate, const Box& action_box, Rng& rng);

// mu + N(0, sigma^2) per dimension, clipped.
Vec gaussian_action(const Vec& greedy_action, double sigma, const Box& action_box, Rng& rng);

}  // namespace etgl
