#include "etgl/explore.hpp"

#include <algorithm>

namespace etgl {

ExplorationOption SearchTrace::option() const {
  ExplorationOption opt;
  for (int n = selected; n > 0; n = nodes[n].parent) opt.actions.push_back(nodes[n].action);
  std::reverse(opt.actions.begin(), opt.actions.end());
  return opt;
}

SearchTrace tree_search(const Vec& root, const SimHasher& hasher, const CountTable& counts,
                        int budget, const Expander& expand, IndexSource& picks) {
  require(budget >= 1, "tree_search: budget must be at least 1");
  SearchTrace trace;
  trace.nodes.push_back({root, Vec(), -1, counts.count(hasher.hash(root))});
  for (int i = 0; i < budget; ++i) {
    ++trace.iterations;
    const int parent = static_cast<int>(picks.pick(trace.nodes.size()));
    // Copy: push_back below may reallocate.
    const Vec parent_state = trace.nodes[parent].state;
    auto child = expand(parent_state, picks);
    if (!child) continue;
    const std::uint64_t n = counts.count(hasher.hash(child->next_state));
    trace.nodes.push_back({std::move(child->next_state), std::move(child->action), parent, n});
    const int idx = static_cast<int>(trace.nodes.size()) - 1;
    if (n == 0) {
      trace.selected = idx;
      trace.early_exit = true;
      return trace;
    }
    if (n < trace.nodes[trace.selected].count) trace.selected = idx;
  }
  return trace;
}

Expander buffer_expander(const ModelBuffer& model) {
  return [&model](const Vec& state, IndexSource& picks) -> std::optional<Expansion> {
    const auto bucket = model.bucket(model.hasher().hash(state));
    if (bucket.empty()) return std::nullopt;
    const ModelTransition& t = bucket[picks.pick(bucket.size())];
    return Expansion{t.action, t.next_state};
  };
}

Expander model_expander(const TransitionModel& model, Rng& rng) {
  return [&model, &rng](const Vec& state, IndexSource&) -> std::optional<Expansion> {
    Vec a = model.action_box().sample(rng);
    Vec next = model.model_transition(state, a);
    return Expansion{std::move(a), std::move(next)};
  };
}

std::optional<ExplorationOption> generate_option_buffer(const Vec& state, const SimHasher& hasher,
                                                        const CountTable& counts,
                                                        const ModelBuffer& model, int budget,
                                                        Rng& rng) {
  require(budget >= 1, "generate_option_buffer: budget must be at least 1");
  if (model.bucket(model.hasher().hash(state)).empty()) return std::nullopt;
  RngIndexSource picks(rng);
  const SearchTrace trace = tree_search(state, hasher, counts, budget, buffer_expander(model), picks);
  if (trace.selected == 0) return std::nullopt;
  return trace.option();
}

ExplorationOption generate_option_model(const Vec& state, const SimHasher& hasher,
                                        const CountTable& counts, const TransitionModel& model,
                                        int budget, Rng& rng) {
  require(budget >= 1, "generate_option_model: budget must be at least 1");
  RngIndexSource picks(rng);
  const SearchTrace trace = tree_search(state, hasher, counts, budget, model_expander(model, rng), picks);
  if (trace.selected == 0) return ExplorationOption{{model.action_box().sample(rng)}};
  return trace.option();
}

ExplorationOption ez_greedy_option(int budget, const Box& action_box, Rng& rng) {
  require(budget >= 1, "ez_greedy_option: budget must be at least 1");
  const std::size_t n = 1 + rng.index(static_cast<std::size_t>(budget));
  const Vec a = action_box.sample(rng);
  return ExplorationOption{std::vector<Vec>(n, a)};
}

Vec select_action(const GreedyPolicy& greedy, const Vec& state, const Vec& goal,
                  const EpsilonSchedule& schedule, OptionState& option_state,
                  const OptionGenerator& generate, const Box& action_box, Rng& rng) {
  if (option_state.active()) return action_box.clip(option_state.option.actions[option_state.next++]);
  option_state.clear();
  if (rng.uniform() < schedule.epsilon) {
    std::optional<ExplorationOption> opt;
    if (generate) opt = generate(state, rng);
    if (!opt || opt->actions.empty()) return action_box.sample(rng);
    option_state.option = std::move(*opt);
    option_state.next = 1;
    return action_box.clip(option_state.option.actions.front());
  }
  return action_box.clip(greedy(state, goal));
}

Vec gaussian_action(const Vec& greedy_action, double sigma, const Box& action_box, Rng& rng) {
  Vec a = greedy_action;
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += sigma * rng.normal();
  return action_box.clip(a);
}

}  // namespace etgl
