#pragma once

#include <vector>

#include "etgl/common.hpp"
#include "etgl/envs.hpp"
#include "etgl/nn.hpp"
#include "etgl/replay.hpp"
#include "etgl/rng.hpp"

namespace etgl {

struct AgentConfig {
  std::vector<int> hidden{128, 128, 128};
  double gamma = 0.99;
  double tau = 0.01;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  // Discount the bootstrap term by a single gamma instead of gamma^(T - t).
  bool literal_single_gamma = false;
};

// Goal-conditioned DDPG. The actor sees [s, g] and the critic [s, a, g], each
// block rescaled to [-1, 1] by the state bounds and action box; the actor
// output is a tanh squashed into the action box.
class DdpgAgent {
 public:
  DdpgAgent(const Box& state_bounds, const Box& action_box, AgentConfig config, Rng& rng);

  Vec act(const Vec& state, const Vec& goal) const;
  double q_value(const Vec& state, const Vec& action, const Vec& goal) const;

  // y = R + bootstrap * gamma^horizon * Q'(s_T, mu'(s_T, g), g); transitions
  // without bootstrap never touch the target networks.
  Vec critic_targets(const Minibatch& batch) const;

  // One Adam step on (1/k) sum (y - Q(s, a, g))^2; returns the pre-step loss.
  double critic_update(const Minibatch& batch);
  // One Adam step ascending (1/k) sum Q(s, mu(s, g), g) on the actor only;
  // returns the pre-step objective.
  double actor_update(const Minibatch& batch);
  void update_targets();

  // Loss and its critic parameter gradient for fixed targets y.
  double critic_loss(const Minibatch& batch, const Vec& targets, nn::Gradients* grads) const;
  // Objective and its actor parameter gradient (gradient of the objective, not
  // of its negation).
  double actor_objective(const Minibatch& batch, nn::Gradients* grads) const;

  Mat actor_inputs(const Minibatch& batch) const;
  Mat critic_inputs(const Minibatch& batch, const Mat& actions) const;

  const AgentConfig& config() const { return config_; }
  const Box& state_bounds() const { return state_bounds_; }
  const Box& action_box() const { return action_box_; }

  nn::Network& actor() { return actor_; }
  nn::Network& critic() { return critic_; }
  nn::Network& target_actor() { return target_actor_; }
  nn::Network& target_critic() { return target_critic_; }
  const nn::Network& actor() const { return actor_; }
  const nn::Network& critic() const { return critic_; }
  const nn::Network& target_actor() const { return target_actor_; }
  const nn::Network& target_critic() const { return target_critic_; }

 private:
  Vec scale_state(const Vec& s) const;
  Vec scale_action(const Vec& a) const;
  Mat target_bootstrap_values(const std::vector<const Transition*>& items) const;

  AgentConfig config_;
  Box state_bounds_;
  Box action_box_;
  int state_dim_;
  int action_dim_;
  nn::Network actor_;
  nn::Network critic_;
  nn::Network target_actor_;
  nn::Network target_critic_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
};

// One collected episode: states s_0..s_T, actions and rewards a_t, r_t for
// t < T.
struct EpisodeRecord {
  Vec goal;
  std::vector<Vec> states;
  std::vector<Vec> actions;
  std::vector<double> rewards;
  bool success = false;

  std::size_t length() const { return actions.size(); }
};

enum class ReturnMode {
  longest,   // R_i = sum_{k >= i} gamma^(k-i) r_k, bootstrapped from s_T
  one_step,  // R_i = r_i, bootstrapped from s_{i+1}
};

// Processed transitions in time order. With longest returns every transition
// of a successful episode has bootstrap = 0; with one-step returns only the
// final, goal-reaching transition does.
std::vector<Transition> process_episode(const EpisodeRecord& record, double gamma,
                                        ReturnMode mode = ReturnMode::longest);

}  // namespace etgl
