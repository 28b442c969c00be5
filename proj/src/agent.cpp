#include "etgl/agent.hpp"

#include <cmath>

namespace etgl {

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

DdpgAgent::DdpgAgent(const Box& state_bounds, const Box& action_box, AgentConfig config, Rng& rng)
    : config_(std::move(config)),
      state_bounds_(state_bounds),
      action_box_(action_box),
      state_dim_(state_bounds.dim()),
      action_dim_(action_box.dim()) {
  require(state_dim_ > 0 && action_dim_ > 0, "DdpgAgent: empty state or action box");
  require(((state_bounds.high - state_bounds.low).array() > 0).all(), "DdpgAgent: empty state box");
  require(config_.gamma >= 0.0 && config_.gamma <= 1.0, "DdpgAgent: gamma must be in [0, 1]");
  require(config_.tau >= 0.0 && config_.tau <= 1.0, "DdpgAgent: tau must be in [0, 1]");
  require(config_.actor_lr > 0.0 && config_.critic_lr > 0.0, "DdpgAgent: learning rates must be positive");

  const auto actor_sizes = layer_sizes(2 * state_dim_, config_.hidden, action_dim_);
  const auto critic_sizes = layer_sizes(2 * state_dim_ + action_dim_, config_.hidden, 1);
  actor_ = nn::Network(actor_sizes, nn::OutputActivation::scaled_tanh, rng);
  actor_.set_output_bounds(action_box.low, action_box.high);
  critic_ = nn::Network(critic_sizes, nn::OutputActivation::identity, rng);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = nn::Adam(actor_, config_.actor_lr);
  critic_opt_ = nn::Adam(critic_, config_.critic_lr);
}

Vec DdpgAgent::scale_state(const Vec& s) const {
  return (2.0 * (s - state_bounds_.low).array() / (state_bounds_.high - state_bounds_.low).array() - 1.0)
      .matrix();
}

Vec DdpgAgent::scale_action(const Vec& a) const {
  return ((a - action_box_.center()).array() / (0.5 * (action_box_.high - action_box_.low)).array())
      .matrix();
}

Vec DdpgAgent::act(const Vec& state, const Vec& goal) const {
  require(state.size() == state_dim_ && goal.size() == state_dim_, "DdpgAgent::act: dimension mismatch");
  Vec in(2 * state_dim_);
  in << scale_state(state), scale_state(goal);
  return actor_.forward(in);
}

double DdpgAgent::q_value(const Vec& state, const Vec& action, const Vec& goal) const {
  Vec in(2 * state_dim_ + action_dim_);
  in << scale_state(state), scale_action(action), scale_state(goal);
  return critic_.forward(in)(0);
}

Mat DdpgAgent::actor_inputs(const Minibatch& batch) const {
  Mat in(2 * state_dim_, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    in.col(j) << scale_state(batch[j]->state), scale_state(batch[j]->goal);
  }
  return in;
}

Mat DdpgAgent::critic_inputs(const Minibatch& batch, const Mat& actions) const {
  Mat in(2 * state_dim_ + action_dim_, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    in.col(j) << scale_state(batch[j]->state), scale_action(actions.col(j)), scale_state(batch[j]->goal);
  }
  return in;
}

Mat DdpgAgent::target_bootstrap_values(const std::vector<const Transition*>& items) const {
  const auto n = static_cast<Eigen::Index>(items.size());
  Mat actor_in(2 * state_dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    actor_in.col(j) << scale_state(items[j]->terminal_state), scale_state(items[j]->goal);
  }
  const Mat next_actions = target_actor_.forward(actor_in);
  Mat critic_in(2 * state_dim_ + action_dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    critic_in.col(j) << actor_in.col(j).head(state_dim_), scale_action(next_actions.col(j)),
        actor_in.col(j).tail(state_dim_);
  }
  return target_critic_.forward(critic_in);
}

Vec DdpgAgent::critic_targets(const Minibatch& batch) const {
  Vec y(static_cast<Eigen::Index>(batch.size()));
  std::vector<const Transition*> bootstrapped;
  std::vector<Eigen::Index> where;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    y(j) = batch[j]->ret;
    if (batch[j]->bootstrap) {
      bootstrapped.push_back(batch[j]);
      where.push_back(static_cast<Eigen::Index>(j));
    }
  }
  if (!bootstrapped.empty()) {
    const Mat q = target_bootstrap_values(bootstrapped);
    for (std::size_t i = 0; i < bootstrapped.size(); ++i) {
      const int power = config_.literal_single_gamma ? 1 : bootstrapped[i]->horizon;
      y(where[i]) += std::pow(config_.gamma, power) * q(0, static_cast<Eigen::Index>(i));
    }
  }
  if (!y.allFinite()) throw NumericError("critic_targets: non-finite target");
  return y;
}

double DdpgAgent::critic_loss(const Minibatch& batch, const Vec& targets, nn::Gradients* grads) const {
  require(!batch.empty(), "critic_loss: empty batch");
  require(targets.size() == static_cast<Eigen::Index>(batch.size()), "critic_loss: target count mismatch");
  Mat actions(action_dim_, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) actions.col(j) = batch[j]->action;
  nn::ForwardCache cache;
  const Mat q = critic_.forward(critic_inputs(batch, actions), &cache);
  const double k = static_cast<double>(batch.size());
  const Mat err = q - targets.transpose();
  const double loss = err.squaredNorm() / k;
  if (grads) *grads = critic_.backward(cache, (2.0 / k) * err);
  return loss;
}

double DdpgAgent::actor_objective(const Minibatch& batch, nn::Gradients* grads) const {
  require(!batch.empty(), "actor_objective: empty batch");
  const double k = static_cast<double>(batch.size());
  nn::ForwardCache actor_cache;
  const Mat actions = actor_.forward(actor_inputs(batch), &actor_cache);
  nn::ForwardCache critic_cache;
  const Mat q = critic_.forward(critic_inputs(batch, actions), &critic_cache);
  const double objective = q.sum() / k;
  if (grads) {
    Mat input_grad;
    critic_.backward(critic_cache, Mat::Constant(1, q.cols(), 1.0 / k), &input_grad, false);
    const Vec inv_half = (2.0 / (action_box_.high - action_box_.low).array()).matrix();
    const Mat action_grad = inv_half.asDiagonal() * input_grad.middleRows(state_dim_, action_dim_);
    *grads = actor_.backward(actor_cache, action_grad);
  }
  return objective;
}

double DdpgAgent::critic_update(const Minibatch& batch) {
  const Vec y = critic_targets(batch);
  nn::Gradients grads;
  const double loss = critic_loss(batch, y, &grads);
  if (!std::isfinite(loss)) throw NumericError("critic_update: non-finite loss");
  critic_opt_.step(critic_, grads);
  return loss;
}

double DdpgAgent::actor_update(const Minibatch& batch) {
  nn::Gradients grads;
  const double objective = actor_objective(batch, &grads);
  if (!std::isfinite(objective)) throw NumericError("actor_update: non-finite objective");
  grads *= -1.0;
  actor_opt_.step(actor_, grads);
  return objective;
}

void DdpgAgent::update_targets() {
  nn::soft_update(target_actor_, actor_, config_.tau);
  nn::soft_update(target_critic_, critic_, config_.tau);
}

std::vector<Transition> process_episode(const EpisodeRecord& record, double gamma, ReturnMode mode) {
  const std::size_t T = record.length();
  require(record.rewards.size() == T, "process_episode: reward count mismatch");
  require(record.states.size() == T + 1, "process_episode: need T + 1 states");
  std::vector<Transition> out(T);
  double ret = 0.0;
  for (std::size_t i = T; i-- > 0;) {
    Transition& t = out[i];
    t.state = record.states[i];
    t.goal = record.goal;
    t.action = record.actions[i];
    t.episode_success = record.success;
    if (mode == ReturnMode::longest) {
      ret = record.rewards[i] + gamma * ret;
      t.ret = ret;
      t.terminal_state = record.states[T];
      t.horizon = static_cast<int>(T - i);
      t.bootstrap = !record.success;
    } else {
      t.ret = record.rewards[i];
      t.terminal_state = record.states[i + 1];
      t.horizon = 1;
      t.bootstrap = !(record.success && i + 1 == T);
    }
  }
  return out;
}

}  // namespace etgl
