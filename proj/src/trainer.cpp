#include "etgl/trainer.hpp"

#include <charconv>
#include <mutex>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace etgl {

namespace {

Box state_box(const MazeLayout& layout) { return layout.bounds; }

// Layer activations are around the default mmap threshold, so without this
// every temporary matrix is an mmap/munmap pair.
void keep_matrices_on_heap() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    mallopt(M_TOP_PAD, 64 << 20);
  });
#endif
}

}  // namespace

EvalResult evaluate_policy(const DdpgAgent& agent, MazeEnv env, int episodes, Rng& rng) {
  require(episodes >= 1, "evaluate_policy: need at least one episode");
  int successes = 0;
  double total_return = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto [state, goal] = env.reset(rng);
    bool success = env.is_goal(state, goal);
    double ret = 0.0;
    while (!success && env.steps_taken() < env.layout().max_steps) {
      const StepResult r = env.step(agent.act(state, goal));
      state = r.next_state;
      ret += r.reward;
      success = r.success;
    }
    successes += success ? 1 : 0;
    total_return += ret;
  }
  return {static_cast<double>(successes) / episodes, total_return / episodes};
}

Trainer::Trainer(RunConfig config)
    : config_((keep_matrices_on_heap(), config.validate(), std::move(config))),
      env_(make_env(config_.env)),
      eval_env_(env_),
      env_rng_(Rng::stream(config_.seed, "env")),
      explorer_rng_(Rng::stream(config_.seed, "explorer")),
      replay_rng_(Rng::stream(config_.seed, "replay")),
      eval_rng_(Rng::stream(config_.seed, "eval")),
      agent_([&] {
        Rng nets = Rng::stream(config_.seed, "nets");
        return DdpgAgent(state_box(env_.layout()), env_.layout().action_box, config_.agent_config(), nets);
      }()),
      hasher_([&] {
        Rng hash_rng = Rng::stream(config_.seed, "hash");
        return SimHasher(config_.hash_bits, env_.state_dim(), hash_rng, config_.hash_preprocess,
                         env_.layout().bounds.low, env_.layout().bounds.high,
                         FourierFeatures{config_.hash_features, config_.hash_lengthscale});
      }()),
      model_(hasher_, static_cast<std::size_t>(config_.bucket_capacity)),
      dbeta_(static_cast<std::size_t>(config_.dbeta_capacity)),
      de_(static_cast<std::size_t>(config_.de_capacity)),
      coverage_(env_.layout(), config_.coverage_cell, config_.coverage_threshold),
      explore_(config_.resolved_explore()),
      budget_(config_.resolved_budget()),
      warmup_(config_.resolved_warmup()),
      total_episodes_(config_.resolved_total_episodes()) {
  schedule_.epsilon = config_.epsilon_start;
  schedule_.decay_rate = config_.resolved_epsilon_decay();
  schedule_.floor = config_.epsilon_floor;
}

void Trainer::observe(const Vec& state) {
  counts_.record_visit(hasher_.hash(state));
  coverage_.update(state);
}

std::optional<ExplorationOption> Trainer::make_option(const Vec& state, Rng& rng) {
  switch (explore_) {
    case Explore::etgreedy: {
      if (config_.model_source == ModelSource::perfect) {
        return generate_option_model(state, hasher_, counts_, env_, budget_, rng);
      }
      if (!config_.count_search_states) {
        return generate_option_buffer(state, hasher_, counts_, model_, budget_, rng);
      }
      RngIndexSource picks(rng);
      const SearchTrace trace = tree_search(state, hasher_, counts_, budget_, buffer_expander(model_), picks);
      for (std::size_t i = 1; i < trace.nodes.size(); ++i) counts_.record_visit(hasher_.hash(trace.nodes[i].state));
      if (trace.selected == 0) return std::nullopt;
      return trace.option();
    }
    case Explore::ezgreedy:
      return ez_greedy_option(budget_, env_.action_box(), rng);
    default:
      return std::nullopt;
  }
}

Vec Trainer::choose_action(const Vec& state, const Vec& goal) {
  const Box& box = env_.action_box();
  if (frames_done_ < warmup_) return box.sample(explorer_rng_);
  if (explore_ == Explore::gaussian) {
    const Vec sigma = config_.gaussian_sigma * 0.5 * (box.high - box.low);
    Vec a = agent_.act(state, goal);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += sigma(i) * explorer_rng_.normal();
    return box.clip(a);
  }
  const bool was_active = option_.active();
  const GreedyPolicy greedy = [this](const Vec& s, const Vec& g) { return agent_.act(s, g); };
  const OptionGenerator generate = [this](const Vec& s, Rng& rng) { return make_option(s, rng); };
  Vec a = select_action(greedy, state, goal, schedule_, option_, generate, box, explorer_rng_);
  if (!was_active && option_.active()) ++options_started_;
  return a;
}

void Trainer::maybe_checkpoint(const RowCallback& on_row) {
  const bool at_interval = frames_done_ % config_.checkpoint_interval == 0;
  const bool at_end = frames_done_ == config_.frames;
  if (!at_interval && !at_end) return;
  if (!rows_.empty() && rows_.back().step == frames_done_) return;
  const EvalResult eval = evaluate_policy(agent_, eval_env_, config_.eval_episodes, eval_rng_);
  MetricsRow row;
  row.step = frames_done_;
  row.episode = episodes_done_;
  row.success_rate = eval.success_rate;
  row.coverage = coverage_.fraction();
  row.epsilon = schedule_.epsilon;
  row.mean_episode_return = eval.mean_return;
  row.dbeta_size = dbeta_.size();
  row.de_size = de_.size();
  rows_.push_back(row);
  if (on_row) on_row(row);
}

void Trainer::train_on_buffers() {
  if (frames_done_ < warmup_ || dbeta_.empty()) return;
  const int c = config_.updates_per_episode;
  const SamplingSplit split = config_.uses_gdrb() ? sampling_split(episodes_done_, total_episodes_, c)
                                                  : SamplingSplit{c, 0};
  const auto batches = draw_minibatches(dbeta_, de_, split, static_cast<std::size_t>(config_.batch_size),
                                        replay_rng_);
  for (const auto& batch : batches) {
    agent_.critic_update(batch);
    agent_.actor_update(batch);
    agent_.update_targets();
    ++updates_;
  }
}

EpisodeSummary Trainer::run_episode(const RowCallback& on_row) {
  require(!finished(), "Trainer::run_episode: frame budget exhausted");
  auto [state, goal] = env_.reset(env_rng_);
  option_.clear();
  EpisodeRecord record;
  record.goal = goal;
  record.states.push_back(state);
  observe(state);

  EpisodeSummary summary;
  summary.episode = episodes_done_;
  summary.start_step = frames_done_;
  summary.start = state;
  summary.goal = goal;

  bool success = env_.is_goal(state, goal);
  bool done = success;
  while (!done && !finished()) {
    const Vec action = choose_action(state, goal);
    const StepResult r = env_.step(action);
    model_.insert({state, action, r.reward, r.next_state}, explorer_rng_);
    record.actions.push_back(action);
    record.rewards.push_back(r.reward);
    record.states.push_back(r.next_state);
    state = r.next_state;
    observe(state);
    ++frames_done_;
    if (frames_done_ > warmup_) schedule_.decay();
    success = r.success;
    done = r.done;
    maybe_checkpoint(on_row);
  }
  record.success = success;
  option_.clear();

  for (auto& t : process_episode(record, config_.gamma, config_.return_mode())) {
    if (config_.uses_gdrb() && t.episode_success) de_.insert(t);
    dbeta_.insert(std::move(t), replay_rng_);
  }
  ++episodes_done_;
  train_on_buffers();

  summary.length = static_cast<std::int64_t>(record.length());
  for (double r : record.rewards) summary.ret += r;
  summary.success = success;
  summary.final_state = state;
  return summary;
}

void Trainer::run(const RowCallback& on_row, const EpisodeCallback& on_episode) {
  while (!finished()) {
    const EpisodeSummary s = run_episode(on_row);
    if (on_episode) on_episode(s);
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string metrics_header(const RunConfig& c) {
  std::ostringstream o;
  o << "# scale=" << format_number(c.scale()) << " frames=" << c.frames
    << " reference_frames=" << format_number(c.reference_frames) << " env=" << c.env
    << " algo=" << to_string(c.algo) << " explore=" << to_string(c.resolved_explore())
    << " model_source=" << to_string(c.model_source) << " budget=" << c.resolved_budget()
    << " seed=" << c.seed << '\n'
    << "step,episode,success_rate,coverage,epsilon,mean_episode_return,dbeta_size,de_size\n";
  return o.str();
}

std::string metrics_csv_row(const MetricsRow& r) {
  std::ostringstream o;
  o << r.step << ',' << r.episode << ',' << format_number(r.success_rate) << ','
    << format_number(r.coverage) << ',' << format_number(r.epsilon) << ','
    << format_number(r.mean_episode_return) << ',' << r.dbeta_size << ',' << r.de_size << '\n';
  return o.str();
}

std::string episodes_header() {
  return "episode,start_step,length,return,success,start_x,start_y,goal_x,goal_y,final_x,final_y\n";
}

std::string episodes_csv_row(const EpisodeSummary& e) {
  std::ostringstream o;
  o << e.episode << ',' << e.start_step << ',' << e.length << ',' << format_number(e.ret) << ','
    << (e.success ? 1 : 0);
  for (const Vec* v : {&e.start, &e.goal, &e.final_state})
    for (Eigen::Index i = 0; i < v->size(); ++i) o << ',' << format_number((*v)(i));
  o << '\n';
  return o.str();
}

}  // namespace etgl
