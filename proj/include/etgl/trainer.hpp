#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "etgl/agent.hpp"
#include "etgl/config.hpp"
#include "etgl/coverage.hpp"
#include "etgl/envs.hpp"
#include "etgl/explore.hpp"
#include "etgl/hashing.hpp"
#include "etgl/replay.hpp"
#include "etgl/rng.hpp"

namespace etgl {

struct MetricsRow {
  std::int64_t step = 0;
  std::int64_t episode = 0;
  double success_rate = 0.0;
  double coverage = 0.0;
  double epsilon = 0.0;
  double mean_episode_return = 0.0;
  std::size_t dbeta_size = 0;
  std::size_t de_size = 0;
};

struct EpisodeSummary {
  std::int64_t episode = 0;
  std::int64_t start_step = 0;
  std::int64_t length = 0;
  double ret = 0.0;
  bool success = false;
  Vec start;
  Vec goal;
  Vec final_state;
};

struct EvalResult {
  double success_rate = 0.0;
  double mean_return = 0.0;
};

// Greedy rollouts (no exploration) of the actor on fresh resets.
EvalResult evaluate_policy(const DdpgAgent& agent, MazeEnv env, int episodes, Rng& rng);

// One full training run: episodes of exploration, episode processing into
// the replay buffers, C actor-critic updates per episode and periodic greedy
// evaluation checkpoints.
class Trainer {
 public:
  explicit Trainer(RunConfig config);

  using RowCallback = std::function<void(const MetricsRow&)>;
  using EpisodeCallback = std::function<void(const EpisodeSummary&)>;

  // Runs until the frame budget is spent. Rows are produced at every multiple
  // of checkpoint_interval and at the final frame.
  void run(const RowCallback& on_row = {}, const EpisodeCallback& on_episode = {});

  // One training episode followed by its updates; checkpoints that fall
  // inside the episode are evaluated when their frame is reached.
  EpisodeSummary run_episode(const RowCallback& on_row = {});

  bool finished() const { return frames_done_ >= config_.frames; }
  std::int64_t frames_done() const { return frames_done_; }
  std::int64_t episodes_done() const { return episodes_done_; }
  const std::vector<MetricsRow>& rows() const { return rows_; }

  const RunConfig& config() const { return config_; }
  const DdpgAgent& agent() const { return agent_; }
  DdpgAgent& agent() { return agent_; }
  const MazeEnv& env() const { return env_; }
  const CountTable& counts() const { return counts_; }
  const ModelBuffer& model_buffer() const { return model_; }
  const ReservoirBuffer& exploration_buffer() const { return dbeta_; }
  const FifoBuffer& exploitation_buffer() const { return de_; }
  const CoverageGrid& coverage() const { return coverage_; }
  double epsilon() const { return schedule_.epsilon; }
  std::uint64_t options_started() const { return options_started_; }
  std::uint64_t update_count() const { return updates_; }

 private:
  Vec choose_action(const Vec& state, const Vec& goal);
  std::optional<ExplorationOption> make_option(const Vec& state, Rng& rng);
  void observe(const Vec& state);
  void maybe_checkpoint(const RowCallback& on_row);
  void train_on_buffers();

  RunConfig config_;
  MazeEnv env_;
  MazeEnv eval_env_;
  Rng env_rng_;
  Rng explorer_rng_;
  Rng replay_rng_;
  Rng eval_rng_;
  DdpgAgent agent_;
  SimHasher hasher_;
  CountTable counts_;
  ModelBuffer model_;
  ReservoirBuffer dbeta_;
  FifoBuffer de_;
  CoverageGrid coverage_;
  EpsilonSchedule schedule_;
  OptionState option_;
  Explore explore_;
  int budget_;
  std::int64_t warmup_;
  std::int64_t total_episodes_;
  std::int64_t frames_done_ = 0;
  std::int64_t episodes_done_ = 0;
  std::uint64_t options_started_ = 0;
  std::uint64_t updates_ = 0;
  std::vector<MetricsRow> rows_;
};

// CSV text helpers shared by the CLI and sweep drivers.
std::string format_number(double v);
std::string metrics_header(const RunConfig& config);
std::string metrics_csv_row(const MetricsRow& row);
std::string episodes_header();
std::string episodes_csv_row(const EpisodeSummary& e);

}  // namespace etgl
