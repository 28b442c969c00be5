#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etgl/agent.hpp"
#include "etgl/hashing.hpp"

namespace etgl {

// Ablation axes: each variant switches on a subset of tree-search
// exploration, the dual replay buffer and longest n-step returns.
enum class Algo { ddpg, ddpg_et, ddpg_gdrb, ddpg_lnstep, etgl };
enum class Explore { automatic, etgreedy, ezgreedy, egreedy, gaussian };
enum class ModelSource { buffer, perfect };

std::string to_string(Algo a);
std::string to_string(Explore e);
std::string to_string(ModelSource m);
std::string to_string(HashPreprocess p);
Algo parse_algo(const std::string& s);
Explore parse_explore(const std::string& s);
ModelSource parse_model_source(const std::string& s);

struct RunConfig {
  std::string env = "wallmaze";
  Algo algo = Algo::etgl;
  Explore explore = Explore::automatic;
  ModelSource model_source = ModelSource::buffer;
  std::uint64_t seed = 1;
  std::int64_t frames = 200000;
  std::int64_t checkpoint_interval = 5000;
  int eval_episodes = 20;
  std::optional<int> budget;                 // N; per-env default
  std::optional<double> epsilon_decay;       // scaled from the reference rate
  double epsilon_start = 1.0;
  double epsilon_floor = 0.0;
  std::optional<std::int64_t> warmup;        // scaled from the reference warmup
  std::optional<std::int64_t> total_episodes;  // E; frames / max_steps
  double reference_frames = 6e6;
  double reference_decay = 0.9999988;
  double reference_warmup = 2e5;
  double gaussian_sigma = 0.2;

  std::vector<int> hidden{128, 128, 128};
  double gamma = 0.99;
  double tau = 0.01;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  bool literal_single_gamma = false;
  int batch_size = 128;
  int updates_per_episode = 20;  // C
  std::int64_t dbeta_capacity = 1000000;
  std::int64_t de_capacity = 50000;

  int hash_bits = 9;
  HashPreprocess hash_preprocess = HashPreprocess::affine_box;
  int hash_features = 64;
  double hash_lengthscale = 0.25;
  int bucket_capacity = 32;
  bool count_search_states = false;

  double coverage_cell = 0.5;
  int coverage_threshold = 3;

  std::string out_dir = "runs/default";
  bool write_counts = false;

  // Values after filling per-env and scale-derived defaults.
  double scale() const { return static_cast<double>(frames) / reference_frames; }
  int resolved_budget() const;
  double resolved_epsilon_decay() const;
  std::int64_t resolved_warmup() const;
  std::int64_t resolved_total_episodes() const;
  Explore resolved_explore() const;
  bool uses_tree_search() const;
  bool uses_gdrb() const;
  ReturnMode return_mode() const;
  AgentConfig agent_config() const;

  // Throws ContractError naming the offending key.
  void validate() const;
};

// key = value lines; '#' starts a comment. Keys are the field names above.
void apply_config_text(RunConfig& config, const std::string& text);
void apply_config_file(RunConfig& config, const std::string& path);
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

// Effective configuration with every default resolved; parseable by
// apply_config_text.
std::string format_config(const RunConfig& config);

}  // namespace etgl
