#include "etgl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "etgl/envs.hpp"

namespace etgl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  require(r.ec == std::errc() && r.ptr == v.data() + v.size(), key + ": not a number: '" + v + "'");
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  // Accept "2e5"-style integers as well.
  const double d = parse_double(key, v);
  require(std::floor(d) == d && std::abs(d) < 9e15, key + ": not an integer: '" + v + "'");
  return static_cast<std::int64_t>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ContractError(key + ": not a boolean: '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_int(key, trim(item))));
  return out;
}

}  // namespace

std::string to_string(Algo a) {
  switch (a) {
    case Algo::ddpg: return "ddpg";
    case Algo::ddpg_et: return "ddpg+et";
    case Algo::ddpg_gdrb: return "ddpg+gdrb";
    case Algo::ddpg_lnstep: return "ddpg+lnstep";
    case Algo::etgl: return "etgl";
  }
  return "?";
}

std::string to_string(Explore e) {
  switch (e) {
    case Explore::automatic: return "auto";
    case Explore::etgreedy: return "etgreedy";
    case Explore::ezgreedy: return "ezgreedy";
    case Explore::egreedy: return "egreedy";
    case Explore::gaussian: return "gaussian";
  }
  return "?";
}

std::string to_string(ModelSource m) { return m == ModelSource::buffer ? "buffer" : "perfect"; }

std::string to_string(HashPreprocess p) {
  switch (p) {
    case HashPreprocess::identity: return "identity";
    case HashPreprocess::affine_box: return "affine_box";
    case HashPreprocess::fourier: return "fourier";
  }
  return "identity";
}

Algo parse_algo(const std::string& s) {
  for (Algo a : {Algo::ddpg, Algo::ddpg_et, Algo::ddpg_gdrb, Algo::ddpg_lnstep, Algo::etgl})
    if (s == to_string(a)) return a;
  throw ContractError("algo: unknown variant '" + s + "' (ddpg, ddpg+et, ddpg+gdrb, ddpg+lnstep, etgl)");
}

Explore parse_explore(const std::string& s) {
  for (Explore e : {Explore::automatic, Explore::etgreedy, Explore::ezgreedy, Explore::egreedy,
                    Explore::gaussian})
    if (s == to_string(e)) return e;
  throw ContractError("explore: unknown strategy '" + s + "' (auto, etgreedy, ezgreedy, egreedy, gaussian)");
}

ModelSource parse_model_source(const std::string& s) {
  if (s == "buffer") return ModelSource::buffer;
  if (s == "perfect") return ModelSource::perfect;
  throw ContractError("model-source: unknown source '" + s + "' (buffer, perfect)");
}

int RunConfig::resolved_budget() const {
  if (budget) return *budget;
  return env == "wallmaze" ? 20 : 40;
}

double RunConfig::resolved_epsilon_decay() const {
  if (epsilon_decay) return *epsilon_decay;
  return std::pow(reference_decay, 1.0 / scale());
}

std::int64_t RunConfig::resolved_warmup() const {
  if (warmup) return *warmup;
  return static_cast<std::int64_t>(std::llround(reference_warmup * scale()));
}

std::int64_t RunConfig::resolved_total_episodes() const {
  if (total_episodes) return *total_episodes;
  const int max_steps = make_env(env).layout().max_steps;
  return std::max<std::int64_t>(frames / max_steps, 1);
}

Explore RunConfig::resolved_explore() const {
  if (explore != Explore::automatic) return explore;
  return (algo == Algo::etgl || algo == Algo::ddpg_et) ? Explore::etgreedy : Explore::gaussian;
}

bool RunConfig::uses_tree_search() const { return resolved_explore() == Explore::etgreedy; }

bool RunConfig::uses_gdrb() const { return algo == Algo::etgl || algo == Algo::ddpg_gdrb; }

ReturnMode RunConfig::return_mode() const {
  return (algo == Algo::etgl || algo == Algo::ddpg_lnstep) ? ReturnMode::longest : ReturnMode::one_step;
}

AgentConfig RunConfig::agent_config() const {
  AgentConfig a;
  a.hidden = hidden;
  a.gamma = gamma;
  a.tau = tau;
  a.actor_lr = actor_lr;
  a.critic_lr = critic_lr;
  a.literal_single_gamma = literal_single_gamma;
  return a;
}

void RunConfig::validate() const {
  require(known_env(env), "env: unknown environment '" + env + "'");
  require(frames >= 0, "frames: must be nonnegative");
  require(checkpoint_interval >= 1, "checkpoint_interval: must be positive");
  require(eval_episodes >= 1, "eval_episodes: must be positive");
  require(!budget || (*budget >= 1 && *budget <= 1000), "budget: must be in [1, 1000]");
  require(!epsilon_decay || (*epsilon_decay > 0.0 && *epsilon_decay <= 1.0), "epsilon_decay: must be in (0, 1]");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon_start: must be in [0, 1]");
  require(epsilon_floor >= 0.0 && epsilon_floor <= epsilon_start, "epsilon_floor: must be in [0, epsilon_start]");
  require(!warmup || *warmup >= 0, "warmup: must be nonnegative");
  require(!total_episodes || *total_episodes >= 1, "total_episodes: must be positive");
  require(reference_frames > 0.0, "reference_frames: must be positive");
  require(reference_decay > 0.0 && reference_decay <= 1.0, "reference_decay: must be in (0, 1]");
  require(reference_warmup >= 0.0, "reference_warmup: must be nonnegative");
  require(gaussian_sigma >= 0.0, "gaussian_sigma: must be nonnegative");
  require(!hidden.empty(), "hidden: need at least one hidden layer");
  for (int h : hidden) require(h >= 1 && h <= 4096, "hidden: layer width must be in [1, 4096]");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma: must be in [0, 1]");
  require(tau >= 0.0 && tau <= 1.0, "tau: must be in [0, 1]");
  require(actor_lr > 0.0 && actor_lr < 1.0, "actor_lr: must be in (0, 1)");
  require(critic_lr > 0.0 && critic_lr < 1.0, "critic_lr: must be in (0, 1)");
  require(batch_size >= 1, "batch_size: must be positive");
  require(updates_per_episode >= 1, "updates_per_episode: must be positive");
  require(dbeta_capacity >= 1, "dbeta_capacity: must be positive");
  require(de_capacity >= 1, "de_capacity: must be positive");
  require(hash_bits >= 1 && hash_bits <= 64, "hash_bits: must be in [1, 64]");
  require(hash_features >= 1, "hash_features: must be positive");
  require(hash_lengthscale > 0.0, "hash_lengthscale: must be positive");
  require(bucket_capacity >= 1, "bucket_capacity: must be positive");
  require(coverage_cell > 0.0, "coverage_cell: must be positive");
  require(coverage_threshold >= 1 && coverage_threshold <= 64, "coverage_threshold: must be in [1, 64]");
  require(!out_dir.empty(), "out_dir: must not be empty");
  require(model_source == ModelSource::buffer || uses_tree_search(),
          "model_source: perfect model requires etgreedy exploration");
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "env") c.env = v;
  else if (key == "algo") c.algo = parse_algo(v);
  else if (key == "explore") c.explore = parse_explore(v);
  else if (key == "model_source") c.model_source = parse_model_source(v);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "frames") c.frames = parse_int(key, v);
  else if (key == "checkpoint_interval") c.checkpoint_interval = parse_int(key, v);
  else if (key == "eval_episodes") c.eval_episodes = static_cast<int>(parse_int(key, v));
  else if (key == "budget") c.budget = static_cast<int>(parse_int(key, v));
  else if (key == "epsilon_decay") c.epsilon_decay = parse_double(key, v);
  else if (key == "epsilon_start") c.epsilon_start = parse_double(key, v);
  else if (key == "epsilon_floor") c.epsilon_floor = parse_double(key, v);
  else if (key == "warmup") c.warmup = parse_int(key, v);
  else if (key == "total_episodes") c.total_episodes = parse_int(key, v);
  else if (key == "reference_frames") c.reference_frames = parse_double(key, v);
  else if (key == "reference_decay") c.reference_decay = parse_double(key, v);
  else if (key == "reference_warmup") c.reference_warmup = parse_double(key, v);
  else if (key == "gaussian_sigma") c.gaussian_sigma = parse_double(key, v);
  else if (key == "hidden") c.hidden = parse_int_list(key, v);
  else if (key == "gamma") c.gamma = parse_double(key, v);
  else if (key == "tau") c.tau = parse_double(key, v);
  else if (key == "actor_lr") c.actor_lr = parse_double(key, v);
  else if (key == "critic_lr") c.critic_lr = parse_double(key, v);
  else if (key == "literal_single_gamma") c.literal_single_gamma = parse_bool(key, v);
  else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(key, v));
  else if (key == "updates_per_episode") c.updates_per_episode = static_cast<int>(parse_int(key, v));
  else if (key == "dbeta_capacity") c.dbeta_capacity = parse_int(key, v);
  else if (key == "de_capacity") c.de_capacity = parse_int(key, v);
  else if (key == "hash_bits") c.hash_bits = static_cast<int>(parse_int(key, v));
  else if (key == "hash_preprocess") {
    if (v == "identity") c.hash_preprocess = HashPreprocess::identity;
    else if (v == "affine_box") c.hash_preprocess = HashPreprocess::affine_box;
    else if (v == "fourier") c.hash_preprocess = HashPreprocess::fourier;
    else throw ContractError("hash_preprocess: unknown value '" + v + "' (identity, affine_box, fourier)");
  }
  else if (key == "hash_features") c.hash_features = static_cast<int>(parse_int(key, v));
  else if (key == "hash_lengthscale") c.hash_lengthscale = parse_double(key, v);
  else if (key == "bucket_capacity") c.bucket_capacity = static_cast<int>(parse_int(key, v));
  else if (key == "count_search_states") c.count_search_states = parse_bool(key, v);
  else if (key == "coverage_cell") c.coverage_cell = parse_double(key, v);
  else if (key == "coverage_threshold") c.coverage_threshold = static_cast<int>(parse_int(key, v));
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "write_counts") c.write_counts = parse_bool(key, v);
  else throw ContractError("config: unknown key '" + key + "'");
}

void apply_config_text(RunConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  auto line = [&](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
  std::string hidden;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) hidden += (i ? "," : "") + std::to_string(c.hidden[i]);
  line("env", c.env);
  line("algo", to_string(c.algo));
  line("explore", to_string(c.resolved_explore()));
  line("model_source", to_string(c.model_source));
  line("seed", std::to_string(c.seed));
  line("frames", std::to_string(c.frames));
  line("checkpoint_interval", std::to_string(c.checkpoint_interval));
  line("eval_episodes", std::to_string(c.eval_episodes));
  line("budget", std::to_string(c.resolved_budget()));
  line("epsilon_decay", number(c.resolved_epsilon_decay()));
  line("epsilon_start", number(c.epsilon_start));
  line("epsilon_floor", number(c.epsilon_floor));
  line("warmup", std::to_string(c.resolved_warmup()));
  line("total_episodes", std::to_string(c.resolved_total_episodes()));
  line("reference_frames", number(c.reference_frames));
  line("reference_decay", number(c.reference_decay));
  line("reference_warmup", number(c.reference_warmup));
  line("gaussian_sigma", number(c.gaussian_sigma));
  line("hidden", hidden);
  line("gamma", number(c.gamma));
  line("tau", number(c.tau));
  line("actor_lr", number(c.actor_lr));
  line("critic_lr", number(c.critic_lr));
  line("literal_single_gamma", c.literal_single_gamma ? "true" : "false");
  line("batch_size", std::to_string(c.batch_size));
  line("updates_per_episode", std::to_string(c.updates_per_episode));
  line("dbeta_capacity", std::to_string(c.dbeta_capacity));
  line("de_capacity", std::to_string(c.de_capacity));
  line("hash_bits", std::to_string(c.hash_bits));
  line("hash_preprocess", to_string(c.hash_preprocess));
  line("hash_features", std::to_string(c.hash_features));
  line("hash_lengthscale", number(c.hash_lengthscale));
  line("bucket_capacity", std::to_string(c.bucket_capacity));
  line("count_search_states", c.count_search_states ? "true" : "false");
  line("coverage_cell", number(c.coverage_cell));
  line("coverage_threshold", std::to_string(c.coverage_threshold));
  line("out_dir", c.out_dir);
  line("write_counts", c.write_counts ? "true" : "false");
  return o.str();
}

}  // namespace etgl
