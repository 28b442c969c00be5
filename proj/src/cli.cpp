#include "etgl/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "etgl/checkpoint.hpp"
#include "etgl/config.hpp"
#include "etgl/sweep.hpp"
#include "etgl/theorem.hpp"
#include "etgl/trainer.hpp"

namespace etgl::cli {

namespace {

namespace fs = std::filesystem;

template <class T>
std::vector<T> parse_list(const std::string& what, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    is >> v;
    require(is && is.eof(), what + ": bad list entry '" + item + "'");
    out.push_back(v);
  }
  require(!out.empty(), what + ": empty list");
  return out;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path.string() + "'");
  return out;
}

// Flags shared by train and coverage-sweep. Precedence: defaults, then the
// config file, then ETGL_OUT_DIR for the output directory, then flags.
struct RunFlags {
  std::string config_path;
  std::string env, algo, explore, model_source, out_dir;
  std::uint64_t seed = 0;
  std::int64_t frames = 0, checkpoint_interval = 0;
  int budget = 0, eval_episodes = 0;
  double epsilon_decay = 0.0;
  std::vector<std::string> overrides;
  CLI::Option *o_env{}, *o_algo{}, *o_explore{}, *o_model{}, *o_out{}, *o_seed{}, *o_frames{},
      *o_interval{}, *o_budget{}, *o_eval{}, *o_decay{};

  void add(CLI::App* app, bool with_seed_and_budget) {
    app->add_option("--config", config_path, "key = value config file");
    o_env = app->add_option("--env", env, "environment: wallmaze, umaze, tinymaze or a .maze layout file");
    o_algo = app->add_option("--algo", algo, "ddpg, ddpg+et, ddpg+gdrb, ddpg+lnstep, etgl");
    o_explore = app->add_option("--explore", explore, "auto, etgreedy, ezgreedy, egreedy, gaussian");
    o_model = app->add_option("--model-source", model_source, "buffer or perfect");
    o_frames = app->add_option("--frames", frames, "environment steps");
    o_interval = app->add_option("--checkpoint-interval", checkpoint_interval, "steps between checkpoints");
    o_eval = app->add_option("--eval-episodes", eval_episodes, "greedy episodes per checkpoint");
    o_decay = app->add_option("--epsilon-decay", epsilon_decay, "per-step epsilon decay rate");
    o_out = app->add_option("--out-dir", out_dir, "output directory");
    if (with_seed_and_budget) {
      o_seed = app->add_option("--seed", seed, "run seed");
      o_budget = app->add_option("--budget", budget, "tree-search / option budget N");
    }
    app->add_option("--set", overrides, "extra key=value settings (repeatable)");
  }

  RunConfig defaults;

  RunConfig resolve() const {
    RunConfig c = defaults;
    if (!config_path.empty()) apply_config_file(c, config_path);
    if (const char* env_out = std::getenv("ETGL_OUT_DIR"); env_out && *env_out) c.out_dir = env_out;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      require(eq != std::string::npos, "--set: expected key=value, got '" + kv + "'");
      set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o_env->count()) c.env = env;
    if (o_algo->count()) c.algo = parse_algo(algo);
    if (o_explore->count()) c.explore = parse_explore(explore);
    if (o_model->count()) c.model_source = parse_model_source(model_source);
    if (o_frames->count()) c.frames = frames;
    if (o_interval->count()) c.checkpoint_interval = checkpoint_interval;
    if (o_eval->count()) c.eval_episodes = eval_episodes;
    if (o_decay->count()) c.epsilon_decay = epsilon_decay;
    if (o_out->count()) c.out_dir = out_dir;
    if (o_seed && o_seed->count()) c.seed = seed;
    if (o_budget && o_budget->count()) c.budget = budget;
    if (o_env->count()) {
      require(known_env(env), "--env: unknown environment '" + env + "'");
    }
    c.validate();
    return c;
  }
};

int cmd_train(const RunConfig& c, std::ostream& out) {
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  open_output(dir / "config.txt") << format_config(c);
  std::ofstream metrics = open_output(dir / "metrics.csv");
  std::ofstream episodes = open_output(dir / "episodes.csv");
  metrics << metrics_header(c) << std::flush;
  episodes << episodes_header();

  Trainer trainer(c);
  trainer.run(
      [&](const MetricsRow& row) {
        metrics << metrics_csv_row(row) << std::flush;
        episodes << std::flush;
      },
      [&](const EpisodeSummary& e) { episodes << episodes_csv_row(e); });
  episodes.flush();
  save_checkpoint((dir / "checkpoint.txt").string(), c.env, trainer.agent());
  if (c.write_counts) {
    std::ofstream counts = open_output(dir / "counts.csv");
    trainer.counts().write_csv(counts);
  }
  out << "frames " << trainer.frames_done() << ", episodes " << trainer.episodes_done();
  if (!trainer.rows().empty()) {
    const auto& last = trainer.rows().back();
    out << ", success_rate " << format_number(last.success_rate) << ", coverage "
        << format_number(last.coverage);
  }
  out << "\nwrote " << (dir / "metrics.csv").string() << '\n';
  return 0;
}

int cmd_eval(const std::string& path, int episodes, std::uint64_t seed, const std::string& csv,
             std::ostream& out) {
  const LoadedCheckpoint ckpt = load_checkpoint(path);
  Rng rng = Rng::stream(seed, "eval");
  const EvalResult r = evaluate_policy(ckpt.agent, make_env(ckpt.env_name), episodes, rng);
  out << "env " << ckpt.env_name << "\nepisodes " << episodes << "\nsuccess_rate "
      << format_number(r.success_rate) << "\nmean_return " << format_number(r.mean_return) << '\n';
  if (!csv.empty()) {
    open_output(csv) << "env,episodes,seed,success_rate,mean_return\n"
                     << ckpt.env_name << ',' << episodes << ',' << seed << ','
                     << format_number(r.success_rate) << ',' << format_number(r.mean_return) << '\n';
  }
  return 0;
}

int cmd_sweep(const SweepSpec& spec, std::ostream& out) {
  const fs::path dir(spec.base.out_dir);
  fs::create_directories(dir);
  const auto cells = run_coverage_sweep(spec);
  {
    std::ofstream longf = open_output(dir / "sweep_long.csv");
    write_sweep_long(longf, cells);
    std::ofstream table = open_output(dir / "sweep_table.csv");
    write_sweep_table(table, spec, cells);
  }
  write_sweep_table(out, spec, cells);
  return 0;
}

int cmd_theorem(int budget, const std::string& sizes_text, double state_actions, bool enumerate,
                bool grid, std::ostream& out) {
  if (budget > 0 || !sizes_text.empty()) {
    const auto sizes = parse_list<int>("--sizes", sizes_text);
    if (budget == 0) budget = static_cast<int>(sizes.size());
    std::optional<double> sa;
    if (state_actions > 0) sa = state_actions;
    const auto report = verify_theorem1_bound(budget, sizes, sa, enumerate);
    write_report(out, report);
    if (!report.chain_holds || !report.enumeration_holds) return 1;
  }
  if (grid) {
    const auto g = check_theorem1_grid(8, 16);
    write_report(out, g);
    if (g.failures) return 1;
  }
  return 0;
}

// Buffer occupancy is a pure function of how many transitions were offered:
// D_beta keeps min(seen, capacity) and D_e min(successful, capacity).
int cmd_replay_stats(const std::string& run_dir, const std::string& csv_path, std::ostream& out) {
  const fs::path dir(run_dir);
  RunConfig c;
  apply_config_file(c, (dir / "config.txt").string());
  std::ifstream in(dir / "episodes.csv");
  require(static_cast<bool>(in), "replay-stats: cannot open episodes.csv in '" + run_dir + "'");
  std::string line;
  std::getline(in, line);
  require(line + "\n" == episodes_header(), "replay-stats: unexpected episodes.csv header");
  const fs::path target = csv_path.empty() ? dir / "replay_stats.csv" : fs::path(csv_path);
  std::ofstream csv = open_output(target);
  csv << "episode,transitions,successful_transitions,dbeta_size,de_size,success_fraction\n";
  std::int64_t transitions = 0, successful = 0, episodes = 0, successes = 0;
  std::int64_t dbeta = 0, de = 0;
  double fraction = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    require(f.size() >= 5, "replay-stats: malformed episodes.csv row");
    const std::int64_t length = std::stoll(f[2]);
    const bool success = f[4] == "1";
    ++episodes;
    transitions += length;
    if (success) {
      ++successes;
      successful += length;
    }
    dbeta = std::min(transitions, c.dbeta_capacity);
    de = c.uses_gdrb() ? std::min(successful, c.de_capacity) : 0;
    fraction = static_cast<double>(successes) / static_cast<double>(episodes);
    csv << f[0] << ',' << transitions << ',' << successful << ',' << dbeta << ',' << de << ','
        << format_number(fraction) << '\n';
  }
  out << "episodes " << episodes << "\ndbeta_size " << dbeta << "\nde_size " << de
      << "\nsuccess_fraction " << format_number(fraction) << "\nwrote " << target.string() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ETGL-DDPG: tree-search exploration, dual replay buffers and longest n-step returns"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train one agent and write metrics.csv");
  RunFlags train_flags;
  train_flags.add(train, true);

  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  std::string ckpt_path, eval_csv;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 1;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--episodes", eval_episodes, "number of greedy episodes");
  eval->add_option("--seed", eval_seed, "seed for start/goal sampling");
  eval->add_option("--csv", eval_csv, "also write the result as CSV");

  auto* sweep = app.add_subcommand("coverage-sweep", "coverage of exploration strategies over budgets");
  RunFlags sweep_flags;
  sweep_flags.defaults = coverage_defaults();
  sweep_flags.add(sweep, false);
  std::string budgets_text = "5,10,15,20,25,30,35,40,45,50", strategies_text = "etgreedy,ezgreedy",
              seeds_text = "1";
  int threads = 0;
  sweep->add_option("--budgets", budgets_text, "comma-separated budgets N");
  sweep->add_option("--strategies", strategies_text, "comma-separated: etgreedy, ezgreedy, egreedy");
  sweep->add_option("--seeds", seeds_text, "comma-separated seeds");
  sweep->add_option("--threads", threads, "worker threads (0 = OpenMP default)");

  auto* theorem = app.add_subcommand("theorem-check", "numeric check of the option sampling bound");
  int th_budget = 0;
  std::string th_sizes;
  double th_sa = 0.0;
  bool th_no_enum = false, th_grid = false;
  theorem->add_option("--budget", th_budget, "tree budget N (defaults to the number of sizes)");
  theorem->add_option("--sizes", th_sizes, "comma-separated bucket sizes |phi(s_i)|");
  theorem->add_option("--state-actions", th_sa, "|S||A| for the condition check");
  theorem->add_flag("--no-enumerate", th_no_enum, "skip the exhaustive search enumeration");
  theorem->add_flag("--grid", th_grid, "check every N <= 8 and size <= 16");

  auto* stats = app.add_subcommand("replay-stats", "replay buffer occupancy per episode of a run");
  std::string stats_dir, stats_csv;
  stats->add_option("--run-dir", stats_dir, "output directory of a train run")->required();
  stats->add_option("--csv", stats_csv, "output CSV (default <run-dir>/replay_stats.csv)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (train->parsed()) return cmd_train(train_flags.resolve(), out);
    if (eval->parsed()) {
      require(eval_episodes >= 1, "--episodes: must be positive");
      return cmd_eval(ckpt_path, eval_episodes, eval_seed, eval_csv, out);
    }
    if (sweep->parsed()) {
      SweepSpec spec;
      spec.base = sweep_flags.resolve();
      spec.budgets = parse_list<int>("--budgets", budgets_text);
      spec.seeds = parse_list<std::uint64_t>("--seeds", seeds_text);
      spec.strategies.clear();
      for (const auto& s : parse_list<std::string>("--strategies", strategies_text))
        spec.strategies.push_back(parse_explore(s));
      if (threads > 0) omp_set_num_threads(threads);
      return cmd_sweep(spec, out);
    }
    if (theorem->parsed()) {
      if (th_budget == 0 && th_sizes.empty() && !th_grid) th_grid = true;
      return cmd_theorem(th_budget, th_sizes, th_sa, !th_no_enum, th_grid, out);
    }
    if (stats->parsed()) return cmd_replay_stats(stats_dir, stats_csv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace etgl::cli
