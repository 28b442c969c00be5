#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../agent_checks.hpp"
#include "etgl/cli.hpp"
#include "etgl/replay.hpp"
#include "etgl/sweep.hpp"
#include "etgl/theorem.hpp"
#include "etgl/trainer.hpp"

namespace fs = std::filesystem;
using etgl::Algo;
using etgl::Explore;
using etgl::RunConfig;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};


Outcome gradient_suite() {
  Stopwatch clock;
  int usable = 0, failures = 0;
  double worst_critic = 0, worst_actor = 0;
  for (std::uint64_t seed = 1; usable < 20 && seed < 500; ++seed) {
    const auto c = testing::check_agent_gradients(seed);
    if (!c.usable) continue;
    ++usable;
    worst_critic = std::max(worst_critic, c.critic_error);
    worst_actor = std::max(worst_actor, c.actor_error);
    if (c.critic_error > 1e-4 || c.actor_error > 1e-3) ++failures;
  }
  const double t = clock.seconds();
  return {usable == 20 && failures == 0 && t < 10.0,
          std::to_string(usable) + " instances, max rel err critic " + fmt(worst_critic) + " (<= 1e-4), actor " +
              fmt(worst_actor) + " (<= 1e-3), " + fmt(t) + " s (< 10 s)"};
}

Outcome nstep_oracle() {
  Stopwatch clock;
  etgl::Rng rng(2024);
  double worst = 0;
  int successes = 0, failures_seen = 0;
  bool critic_untouched = true;
  etgl::DdpgAgent agent = testing::small_agent(rng);
  testing::fill_network(agent.target_actor(), std::numeric_limits<double>::quiet_NaN());
  testing::fill_network(agent.target_critic(), std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < 1000; ++i) {
    const bool success = rng.uniform() < 0.5;
    const auto r = testing::random_episode(rng, success);
    (success ? successes : failures_seen)++;
    worst = std::max(worst, testing::nstep_oracle_error(r, 0.99));
    if (success) {
      // Target networks hold NaN: any query would poison or reject the targets.
      const auto ts = etgl::process_episode(r, 0.99);
      try {
        const etgl::Vec y = agent.critic_targets(testing::batch_of(ts));
        for (std::size_t j = 0; j < ts.size(); ++j) critic_untouched = critic_untouched && y(j) == ts[j].ret;
      } catch (const etgl::NumericError&) {
        critic_untouched = false;
      }
    }
  }
  const double t = clock.seconds();
  return {worst <= 1e-12 && successes > 0 && failures_seen > 0 && critic_untouched && t < 5.0,
          "1000 episodes (" + std::to_string(successes) + " successful, " + std::to_string(failures_seen) +
              " not), max err " + fmt(worst) + " (<= 1e-12), successful targets " +
              (critic_untouched ? "never query the critic" : "QUERIED the critic") + ", " + fmt(t) + " s (< 5 s)"};
}

Outcome theorem_check() {
  Stopwatch clock;
  const auto grid = etgl::check_theorem1_grid(8, 16);
  const std::vector<std::vector<int>> chains{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}, {2, 4, 3}, {5, 1, 4}, {4, 4, 4}};
  bool enumerated = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& sizes : chains) {
    const auto r = etgl::verify_theorem1_bound(3, sizes);
    enumerated = enumerated && r.enumeration && r.enumeration_holds && r.chain_holds;
    if (r.enumeration) min_ratio = std::min(min_ratio, r.enumeration->min_option_probability / r.chain_probability);
  }
  const double t = clock.seconds();
  return {grid.failures == 0 && enumerated && t < 30.0,
          std::to_string(grid.cases) + " (N, sizes) cases with N <= 8, sizes <= 16, " +
              std::to_string(grid.failures) + " chain failures; N=3 chain enumeration min option probability / P = " +
              fmt(min_ratio, 6) + " (>= 1) over " + std::to_string(chains.size()) + " size vectors, " + fmt(t) +
              " s (< 30 s)"};
}

// Upper tail of the chi-square distribution (Wilson-Hilferty).
double chi_square_p(double x, double dof) {
  const double a = 2.0 / (9.0 * dof);
  const double z = (std::cbrt(x / dof) - (1.0 - a)) / std::sqrt(a);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

Outcome buffer_statistics() {
  Stopwatch clock;
  constexpr int kStream = 50, kCapacity = 10, kTrials = 20000;
  std::vector<int> kept(kStream, 0);
  etgl::Rng rng(77);
  for (int trial = 0; trial < kTrials; ++trial) {
    etgl::ReservoirBuffer b(kCapacity);
    for (int i = 0; i < kStream; ++i) {
      etgl::Transition t;
      t.horizon = i;
      b.insert(t, rng);
    }
    for (std::size_t j = 0; j < b.size(); ++j) ++kept[b[j].horizon];
  }
  const double expected = static_cast<double>(kTrials) * kCapacity / kStream;
  double chi2 = 0;
  for (int k : kept) chi2 += (k - expected) * (k - expected) / expected;
  const double p = chi_square_p(chi2, kStream - 1);

  bool fifo_exact = true;
  etgl::FifoBuffer fifo(7);
  for (int i = 0; i < 30; ++i) {
    etgl::Transition t;
    t.horizon = i;
    t.episode_success = true;
    fifo.insert(t);
    const int oldest = std::max(0, i - 6);
    fifo_exact = fifo_exact && fifo.size() == static_cast<std::size_t>(i - oldest + 1);
    for (std::size_t j = 0; j < fifo.size(); ++j) fifo_exact = fifo_exact && fifo[j].horizon == oldest + static_cast<int>(j);
  }

  int cases = 0, mismatches = 0, edge_cases = 0;
  for (std::int64_t E : {1, 2, 3, 7, 10, 64, 100, 2000}) {
    for (int C : {1, 2, 3, 5, 20, 200}) {
      for (std::int64_t i = 0; i <= E; ++i) {
        const double tau = static_cast<double>(E - i) / static_cast<double>(E);
        const int raw = static_cast<int>(std::floor(tau * C + 1e-9));
        const int beta = std::max(raw, 1);
        if (raw < 1) ++edge_cases;
        const auto s = etgl::sampling_split(i, E, C);
        ++cases;
        if (s.from_exploration != beta || s.from_exploitation != C - beta) ++mismatches;
      }
    }
  }
  const double t = clock.seconds();
  return {p > 0.01 && fifo_exact && mismatches == 0 && edge_cases > 0 && t < 20.0,
          "reservoir chi-square p = " + fmt(p) + " (> 0.01, 20k trials), FIFO order " +
              (fifo_exact ? "exact" : "WRONG") + ", sampling_split " + std::to_string(cases - mismatches) + "/" +
              std::to_string(cases) + " grid points match (" + std::to_string(edge_cases) +
              " on the max(floor, 1) edge), " + fmt(t) + " s (< 20 s)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), dir));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism(const fs::path& work) {
  auto run_all = [&](const fs::path& root) {
    fs::remove_all(root);
    fs::create_directories(root);
    std::ostringstream out, err;
    auto cli = [&](std::vector<std::string> args) { return etgl::cli::run(args, out, err); };
    int bad = 0;
    const std::vector<std::string> small{"--set", "hidden=32,32", "--set", "batch_size=32"};
    auto with_small = [&](std::vector<std::string> args) {
      args.insert(args.end(), small.begin(), small.end());
      return args;
    };
    bad += cli(with_small({"train", "--env", "wallmaze", "--frames", "3000", "--checkpoint-interval", "1000",
                           "--seed", "5", "--out-dir", (root / "train").string(), "--set", "write_counts=true"}));
    bad += cli(with_small({"train", "--env", "tinymaze", "--algo", "ddpg", "--frames", "1500",
                           "--checkpoint-interval", "500", "--seed", "6", "--out-dir", (root / "ddpg").string()}));
    bad += cli(with_small({"train", "--env", "umaze", "--algo", "etgl", "--model-source", "perfect", "--frames",
                           "1500", "--checkpoint-interval", "500", "--out-dir", (root / "perfect").string()}));
    bad += cli({"eval", "--checkpoint", (root / "train/checkpoint.txt").string(), "--episodes", "10", "--seed", "3",
                "--csv", (root / "eval.csv").string()});
    bad += cli({"replay-stats", "--run-dir", (root / "train").string()});
    bad += cli(with_small({"coverage-sweep", "--env", "tinymaze", "--frames", "1000", "--budgets", "3,6",
                           "--strategies", "etgreedy,ezgreedy,egreedy", "--seeds", "1,2", "--out-dir",
                           (root / "sweep").string()}));
    std::ostringstream theorem;
    std::ostringstream terr;
    bad += etgl::cli::run({"theorem-check", "--sizes", "2,3,2", "--state-actions", "1e6"}, theorem, terr);
    std::ofstream(root / "theorem.csv") << theorem.str();
    return bad;
  };
  Stopwatch clock;
  const int bad_a = run_all(work / "det_a");
  const int bad_b = run_all(work / "det_b");
  const auto files_a = csv_files(work / "det_a");
  const auto files_b = csv_files(work / "det_b");
  int differing = 0;
  for (const auto& f : files_a)
    if (slurp(work / "det_a" / f) != slurp(work / "det_b" / f)) ++differing;
  const bool ok = bad_a == 0 && bad_b == 0 && files_a == files_b && differing == 0 && files_a.size() >= 10;
  return {ok, std::to_string(files_a.size()) + " CSVs from train (etgl, ddpg, perfect model), eval, replay-stats, "
              "coverage-sweep and theorem-check re-run with equal seeds: " +
              std::to_string(differing) + " differ" + (bad_a + bad_b ? ", a command FAILED" : "") + ", " +
              fmt(clock.seconds()) + " s"};
}


struct RunResult {
  double coverage = 0;
  double success = 0;
  std::int64_t frames_to_threshold = -1;  // first checkpoint with success >= 0.8
  double seconds = 0;
};

struct RunSpec {
  std::string key;
  RunConfig config;
};

struct TrendSettings {
  std::int64_t frames = 200000;
  std::int64_t interval = 10000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  fs::path out_dir;
};

RunConfig coverage_config(const TrendSettings& s, Explore strategy, int budget, std::uint64_t seed) {
  RunConfig c = etgl::coverage_defaults();
  c.env = "wallmaze";
  c.explore = strategy;
  if (budget > 0) c.budget = budget;
  c.seed = seed;
  c.frames = s.frames;
  c.checkpoint_interval = s.frames;
  return c;
}

RunConfig learning_config(const TrendSettings& s, Algo algo, std::uint64_t seed,
                          etgl::ModelSource model = etgl::ModelSource::buffer) {
  RunConfig c;
  c.env = "wallmaze";
  c.algo = algo;
  c.model_source = model;
  c.seed = seed;
  c.frames = s.frames;
  c.checkpoint_interval = s.interval;
  return c;
}

std::string run_key(const RunConfig& c) {
  return etgl::to_string(c.algo) + "_" + etgl::to_string(c.resolved_explore()) + "_N" +
         std::to_string(c.resolved_budget()) + "_" + etgl::to_string(c.model_source) + "_ref" +
         std::to_string(static_cast<long long>(c.reference_frames)) + "_seed" + std::to_string(c.seed);
}

std::map<std::string, RunResult> execute_runs(const std::vector<RunConfig>& configs, const TrendSettings& s) {
  std::vector<RunConfig> unique;
  std::map<std::string, RunResult> results;
  for (const auto& c : configs) {
    if (results.emplace(run_key(c), RunResult{}).second) unique.push_back(c);
  }
  const auto n = static_cast<std::int64_t>(unique.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      RunConfig c = unique[i];
      const std::string key = run_key(c);
      c.out_dir = (s.out_dir / key).string();
      Stopwatch clock;
      fs::create_directories(c.out_dir);
      std::ofstream metrics(fs::path(c.out_dir) / "metrics.csv");
      metrics << etgl::metrics_header(c);
      RunResult r;
      etgl::Trainer trainer(c);
      trainer.run([&](const etgl::MetricsRow& row) {
        metrics << etgl::metrics_csv_row(row) << std::flush;
        if (r.frames_to_threshold < 0 && row.success_rate >= 0.8) r.frames_to_threshold = row.step;
      });
      r.coverage = trainer.coverage().fraction();
      r.success = trainer.rows().empty() ? 0.0 : trainer.rows().back().success_rate;
      r.seconds = clock.seconds();
#pragma omp critical
      {
        results[key] = r;
        std::fprintf(stderr, "  run %-48s coverage %.4f success %.2f frames@0.8 %lld  %.0f s\n", key.c_str(),
                     r.coverage, r.success, static_cast<long long>(r.frames_to_threshold), r.seconds);
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

double mean_over_seeds(const TrendSettings& s, const std::map<std::string, RunResult>& results,
                       const std::function<RunConfig(std::uint64_t)>& make,
                       const std::function<double(const RunResult&)>& field) {
  double total = 0;
  for (auto seed : s.seeds) total += field(results.at(run_key(make(seed))));
  return total / static_cast<double>(s.seeds.size());
}

std::vector<RunConfig> coverage_runs(const TrendSettings& s) {
  std::vector<RunConfig> out;
  for (auto seed : s.seeds) {
    for (int n : {5, 20, 40}) {
      out.push_back(coverage_config(s, Explore::etgreedy, n, seed));
      out.push_back(coverage_config(s, Explore::ezgreedy, n, seed));
    }
    out.push_back(coverage_config(s, Explore::egreedy, 0, seed));
  }
  return out;
}

std::vector<RunConfig> learning_runs(const TrendSettings& s) {
  std::vector<RunConfig> out;
  for (auto seed : s.seeds) {
    out.push_back(learning_config(s, Algo::etgl, seed));
    out.push_back(learning_config(s, Algo::ddpg_et, seed));
    out.push_back(learning_config(s, Algo::ddpg, seed));
    out.push_back(learning_config(s, Algo::etgl, seed, etgl::ModelSource::perfect));
  }
  return out;
}

Outcome coverage_trend(const TrendSettings& s, const std::map<std::string, RunResult>& results, double seconds) {
  auto cov = [&](Explore e, int n) {
    return mean_over_seeds(s, results, [&](std::uint64_t seed) { return coverage_config(s, e, n, seed); },
                           [](const RunResult& r) { return r.coverage; });
  };
  const double eg = cov(Explore::egreedy, 0);
  bool ok = true;
  std::string detail;
  for (int n : {5, 20, 40}) {
    const double et = cov(Explore::etgreedy, n), ez = cov(Explore::ezgreedy, n);
    ok = ok && et >= 1.5 * eg && et >= ez;
    detail += "N=" + std::to_string(n) + " et " + fmt(et) + " ez " + fmt(ez) + "; ";
  }
  const double et40 = cov(Explore::etgreedy, 40);
  ok = ok && et40 >= 0.9;
  detail += "e-greedy " + fmt(eg) + " (need et >= " + fmt(1.5 * eg) + " and >= ez at each N, et N=40 >= 0.9); " +
            std::to_string(s.seeds.size()) + " seeds, " + std::to_string(s.frames) + " frames, " + fmt(seconds / 60) +
            " min";
  return {ok, detail};
}

Outcome learning_trend(const TrendSettings& s, const std::map<std::string, RunResult>& results, double seconds) {
  auto success = [&](Algo a) {
    return mean_over_seeds(s, results, [&](std::uint64_t seed) { return learning_config(s, a, seed); },
                           [](const RunResult& r) { return r.success; });
  };
  const double etgl = success(Algo::etgl), et = success(Algo::ddpg_et), ddpg = success(Algo::ddpg);
  const bool ok = etgl >= et && et >= ddpg && ddpg < 0.1 && etgl >= 0.8;
  return {ok, "final success ETGL-DDPG " + fmt(etgl) + " >= DDPG+et " + fmt(et) + " >= DDPG " + fmt(ddpg) +
                  ", DDPG < 0.1, ETGL >= 0.8; " + std::to_string(s.seeds.size()) + " seeds, " +
                  std::to_string(s.frames) + " frames, " + fmt(seconds / 60) + " min"};
}

Outcome model_source_trend(const TrendSettings& s, const std::map<std::string, RunResult>& results) {
  // A run that never reaches the threshold counts as needing one more
  // checkpoint interval than the budget.
  auto frames = [&](etgl::ModelSource m) {
    return mean_over_seeds(
        s, results, [&](std::uint64_t seed) { return learning_config(s, Algo::etgl, seed, m); },
        [&](const RunResult& r) {
          return static_cast<double>(r.frames_to_threshold >= 0 ? r.frames_to_threshold : s.frames + s.interval);
        });
  };
  const double perfect = frames(etgl::ModelSource::perfect), buffer = frames(etgl::ModelSource::buffer);
  return {perfect <= buffer, "mean frames to success 0.8: perfect model " + fmt(perfect, 6) + " <= buffer model " +
                                 fmt(buffer, 6) + " (checkpoints every " + std::to_string(s.interval) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<std::string> only;
  TrendSettings settings;
  std::string work = (fs::temp_directory_path() / "etgl_acceptance").string();
  app.add_option("--only", only, "criteria to run: gradients, nstep, theorem, buffers, determinism, coverage, "
                                 "learning (includes the model-source comparison)")
      ->delimiter(',');
  app.add_option("--frames", settings.frames, "frames per trend run");
  app.add_option("--seeds", settings.seeds, "seeds for trend runs")->delimiter(',');
  app.add_option("--work-dir", work, "scratch and run output directory");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  settings.out_dir = fs::path(work) / "runs";
  fs::create_directories(settings.out_dir);

  int failed = 0;
  auto report = [&](const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  };
  auto guarded = [&](const std::string& name, const std::function<Outcome()>& f) {
    try {
      report(name, f());
    } catch (const std::exception& e) {
      report(name, {false, std::string("exception: ") + e.what()});
    }
  };

  if (wanted("gradients")) guarded("gradient suite", gradient_suite);
  if (wanted("nstep")) guarded("n-step oracle", nstep_oracle);
  if (wanted("theorem")) guarded("theorem check", theorem_check);
  if (wanted("buffers")) guarded("buffer statistics", buffer_statistics);
  if (wanted("determinism")) guarded("determinism", [&] { return determinism(work); });
  if (wanted("coverage")) {
    guarded("coverage trend", [&] {
      Stopwatch clock;
      const auto results = execute_runs(coverage_runs(settings), settings);
      return coverage_trend(settings, results, clock.seconds());
    });
  }
  if (wanted("learning")) {
    std::map<std::string, RunResult> results;
    double seconds = 0;
    guarded("learning trend", [&] {
      Stopwatch clock;
      results = execute_runs(learning_runs(settings), settings);
      seconds = clock.seconds();
      return learning_trend(settings, results, seconds);
    });
    guarded("perfect vs buffer model", [&] { return model_source_trend(settings, results); });
  }
  return failed == 0 ? 0 : 1;
}
