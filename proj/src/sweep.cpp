#include "etgl/sweep.hpp"

#include <exception>
#include <ostream>

#include "etgl/trainer.hpp"

namespace etgl {

RunConfig coverage_defaults() {
  RunConfig c;
  c.algo = Algo::ddpg;
  c.reference_frames = 1e6;
  return c;
}

std::vector<SweepCell> run_coverage_sweep(const SweepSpec& spec) {
  require(!spec.budgets.empty() && !spec.strategies.empty() && !spec.seeds.empty(),
          "coverage sweep: budgets, strategies and seeds must be nonempty");
  std::vector<SweepCell> cells;
  for (Explore s : spec.strategies) {
    require(s == Explore::etgreedy || s == Explore::ezgreedy || s == Explore::egreedy,
            "coverage sweep: strategies must be etgreedy, ezgreedy or egreedy");
    for (int b : (s == Explore::egreedy ? std::vector<int>{0} : spec.budgets))
      for (auto seed : spec.seeds) cells.push_back({s, b, seed, 0.0, 0.0});
  }
  for (const SweepCell& c : cells) {
    RunConfig cfg = spec.base;
    cfg.explore = c.strategy;
    if (c.budget > 0) cfg.budget = c.budget;
    cfg.seed = c.seed;
    cfg.validate();
  }

  std::exception_ptr error;
  const auto n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      SweepCell& c = cells[i];
      RunConfig cfg = spec.base;
      cfg.explore = c.strategy;
      if (c.budget > 0) cfg.budget = c.budget;
      cfg.seed = c.seed;
      cfg.checkpoint_interval = std::max<std::int64_t>(cfg.frames, 1);
      Trainer trainer(cfg);
      trainer.run();
      c.coverage = trainer.coverage().fraction();
      c.success_rate = trainer.rows().empty() ? 0.0 : trainer.rows().back().success_rate;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return cells;
}

double mean_coverage(const std::vector<SweepCell>& cells, Explore strategy, int budget) {
  double total = 0.0;
  int n = 0;
  for (const auto& c : cells) {
    if (c.strategy != strategy) continue;
    if (strategy != Explore::egreedy && c.budget != budget) continue;
    total += c.coverage;
    ++n;
  }
  require(n > 0, "mean_coverage: no cells for " + to_string(strategy) + " at budget " + std::to_string(budget));
  return total / n;
}

void write_sweep_long(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "strategy,budget,seed,coverage,success_rate\n";
  for (const auto& c : cells)
    out << to_string(c.strategy) << ',' << c.budget << ',' << c.seed << ',' << format_number(c.coverage)
        << ',' << format_number(c.success_rate) << '\n';
}

void write_sweep_table(std::ostream& out, const SweepSpec& spec, const std::vector<SweepCell>& cells) {
  out << "strategy";
  for (int b : spec.budgets) out << ",N=" << b;
  out << '\n';
  for (Explore s : spec.strategies) {
    out << to_string(s);
    for (int b : spec.budgets) out << ',' << format_number(mean_coverage(cells, s, b));
    out << '\n';
  }
}

}  // namespace etgl
