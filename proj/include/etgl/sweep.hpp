#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "etgl/config.hpp"

namespace etgl {

// Coverage runs use plain DDPG under each exploration strategy, with the
// epsilon schedule and warmup scaled so the run spans the first 1M frames
// of a reference run.
RunConfig coverage_defaults();

struct SweepSpec {
  RunConfig base = coverage_defaults();
  std::vector<int> budgets{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  std::vector<Explore> strategies{Explore::etgreedy, Explore::ezgreedy};
  std::vector<std::uint64_t> seeds{1};
};

// egreedy has no budget: it runs once per seed and is stored with budget 0.
struct SweepCell {
  Explore strategy = Explore::etgreedy;
  int budget = 0;
  std::uint64_t seed = 0;
  double coverage = 0.0;
  double success_rate = 0.0;
};

// Trains every (strategy, budget, seed) cell for base.frames and records the
// final coverage. Cells run in parallel; results are in a fixed order.
std::vector<SweepCell> run_coverage_sweep(const SweepSpec& spec);

// Seed-mean coverage of a strategy at a budget (egreedy ignores the budget).
double mean_coverage(const std::vector<SweepCell>& cells, Explore strategy, int budget);

void write_sweep_long(std::ostream& out, const std::vector<SweepCell>& cells);
// Strategy x budget table of seed-mean coverage.
void write_sweep_table(std::ostream& out, const SweepSpec& spec, const std::vector<SweepCell>& cells);

}  // namespace etgl
