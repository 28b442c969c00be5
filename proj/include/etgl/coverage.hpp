#pragma once

#include <cstdint>
#include <vector>

#include "etgl/envs.hpp"

namespace etgl {

// Fraction of reachable cells in which at least `threshold` distinct
// quantised states have been visited. States are quantised to a
// subdivisions x subdivisions lattice inside each cell.
class CoverageGrid {
 public:
  CoverageGrid(const MazeLayout& layout, double cell_size, int threshold, int subdivisions = 8);

  void update(const Vec& state);
  double fraction() const;

  std::size_t reachable_cells() const { return reachable_; }
  std::size_t visited_cells() const { return visited_; }
  int threshold() const { return threshold_; }
  const CellGrid& grid() const { return grid_; }

 private:
  CellGrid grid_;
  int threshold_;
  int subdivisions_;
  std::vector<std::uint64_t> seen_;  // one bit per sub-cell
  std::vector<char> counted_;
  std::size_t reachable_ = 0;
  std::size_t visited_ = 0;
};

}  // namespace etgl
