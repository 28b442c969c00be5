#include "etgl/coverage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace etgl {

CoverageGrid::CoverageGrid(const MazeLayout& layout, double cell_size, int threshold, int subdivisions)
    : grid_(flood_fill(layout, cell_size, layout.start.center())),
      threshold_(threshold),
      subdivisions_(subdivisions) {
  require(threshold >= 1, "CoverageGrid: threshold must be positive");
  require(subdivisions >= 1 && subdivisions <= 8, "CoverageGrid: subdivisions must be in [1, 8]");
  require(threshold <= subdivisions * subdivisions,
          "CoverageGrid: threshold exceeds the number of distinct quantised states per cell");
  seen_.assign(grid_.reachable.size(), 0);
  counted_.assign(grid_.reachable.size(), 0);
  reachable_ = grid_.reachable_count();
}

void CoverageGrid::update(const Vec& state) {
  const int idx = grid_.cell_index(state);
  if (idx < 0 || !grid_.reachable[idx]) return;
  const Vec local = (state - grid_.origin) / grid_.cell_size;
  const auto sub = [&](double v) {
    const double frac = v - std::floor(v);
    return std::clamp(static_cast<int>(frac * subdivisions_), 0, subdivisions_ - 1);
  };
  const int bit = sub(local(1)) * subdivisions_ + sub(local(0));
  seen_[idx] |= std::uint64_t{1} << bit;
  if (!counted_[idx] && std::popcount(seen_[idx]) >= threshold_) {
    counted_[idx] = 1;
    ++visited_;
  }
}

double CoverageGrid::fraction() const {
  return reachable_ == 0 ? 0.0 : static_cast<double>(visited_) / static_cast<double>(reachable_);
}

}  // namespace etgl
