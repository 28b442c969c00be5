#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "etgl/common.hpp"
#include "etgl/rng.hpp"

namespace etgl {

// Axis-aligned box [low, high].
struct Box {
  Vec low;
  Vec high;

  int dim() const { return static_cast<int>(low.size()); }
  bool contains(const Vec& p) const;
  Vec clip(const Vec& p) const;
  Vec sample(Rng& rng) const;
  Vec center() const { return 0.5 * (low + high); }
  friend bool operator==(const Box& a, const Box& b);
};

struct Segment {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct MazeLayout {
  std::string name;
  Box bounds;
  Box start;
  Box goal;
  double goal_radius = 0.5;
  int max_steps = 100;
  Box action_box;
  double step_reward = -1.0;
  double goal_reward = 10.0;
  std::vector<Segment> walls;

  friend bool operator==(const MazeLayout&, const MazeLayout&) = default;
};

// Text format: keyword header lines, then one "x1 y1 x2 y2" line per wall.
// Numbers are written in shortest round-trip form so parse(format(x)) == x.
MazeLayout parse_layout(std::istream& in);
MazeLayout parse_layout_text(const std::string& text);
MazeLayout load_layout(const std::string& path);
std::string format_layout(const MazeLayout& layout);

// Names: "wallmaze", "umaze", "tinymaze".
std::vector<std::string> builtin_env_names();
const std::string& builtin_layout_text(const std::string& name);

// Off-trajectory transition function used by perfect-model search.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual Vec model_transition(const Vec& state, const Vec& action) const = 0;
  virtual const Box& action_box() const = 0;
};

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

// Deterministic 2D point maze with displacement dynamics and zero-thickness
// walls. Movements that would cross a wall stop collision_epsilon short of it.
class MazeEnv : public TransitionModel {
 public:
  static constexpr double kCollisionEpsilon = 1e-6;

  // Validates the layout (regions inside bounds, start connected to goal).
  explicit MazeEnv(MazeLayout layout);

  struct Reset {
    Vec state;
    Vec goal;
  };
  Reset reset(Rng& rng);
  // Places the env at an explicit (state, goal) pair.
  void reset_to(const Vec& state, const Vec& goal);

  StepResult step(const Vec& action);

  Vec model_transition(const Vec& state, const Vec& action) const override;
  const Box& action_box() const override { return layout_.action_box; }

  bool is_goal(const Vec& state, const Vec& goal) const;

  const MazeLayout& layout() const { return layout_; }
  const Vec& state() const { return state_; }
  const Vec& goal() const { return goal_; }
  int steps_taken() const { return t_; }
  int state_dim() const { return 2; }
  int goal_dim() const { return 2; }
  int action_dim() const { return 2; }

 private:
  MazeLayout layout_;
  std::vector<Segment> blockers_;  // walls plus the four boundary edges
  Vec state_;
  Vec goal_;
  int t_ = 0;
};

// A builtin name, or a path to a layout file ending in ".maze".
bool is_layout_path(const std::string& name);
bool known_env(const std::string& name);
MazeEnv make_env(const std::string& name);

// Smallest parameter t in (0,1] at which the path p -> p + d runs into a
// segment, or a value > 1 when it does not. Contact at the start point
// (t = 0) does not block, so a point on a segment can move off it.
double first_hit(const Vec& p, const Vec& d, const Segment& s);

// Cells of a uniform grid over the bounds, flood-filled from the cell
// containing `from`; adjacency is blocked where a wall crosses the line
// joining neighbouring cell centres. Returned as a row-major mask.
struct CellGrid {
  int nx = 0;
  int ny = 0;
  double cell_size = 1.0;
  Vec origin;
  std::vector<char> reachable;

  int cell_index(const Vec& p) const;  // -1 outside the grid
  Vec cell_center(int idx) const;
  std::size_t reachable_count() const;
};
CellGrid flood_fill(const MazeLayout& layout, double cell_size, const Vec& from);

}  // namespace etgl
