#include "etgl/envs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "builtin_layouts.hpp"

namespace etgl {

bool Box::contains(const Vec& p) const {
  return p.size() == low.size() && (p.array() >= low.array()).all() &&
         (p.array() <= high.array()).all();
}

Vec Box::clip(const Vec& p) const { return p.cwiseMax(low).cwiseMin(high); }

Vec Box::sample(Rng& rng) const {
  Vec p(low.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(low(i), high(i));
  return p;
}

bool operator==(const Box& a, const Box& b) {
  return a.low.size() == b.low.size() && a.high.size() == b.high.size() && a.low == b.low &&
         a.high == b.high;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& token, int line) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ContractError("maze layout line " + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

std::vector<double> numbers(std::istringstream& in, std::size_t expected, int line) {
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, line));
  if (out.size() != expected)
    throw ContractError("maze layout line " + std::to_string(line) + ": expected " +
                        std::to_string(expected) + " numbers");
  return out;
}

Box box2(const std::vector<double>& v) {
  Box b{Vec(2), Vec(2)};
  b.low << v[0], v[1];
  b.high << v[2], v[3];
  return b;
}

std::string format_box(const Box& b) {
  return fmt(b.low(0)) + " " + fmt(b.low(1)) + " " + fmt(b.high(0)) + " " + fmt(b.high(1));
}

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

std::vector<Segment> boundary_segments(const Box& b) {
  const double x0 = b.low(0), y0 = b.low(1), x1 = b.high(0), y1 = b.high(1);
  return {{x0, y0, x1, y0}, {x1, y0, x1, y1}, {x1, y1, x0, y1}, {x0, y1, x0, y0}};
}

bool box_inside(const Box& inner, const Box& outer) {
  return (inner.low.array() >= outer.low.array()).all() &&
         (inner.high.array() <= outer.high.array()).all() &&
         (inner.low.array() <= inner.high.array()).all();
}

}  // namespace

MazeLayout parse_layout(std::istream& in) {
  MazeLayout layout;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  bool in_walls = false;
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (!header_seen) {
      std::string version;
      ls >> version;
      if (key != "etgl-maze" || version != "1")
        throw ContractError("maze layout: missing 'etgl-maze 1' header");
      header_seen = true;
      continue;
    }
    if (in_walls) {
      std::istringstream all(line);
      const auto v = numbers(all, 4, lineno);
      layout.walls.push_back({v[0], v[1], v[2], v[3]});
      continue;
    }
    seen[key] = true;
    if (key == "name") {
      ls >> layout.name;
    } else if (key == "bounds") {
      layout.bounds = box2(numbers(ls, 4, lineno));
    } else if (key == "start") {
      layout.start = box2(numbers(ls, 4, lineno));
    } else if (key == "goal") {
      layout.goal = box2(numbers(ls, 4, lineno));
    } else if (key == "goal_radius") {
      layout.goal_radius = numbers(ls, 1, lineno)[0];
    } else if (key == "max_steps") {
      layout.max_steps = static_cast<int>(numbers(ls, 1, lineno)[0]);
    } else if (key == "action_box") {
      layout.action_box = box2(numbers(ls, 4, lineno));
    } else if (key == "rewards") {
      const auto v = numbers(ls, 2, lineno);
      layout.step_reward = v[0];
      layout.goal_reward = v[1];
    } else if (key == "walls") {
      in_walls = true;
    } else {
      throw ContractError("maze layout line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  for (const char* k : {"name", "bounds", "start", "goal", "goal_radius", "max_steps", "action_box",
                        "rewards", "walls"}) {
    if (!seen.count(k)) throw ContractError(std::string("maze layout: missing '") + k + "'");
  }
  return layout;
}

MazeLayout parse_layout_text(const std::string& text) {
  std::istringstream in(text);
  return parse_layout(in);
}

MazeLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open maze layout '" + path + "'");
  return parse_layout(in);
}

std::string format_layout(const MazeLayout& l) {
  std::ostringstream out;
  out << "etgl-maze 1\n";
  out << "name " << l.name << '\n';
  out << "bounds " << format_box(l.bounds) << '\n';
  out << "start " << format_box(l.start) << '\n';
  out << "goal " << format_box(l.goal) << '\n';
  out << "goal_radius " << fmt(l.goal_radius) << '\n';
  out << "max_steps " << l.max_steps << '\n';
  out << "action_box " << format_box(l.action_box) << '\n';
  out << "rewards " << fmt(l.step_reward) << ' ' << fmt(l.goal_reward) << '\n';
  out << "walls\n";
  for (const auto& w : l.walls)
    out << fmt(w.x1) << ' ' << fmt(w.y1) << ' ' << fmt(w.x2) << ' ' << fmt(w.y2) << '\n';
  return out.str();
}

std::vector<std::string> builtin_env_names() { return {"wallmaze", "umaze", "tinymaze"}; }

const std::string& builtin_layout_text(const std::string& name) {
  static const std::map<std::string, std::string> texts = {
      {"wallmaze", generated::kWallMaze},
      {"umaze", generated::kUMaze},
      {"tinymaze", generated::kTinyMaze},
  };
  const auto it = texts.find(name);
  if (it == texts.end()) throw ContractError("unknown env '" + name + "'");
  return it->second;
}

bool is_layout_path(const std::string& name) { return name.ends_with(".maze"); }

bool known_env(const std::string& name) {
  if (is_layout_path(name)) return std::ifstream(name).good();
  const auto names = builtin_env_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

MazeEnv make_env(const std::string& name) {
  if (is_layout_path(name)) return MazeEnv(load_layout(name));
  return MazeEnv(parse_layout_text(builtin_layout_text(name)));
}

double first_hit(const Vec& p, const Vec& d, const Segment& s) {
  constexpr double kNoHit = 2.0;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return kNoHit;
  const double ex = s.x2 - s.x1, ey = s.y2 - s.y1;
  const double qx = s.x1 - p(0), qy = s.y1 - p(1);
  const double denom = cross(d(0), d(1), ex, ey);
  if (std::abs(denom) > 1e-15 * std::sqrt(dd * (ex * ex + ey * ey))) {
    const double t = cross(qx, qy, ex, ey) / denom;
    const double u = cross(qx, qy, d(0), d(1)) / denom;
    // A path starting on the segment is leaving it, not hitting it.
    if (t > 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return t;
    return kNoHit;
  }
  // Parallel: a collinear segment blocks where the path runs into its end;
  // sliding along a segment the point already lies on is free.
  if (std::abs(cross(qx, qy, d(0), d(1))) > 1e-12 * std::sqrt(dd)) return kNoHit;
  const double t1 = (qx * d(0) + qy * d(1)) / dd;
  const double t2 = ((qx + ex) * d(0) + (qy + ey) * d(1)) / dd;
  const double lo = std::min(t1, t2);
  if (lo <= 0.0 || lo > 1.0) return kNoHit;
  return lo;
}

int CellGrid::cell_index(const Vec& p) const {
  const int ix = static_cast<int>(std::floor((p(0) - origin(0)) / cell_size));
  const int iy = static_cast<int>(std::floor((p(1) - origin(1)) / cell_size));
  // Points on the upper boundary belong to the last cell.
  const int cx = ix == nx && p(0) - origin(0) <= nx * cell_size ? nx - 1 : ix;
  const int cy = iy == ny && p(1) - origin(1) <= ny * cell_size ? ny - 1 : iy;
  if (cx < 0 || cy < 0 || cx >= nx || cy >= ny) return -1;
  return cy * nx + cx;
}

Vec CellGrid::cell_center(int idx) const {
  Vec c(2);
  c << origin(0) + (idx % nx + 0.5) * cell_size, origin(1) + (idx / nx + 0.5) * cell_size;
  return c;
}

std::size_t CellGrid::reachable_count() const {
  std::size_t n = 0;
  for (char r : reachable) n += r ? 1 : 0;
  return n;
}

CellGrid flood_fill(const MazeLayout& layout, double cell_size, const Vec& from) {
  require(cell_size > 0.0, "flood_fill: cell size must be positive");
  CellGrid g;
  g.cell_size = cell_size;
  g.origin = layout.bounds.low;
  const Vec extent = layout.bounds.high - layout.bounds.low;
  g.nx = static_cast<int>(std::ceil(extent(0) / cell_size - 1e-9));
  g.ny = static_cast<int>(std::ceil(extent(1) / cell_size - 1e-9));
  g.reachable.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  const int seed = g.cell_index(from);
  require(seed >= 0, "flood_fill: seed point outside bounds");
  auto blocked = [&](int a, int b) {
    const Vec ca = g.cell_center(a);
    const Vec d = g.cell_center(b) - ca;
    for (const auto& w : layout.walls)
      if (first_hit(ca, d, w) <= 1.0) return true;
    return false;
  };
  std::deque<int> queue{seed};
  g.reachable[seed] = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int cx = c % g.nx, cy = c / g.nx;
    const int nbrs[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
    for (const auto& n : nbrs) {
      if (n[0] < 0 || n[1] < 0 || n[0] >= g.nx || n[1] >= g.ny) continue;
      const int idx = n[1] * g.nx + n[0];
      if (g.reachable[idx] || blocked(c, idx)) continue;
      g.reachable[idx] = 1;
      queue.push_back(idx);
    }
  }
  return g;
}

MazeEnv::MazeEnv(MazeLayout layout) : layout_(std::move(layout)) {
  const auto& l = layout_;
  require(l.bounds.dim() == 2 && l.start.dim() == 2 && l.goal.dim() == 2 && l.action_box.dim() == 2,
          "MazeEnv: layouts are two-dimensional");
  require(((l.bounds.high - l.bounds.low).array() > 0).all(), "MazeEnv: empty bounds");
  require(box_inside(l.start, l.bounds), "MazeEnv: start region outside bounds");
  require(box_inside(l.goal, l.bounds), "MazeEnv: goal region outside bounds");
  require(((l.action_box.high - l.action_box.low).array() > 0).all(), "MazeEnv: empty action box");
  require(l.goal_radius > 0.0, "MazeEnv: goal radius must be positive");
  require(l.max_steps >= 1, "MazeEnv: max_steps must be positive");
  const double cell = 0.05 * std::min(l.bounds.high(0) - l.bounds.low(0), l.bounds.high(1) - l.bounds.low(1));
  const CellGrid grid = flood_fill(l, cell, l.start.center());
  const int goal_cell = grid.cell_index(l.goal.center());
  require(goal_cell >= 0 && grid.reachable[goal_cell], "MazeEnv: walls disconnect start from goal");
  blockers_ = l.walls;
  for (const auto& s : boundary_segments(l.bounds)) blockers_.push_back(s);
  state_ = l.start.center();
  goal_ = l.goal.center();
}

MazeEnv::Reset MazeEnv::reset(Rng& rng) {
  state_ = layout_.start.sample(rng);
  goal_ = layout_.goal.sample(rng);
  t_ = 0;
  return {state_, goal_};
}

void MazeEnv::reset_to(const Vec& state, const Vec& goal) {
  require(state.size() == 2 && goal.size() == 2, "MazeEnv::reset_to: expected 2D state and goal");
  state_ = state;
  goal_ = goal;
  t_ = 0;
}

Vec MazeEnv::model_transition(const Vec& state, const Vec& action) const {
  require(state.size() == 2 && action.size() == 2, "MazeEnv: expected 2D state and action");
  const Vec d = layout_.action_box.clip(action);
  double t_hit = 2.0;
  for (const auto& s : blockers_) t_hit = std::min(t_hit, first_hit(state, d, s));
  if (t_hit > 1.0) return layout_.bounds.clip(state + d);
  const double len = d.norm();
  const double travel = t_hit * len - kCollisionEpsilon;
  if (travel <= 0.0) return state;
  return layout_.bounds.clip(state + d * (travel / len));
}

bool MazeEnv::is_goal(const Vec& state, const Vec& goal) const {
  return (state - goal).norm() <= layout_.goal_radius;
}

StepResult MazeEnv::step(const Vec& action) {
  StepResult r;
  r.next_state = model_transition(state_, action);
  state_ = r.next_state;
  ++t_;
  r.success = is_goal(state_, goal_);
  r.reward = r.success ? layout_.goal_reward : layout_.step_reward;
  r.done = r.success || t_ >= layout_.max_steps;
  return r;
}

}  // namespace etgl
