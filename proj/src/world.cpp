#include "panonav/world.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace panonav {

const char* action_name(Action a) {
  switch (a) {
    case Action::MoveForward: return "MoveForward";
    case Action::TurnRight: return "TurnRight";
    case Action::TurnLeft: return "TurnLeft";
    case Action::Stop: return "Stop";
  }
  return "?";
}

World::World(double width_m, double height_m, double cell_size_m)
    : width_m_(width_m), height_m_(height_m), cell_size_m_(cell_size_m) {
  if (width_m <= 0 || height_m <= 0 || cell_size_m <= 0)
    throw InvalidInputError("world dimensions must be positive");
  const int w = static_cast<int>(std::ceil(width_m / cell_size_m - 1e-9));
  const int h = static_cast<int>(std::ceil(height_m / cell_size_m - 1e-9));
  obstacles_ = Grid<uint8_t>(w, h, 0);
}

std::array<double, kLandmarkDim> World::landmark(Cell c) const {
  const double nx = (c.x + 0.5) / cells_x();
  const double ny = (c.y + 0.5) / cells_y();
  return {nx, ny, 0.5 + 0.5 * std::sin(4.0 * M_PI * nx) * std::sin(4.0 * M_PI * ny),
          0.5 + 0.5 * std::cos(6.0 * M_PI * nx + 1.3) * std::cos(6.0 * M_PI * ny + 0.7)};
}

void World::seal_boundary() {
  for (int x = 0; x < cells_x(); ++x) {
    obstacles_.at(x, 0) = 1;
    obstacles_.at(x, cells_y() - 1) = 1;
  }
  for (int y = 0; y < cells_y(); ++y) {
    obstacles_.at(0, y) = 1;
    obstacles_.at(cells_x() - 1, y) = 1;
  }
}

int World::count_free() const {
  int n = 0;
  for (size_t i = 0; i < obstacles_.size(); ++i)
    if (obstacles_[i] == 0) ++n;
  return n;
}

int World::largest_free_component() const {
  Grid<uint8_t> seen(cells_x(), cells_y(), 0);
  int best = 0;
  std::vector<Cell> stack;
  for (int y = 0; y < cells_y(); ++y) {
    for (int x = 0; x < cells_x(); ++x) {
      if (obstacles_.at(x, y) != 0 || seen.at(x, y)) continue;
      int size = 0;
      stack.push_back({x, y});
      seen.at(x, y) = 1;
      while (!stack.empty()) {
        Cell c = stack.back();
        stack.pop_back();
        ++size;
        const Cell nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
        for (Cell n : nbrs) {
          if (obstacles_.in_bounds(n) && obstacles_.at(n) == 0 && !seen.at(n)) {
            seen.at(n) = 1;
            stack.push_back(n);
          }
        }
      }
      best = std::max(best, size);
    }
  }
  return best;
}

void World::check_invariants() const {
  for (int x = 0; x < cells_x(); ++x)
    if (obstacles_.at(x, 0) == 0 || obstacles_.at(x, cells_y() - 1) == 0)
      throw std::logic_error("world boundary not sealed");
  for (int y = 0; y < cells_y(); ++y)
    if (obstacles_.at(0, y) == 0 || obstacles_.at(cells_x() - 1, y) == 0)
      throw std::logic_error("world boundary not sealed");
  if (largest_free_component() < 200) throw std::logic_error("free component too small");
}

namespace {

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a;
}

bool segment_blocked(const World& world, double x0, double y0, double x1, double y1) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int n = std::max(2, static_cast<int>(std::ceil(len / (world.cell_size_m() * 0.25))));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    if (world.occupied_at(x0 + t * (x1 - x0), y0 + t * (y1 - y0))) return true;
  }
  return false;
}

}  // namespace

StepResult step(const World& world, const Pose& pose, Action action, const MotionConfig& motion) {
  if (!world.pose_valid(pose)) throw InvalidInputError("pose inside obstacle");
  StepResult r{pose, false};
  switch (action) {
    case Action::Stop:
      break;
    case Action::TurnLeft:
      r.pose.heading = wrap_angle(pose.heading + motion.turn_rad);
      break;
    case Action::TurnRight:
      r.pose.heading = wrap_angle(pose.heading - motion.turn_rad);
      break;
    case Action::MoveForward: {
      const double nx = pose.x + motion.step_m * std::cos(pose.heading);
      const double ny = pose.y + motion.step_m * std::sin(pose.heading);
      if (segment_blocked(world, pose.x, pose.y, nx, ny)) {
        r.collided = true;
      } else {
        r.pose.x = nx;
        r.pose.y = ny;
      }
      break;
    }
  }
  return r;
}

double cast_ray(const World& world, double x, double y, double theta, double max_range,
                Cell* hit_cell) {
  // Amanatides-Woo traversal; distance to the boundary of the first occupied cell.
  const double h = world.cell_size_m();
  const double dx = std::cos(theta);
  const double dy = std::sin(theta);
  int cx = static_cast<int>(std::floor(x / h));
  int cy = static_cast<int>(std::floor(y / h));
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_max_y = inf, t_dx = inf, t_dy = inf;
  if (step_x != 0) {
    const double edge = (step_x > 0 ? (cx + 1) * h : cx * h);
    t_max_x = (edge - x) / dx;
    t_dx = h / std::abs(dx);
  }
  if (step_y != 0) {
    const double edge = (step_y > 0 ? (cy + 1) * h : cy * h);
    t_max_y = (edge - y) / dy;
    t_dy = h / std::abs(dy);
  }
  double t = 0.0;
  while (t <= max_range) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_dx;
      cx += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_dy;
      cy += step_y;
    }
    if (t > max_range) break;
    if (world.occupied({cx, cy})) {
      if (hit_cell) *hit_cell = {cx, cy};
      return t;
    }
  }
  if (hit_cell) *hit_cell = {-1, -1};
  return max_range;
}

Panorama render_panorama(const World& world, const Pose& pose, const PanoramaConfig& cfg) {
  if (!world.pose_valid(pose)) throw InvalidInputError("pose inside obstacle");
  Panorama p;
  p.ranges.resize(cfg.n_rays);
  p.landmark_hits.resize(cfg.n_rays);
  for (int i = 0; i < cfg.n_rays; ++i) {
    const double theta = 2.0 * M_PI * i / cfg.n_rays;  // world frame, heading independent
    Cell hit;
    p.ranges[i] = cast_ray(world, pose.x, pose.y, theta, cfg.max_range_m, &hit);
    if (hit.x >= 0 && world.obstacle_grid().in_bounds(hit))
      p.landmark_hits[i] = world.landmark(hit);
    else
      p.landmark_hits[i] = {};
  }
  return p;
}

const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
  }
  return "?";
}

void difficulty_band(Difficulty d, double* lo, double* hi) {
  switch (d) {
    case Difficulty::Easy: *lo = 1.5; *hi = 3.0; break;
    case Difficulty::Medium: *lo = 3.0; *hi = 5.0; break;
    case Difficulty::Hard: *lo = 5.0; *hi = 10.0; break;
  }
}

bool judge_success(const Pose& agent_pose, const Pose& goal_pose, bool stopped, int steps) {
  const double d = std::hypot(agent_pose.x - goal_pose.x, agent_pose.y - goal_pose.y);
  return stopped && steps < kMaxEpisodeSteps && d <= kSuccessRadiusM;
}

World generate_world(uint64_t seed, const WorldGenConfig& cfg) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    Rng rng(seed * 1000003ULL + attempt);
    World w(cfg.width_m, cfg.height_m, cfg.cell_size_m);
    auto& grid = w.obstacle_grid();
    const int W = w.cells_x(), H = w.cells_y();
    w.seal_boundary();

    // Interior walls with door gaps.
    const int door_cells = std::max(3, static_cast<int>(std::round(0.8 / cfg.cell_size_m)));
    for (int i = 0; i < cfg.n_rooms; ++i) {
      const bool vertical = rng.uniform() < 0.5;
      if (vertical) {
        const int x = 4 + rng.uniform_int(std::max(1, W - 8));
        const int d0 = 1 + rng.uniform_int(std::max(1, H - 2 - door_cells));
        const int d1 = rng.uniform() < 0.5 ? 1 + rng.uniform_int(std::max(1, H - 2 - door_cells))
                                           : d0;
        for (int y = 1; y < H - 1; ++y) {
          if ((y >= d0 && y < d0 + door_cells) || (y >= d1 && y < d1 + door_cells)) continue;
          grid.at(x, y) = 1;
        }
      } else {
        const int y = 4 + rng.uniform_int(std::max(1, H - 8));
        const int d0 = 1 + rng.uniform_int(std::max(1, W - 2 - door_cells));
        const int d1 = rng.uniform() < 0.5 ? 1 + rng.uniform_int(std::max(1, W - 2 - door_cells))
                                           : d0;
        for (int x = 1; x < W - 1; ++x) {
          if ((x >= d0 && x < d0 + door_cells) || (x >= d1 && x < d1 + door_cells)) continue;
          grid.at(x, y) = 1;
        }
      }
    }

    // Scattered rectangular clutter, 0.3 m .. 1.0 m a side. Clutter keeps a
    // 3-cell clearance from existing obstacles so it never narrows a doorway
    // or leaves a passage tighter than the agent's step length.
    const int clearance = 3;
    for (int i = 0; i < cfg.n_clutter; ++i) {
      const int bw = 3 + rng.uniform_int(8);
      const int bh = 3 + rng.uniform_int(8);
      const int bx = 1 + rng.uniform_int(std::max(1, W - 2 - bw));
      const int by = 1 + rng.uniform_int(std::max(1, H - 2 - bh));
      bool clear = true;
      for (int y = by - clearance; y < by + bh + clearance && clear; ++y)
        for (int x = bx - clearance; x < bx + bw + clearance && clear; ++x) {
          if (!grid.in_bounds(x, y) || grid.at(x, y)) clear = false;
        }
      if (!clear) continue;
      for (int y = by; y < by + bh; ++y)
        for (int x = bx; x < bx + bw; ++x) grid.at(x, y) = 1;
    }

    // Seal slots narrower than 3 cells (crossing walls can clip each other's
    // doorways): a passage under 0.3 m cannot be threaded reliably by 0.25 m
    // steps. Sealing may split the map; the component keep below handles it.
    for (bool changed = true; changed;) {
      changed = false;
      for (int y = 1; y < H - 1; ++y) {
        for (int x = 1; x < W - 1; ++x) {
          if (grid.at(x, y)) continue;
          int run = 1;
          for (int i = x - 1; i >= 0 && !grid.at(i, y); --i) ++run;
          for (int i = x + 1; i < W && !grid.at(i, y); ++i) ++run;
          if (run > 2) {
            run = 1;
            for (int i = y - 1; i >= 0 && !grid.at(x, i); --i) ++run;
            for (int i = y + 1; i < H && !grid.at(x, i); ++i) ++run;
          }
          if (run <= 2) {
            grid.at(x, y) = 1;
            changed = true;
          }
        }
      }
    }

    // Keep only the largest free component so every free cell is reachable.
    Grid<int> comp(W, H, -1);
    std::vector<Cell> stack;
    std::vector<int> comp_size;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        if (grid.at(x, y) != 0 || comp.at(x, y) >= 0) continue;
        const int id = static_cast<int>(comp_size.size());
        comp_size.push_back(0);
        comp.at(x, y) = id;
        stack.push_back({x, y});
        while (!stack.empty()) {
          Cell c = stack.back();
          stack.pop_back();
          ++comp_size[id];
          const Cell nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
          for (Cell n : nbrs) {
            if (grid.in_bounds(n) && grid.at(n) == 0 && comp.at(n) < 0) {
              comp.at(n) = id;
              stack.push_back(n);
            }
          }
        }
      }
    }
    if (comp_size.empty()) continue;
    const int keep =
        static_cast<int>(std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (grid.at(x, y) == 0 && comp.at(x, y) != keep) grid.at(x, y) = 1;

    if (comp_size[keep] >= 200) return w;
  }
  throw std::runtime_error("world generation failed to produce a usable layout");
}

std::string world_to_string(const World& world) {
  std::ostringstream os;
  char head[96];
  std::snprintf(head, sizeof(head), "cells %d %d %.17g\n", world.cells_x(), world.cells_y(),
                world.cell_size_m());
  os << head;
  for (int y = 0; y < world.cells_y(); ++y) {
    for (int x = 0; x < world.cells_x(); ++x)
      os << (world.obstacle_grid().at(x, y) ? '#' : '.');
    os << '\n';
  }
  return os.str();
}

World world_from_string(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int W = 0, H = 0;
  double h = 0;
  is >> tag >> W >> H >> h;
  if (tag != "cells" || W <= 0 || H <= 0 || h <= 0)
    throw InvalidInputError("bad world header");
  World w(W * h, H * h, h);
  if (w.cells_x() != W || w.cells_y() != H) throw InvalidInputError("world size mismatch");
  std::string line;
  std::getline(is, line);
  for (int y = 0; y < H; ++y) {
    if (!std::getline(is, line) || static_cast<int>(line.size()) < W)
      throw InvalidInputError("truncated world grid");
    for (int x = 0; x < W; ++x) w.obstacle_grid().at(x, y) = (line[x] == '#') ? 1 : 0;
  }
  return w;
}

void save_world(const World& world, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << world_to_string(world);
}

World load_world(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return world_from_string(ss.str());
}

}  // namespace panonav
