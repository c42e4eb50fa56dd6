#include "panonav/fmm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace panonav {

namespace {

// (value, row-major index) min-heap entry; index tie-break for reproducibility.
using HeapEntry = std::pair<double, int>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

// Thick line of sight between cell centers: every point on the segment must
// keep kLosClearanceCells of clearance from occupied cells. The clearance
// rejects rays that squeeze through corner gaps a lattice path cannot take,
// keeping exact-seeded values comparable to grid-constrained oracles.
constexpr double kLosClearanceCells = 0.3;

bool line_of_sight(const Grid<uint8_t>& grid, Cell a, Cell b) {
  const double ax = a.x + 0.5, ay = a.y + 0.5, bx = b.x + 0.5, by = b.y + 0.5;
  const double len = std::hypot(bx - ax, by - ay);
  const int n = std::max(2, static_cast<int>(std::ceil(len * 8)));
  const double r = kLosClearanceCells;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double sx = ax + t * (bx - ax), sy = ay + t * (by - ay);
    const int x0 = static_cast<int>(std::floor(sx - r)), x1 = static_cast<int>(std::floor(sx + r));
    const int y0 = static_cast<int>(std::floor(sy - r)), y1 = static_cast<int>(std::floor(sy + r));
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) {
        if (!grid.in_bounds(cx, cy) || grid.at(cx, cy)) return false;
      }
  }
  return true;
}

double quadratic_update(const Grid<double>& value, const Grid<uint8_t>& accepted, Cell c,
                        double h) {
  auto axis_min = [&](Cell n1, Cell n2) {
    double m = kInfDist;
    if (value.in_bounds(n1) && accepted.at(n1)) m = std::min(m, value.at(n1));
    if (value.in_bounds(n2) && accepted.at(n2)) m = std::min(m, value.at(n2));
    return m;
  };
  double a = axis_min({c.x - 1, c.y}, {c.x + 1, c.y});
  double b = axis_min({c.x, c.y - 1}, {c.x, c.y + 1});
  if (a > b) std::swap(a, b);
  if (a == kInfDist) return kInfDist;
  if (b - a >= h) return a + h;
  return (a + b + std::sqrt(2.0 * h * h - (a - b) * (a - b))) / 2.0;
}

DistanceField solve_impl(const Grid<uint8_t>& obstacle_grid, Cell source_cell, double h,
                         const Cell* stop_cell, double stop_margin = 0.0) {
  if (!obstacle_grid.in_bounds(source_cell) || obstacle_grid.at(source_cell))
    throw InvalidInputError("eikonal source occupied or out of bounds");
  const int W = obstacle_grid.width(), H = obstacle_grid.height();
  DistanceField field{Grid<double>(W, H, kInfDist), source_cell, h};
  Grid<uint8_t> accepted(W, H, 0);
  MinHeap heap;

  // Exact near-source seeding where line of sight is free.
  const int r = kExactSeedRadiusCells;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const Cell c{source_cell.x + dx, source_cell.y + dy};
      const double d = std::hypot(dx, dy);
      if (d > r || !obstacle_grid.in_bounds(c) || obstacle_grid.at(c)) continue;
      if (!line_of_sight(obstacle_grid, source_cell, c)) continue;
      field.value.at(c) = d * h;
      heap.emplace(field.value.at(c), field.value.index_of(c));
    }
  }

  double stop_value = kInfDist;
  while (!heap.empty()) {
    const auto [v, idx] = heap.top();
    heap.pop();
    if (v > stop_value + stop_margin) break;  // finalized past the stop cell
    const Cell c = field.value.cell_of(idx);
    if (accepted.at(c)) continue;
    if (v > field.value.at(c) + 1e-15) continue;  // stale entry
    accepted.at(c) = 1;
    if (stop_cell && c == *stop_cell) {
      if (stop_margin <= 0.0) break;
      stop_value = v;
    }
    const Cell nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
    for (Cell n : nbrs) {
      if (!obstacle_grid.in_bounds(n) || obstacle_grid.at(n) || accepted.at(n)) continue;
      const double cand = quadratic_update(field.value, accepted, n, h);
      if (cand < field.value.at(n)) {
        field.value.at(n) = cand;
        heap.emplace(cand, field.value.index_of(n));
      }
    }
  }
  return field;
}

}  // namespace

DistanceField solve_eikonal(const Grid<uint8_t>& obstacle_grid, Cell source_cell,
                            double cell_size_m) {
  return solve_impl(obstacle_grid, source_cell, cell_size_m, nullptr);
}

std::vector<Cell> extract_path(const DistanceField& field, Cell start_cell) {
  if (!field.value.in_bounds(start_cell) || field.value.at(start_cell) == kInfDist)
    throw NoPathError("start cell unreachable from field source");
  std::vector<Cell> path{start_cell};
  Cell cur = start_cell;
  const size_t limit = field.value.size() + 1;
  while (!(cur == field.source)) {
    double best = field.value.at(cur);
    Cell best_cell = cur;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell n{cur.x + dx, cur.y + dy};
        if (!field.value.in_bounds(n)) continue;
        const double v = field.value.at(n);
        if (v >= best) continue;
        if (dx != 0 && dy != 0) {
          // no corner cutting between two blocked orthogonals
          const bool b1 = field.value.at({cur.x + dx, cur.y}) == kInfDist;
          const bool b2 = field.value.at({cur.x, cur.y + dy}) == kInfDist;
          if (b1 && b2) continue;
        }
        best = v;
        best_cell = n;
      }
    }
    if (best_cell == cur)
      throw InternalInconsistencyError("descent stuck away from source");
    cur = best_cell;
    path.push_back(cur);
    if (path.size() > limit) throw InternalInconsistencyError("descent did not terminate");
  }
  return path;
}

namespace {

double wrap_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

Action next_action(const std::vector<Cell>& path, const Pose& pose, double cell_size_m,
                   const MotionConfig& motion) {
  if (path.empty()) throw InvalidInputError("empty path");
  const double lookahead = 0.5 * motion.step_m;
  Cell wp = path.back();
  for (const Cell& c : path) {
    const double d = std::hypot((c.x + 0.5) * cell_size_m - pose.x,
                                (c.y + 0.5) * cell_size_m - pose.y);
    if (d > lookahead) {
      wp = c;
      break;
    }
  }
  const double bearing = std::atan2((wp.y + 0.5) * cell_size_m - pose.y,
                                    (wp.x + 0.5) * cell_size_m - pose.x);
  const double err = wrap_pi(bearing - pose.heading);
  if (std::abs(err) <= motion.turn_rad / 2.0 + 1e-12) return Action::MoveForward;
  return err > 0 ? Action::TurnLeft : Action::TurnRight;
}

namespace {

// Forward sweep against the known map only; unknown space stays traversable.
bool known_blocked(const OccupancyMap& map, const Pose& pose, double heading, double step_m) {
  const double x1 = pose.x + step_m * std::cos(heading);
  const double y1 = pose.y + step_m * std::sin(heading);
  const double len = std::hypot(x1 - pose.x, y1 - pose.y);
  const int n = std::max(2, static_cast<int>(std::ceil(len / (map.cell_size_m * 0.25))));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Cell c = map.cell_at(pose.x + t * (x1 - pose.x), pose.y + t * (y1 - pose.y));
    if (!map.obstacle.in_bounds(c) || map.obstacle.at(c)) return true;
  }
  return false;
}

}  // namespace

Action replan_step(const OccupancyMap& map, const Pose& pose, Cell goal_cell,
                   const MotionConfig& motion) {
  const Grid<uint8_t>& obs = map.obstacle;
  if (!obs.in_bounds(goal_cell)) throw InvalidInputError("goal cell out of bounds");
  const Cell agent = map.cell_at(pose.x, pose.y);
  if (!obs.in_bounds(agent) || obs.at(agent))
    throw InternalInconsistencyError("agent cell marked occupied in map");

  auto nearest_known_free = [&](Cell target) {
    Cell best{-1, -1};
    double best_d = kInfDist;
    int best_idx = 0;
    for (int y = 0; y < obs.height(); ++y) {
      for (int x = 0; x < obs.width(); ++x) {
        if (obs.at(x, y) || !map.explored.at(x, y)) continue;
        const double d = std::hypot(x - target.x, y - target.y);
        const int idx = y * obs.width() + x;
        if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && idx < best_idx)) {
          best_d = d;
          best = {x, y};
          best_idx = idx;
        }
      }
    }
    return best;
  };

  Cell source = goal_cell;
  if (obs.at(source)) source = nearest_known_free(goal_cell);
  if (source.x < 0) return Action::TurnLeft;  // nothing known free yet

  const double stop_margin = motion.step_m + 4.0 * map.cell_size_m;
  DistanceField field = solve_impl(obs, source, map.cell_size_m, &agent, stop_margin);
  if (field.value.at(agent) == kInfDist) {
    source = nearest_known_free(goal_cell);
    if (source.x < 0) return Action::TurnLeft;
    field = solve_impl(obs, source, map.cell_size_m, &agent, stop_margin);
    if (field.value.at(agent) == kInfDist) return Action::TurnLeft;
  }
  const std::vector<Cell> path = extract_path(field, agent);

  // The step length (0.25 m) spans several cells, so naive waypoint pursuit
  // both walks into walls near corners and orbits waypoints closer than one
  // step. Instead, descend the distance field greedily over the reachable
  // one-step landing points, breaking ties toward the path bearing. The
  // choice depends only on position, so successive calls cannot flip-flop
  // between opposing turns.
  const double lookahead = motion.step_m;
  Cell wp = path.back();
  for (const Cell& c : path) {
    const double d = std::hypot((c.x + 0.5) * map.cell_size_m - pose.x,
                                (c.y + 0.5) * map.cell_size_m - pose.y);
    if (d > lookahead) {
      wp = c;
      break;
    }
  }
  const double bearing = std::atan2((wp.y + 0.5) * map.cell_size_m - pose.y,
                                    (wp.x + 0.5) * map.cell_size_m - pose.x);
  // Candidates in tie-preference order: keep heading, then the left turn.
  const double offsets[4] = {0.0, motion.turn_rad, -motion.turn_rad, 2.0 * motion.turn_rad};
  int best = -1;
  double best_score = kInfDist;
  for (int i = 0; i < 4; ++i) {
    const double cand = pose.heading + offsets[i];
    if (known_blocked(map, pose, cand, motion.step_m)) continue;
    const Cell landing = map.cell_at(pose.x + motion.step_m * std::cos(cand),
                                     pose.y + motion.step_m * std::sin(cand));
    const double err = std::abs(wrap_pi(bearing - cand));
    const double score = field.value.at(landing) + 1e-6 * err;
    if (score < best_score - 1e-12) {
      best_score = score;
      best = i;
    }
  }
  if (best < 0) return Action::TurnLeft;  // boxed in tighter than one step
  if (best == 0) return Action::MoveForward;
  if (best == 2) return Action::TurnRight;
  return Action::TurnLeft;  // left turn, or first of two turns for "behind"
}

DijkstraResult dijkstra_grid(const Grid<uint8_t>& obstacle_grid, Cell source_cell,
                             double cell_size_m) {
  if (!obstacle_grid.in_bounds(source_cell) || obstacle_grid.at(source_cell))
    throw InvalidInputError("dijkstra source occupied or out of bounds");
  const int W = obstacle_grid.width(), H = obstacle_grid.height();
  DijkstraResult r{Grid<double>(W, H, kInfDist), Grid<int>(W, H, -1)};
  r.dist.at(source_cell) = 0.0;
  r.hops.at(source_cell) = 0;
  MinHeap heap;
  heap.emplace(0.0, r.dist.index_of(source_cell));
  Grid<uint8_t> done(W, H, 0);
  const double h = cell_size_m, hd = cell_size_m * std::sqrt(2.0);
  while (!heap.empty()) {
    const auto [v, idx] = heap.top();
    heap.pop();
    const Cell c = r.dist.cell_of(idx);
    if (done.at(c)) continue;
    done.at(c) = 1;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell n{c.x + dx, c.y + dy};
        if (!obstacle_grid.in_bounds(n) || obstacle_grid.at(n)) continue;
        if (dx != 0 && dy != 0) {
          // diagonal moves may not cut corners past occupied cells
          if (obstacle_grid.at(c.x + dx, c.y) || obstacle_grid.at(c.x, c.y + dy)) continue;
        }
        const double w = (dx != 0 && dy != 0) ? hd : h;
        if (v + w < r.dist.at(n) - 1e-15) {
          r.dist.at(n) = v + w;
          r.hops.at(n) = r.hops.at(c) + 1;
          heap.emplace(r.dist.at(n), r.dist.index_of(n));
        }
      }
    }
  }
  return r;
}

}  // namespace panonav
