#pragma once

#include <limits>
#include <vector>

#include "panonav/mapping.hpp"
#include "panonav/world.hpp"

namespace panonav {

inline constexpr double kInfDist = std::numeric_limits<double>::infinity();

struct DistanceField {
  Grid<double> value;  // travel cost in meters, +inf on occupied/unreached
  Cell source;
  double cell_size_m = 0.10;
};

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalInconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// First-order fast-marching solve of |grad u| = 1 on the 4-neighbor stencil,
// min-heap acceptance, ties broken by row-major index. Cells within
// kExactSeedRadiusCells of the source with a free line of sight are seeded
// with their exact Euclidean distance, which keeps the near-source diagonal
// overestimate of the first-order stencil out of the far field.
inline constexpr int kExactSeedRadiusCells = 4;

DistanceField solve_eikonal(const Grid<uint8_t>& obstacle_grid, Cell source_cell,
                            double cell_size_m);

// Steepest-descent walk over the 8-neighborhood from start_cell down to the
// field source. Values strictly decrease along the result.
std::vector<Cell> extract_path(const DistanceField& field, Cell start_cell);

// Bearing rule: MoveForward when the first waypoint beyond half a step is
// within turn_rad/2 of the heading, otherwise the single turn that most
// reduces the bearing error (ties to TurnLeft).
Action next_action(const std::vector<Cell>& path, const Pose& pose, double cell_size_m,
                   const MotionConfig& motion = {});

// Per-step replan: solve from the goal over the current map (unknown space
// treated as free), extract the path from the agent cell, pick one action.
// An unreachable or occupied goal falls back to the nearest known-free cell
// by straight-line distance (lowest row-major index on ties).
Action replan_step(const OccupancyMap& map, const Pose& pose, Cell goal_cell,
                   const MotionConfig& motion = {});

// 8-connected Dijkstra with edge weights h and h*sqrt(2); test oracle and
// serial reference for the FMM field. Also reports hop counts.
struct DijkstraResult {
  Grid<double> dist;
  Grid<int> hops;
};
DijkstraResult dijkstra_grid(const Grid<uint8_t>& obstacle_grid, Cell source_cell,
                             double cell_size_m);

}  // namespace panonav
