#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "panonav/grid.hpp"
#include "panonav/random.hpp"

namespace panonav {

inline constexpr int kLandmarkDim = 4;
inline constexpr int kMaxEpisodeSteps = 500;
inline constexpr double kSuccessRadiusM = 1.0;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in [0, 2pi), 0 = +x axis
};

enum class Action { MoveForward, TurnRight, TurnLeft, Stop };

// Planner-facing action set excludes Stop; agent-facing set includes it.
inline constexpr std::array<Action, 3> kPlannerActions = {Action::MoveForward, Action::TurnRight,
                                                          Action::TurnLeft};
inline constexpr std::array<Action, 4> kAgentActions = {Action::MoveForward, Action::TurnRight,
                                                        Action::TurnLeft, Action::Stop};

const char* action_name(Action a);

struct MotionConfig {
  double step_m = 0.25;
  double turn_rad = M_PI / 2.0;
};

struct PanoramaConfig {
  int n_rays = 36;
  double max_range_m = 5.0;
};

// World-frame-aligned 360-degree range scan plus the landmark feature of each
// struck cell (zeros where the ray reaches max range).
struct Panorama {
  std::vector<double> ranges;                             // n_rays
  std::vector<std::array<double, kLandmarkDim>> landmark_hits;  // n_rays
};

struct WorldGenConfig {
  double width_m = 16.0;
  double height_m = 16.0;
  double cell_size_m = 0.10;
  int n_rooms = 5;
  int n_clutter = 10;
};

class World {
 public:
  World(double width_m, double height_m, double cell_size_m);

  double width_m() const { return width_m_; }
  double height_m() const { return height_m_; }
  double cell_size_m() const { return cell_size_m_; }
  int cells_x() const { return obstacles_.width(); }
  int cells_y() const { return obstacles_.height(); }

  const Grid<uint8_t>& obstacle_grid() const { return obstacles_; }
  Grid<uint8_t>& obstacle_grid() { return obstacles_; }

  bool occupied(Cell c) const { return !obstacles_.in_bounds(c) || obstacles_.at(c) != 0; }
  bool occupied_at(double x, double y) const { return occupied(cell_at(x, y)); }
  Cell cell_at(double x, double y) const {
    return {static_cast<int>(std::floor(x / cell_size_m_)),
            static_cast<int>(std::floor(y / cell_size_m_))};
  }
  Cell cell_of(const Pose& p) const { return cell_at(p.x, p.y); }
  // Center of a cell in world coordinates.
  double cell_cx(int cx) const { return (cx + 0.5) * cell_size_m_; }
  double cell_cy(int cy) const { return (cy + 0.5) * cell_size_m_; }

  bool pose_valid(const Pose& p) const { return !occupied_at(p.x, p.y); }

  // Synthetic per-cell visual distinctiveness; a fixed function of normalized
  // position so that it transfers across procedurally generated layouts.
  std::array<double, kLandmarkDim> landmark(Cell c) const;

  void seal_boundary();
  int count_free() const;
  // Size of the largest 4-connected free component.
  int largest_free_component() const;
  void check_invariants() const;

 private:
  double width_m_;
  double height_m_;
  double cell_size_m_;
  Grid<uint8_t> obstacles_;
};

struct StepResult {
  Pose pose;
  bool collided = false;
};

struct InvalidInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Discrete agent kinematics. MoveForward sweeps a segment of step_m along the
// heading and is rejected (collided=true, pose unchanged) if it enters an
// occupied cell. Turns are always collision free. Stop is identity.
StepResult step(const World& world, const Pose& pose, Action action,
                const MotionConfig& motion = {});

Panorama render_panorama(const World& world, const Pose& pose, const PanoramaConfig& cfg = {});

// Distance along a ray from (x, y) at angle `theta` to the first occupied cell
// boundary, clamped to max_range. hit_cell is filled when a cell is struck.
double cast_ray(const World& world, double x, double y, double theta, double max_range,
                Cell* hit_cell);

enum class Difficulty { Easy, Medium, Hard };

const char* difficulty_name(Difficulty d);
// [lo, hi) geodesic band in meters; Hard's upper bound is inclusive.
void difficulty_band(Difficulty d, double* lo, double* hi);

struct NavTask {
  Pose start_pose;
  Pose goal_pose;
  Panorama goal_panorama;
  Difficulty difficulty = Difficulty::Easy;
  double shortest_path_m = 0.0;
};

struct UnsatisfiableTierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection-samples start/goal poses until the geodesic distance on the
// ground-truth grid falls inside the difficulty band.
NavTask sample_task(const World& world, Difficulty difficulty, Rng& rng,
                    const PanoramaConfig& pano_cfg = {});

// Success: agent stopped before the step cap within 1.0 m of the goal.
bool judge_success(const Pose& agent_pose, const Pose& goal_pose, bool stopped, int steps);

// Procedural rooms-and-corridors layout with scattered rectangular clutter.
World generate_world(uint64_t seed, const WorldGenConfig& cfg = {});

// ASCII grid format: header "cells W H cell_size_m", then one row per line,
// '#' = occupied, '.' = free. Loader/saver round-trip bit-exact.
void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);
std::string world_to_string(const World& world);
World world_from_string(const std::string& text);

}  // namespace panonav
