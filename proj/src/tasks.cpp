#include "panonav/fmm.hpp"
#include "panonav/world.hpp"

namespace panonav {

namespace {

Pose random_free_pose(const World& world, Rng& rng) {
  for (int i = 0; i < 100000; ++i) {
    Pose p;
    p.x = rng.uniform(0.0, world.width_m());
    p.y = rng.uniform(0.0, world.height_m());
    p.heading = (M_PI / 2.0) * rng.uniform_int(4);
    if (world.pose_valid(p)) return p;
  }
  throw UnsatisfiableTierError("no free pose found");
}

// Goals keep a one-cell free margin so the surroundings of the goal cell are
// reachable by the coarse step lattice regardless of start alignment.
bool goal_clearance_ok(const World& world, const Pose& goal) {
  const Cell g = world.cell_of(goal);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const Cell c{g.x + dx, g.y + dy};
      if (!world.obstacle_grid().in_bounds(c) || world.obstacle_grid().at(c)) return false;
    }
  return true;
}

}  // namespace

NavTask sample_task(const World& world, Difficulty difficulty, Rng& rng,
                    const PanoramaConfig& pano_cfg) {
  double lo, hi;
  difficulty_band(difficulty, &lo, &hi);
  const bool hi_inclusive = difficulty == Difficulty::Hard;
  int rejections = 0;
  while (rejections < 10000) {
    const Pose goal = random_free_pose(world, rng);
    if (!goal_clearance_ok(world, goal)) {
      ++rejections;
      continue;
    }
    const DistanceField field =
        solve_eikonal(world.obstacle_grid(), world.cell_of(goal), world.cell_size_m());
    // several start draws against one goal field
    for (int k = 0; k < 32 && rejections < 10000; ++k) {
      const Pose start = random_free_pose(world, rng);
      const double d = field.value.at(world.cell_of(start));
      const bool in_band = d >= lo && (hi_inclusive ? d <= hi : d < hi);
      if (!in_band) {
        ++rejections;
        continue;
      }
      NavTask task;
      task.start_pose = start;
      task.goal_pose = goal;
      task.goal_panorama = render_panorama(world, goal, pano_cfg);
      task.difficulty = difficulty;
      task.shortest_path_m = d;
      return task;
    }
  }
  throw UnsatisfiableTierError(std::string("no task in band for tier ") +
                               difficulty_name(difficulty));
}

}  // namespace panonav
