#include <doctest.h>

#include "panonav/fmm.hpp"
#include "panonav/world.hpp"

using namespace panonav;

namespace {

World open_room(double size_m = 12.0) {
  World w(size_m, size_m, 0.10);
  w.seal_boundary();
  return w;
}

}  // namespace

TEST_CASE("step: free-space kinematics") {
  const World w = open_room();
  const StepResult r = step(w, {2.0, 2.0, 0.0}, Action::MoveForward);
  CHECK(r.pose.x == doctest::Approx(2.25));
  CHECK(r.pose.y == doctest::Approx(2.0));
  CHECK(!r.collided);
}

TEST_CASE("step: blocked motion leaves pose unchanged") {
  World w = open_room();
  // wall 0.1 m ahead of the agent
  for (int y = 0; y < w.cells_y(); ++y) w.obstacle_grid().at(21, y) = 1;
  const Pose p{2.0, 2.0, 0.0};
  const StepResult r = step(w, p, Action::MoveForward);
  CHECK(r.collided);
  CHECK(r.pose.x == p.x);
  CHECK(r.pose.y == p.y);
}

TEST_CASE("step: rotation is identity on position") {
  const World w = open_room();
  const StepResult r = step(w, {2.0, 2.0, 0.0}, Action::TurnLeft);
  CHECK(r.pose.heading == doctest::Approx(M_PI / 2));
  CHECK(r.pose.x == 2.0);
  CHECK(r.pose.y == 2.0);
  CHECK(!r.collided);
}

TEST_CASE("step: stop is identity, invalid pose rejected") {
  World w = open_room();
  const Pose p{2.0, 2.0, 1.0};
  const StepResult r = step(w, p, Action::Stop);
  CHECK(r.pose.x == p.x);
  CHECK(r.pose.heading == p.heading);
  w.obstacle_grid().at(w.cell_at(2.0, 2.0)) = 1;
  CHECK_THROWS_AS(step(w, p, Action::MoveForward), InvalidInputError);
}

TEST_CASE("four TurnLeft actions restore heading") {
  const World w = open_room();
  Pose p{3.0, 3.0, 0.7};
  for (int i = 0; i < 4; ++i) p = step(w, p, Action::TurnLeft).pose;
  CHECK(p.heading == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("panorama: max-range clamp in open area") {
  const World w = open_room(12.0);
  const Panorama p = render_panorama(w, {6.0, 6.0, 0.0});
  REQUIRE(p.ranges.size() == 36);
  for (double r : p.ranges) CHECK(r == doctest::Approx(5.0));
  for (const auto& lm : p.landmark_hits)
    for (double f : lm) CHECK(f == 0.0);
}

TEST_CASE("panorama: axis-aligned wall at 1.0 m") {
  World w = open_room();
  for (int y = 0; y < w.cells_y(); ++y) w.obstacle_grid().at(30, y) = 1;
  const Panorama p = render_panorama(w, {2.0, 2.0, 0.0});
  CHECK(p.ranges[0] == doctest::Approx(1.0).epsilon(0.1));  // within one cell
  // analytic oracle: ray 0 hits x = 3.0 exactly
  CHECK(std::abs(p.ranges[0] - 1.0) <= 0.1 + 1e-12);
}

TEST_CASE("panorama: deterministic and heading independent") {
  const World w = generate_world(7);
  Rng rng(3);
  const NavTask t = sample_task(w, Difficulty::Easy, rng);
  const Panorama a = render_panorama(w, t.start_pose);
  const Panorama b = render_panorama(w, t.start_pose);
  Pose rotated = t.start_pose;
  rotated.heading += 1.234;
  const Panorama c = render_panorama(w, rotated);
  CHECK(a.ranges == b.ranges);
  CHECK(a.ranges == c.ranges);
}

TEST_CASE("sample_task: difficulty bands and determinism") {
  const World w = generate_world(11);
  for (Difficulty d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard}) {
    Rng rng(5);
    const NavTask t = sample_task(w, d, rng);
    double lo, hi;
    difficulty_band(d, &lo, &hi);
    CHECK(t.shortest_path_m >= lo);
    if (d == Difficulty::Hard)
      CHECK(t.shortest_path_m <= hi);
    else
      CHECK(t.shortest_path_m < hi);
    Rng rng2(5);
    const NavTask t2 = sample_task(w, d, rng2);
    CHECK(t.start_pose.x == t2.start_pose.x);
    CHECK(t.goal_pose.y == t2.goal_pose.y);
    CHECK(t.shortest_path_m == t2.shortest_path_m);
  }
}

TEST_CASE("sample_task: geodesic reproducible within one cell") {
  const World w = generate_world(13);
  Rng rng(17);
  const NavTask t = sample_task(w, Difficulty::Medium, rng);
  const DistanceField f =
      solve_eikonal(w.obstacle_grid(), w.cell_of(t.goal_pose), w.cell_size_m());
  CHECK(std::abs(f.value.at(w.cell_of(t.start_pose)) - t.shortest_path_m) <=
        w.cell_size_m() + 1e-12);
}

TEST_CASE("judge_success rules") {
  const Pose goal{5.0, 5.0, 0.0};
  CHECK(judge_success({5.8, 5.0, 0}, goal, true, 200));
  CHECK(!judge_success({5.8, 5.0, 0}, goal, false, 500));
  CHECK(!judge_success({5.0, 6.4, 0}, goal, true, 90));
  CHECK(!judge_success({5.5, 5.0, 0}, goal, true, 500));  // at the cap
}

TEST_CASE("collision freedom under arbitrary action sequences") {
  const World w = generate_world(19);
  Rng rng(23);
  const NavTask t = sample_task(w, Difficulty::Easy, rng);
  Pose p = t.start_pose;
  for (int i = 0; i < 500; ++i) {
    const Action a = kAgentActions[rng.uniform_int(4)];
    p = step(w, p, a).pose;
    CHECK(w.pose_valid(p));
  }
}

TEST_CASE("world generation invariants") {
  for (uint64_t seed : {1ULL, 2ULL, 42ULL}) {
    const World w = generate_world(seed);
    CHECK_NOTHROW(w.check_invariants());
    CHECK(w.largest_free_component() >= 200);
    CHECK(w.largest_free_component() == w.count_free());  // single component kept
  }
}

TEST_CASE("world file round-trip is bit exact") {
  const World w = generate_world(31);
  const std::string text = world_to_string(w);
  const World w2 = world_from_string(text);
  CHECK(world_to_string(w2) == text);
  CHECK(w2.obstacle_grid() == w.obstacle_grid());
  CHECK(w2.cell_size_m() == w.cell_size_m());
}

TEST_CASE("world header is validated") {
  CHECK_THROWS_AS(world_from_string("cells 0 0 0.1\n"), InvalidInputError);
  CHECK_THROWS_AS(world_from_string("grid 4 4 0.1\n....\n"), InvalidInputError);
}
