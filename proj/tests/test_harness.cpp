#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "panonav/config.hpp"
#include "panonav/harness.hpp"

using namespace panonav;

namespace {

EpisodeRecord fixture(Difficulty tier, bool success, double shortest, double path,
                      int collisions = 0) {
  EpisodeRecord r;
  r.task.difficulty = tier;
  r.task.shortest_path_m = shortest;
  r.success = success;
  r.path_length_m = path;
  r.collisions = collisions;
  r.stopped = success;
  r.steps = 100;
  return r;
}

WorldGenConfig small_world() {
  WorldGenConfig wg;
  wg.width_m = 8.0;
  wg.height_m = 8.0;
  return wg;
}

}  // namespace

TEST_CASE("compute_metrics: five hand-computed fixture sets are exact") {
  {  // single success, shortest 4 m over a 5 m walk
    const MetricsReport r = compute_metrics({fixture(Difficulty::Easy, true, 4.0, 5.0)});
    CHECK(r.sr == 1.0);
    CHECK(r.spl == 4.0 / 5.0);
    CHECK(r.cr == 0.0);
    CHECK(r.n_episodes == 1);
  }
  {  // agent path shorter than the planner optimum: SPL term clamps to 1
    const MetricsReport r = compute_metrics({fixture(Difficulty::Easy, true, 4.0, 3.0)});
    CHECK(r.spl == 1.0);
  }
  {  // one success (2.0 / 2.5), one failure
    const MetricsReport r = compute_metrics(
        {fixture(Difficulty::Medium, true, 2.0, 2.5), fixture(Difficulty::Medium, false, 3.0, 9.0)});
    CHECK(r.sr == 0.5);
    CHECK(r.spl == (2.0 / 2.5) / 2.0);
    CHECK(r.per_tier[1].n == 2);
    CHECK(r.per_tier[0].n == 0);
    CHECK(r.per_tier[1].sr == 0.5);
  }
  {  // collision rate counts episodes with any collision
    const MetricsReport r = compute_metrics({fixture(Difficulty::Hard, true, 4.0, 4.0, 0),
                                             fixture(Difficulty::Hard, false, 4.0, 8.0, 3),
                                             fixture(Difficulty::Hard, false, 4.0, 8.0, 1)});
    CHECK(r.cr == 2.0 / 3.0);
    CHECK(r.sr == 1.0 / 3.0);
    CHECK(r.spl == 1.0 / 3.0);
  }
  {  // per-tier split with all failures in one tier
    const MetricsReport r = compute_metrics({fixture(Difficulty::Easy, true, 4.0, 5.0),
                                             fixture(Difficulty::Hard, false, 6.0, 2.0)});
    CHECK(r.per_tier[0].sr == 1.0);
    CHECK(r.per_tier[2].sr == 0.0);
    CHECK(r.per_tier[2].spl == 0.0);
    CHECK(r.sr == 0.5);
    CHECK(r.spl == 0.8 / 2.0);
  }
  CHECK_THROWS_AS(compute_metrics({}), InvalidInputError);
}

TEST_CASE("compute_metrics: SPL never exceeds SR") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EpisodeRecord> recs;
    const int n = 1 + static_cast<int>(rng.uniform_int(20));
    for (int i = 0; i < n; ++i) {
      const auto tier = static_cast<Difficulty>(rng.uniform_int(3));
      recs.push_back(fixture(tier, rng.uniform() < 0.5, rng.uniform(1.0, 8.0),
                             rng.uniform(0.5, 12.0), static_cast<int>(rng.uniform_int(3))));
    }
    const MetricsReport r = compute_metrics(recs);
    CHECK(r.spl <= r.sr + 1e-12);
    for (int t = 0; t < 3; ++t) CHECK(r.per_tier[t].spl <= r.per_tier[t].sr + 1e-12);
  }
}

TEST_CASE("run_episode: without a stop classifier the episode times out") {
  const World world = generate_world(200, small_world());
  Rng rng(3);
  const NavTask task = sample_task(world, Difficulty::Easy, rng);
  EpisodeConfig cfg;
  const EpisodeRecord rec = run_episode(world, task, nullptr, nullptr, cfg, rng);
  CHECK(rec.steps == kMaxEpisodeSteps);
  CHECK(!rec.stopped);
  CHECK(!rec.success);  // success requires an explicit stop
  CHECK(rec.poses.size() == static_cast<size_t>(rec.steps) + 1);
  CHECK(rec.actions.size() == static_cast<size_t>(rec.steps));
  // one long-term goal per k-step block
  CHECK(rec.long_term_goals.size() == static_cast<size_t>((rec.steps + cfg.k_steps - 1) / cfg.k_steps));
}

TEST_CASE("run_episode: success implies stopped, in time and within 1 m") {
  const World world = generate_world(201, small_world());
  EpisodeConfig cfg;
  int episodes = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const NavTask task = sample_task(world, Difficulty::Easy, rng);
    const EpisodeRecord rec = baseline_random_agent(world, task, cfg, rng);
    CHECK(rec.poses.size() == static_cast<size_t>(rec.steps) + 1);
    if (rec.success) {
      CHECK(rec.stopped);
      CHECK(rec.steps < kMaxEpisodeSteps);
      const Pose& last = rec.poses.back();
      CHECK(std::hypot(last.x - task.goal_pose.x, last.y - task.goal_pose.y) <= kSuccessRadiusM);
    }
    ++episodes;
  }
  CHECK(episodes == 20);
}

TEST_CASE("record_trajectory: one logged step per action plus the start") {
  const World world = generate_world(202, small_world());
  Rng rng(4);
  const NavTask task = sample_task(world, Difficulty::Easy, rng);
  EpisodeConfig cfg;
  const Trajectory traj = record_trajectory(world, task, cfg, 40, rng);
  REQUIRE(traj.size() == 41);
  for (const TrajStep& s : traj) {
    CHECK(world.pose_valid(s.pose));
    const Panorama expect = render_panorama(world, s.pose, cfg.pano);
    CHECK(s.pano.ranges == expect.ranges);
  }
}

TEST_CASE("evaluate: parallel and serial workers agree exactly") {
  auto run = [&](int workers) {
    EvalConfig cfg;
    cfg.tasks_per_tier = 4;
    cfg.n_eval_worlds = 2;
    cfg.world = small_world();
    cfg.episode.max_steps = 60;
    cfg.workers = workers;
    return evaluate(nullptr, nullptr, cfg, 99);
  };
  const EvalResult a = run(1);
  const EvalResult b = run(0);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.report.sr == b.report.sr);
  CHECK(a.report.spl == b.report.spl);
  CHECK(a.report.cr == b.report.cr);
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].steps == b.records[i].steps);
    CHECK(a.records[i].path_length_m == b.records[i].path_length_m);
    CHECK(a.records[i].collisions == b.records[i].collisions);
    CHECK(a.records[i].poses.back().x == b.records[i].poses.back().x);
  }
}

TEST_CASE("evaluate: overlapping train/eval world seed ranges are a config error") {
  EvalConfig cfg;
  cfg.tasks_per_tier = 1;
  cfg.eval_world_seed_base = 4;  // collides with train seeds [1, 9)
  cfg.n_eval_worlds = 2;
  cfg.train_world_seed_base = 1;
  cfg.n_train_worlds = 8;
  CHECK_THROWS_AS(evaluate(nullptr, nullptr, cfg, 1), ConfigError);
  CHECK_THROWS_AS([&] {
    EvalConfig c;
    c.tasks_per_tier = 0;
    evaluate(nullptr, nullptr, c, 1);
  }(), InvalidInputError);
}

TEST_CASE("evaluate: repeated runs write byte-identical metrics.csv") {
  EvalConfig cfg;
  cfg.tasks_per_tier = 2;
  cfg.n_eval_worlds = 1;
  cfg.world = small_world();
  cfg.episode.max_steps = 40;
  cfg.workers = 0;
  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
  };
  evaluate(nullptr, nullptr, cfg, 42, "eval_out_a");
  evaluate(nullptr, nullptr, cfg, 42, "eval_out_b");
  const std::string ma = slurp("eval_out_a/metrics.csv");
  const std::string mb = slurp("eval_out_b/metrics.csv");
  REQUIRE(!ma.empty());
  CHECK(ma == mb);
  CHECK(slurp("eval_out_a/episodes.jsonl") == slurp("eval_out_b/episodes.jsonl"));
  CHECK(ma.rfind("scope,n,sr,spl,cr\n", 0) == 0);
  std::filesystem::remove_all("eval_out_a");
  std::filesystem::remove_all("eval_out_b");
}

TEST_CASE("ablation_sparse_reward: identical to training with the explore term zeroed") {
  TrainGoalConfig cfg;
  cfg.n_envs = 2;
  cfg.total_updates = 2;
  cfg.horizon_scales = 2;
  cfg.k_steps = 3;
  cfg.scales_per_episode = 4;
  cfg.n_train_worlds = 2;
  cfg.world = small_world();
  cfg.workers = 1;

  GoalPolicyNet a(panorama_feature_dim(cfg.pano)), b(panorama_feature_dim(cfg.pano));
  Rng wa(13), wb(13);
  a.init_weights(wa);
  b.init_weights(wb);
  Rng ra(14), rb(14);
  const TrainGoalResult res_abl = ablation_sparse_reward(a, cfg, ra);
  TrainGoalConfig manual = cfg;
  manual.reward.explore_coef = 0.0;
  const TrainGoalResult res_man = train_goal_policy(b, manual, rb);
  REQUIRE(res_abl.log.size() == res_man.log.size());
  for (size_t i = 0; i < res_abl.log.size(); ++i) {
    CHECK(res_abl.log[i].mean_reward == res_man.log[i].mean_reward);
    CHECK(res_abl.log[i].policy_loss == res_man.log[i].policy_loss);
  }
  CHECK(a.params().theta_vec() == b.params().theta_vec());
}

TEST_CASE("ablation_random_goal: goals drawn uniformly, no policy involved") {
  const World world = generate_world(203, small_world());
  Rng rng(15);
  const NavTask task = sample_task(world, Difficulty::Easy, rng);
  EpisodeConfig cfg;
  cfg.max_steps = 30;
  cfg.k_steps = 10;
  const EpisodeRecord rec = ablation_random_goal(world, task, nullptr, cfg, rng);
  CHECK(rec.steps == 30);
  CHECK(rec.long_term_goals.size() == 3);
  for (const LongTermGoal& g : rec.long_term_goals) {
    CHECK(g.gx >= 0.0);
    CHECK(g.gx <= 1.0);
    CHECK(g.gy >= 0.0);
    CHECK(g.gy <= 1.0);
  }
}

TEST_CASE("episode_svg: well-formed document with trajectory and markers") {
  const World world = generate_world(204, small_world());
  Rng rng(16);
  const NavTask task = sample_task(world, Difficulty::Easy, rng);
  EpisodeConfig cfg;
  cfg.max_steps = 10;
  const EpisodeRecord rec = run_episode(world, task, nullptr, nullptr, cfg, rng);
  const std::string svg = episode_svg(world, rec);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("eval_config_from: goal source parsing") {
  Config c;
  c.set("goal_source", "policy_sample");
  CHECK(eval_config_from(c).episode.goal_source == GoalSource::PolicySample);
  c.set("goal_source", "random");
  CHECK(eval_config_from(c).episode.goal_source == GoalSource::RandomCell);
  c.set("goal_source", "bogus");
  CHECK_THROWS_AS(eval_config_from(c), ConfigError);
  Config d;
  d.set("tasks_per_tier", "7");
  CHECK(eval_config_from(d).tasks_per_tier == 7);
  CHECK(eval_config_from(d).episode.goal_source == GoalSource::PolicyMean);
}
