#include "panonav/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "panonav/config.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace panonav {

namespace {

int tier_index(Difficulty d) { return static_cast<int>(d); }

LongTermGoal pick_goal(const World& world, const OccupancyMap& map, const Pose& pose,
                       const NavTask& task, const GoalPolicyNet* policy, GoalSource source,
                       const EpisodeConfig& cfg, Rng& rng) {
  if (source == GoalSource::RandomCell || policy == nullptr) {
    return {rng.uniform(), rng.uniform()};
  }
  const PolicyInput input = make_policy_input(
      task.goal_panorama, render_panorama(world, pose, cfg.pano), assemble_channels(map, pose),
      cfg.pano);
  const PolicyOutput out = policy->forward(input);
  if (source == GoalSource::PolicySample) return sample_goal(out.mean, out.variance, rng).goal;
  return {out.mean[0], out.mean[1]};
}

}  // namespace

EpisodeRecord run_episode(const World& world, const NavTask& task, const GoalPolicyNet* policy,
                          const NepmNet* nepm, const EpisodeConfig& cfg, Rng& rng) {
  EpisodeRecord rec;
  rec.task = task;
  OccupancyMap map(world.cells_x(), world.cells_y(), world.cell_size_m());
  Pose pose = task.start_pose;
  rec.poses.push_back(pose);
  Panorama pano = render_panorama(world, pose, cfg.pano);
  integrate_scan(map, pose, pano, cfg.pano);

  Cell goal_cell{0, 0};
  while (rec.steps < cfg.max_steps) {
    if (rec.steps % cfg.k_steps == 0) {
      const LongTermGoal g =
          pick_goal(world, map, pose, task, policy, cfg.goal_source, cfg, rng);
      rec.long_term_goals.push_back(g);
      goal_cell = goal_to_cell(g, world.cells_x(), world.cells_y());
    }
    if (nepm && should_stop(pano, task.goal_panorama, *nepm, cfg.stop_threshold, cfg.pano)) {
      rec.actions.push_back(Action::Stop);
      rec.steps += 1;
      rec.stopped = true;
      rec.poses.push_back(pose);
      break;
    }
    const Action a = replan_step(map, pose, goal_cell, cfg.motion);
    const StepResult sr = step(world, pose, a, cfg.motion);
    if (sr.collided) rec.collisions += 1;
    if (a == Action::MoveForward && !sr.collided)
      rec.path_length_m += std::hypot(sr.pose.x - pose.x, sr.pose.y - pose.y);
    pose = sr.pose;
    rec.actions.push_back(a);
    rec.steps += 1;
    rec.poses.push_back(pose);
    pano = render_panorama(world, pose, cfg.pano);
    integrate_scan(map, pose, pano, cfg.pano);
  }
  rec.success = judge_success(pose, task.goal_pose, rec.stopped, rec.steps);
  return rec;
}

MetricsReport compute_metrics(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw InvalidInputError("no episode records");
  MetricsReport r;
  double spl_sum[4] = {0, 0, 0, 0};
  int succ[4] = {0, 0, 0, 0}, coll[4] = {0, 0, 0, 0}, n[4] = {0, 0, 0, 0};
  for (const EpisodeRecord& rec : records) {
    const int t = tier_index(rec.task.difficulty);
    const double spl_term =
        rec.success
            ? rec.task.shortest_path_m / std::max(rec.task.shortest_path_m, rec.path_length_m)
            : 0.0;
    for (int i : {t, 3}) {
      n[i] += 1;
      succ[i] += rec.success ? 1 : 0;
      coll[i] += rec.collisions > 0 ? 1 : 0;
      spl_sum[i] += spl_term;
    }
  }
  auto fill = [&](int i, double* sr, double* spl, double* cr) {
    *sr = n[i] ? static_cast<double>(succ[i]) / n[i] : 0.0;
    *spl = n[i] ? spl_sum[i] / n[i] : 0.0;
    *cr = n[i] ? static_cast<double>(coll[i]) / n[i] : 0.0;
  };
  for (int t = 0; t < 3; ++t) {
    r.per_tier[t].n = n[t];
    fill(t, &r.per_tier[t].sr, &r.per_tier[t].spl, &r.per_tier[t].cr);
  }
  r.n_episodes = n[3];
  fill(3, &r.sr, &r.spl, &r.cr);
  return r;
}

EpisodeRecord baseline_random_agent(const World& world, const NavTask& task,
                                    const EpisodeConfig& cfg, Rng& rng) {
  EpisodeRecord rec;
  rec.task = task;
  Pose pose = task.start_pose;
  rec.poses.push_back(pose);
  while (rec.steps < cfg.max_steps) {
    const Action a = kAgentActions[rng.uniform_int(4)];
    rec.actions.push_back(a);
    rec.steps += 1;
    if (a == Action::Stop) {
      rec.stopped = true;
      rec.poses.push_back(pose);
      break;
    }
    const StepResult sr = step(world, pose, a, cfg.motion);
    if (sr.collided) rec.collisions += 1;
    if (a == Action::MoveForward && !sr.collided)
      rec.path_length_m += std::hypot(sr.pose.x - pose.x, sr.pose.y - pose.y);
    pose = sr.pose;
    rec.poses.push_back(pose);
  }
  rec.success = judge_success(pose, task.goal_pose, rec.stopped, rec.steps);
  return rec;
}

EpisodeRecord ablation_random_goal(const World& world, const NavTask& task, const NepmNet* nepm,
                                   const EpisodeConfig& cfg, Rng& rng) {
  EpisodeConfig c = cfg;
  c.goal_source = GoalSource::RandomCell;
  return run_episode(world, task, nullptr, nepm, c, rng);
}

TrainGoalResult ablation_sparse_reward(GoalPolicyNet& net, const TrainGoalConfig& cfg, Rng& rng) {
  TrainGoalConfig sparse = cfg;
  sparse.reward.explore_coef = 0.0;
  return train_goal_policy(net, sparse, rng);
}

Trajectory record_trajectory(const World& world, const NavTask& task, const EpisodeConfig& cfg,
                             int n_steps, Rng& rng) {
  Trajectory traj;
  OccupancyMap map(world.cells_x(), world.cells_y(), world.cell_size_m());
  Pose pose = task.start_pose;
  Panorama pano = render_panorama(world, pose, cfg.pano);
  integrate_scan(map, pose, pano, cfg.pano);
  traj.push_back({pose, pano});
  Cell goal_cell{0, 0};
  for (int t = 0; t < n_steps; ++t) {
    if (t % cfg.k_steps == 0)
      goal_cell = goal_to_cell({rng.uniform(), rng.uniform()}, world.cells_x(), world.cells_y());
    const Action a = replan_step(map, pose, goal_cell, cfg.motion);
    pose = step(world, pose, a, cfg.motion).pose;
    pano = render_panorama(world, pose, cfg.pano);
    integrate_scan(map, pose, pano, cfg.pano);
    traj.push_back({pose, pano});
  }
  return traj;
}

EvalConfig eval_config_from(const Config& c) {
  EvalConfig e;
  e.tasks_per_tier = c.get_int("tasks_per_tier", e.tasks_per_tier);
  e.n_eval_worlds = c.get_int("n_eval_worlds", e.n_eval_worlds);
  e.eval_world_seed_base =
      static_cast<uint64_t>(c.get_int("eval_world_seed_base", static_cast<int>(e.eval_world_seed_base)));
  e.train_world_seed_base = static_cast<uint64_t>(c.get_int("world_seed_base", 1));
  e.n_train_worlds = c.get_int("n_train_worlds", e.n_train_worlds);
  e.workers = c.get_int("workers", e.workers);
  e.svg_per_tier = c.get_int("svg_per_tier", e.svg_per_tier);
  e.world.width_m = c.get_double("world_width_m", e.world.width_m);
  e.world.height_m = c.get_double("world_height_m", e.world.height_m);
  e.world.cell_size_m = c.get_double("cell_size_m", e.world.cell_size_m);
  e.world.n_rooms = c.get_int("n_rooms", e.world.n_rooms);
  e.world.n_clutter = c.get_int("n_clutter", e.world.n_clutter);
  e.episode.k_steps = c.get_int("k", e.episode.k_steps);
  e.episode.stop_threshold = c.get_double("stop_threshold", e.episode.stop_threshold);
  e.episode.pano.n_rays = c.get_int("n_rays", e.episode.pano.n_rays);
  e.episode.pano.max_range_m = c.get_double("max_range_m", e.episode.pano.max_range_m);
  e.episode.motion.step_m = c.get_double("step_m", e.episode.motion.step_m);
  e.episode.motion.turn_rad = c.get_double("turn_rad", e.episode.motion.turn_rad);
  const std::string src = c.get_str("goal_source", "policy_mean");
  if (src == "policy_mean") e.episode.goal_source = GoalSource::PolicyMean;
  else if (src == "policy_sample") e.episode.goal_source = GoalSource::PolicySample;
  else if (src == "random") e.episode.goal_source = GoalSource::RandomCell;
  else throw ConfigError("unknown goal_source: " + src);
  return e;
}

EvalResult evaluate(const GoalPolicyNet* policy, const NepmNet* nepm, const EvalConfig& cfg,
                    uint64_t seed, const std::string& out_dir) {
  if (cfg.tasks_per_tier <= 0) throw InvalidInputError("tasks_per_tier must be positive");
  // Held-out worlds: seed ranges must not overlap the training range.
  const uint64_t train_lo = cfg.train_world_seed_base;
  const uint64_t train_hi = cfg.train_world_seed_base + cfg.n_train_worlds;
  const uint64_t eval_lo = cfg.eval_world_seed_base;
  const uint64_t eval_hi = cfg.eval_world_seed_base + cfg.n_eval_worlds;
  if (eval_lo < train_hi && train_lo < eval_hi)
    throw ConfigError("eval world seeds overlap training world seeds");

  std::vector<World> worlds;
  for (int i = 0; i < cfg.n_eval_worlds; ++i)
    worlds.push_back(generate_world(cfg.eval_world_seed_base + i, cfg.world));

  struct Job {
    int world_idx;
    Difficulty tier;
    uint64_t episode_seed;
  };
  std::vector<Job> jobs;
  Rng master(seed);
  const Difficulty tiers[3] = {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard};
  for (Difficulty tier : tiers)
    for (int i = 0; i < cfg.tasks_per_tier; ++i)
      jobs.push_back({i % cfg.n_eval_worlds, tier, master.next_u64()});

  EvalResult result;
  result.records.resize(jobs.size());
#ifdef _OPENMP
  const int nw = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for num_threads(nw) schedule(dynamic)
#endif
  for (size_t j = 0; j < jobs.size(); ++j) {
    const Job& job = jobs[j];
    Rng rng(job.episode_seed);
    const World& world = worlds[job.world_idx];
    const NavTask task = sample_task(world, job.tier, rng, cfg.episode.pano);
    EpisodeRecord rec = run_episode(world, task, policy, nepm, cfg.episode, rng);
    rec.world_seed = cfg.eval_world_seed_base + job.world_idx;
    result.records[j] = std::move(rec);
  }
  result.report = compute_metrics(result.records);

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/trajectories");
    write_metrics_csv(result.report, out_dir + "/metrics.csv");
    write_episodes_jsonl(result.records, out_dir + "/episodes.jsonl");
    int written[3] = {0, 0, 0};
    for (size_t j = 0; j < jobs.size(); ++j) {
      const int t = tier_index(result.records[j].task.difficulty);
      if (written[t] >= cfg.svg_per_tier) continue;
      ++written[t];
      const World& world = worlds[jobs[j].world_idx];
      std::ofstream f(out_dir + "/trajectories/" + difficulty_name(result.records[j].task.difficulty) +
                      "_" + std::to_string(written[t]) + ".svg");
      f << episode_svg(world, result.records[j]);
    }
  }
  return result;
}

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "scope,n,sr,spl,cr\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "overall,%d,%.6f,%.6f,%.6f\n", report.n_episodes, report.sr,
                report.spl, report.cr);
  f << buf;
  const char* names[3] = {"easy", "medium", "hard"};
  for (int t = 0; t < 3; ++t) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f\n", names[t], report.per_tier[t].n,
                  report.per_tier[t].sr, report.per_tier[t].spl, report.per_tier[t].cr);
    f << buf;
  }
}

void write_episodes_jsonl(const std::vector<EpisodeRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const EpisodeRecord& r : records) {
    nlohmann::json j;
    j["tier"] = difficulty_name(r.task.difficulty);
    j["world_seed"] = r.world_seed;
    j["success"] = r.success;
    j["stopped"] = r.stopped;
    j["steps"] = r.steps;
    j["collisions"] = r.collisions;
    j["shortest_path_m"] = r.task.shortest_path_m;
    j["path_length_m"] = r.path_length_m;
    j["start"] = {r.task.start_pose.x, r.task.start_pose.y, r.task.start_pose.heading};
    j["goal"] = {r.task.goal_pose.x, r.task.goal_pose.y};
    std::vector<std::vector<double>> poses;
    for (const Pose& p : r.poses) poses.push_back({p.x, p.y});
    j["poses"] = poses;
    std::vector<std::vector<double>> goals;
    for (const LongTermGoal& g : r.long_term_goals) goals.push_back({g.gx, g.gy});
    j["long_term_goals"] = goals;
    f << j.dump() << "\n";
  }
}

std::string episode_svg(const World& world, const EpisodeRecord& rec) {
  const double scale = 40.0;  // px per meter
  const double Wpx = world.width_m() * scale, Hpx = world.height_m() * scale;
  std::ostringstream os;
  auto py = [&](double y) { return Hpx - y * scale; };  // y up
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Wpx << "\" height=\"" << Hpx
     << "\" viewBox=\"0 0 " << Wpx << " " << Hpx << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double cpx = world.cell_size_m() * scale;
  for (int y = 0; y < world.cells_y(); ++y)
    for (int x = 0; x < world.cells_x(); ++x)
      if (world.obstacle_grid().at(x, y))
        os << "<rect x=\"" << x * cpx << "\" y=\"" << py((y + 1) * world.cell_size_m())
           << "\" width=\"" << cpx << "\" height=\"" << cpx << "\" fill=\"#444\"/>\n";
  if (rec.poses.size() > 1) {
    os << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"2\" points=\"";
    for (const Pose& p : rec.poses) os << p.x * scale << "," << py(p.y) << " ";
    os << "\"/>\n";
  }
  for (const LongTermGoal& g : rec.long_term_goals)
    os << "<circle cx=\"" << g.gx * world.width_m() * scale << "\" cy=\""
       << py(g.gy * world.height_m()) << "\" r=\"5\" fill=\"none\" stroke=\"blue\"/>\n";
  os << "<circle cx=\"" << rec.task.goal_pose.x * scale << "\" cy=\"" << py(rec.task.goal_pose.y)
     << "\" r=\"6\" fill=\"green\"/>\n";
  os << "<circle cx=\"" << rec.task.start_pose.x * scale << "\" cy=\""
     << py(rec.task.start_pose.y) << "\" r=\"4\" fill=\"black\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace panonav
