#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "panonav/config.hpp"
#include "panonav/harness.hpp"

namespace fs = std::filesystem;
using namespace panonav;

namespace {

struct CommonArgs {
  std::string config_path;
  int seed = 0;
  std::string out_dir = "run";
};

Config load_config(const CommonArgs& args) {
  return args.config_path.empty() ? Config{} : Config::load(args.config_path);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--seed", args.seed, "RNG seed");
  cmd->add_option("--out", args.out_dir, "output/run directory");
}

int cmd_train_goal(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const TrainGoalConfig tc = train_goal_config_from(cfg);
  Rng rng(static_cast<uint64_t>(args.seed));
  GoalPolicyNet net(panorama_feature_dim(tc.pano));
  net.init_weights(rng);
  const TrainGoalResult res = train_goal_policy(net, tc, rng);
  fs::create_directories(args.out_dir + "/checkpoints");
  save_checkpoint(net.params(), "goal_policy", args.out_dir + "/checkpoints/goal_policy.ckpt");
  write_training_log_csv(res.log, args.out_dir + "/training_log.csv");
  if (!res.log.empty())
    std::printf("train-goal done: %zu updates, first reward %.3f, last reward %.3f\n",
                res.log.size(), res.log.front().mean_reward, res.log.back().mean_reward);
  return 0;
}

int cmd_train_ending(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const TrainGoalConfig tc = train_goal_config_from(cfg);
  TrainNepmConfig nc;
  nc.pano = tc.pano;
  // Desk-scale defaults sized so the held-out pair accuracy clears 0.90;
  // the library default in TrainNepmConfig stays small for fast unit tests.
  nc.iterations = cfg.get_int("nepm_iterations", 16000);
  nc.lr = cfg.get_double("nepm_lr", nc.lr);
  const int trajs_per_world = cfg.get_int("nepm_trajs_per_world", 8);
  const int traj_steps = cfg.get_int("nepm_traj_steps", 300);
  const int n_pairs = cfg.get_int("nepm_pairs", 32000);

  Rng rng(static_cast<uint64_t>(args.seed));
  EpisodeConfig ec;
  ec.pano = tc.pano;
  ec.motion = tc.motion;
  ec.k_steps = tc.k_steps;

  std::vector<Trajectory> trajs;
  for (int w = 0; w < tc.n_train_worlds; ++w) {
    const World world = generate_world(tc.world_seed_base + w, tc.world);
    for (int t = 0; t < trajs_per_world; ++t) {
      const NavTask task = sample_task(world, Difficulty::Medium, rng, tc.pano);
      trajs.push_back(record_trajectory(world, task, ec, traj_steps, rng));
    }
  }
  std::vector<ObservationPair> pairs = sample_pairs(trajs, n_pairs, rng);
  fs::create_directories(args.out_dir + "/checkpoints");
  save_pairs_jsonl(pairs, args.out_dir + "/pairs.jsonl");
  NepmNet net(panorama_feature_dim(tc.pano));
  net.init_weights(rng);
  const NepmReport report = train_nepm(pairs, net, nc, rng);
  save_checkpoint(net.params(), "nepm", args.out_dir + "/checkpoints/nepm.ckpt");
  std::printf("train-ending done: holdout accuracy %.3f precision %.3f recall %.3f (n=%d)\n",
              report.accuracy, report.precision, report.recall, report.holdout_size);
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const EvalConfig ec = eval_config_from(cfg);
  const TrainGoalConfig tc = train_goal_config_from(cfg);

  const std::string goal_ckpt =
      cfg.get_str("goal_checkpoint", args.out_dir + "/checkpoints/goal_policy.ckpt");
  const std::string nepm_ckpt =
      cfg.get_str("nepm_checkpoint", args.out_dir + "/checkpoints/nepm.ckpt");
  if (!fs::exists(goal_ckpt) && ec.episode.goal_source != GoalSource::RandomCell)
    throw ConfigError("missing goal policy checkpoint: " + goal_ckpt);
  if (!fs::exists(nepm_ckpt)) throw ConfigError("missing NEPM checkpoint: " + nepm_ckpt);

  GoalPolicyNet policy(panorama_feature_dim(tc.pano));
  const bool use_policy = ec.episode.goal_source != GoalSource::RandomCell;
  if (use_policy) load_checkpoint(policy.params(), "goal_policy", goal_ckpt);
  NepmNet nepm(panorama_feature_dim(tc.pano));
  load_checkpoint(nepm.params(), "nepm", nepm_ckpt);

  const EvalResult res = evaluate(use_policy ? &policy : nullptr, &nepm, ec,
                                  static_cast<uint64_t>(args.seed), args.out_dir);
  std::printf("eval done: n=%d SR=%.3f SPL=%.3f CR=%.3f\n", res.report.n_episodes, res.report.sr,
              res.report.spl, res.report.cr);
  for (int t = 0; t < 3; ++t)
    std::printf("  %-6s n=%d SR=%.3f SPL=%.3f CR=%.3f\n",
                difficulty_name(static_cast<Difficulty>(t)), res.report.per_tier[t].n,
                res.report.per_tier[t].sr, res.report.per_tier[t].spl, res.report.per_tier[t].cr);
  return 0;
}

int cmd_plan(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::string world_file = cfg.get_str("world_file", "");
  if (world_file.empty()) throw ConfigError("plan requires world_file in the config");
  const World world = load_world(world_file);
  const Pose start{cfg.get_double("start_x", 0), cfg.get_double("start_y", 0), 0};
  const Pose goal{cfg.get_double("goal_x", 0), cfg.get_double("goal_y", 0), 0};
  if (!world.pose_valid(start) || !world.pose_valid(goal))
    throw InvalidInputError("start or goal pose inside an obstacle");

  const DistanceField field =
      solve_eikonal(world.obstacle_grid(), world.cell_of(goal), world.cell_size_m());
  const std::vector<Cell> path = extract_path(field, world.cell_of(start));

  fs::create_directories(args.out_dir);
  double max_finite = 0.0;
  for (size_t i = 0; i < field.value.size(); ++i)
    if (field.value[i] != kInfDist) max_finite = std::max(max_finite, field.value[i]);
  Grid<double> norm(field.value.width(), field.value.height(), 1.0);
  for (size_t i = 0; i < field.value.size(); ++i)
    if (field.value[i] != kInfDist && max_finite > 0) norm[i] = field.value[i] / max_finite;
  save_plane_pgm(norm, args.out_dir + "/distance_field.pgm");

  std::ofstream pf(args.out_dir + "/path.jsonl", std::ios::binary);
  for (const Cell& c : path) {
    nlohmann::json j;
    j["x"] = c.x;
    j["y"] = c.y;
    j["index"] = field.value.index_of(c);
    pf << j.dump() << "\n";
  }
  std::printf("plan done: %zu path cells, geodesic %.3f m\n", path.size(),
              field.value.at(world.cell_of(start)));
  return 0;
}

int cmd_viz(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const EvalConfig ec = eval_config_from(cfg);
  const std::string episodes_file = cfg.get_str("episodes_file", args.out_dir + "/episodes.jsonl");
  std::ifstream f(episodes_file);
  if (!f) throw ConfigError("cannot read episodes file: " + episodes_file);
  fs::create_directories(args.out_dir + "/trajectories");
  std::string line;
  int idx = 0, written = 0;
  const int limit = cfg.get_int("viz_limit", 20);
  while (std::getline(f, line) && written < limit) {
    ++idx;
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const World world = generate_world(j.at("world_seed").get<uint64_t>(), ec.world);
    EpisodeRecord rec;
    rec.task.start_pose = {j.at("start")[0], j.at("start")[1], 0};
    rec.task.goal_pose = {j.at("goal")[0], j.at("goal")[1], 0};
    for (const auto& p : j.at("poses")) rec.poses.push_back({p[0], p[1], 0});
    for (const auto& g : j.at("long_term_goals"))
      rec.long_term_goals.push_back({g[0], g[1]});
    std::ofstream out(args.out_dir + "/trajectories/episode_" + std::to_string(idx) + ".svg");
    out << episode_svg(world, rec);
    ++written;
  }
  std::printf("viz done: %d trajectory files\n", written);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical image-goal navigation toolkit"};
  app.require_subcommand(1);
  CommonArgs args;
  int rc = 0;
  auto bind = [&](const char* name, const char* desc, int (*fn)(const CommonArgs&)) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    add_common(cmd, args);
    cmd->callback([&rc, fn, &args]() { rc = fn(args); });
  };
  bind("train-goal", "train the long-term goal prediction policy", cmd_train_goal);
  bind("train-ending", "train the navigation ending classifier", cmd_train_ending);
  bind("eval", "run tiered evaluation and write metrics/episodes/SVGs", cmd_eval);
  bind("plan", "solve a distance field and extract a path on a world file", cmd_plan);
  bind("viz", "render trajectory SVGs from an episodes file", cmd_viz);

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 2;
  } catch (const InvalidInputError& e) {
    std::fprintf(stderr, "error: invalid-input: %s\n", e.what());
    return 3;
  } catch (const NumericalFailureError& e) {
    std::fprintf(stderr, "error: numerical-failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: runtime: %s\n", e.what());
    return 1;
  }
  return rc;
}
