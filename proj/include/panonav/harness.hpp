#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panonav/ending.hpp"
#include "panonav/goal_policy.hpp"

namespace panonav {

struct EpisodeRecord {
  NavTask task;
  std::vector<Pose> poses;
  std::vector<Action> actions;
  int collisions = 0;
  bool stopped = false;
  int steps = 0;
  bool success = false;
  double path_length_m = 0.0;
  std::vector<LongTermGoal> long_term_goals;
  uint64_t world_seed = 0;
};

struct TierMetrics {
  int n = 0;
  double sr = 0.0;
  double spl = 0.0;
  double cr = 0.0;
};

struct MetricsReport {
  double sr = 0.0;
  double spl = 0.0;
  double cr = 0.0;
  int n_episodes = 0;
  TierMetrics per_tier[3];  // Easy, Medium, Hard
};

enum class GoalSource { PolicyMean, PolicySample, RandomCell };

struct EpisodeConfig {
  int k_steps = 10;
  int max_steps = kMaxEpisodeSteps;
  double stop_threshold = 0.5;
  GoalSource goal_source = GoalSource::PolicyMean;
  MotionConfig motion;
  PanoramaConfig pano;
};

// Hierarchical loop: scan integration each step, goal refresh every k steps,
// per-step FMM replanning, per-step NEPM stop check. nepm == nullptr means
// the stop check never fires (forced timeout).
EpisodeRecord run_episode(const World& world, const NavTask& task, const GoalPolicyNet* policy,
                          const NepmNet* nepm, const EpisodeConfig& cfg, Rng& rng);

MetricsReport compute_metrics(const std::vector<EpisodeRecord>& records);

// Uniform actions over the agent-facing set (Stop included).
EpisodeRecord baseline_random_agent(const World& world, const NavTask& task,
                                    const EpisodeConfig& cfg, Rng& rng);

// Ours-RP: long-term goals drawn uniformly over map cells.
EpisodeRecord ablation_random_goal(const World& world, const NavTask& task, const NepmNet* nepm,
                                   const EpisodeConfig& cfg, Rng& rng);

// Ours-SR: goal-policy training with the exploration term forced to zero.
TrainGoalResult ablation_sparse_reward(GoalPolicyNet& net, const TrainGoalConfig& cfg, Rng& rng);

// Scripted random-goal episode logged as (pose, panorama) steps; NEPM data.
Trajectory record_trajectory(const World& world, const NavTask& task, const EpisodeConfig& cfg,
                             int n_steps, Rng& rng);

// Defaults mirror the desk-scale training recipe (8 x 8 m worlds, 3 m
// sensor). The stop threshold sits at 0.9 because the classifier's per-step
// false-positive rate otherwise dominates the episode outcome, and sampled
// goals outperform the mean prediction at the trained policy's sharpness.
struct EvalConfig {
  int tasks_per_tier = 200;
  int n_eval_worlds = 4;
  uint64_t eval_world_seed_base = 10001;
  uint64_t train_world_seed_base = 1;
  int n_train_worlds = 8;
  int workers = 0;  // 0 = all hardware threads, 1 = strict serial
  int svg_per_tier = 2;
  WorldGenConfig world{.width_m = 8.0, .height_m = 8.0};
  EpisodeConfig episode{.stop_threshold = 0.9,
                        .goal_source = GoalSource::PolicySample,
                        .pano = {.max_range_m = 3.0}};
};

EvalConfig eval_config_from(const class Config& cfg);

struct EvalResult {
  MetricsReport report;
  std::vector<EpisodeRecord> records;
};

// Runs tasks_per_tier episodes per tier on held-out worlds (seed ranges
// disjoint from training, asserted) and, when out_dir is set, writes
// metrics.csv, episodes.jsonl and trajectories/*.svg.
EvalResult evaluate(const GoalPolicyNet* policy, const NepmNet* nepm, const EvalConfig& cfg,
                    uint64_t seed, const std::string& out_dir = "");

void write_metrics_csv(const MetricsReport& report, const std::string& path);
void write_episodes_jsonl(const std::vector<EpisodeRecord>& records, const std::string& path);
std::string episode_svg(const World& world, const EpisodeRecord& rec);

}  // namespace panonav
