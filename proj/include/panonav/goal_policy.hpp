#pragma once

#include <array>
#include <string>
#include <vector>

#include "panonav/fmm.hpp"
#include "panonav/mapping.hpp"
#include "panonav/nn.hpp"
#include "panonav/world.hpp"

namespace panonav {

inline constexpr int kMapPatch = 32;  // policy-facing map resolution (G x G)
inline constexpr int kMapChannels = 4;
inline constexpr double kLogVarMin = -5.0;
inline constexpr double kLogVarMax = 1.0;

// Flattened panorama: ranges normalized by max range, then per-ray landmarks.
std::vector<double> panorama_features(const Panorama& pano, const PanoramaConfig& cfg);
inline int panorama_feature_dim(const PanoramaConfig& cfg) {
  return cfg.n_rays * (1 + kLandmarkDim);
}

// Box-average downsample of the four channel planes to kMapPatch^2 each.
std::vector<double> downsample_channels(const ChannelMap& ch);

struct PolicyInput {
  std::vector<double> goal_pano;
  std::vector<double> current_pano;
  std::vector<double> map_channels;  // kMapChannels * kMapPatch * kMapPatch
};

PolicyInput make_policy_input(const Panorama& goal, const Panorama& current,
                              const ChannelMap& map_channels, const PanoramaConfig& cfg);

struct LongTermGoal {
  double gx = 0.5;  // normalized map coordinates in [0,1]^2
  double gy = 0.5;
};

Cell goal_to_cell(const LongTermGoal& g, int cells_x, int cells_y);

struct PolicyOutput {
  std::array<double, 2> mean;  // in [0,1]^2 (sigmoid squashed)
  std::array<double, 2> variance;
  double value = 0.0;
};

// Siamese panorama streams (shared weights), fusion layer, two-strided-conv
// map encoder, dense trunk, Gaussian mean / log-variance / value heads.
class GoalPolicyNet {
 public:
  explicit GoalPolicyNet(int pano_dim);

  void init_weights(Rng& rng);

  struct Cache {
    std::vector<double> s_goal1, s_goal2, s_cur1, s_cur2;
    std::vector<double> fuse_in, fuse_out;
    std::vector<double> conv1, conv2, map_fc;
    std::vector<double> trunk_in, t1, t2;
    std::array<double, 2> mean_logit{}, logvar_raw{};
    const PolicyInput* input = nullptr;
  };

  PolicyOutput forward(const PolicyInput& input, Cache* cache = nullptr) const;
  // d_mean is w.r.t. the squashed mean, d_logvar w.r.t. the clamped
  // log-variance, d_value w.r.t. the value head. Accumulates into grads.
  void backward(const Cache& cache, const std::array<double, 2>& d_mean,
                const std::array<double, 2>& d_logvar, double d_value);

  ParamStore& params() { return ps_; }
  const ParamStore& params() const { return ps_; }
  int pano_dim() const { return pano_dim_; }

 private:
  int pano_dim_;
  DenseLayer stream1_, stream2_;  // shared between goal and current panoramas
  DenseLayer fusion_;
  Conv2dLayer conv1_, conv2_;
  DenseLayer map_fc_;
  DenseLayer trunk1_, trunk2_;
  DenseLayer head_mean_, head_logvar_, head_value_;
  ParamStore ps_;
};

struct GoalSample {
  LongTermGoal goal;      // clamped to [0,1]^2, executed by the controller
  LongTermGoal raw;       // pre-clamp Gaussian draw, used by the PPO ratio
  double log_prob = 0.0;  // pre-clamp density, evaluated at `raw`
  bool clamped = false;
};

GoalSample sample_goal(const std::array<double, 2>& mean, const std::array<double, 2>& variance,
                       Rng& rng);
double gaussian_log_prob(const std::array<double, 2>& mean,
                         const std::array<double, 2>& variance, const LongTermGoal& g);

struct RewardConfig {
  double r_goal = 20.0;
  double r_collide = -5.0;
  double goal_radius_m = 1.0;  // d_g
  double explore_coef = 1.0;   // scales the m^2 increment; 0 = sparse ablation
};

struct RewardBreakdown {
  double r_g = 0.0;
  double r_collide = 0.0;
  double r_explore = 0.0;
  double total() const { return r_g + r_collide + r_explore; }
};

// map_T / map_T_plus_k are snapshots at consecutive policy decisions.
RewardBreakdown compute_reward(const OccupancyMap& map_T, const OccupancyMap& map_T_plus_k,
                               Cell goal_pose_known_cell, Cell predicted_goal_cell,
                               Cell agent_cell, bool first_scale, const RewardConfig& cfg = {});

struct RolloutSample {
  PolicyInput input;
  LongTermGoal goal;      // executed (clamped) goal
  LongTermGoal raw_goal;  // pre-clamp draw; the importance ratio is computed
                          // here so it matches the stored log_prob exactly
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

struct RolloutBuffer {
  int n_envs = 0;
  int horizon = 0;
  std::vector<RolloutSample> samples;   // [env * horizon + t]
  std::vector<double> bootstrap_value;  // per env, value after the last sample
  std::vector<double> returns;
  std::vector<double> advantages;

  RolloutSample& at(int env, int t) { return samples[env * horizon + t]; }
  const RolloutSample& at(int env, int t) const { return samples[env * horizon + t]; }
};

// Discounted returns and GAE; advantages normalized to zero mean / unit
// variance over the update window.
void compute_returns_and_advantages(RolloutBuffer& buffer, double tau, double lambda);

struct PpoConfig {
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int epochs = 4;
  int minibatches = 4;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

PpoStats ppo_update(GoalPolicyNet& net, const RolloutBuffer& buffer, Adam& opt,
                    const PpoConfig& cfg = {});

// Defaults are the desk-scale training recipe: 8 x 8 m worlds with a 3 m
// sensor so exploration does not saturate mid-episode, and a slightly
// raised entropy bonus that keeps the Gaussian head from collapsing early.
struct TrainGoalConfig {
  int n_envs = 8;
  int total_updates = 1200;
  int horizon_scales = 10;
  int k_steps = 10;
  int scales_per_episode = 50;
  double tau = 0.99;
  double gae_lambda = 0.95;
  double lr = 3e-4;
  int n_train_worlds = 8;
  uint64_t world_seed_base = 1;
  int workers = 0;  // 0 = all hardware threads, 1 = strict serial
  WorldGenConfig world{.width_m = 8.0, .height_m = 8.0};
  PanoramaConfig pano{.max_range_m = 3.0};
  MotionConfig motion;
  RewardConfig reward;
  PpoConfig ppo{.entropy_coef = 0.02};
};

TrainGoalConfig train_goal_config_from(const class Config& cfg);

struct UpdateLog {
  int update = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct TrainGoalResult {
  std::vector<UpdateLog> log;
};

// Parallel-episode PPO training loop; every horizon_scales time scales one
// ppo_update over experiences from all environments.
TrainGoalResult train_goal_policy(GoalPolicyNet& net, const TrainGoalConfig& cfg, Rng& rng);

void write_training_log_csv(const std::vector<UpdateLog>& log, const std::string& path);

}  // namespace panonav
