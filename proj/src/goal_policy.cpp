#include "panonav/goal_policy.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <fstream>
#include <numeric>

#include "panonav/config.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace panonav {

std::vector<double> panorama_features(const Panorama& pano, const PanoramaConfig& cfg) {
  std::vector<double> v;
  v.reserve(panorama_feature_dim(cfg));
  for (double r : pano.ranges) v.push_back(r / cfg.max_range_m);
  for (const auto& lm : pano.landmark_hits)
    for (double f : lm) v.push_back(f);
  return v;
}

std::vector<double> downsample_channels(const ChannelMap& ch) {
  const Grid<double>* planes[kMapChannels] = {&ch.obstacle, &ch.explored, &ch.current_location,
                                              &ch.past_locations};
  const int W = ch.obstacle.width(), H = ch.obstacle.height(), G = kMapPatch;
  std::vector<double> out(static_cast<size_t>(kMapChannels) * G * G, 0.0);
  for (int c = 0; c < kMapChannels; ++c) {
    const Grid<double>& p = *planes[c];
    for (int gy = 0; gy < G; ++gy) {
      const int y0 = gy * H / G, y1 = std::max(y0 + 1, (gy + 1) * H / G);
      for (int gx = 0; gx < G; ++gx) {
        const int x0 = gx * W / G, x1 = std::max(x0 + 1, (gx + 1) * W / G);
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += p.at(x, y);
        out[(c * G + gy) * G + gx] = acc / ((y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

PolicyInput make_policy_input(const Panorama& goal, const Panorama& current,
                              const ChannelMap& map_channels, const PanoramaConfig& cfg) {
  return {panorama_features(goal, cfg), panorama_features(current, cfg),
          downsample_channels(map_channels)};
}

Cell goal_to_cell(const LongTermGoal& g, int cells_x, int cells_y) {
  const int cx = std::clamp(static_cast<int>(std::floor(g.gx * cells_x)), 0, cells_x - 1);
  const int cy = std::clamp(static_cast<int>(std::floor(g.gy * cells_y)), 0, cells_y - 1);
  return {cx, cy};
}

GoalPolicyNet::GoalPolicyNet(int pano_dim) : pano_dim_(pano_dim) {
  stream1_.init(ps_, pano_dim, 64);
  stream2_.init(ps_, 64, 64);
  fusion_.init(ps_, 128, 64);
  conv1_.init(ps_, kMapChannels, 8, kMapPatch, kMapPatch, 2);
  conv2_.init(ps_, 8, 16, conv1_.out_h(), conv1_.out_w(), 2);
  map_fc_.init(ps_, conv2_.out_size(), 64);
  trunk1_.init(ps_, 128, 64);
  trunk2_.init(ps_, 64, 64);
  head_mean_.init(ps_, 64, 2);
  head_logvar_.init(ps_, 64, 2);
  head_value_.init(ps_, 64, 1);
}

void GoalPolicyNet::init_weights(Rng& rng) {
  stream1_.init_weights(ps_, rng);
  stream2_.init_weights(ps_, rng);
  fusion_.init_weights(ps_, rng);
  conv1_.init_weights(ps_, rng);
  conv2_.init_weights(ps_, rng);
  map_fc_.init_weights(ps_, rng);
  trunk1_.init_weights(ps_, rng);
  trunk2_.init_weights(ps_, rng);
  head_mean_.init_weights(ps_, rng);
  head_logvar_.init_weights(ps_, rng);
  head_value_.init_weights(ps_, rng);
  // broad initial exploration: log-variance bias around -2
  ps_.theta(head_logvar_.b_off)[0] = -2.0;
  ps_.theta(head_logvar_.b_off)[1] = -2.0;
}

PolicyOutput GoalPolicyNet::forward(const PolicyInput& input, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c.input = &input;
  auto run_stream = [&](const std::vector<double>& x, std::vector<double>& h1,
                        std::vector<double>& h2) {
    h1.resize(64);
    h2.resize(64);
    stream1_.forward(ps_, x.data(), h1.data());
    relu_inplace(h1.data(), 64);
    stream2_.forward(ps_, h1.data(), h2.data());
    relu_inplace(h2.data(), 64);
  };
  run_stream(input.goal_pano, c.s_goal1, c.s_goal2);
  run_stream(input.current_pano, c.s_cur1, c.s_cur2);

  c.fuse_in.resize(128);
  std::copy(c.s_cur2.begin(), c.s_cur2.end(), c.fuse_in.begin());
  std::copy(c.s_goal2.begin(), c.s_goal2.end(), c.fuse_in.begin() + 64);
  c.fuse_out.resize(64);
  fusion_.forward(ps_, c.fuse_in.data(), c.fuse_out.data());
  relu_inplace(c.fuse_out.data(), 64);

  c.conv1.resize(conv1_.out_size());
  conv1_.forward(ps_, input.map_channels.data(), c.conv1.data());
  relu_inplace(c.conv1.data(), conv1_.out_size());
  c.conv2.resize(conv2_.out_size());
  conv2_.forward(ps_, c.conv1.data(), c.conv2.data());
  relu_inplace(c.conv2.data(), conv2_.out_size());
  c.map_fc.resize(64);
  map_fc_.forward(ps_, c.conv2.data(), c.map_fc.data());
  relu_inplace(c.map_fc.data(), 64);

  c.trunk_in.resize(128);
  std::copy(c.fuse_out.begin(), c.fuse_out.end(), c.trunk_in.begin());
  std::copy(c.map_fc.begin(), c.map_fc.end(), c.trunk_in.begin() + 64);
  c.t1.resize(64);
  trunk1_.forward(ps_, c.trunk_in.data(), c.t1.data());
  relu_inplace(c.t1.data(), 64);
  c.t2.resize(64);
  trunk2_.forward(ps_, c.t1.data(), c.t2.data());
  relu_inplace(c.t2.data(), 64);

  double mean_logit[2], logvar[2], value;
  head_mean_.forward(ps_, c.t2.data(), mean_logit);
  head_logvar_.forward(ps_, c.t2.data(), logvar);
  head_value_.forward(ps_, c.t2.data(), &value);
  c.mean_logit = {mean_logit[0], mean_logit[1]};
  c.logvar_raw = {logvar[0], logvar[1]};

  PolicyOutput out;
  for (int i = 0; i < 2; ++i) {
    out.mean[i] = sigmoid(mean_logit[i]);
    out.variance[i] = std::exp(std::clamp(logvar[i], kLogVarMin, kLogVarMax));
  }
  out.value = value;
  check_finite(out.mean.data(), 2, "policy mean");
  check_finite(out.variance.data(), 2, "policy variance");
  check_finite(&out.value, 1, "policy value");
  return out;
}

void GoalPolicyNet::backward(const Cache& c, const std::array<double, 2>& d_mean,
                             const std::array<double, 2>& d_logvar, double d_value) {
  double d_mean_logit[2], d_logvar_raw[2];
  for (int i = 0; i < 2; ++i) {
    const double m = sigmoid(c.mean_logit[i]);
    d_mean_logit[i] = d_mean[i] * m * (1.0 - m);
    // Clamp gradient: saturated values still accept the component that points
    // back into range, so saturation is never an absorbing state.
    if (c.logvar_raw[i] <= kLogVarMin)
      d_logvar_raw[i] = std::min(d_logvar[i], 0.0);
    else if (c.logvar_raw[i] >= kLogVarMax)
      d_logvar_raw[i] = std::max(d_logvar[i], 0.0);
    else
      d_logvar_raw[i] = d_logvar[i];
  }
  std::vector<double> d_t2(64, 0.0), tmp(64);
  head_mean_.backward(ps_, c.t2.data(), d_mean_logit, tmp.data());
  for (int i = 0; i < 64; ++i) d_t2[i] += tmp[i];
  head_logvar_.backward(ps_, c.t2.data(), d_logvar_raw, tmp.data());
  for (int i = 0; i < 64; ++i) d_t2[i] += tmp[i];
  head_value_.backward(ps_, c.t2.data(), &d_value, tmp.data());
  for (int i = 0; i < 64; ++i) d_t2[i] += tmp[i];

  relu_backward_inplace(d_t2.data(), c.t2.data(), 64);
  std::vector<double> d_t1(64);
  trunk2_.backward(ps_, c.t1.data(), d_t2.data(), d_t1.data());
  relu_backward_inplace(d_t1.data(), c.t1.data(), 64);
  std::vector<double> d_trunk_in(128);
  trunk1_.backward(ps_, c.trunk_in.data(), d_t1.data(), d_trunk_in.data());

  std::vector<double> d_fuse_out(d_trunk_in.begin(), d_trunk_in.begin() + 64);
  std::vector<double> d_map_fc(d_trunk_in.begin() + 64, d_trunk_in.end());

  relu_backward_inplace(d_map_fc.data(), c.map_fc.data(), 64);
  std::vector<double> d_conv2(conv2_.out_size());
  map_fc_.backward(ps_, c.conv2.data(), d_map_fc.data(), d_conv2.data());
  relu_backward_inplace(d_conv2.data(), c.conv2.data(), conv2_.out_size());
  std::vector<double> d_conv1(conv1_.out_size());
  conv2_.backward(ps_, c.conv1.data(), d_conv2.data(), d_conv1.data());
  relu_backward_inplace(d_conv1.data(), c.conv1.data(), conv1_.out_size());
  conv1_.backward(ps_, c.input->map_channels.data(), d_conv1.data(), nullptr);

  relu_backward_inplace(d_fuse_out.data(), c.fuse_out.data(), 64);
  std::vector<double> d_fuse_in(128);
  fusion_.backward(ps_, c.fuse_in.data(), d_fuse_out.data(), d_fuse_in.data());

  auto stream_backward = [&](const std::vector<double>& x, const std::vector<double>& h1,
                             const std::vector<double>& h2, const double* d_h2) {
    std::vector<double> d2(d_h2, d_h2 + 64);
    relu_backward_inplace(d2.data(), h2.data(), 64);
    std::vector<double> d1(64);
    stream2_.backward(ps_, h1.data(), d2.data(), d1.data());
    relu_backward_inplace(d1.data(), h1.data(), 64);
    stream1_.backward(ps_, x.data(), d1.data(), nullptr);
  };
  stream_backward(c.input->current_pano, c.s_cur1, c.s_cur2, d_fuse_in.data());
  stream_backward(c.input->goal_pano, c.s_goal1, c.s_goal2, d_fuse_in.data() + 64);
}

GoalSample sample_goal(const std::array<double, 2>& mean, const std::array<double, 2>& variance,
                       Rng& rng) {
  GoalSample s;
  double raw[2];
  for (int i = 0; i < 2; ++i) raw[i] = mean[i] + std::sqrt(variance[i]) * rng.gaussian();
  s.raw = {raw[0], raw[1]};
  s.log_prob = gaussian_log_prob(mean, variance, s.raw);
  s.goal.gx = std::clamp(raw[0], 0.0, 1.0);
  s.goal.gy = std::clamp(raw[1], 0.0, 1.0);
  s.clamped = s.goal.gx != raw[0] || s.goal.gy != raw[1];
  return s;
}

double gaussian_log_prob(const std::array<double, 2>& mean,
                         const std::array<double, 2>& variance, const LongTermGoal& g) {
  const double d0 = g.gx - mean[0], d1 = g.gy - mean[1];
  double lp = 0.0;
  lp += -0.5 * (std::log(2.0 * M_PI * variance[0]) + d0 * d0 / variance[0]);
  lp += -0.5 * (std::log(2.0 * M_PI * variance[1]) + d1 * d1 / variance[1]);
  return lp;
}

RewardBreakdown compute_reward(const OccupancyMap& map_T, const OccupancyMap& map_T_plus_k,
                               Cell goal_pose_known_cell, Cell predicted_goal_cell,
                               Cell agent_cell, bool first_scale, const RewardConfig& cfg) {
  for (size_t i = 0; i < map_T.explored.size(); ++i)
    if (map_T.explored[i] && !map_T_plus_k.explored[i])
      throw InternalInconsistencyError("explored sets not nested across time scales");

  RewardBreakdown r;
  const double h = map_T.cell_size_m;
  const double dx = (predicted_goal_cell.x - goal_pose_known_cell.x) * h;
  const double dy = (predicted_goal_cell.y - goal_pose_known_cell.y) * h;
  if (std::hypot(dx, dy) <= cfg.goal_radius_m) r.r_g = cfg.r_goal;
  if (!is_known_reachable(map_T, predicted_goal_cell, agent_cell)) r.r_collide = cfg.r_collide;

  if (!first_scale) {
    const double exp_T = explored_area(map_T);
    const double exp_Tk = explored_area(map_T_plus_k);
    const bool goal_explored =
        map_T.explored.in_bounds(goal_pose_known_cell) && map_T.explored.at(goal_pose_known_cell);
    const double delta = goal_explored ? (exp_T - exp_Tk) : (exp_Tk - exp_T);
    r.r_explore = cfg.explore_coef * delta;
  }
  return r;
}

void compute_returns_and_advantages(RolloutBuffer& buffer, double tau, double lambda) {
  const int n = buffer.n_envs * buffer.horizon;
  buffer.returns.assign(n, 0.0);
  buffer.advantages.assign(n, 0.0);
  for (int e = 0; e < buffer.n_envs; ++e) {
    double next_value = buffer.bootstrap_value[e];
    double next_adv = 0.0;
    for (int t = buffer.horizon - 1; t >= 0; --t) {
      const RolloutSample& s = buffer.at(e, t);
      const double not_done = s.done ? 0.0 : 1.0;
      const double delta = s.reward + tau * next_value * not_done - s.value;
      const double adv = delta + tau * lambda * not_done * next_adv;
      buffer.advantages[e * buffer.horizon + t] = adv;
      buffer.returns[e * buffer.horizon + t] = adv + s.value;
      next_value = s.value;
      next_adv = adv;
    }
  }
  double mean = 0.0;
  for (double a : buffer.advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : buffer.advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n) + 1e-8;
  for (double& a : buffer.advantages) a = (a - mean) / sd;
}

PpoStats ppo_update(GoalPolicyNet& net, const RolloutBuffer& buffer, Adam& opt,
                    const PpoConfig& cfg) {
  const int n = static_cast<int>(buffer.samples.size());
  PpoStats stats;
  int stat_count = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      std::vector<int> idx;
      for (int i = mb; i < n; i += cfg.minibatches) idx.push_back(i);
      if (idx.empty()) continue;
      net.params().zero_grad();
      double mb_policy = 0.0, mb_value = 0.0, mb_entropy = 0.0;
      const double inv = 1.0 / idx.size();
      for (int i : idx) {
        const RolloutSample& s = buffer.samples[i];
        GoalPolicyNet::Cache cache;
        const PolicyOutput out = net.forward(s.input, &cache);
        const double lp = gaussian_log_prob(out.mean, out.variance, s.raw_goal);
        const double ratio = std::exp(lp - s.log_prob);
        const double adv = buffer.advantages[i];
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const double surr_un = ratio * adv;
        const double surr_cl = clipped * adv;
        const bool pass_grad = surr_un <= surr_cl + 1e-12;  // unclipped branch active
        const double verr = out.value - buffer.returns[i];
        double entropy = 0.0;
        for (int d = 0; d < 2; ++d)
          entropy += 0.5 * (std::log(2.0 * M_PI * out.variance[d]) + 1.0);

        mb_policy += -std::min(surr_un, surr_cl);
        mb_value += verr * verr;
        mb_entropy += entropy;

        std::array<double, 2> d_mean{}, d_logvar{};
        if (pass_grad) {
          // d/dtheta of -ratio*adv through the Gaussian log-density
          const double coef = -ratio * adv * inv;
          const double diffs[2] = {s.raw_goal.gx - out.mean[0], s.raw_goal.gy - out.mean[1]};
          for (int d = 0; d < 2; ++d) {
            d_mean[d] = coef * diffs[d] / out.variance[d];
            d_logvar[d] = coef * (-0.5 + diffs[d] * diffs[d] / (2.0 * out.variance[d]));
          }
        }
        for (int d = 0; d < 2; ++d) d_logvar[d] += -cfg.entropy_coef * 0.5 * inv;
        const double d_value = cfg.value_coef * verr * inv;
        net.backward(cache, d_mean, d_logvar, d_value);
      }
      const double loss = (mb_policy + cfg.value_coef * 0.5 * mb_value -
                           cfg.entropy_coef * mb_entropy) * inv;
      if (!std::isfinite(loss)) throw NumericalFailureError("non-finite PPO loss");
      opt.step(net.params());
      stats.policy_loss += mb_policy * inv;
      stats.value_loss += mb_value * inv;
      stats.entropy += mb_entropy * inv;
      ++stat_count;
    }
  }
  if (stat_count > 0) {
    stats.policy_loss /= stat_count;
    stats.value_loss /= stat_count;
    stats.entropy /= stat_count;
  }
  return stats;
}

namespace {

struct EnvState {
  World world{1, 1, 0.1};
  NavTask task;
  OccupancyMap map;
  Pose pose;
  Rng rng{0};
  int scale_count = 0;
  long episode_index = -1;
  bool needs_reset = true;
  PolicyInput pending_input;  // input for the next decision, built after rollout

  void reset(const TrainGoalConfig& cfg, int env_id, long episode_counter) {
    const long global_ep = episode_counter;
    const uint64_t wseed = cfg.world_seed_base + static_cast<uint64_t>(global_ep) % cfg.n_train_worlds;
    world = generate_world(wseed, cfg.world);
    const Difficulty tiers[3] = {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard};
    task = sample_task(world, tiers[global_ep % 3], rng, cfg.pano);
    map = OccupancyMap(world.cells_x(), world.cells_y(), world.cell_size_m());
    pose = task.start_pose;
    integrate_scan(map, pose, render_panorama(world, pose, cfg.pano), cfg.pano);
    scale_count = 0;
    needs_reset = false;
    (void)env_id;
  }

  PolicyInput build_input(const TrainGoalConfig& cfg) const {
    return make_policy_input(task.goal_panorama, render_panorama(world, pose, cfg.pano),
                             assemble_channels(map, pose), cfg.pano);
  }
};

int resolve_workers(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

}  // namespace

TrainGoalResult train_goal_policy(GoalPolicyNet& net, const TrainGoalConfig& cfg, Rng& rng) {
  TrainGoalResult result;
  std::vector<EnvState> envs(cfg.n_envs);
  std::vector<long> episode_counters(cfg.n_envs);
  long next_episode = 0;
  for (int e = 0; e < cfg.n_envs; ++e) {
    envs[e].rng = rng.split(e);
    episode_counters[e] = next_episode++;
  }

  Adam opt(AdamConfig{cfg.lr, 0.9, 0.999, 1e-6});
  const int nw = resolve_workers(cfg.workers);

  // Best-iterate selection: PPO on this reward can peak mid-run and then
  // degrade, so keep the parameters whose rollouts scored the highest
  // smoothed reward and restore them at the end.
  double reward_ema = 0.0;
  double best_ema = -std::numeric_limits<double>::infinity();
  std::vector<double> best_theta;
  const int warmup = cfg.total_updates / 10;

  for (int update = 0; update < cfg.total_updates; ++update) {
    RolloutBuffer buffer;
    buffer.n_envs = cfg.n_envs;
    buffer.horizon = cfg.horizon_scales;
    buffer.samples.resize(static_cast<size_t>(cfg.n_envs) * cfg.horizon_scales);
    buffer.bootstrap_value.assign(cfg.n_envs, 0.0);

    for (int t = 0; t < cfg.horizon_scales; ++t) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(nw) schedule(dynamic)
#endif
      for (int e = 0; e < cfg.n_envs; ++e) {
        EnvState& env = envs[e];
        if (env.needs_reset) env.reset(cfg, e, episode_counters[e]);
        RolloutSample& s = buffer.at(e, t);
        s.input = env.build_input(cfg);
        const PolicyOutput out = net.forward(s.input);
        const GoalSample gs = sample_goal(out.mean, out.variance, env.rng);
        s.goal = gs.goal;
        s.raw_goal = gs.raw;
        s.log_prob = gs.log_prob;
        s.value = out.value;

        const OccupancyMap map_before = env.map;
        const Cell agent_cell = env.world.cell_of(env.pose);
        const Cell goal_cell = goal_to_cell(s.goal, env.world.cells_x(), env.world.cells_y());
        const bool first_scale = env.scale_count == 0;

        for (int step_i = 0; step_i < cfg.k_steps; ++step_i) {
          const Action a = replan_step(env.map, env.pose, goal_cell, cfg.motion);
          const StepResult sr = step(env.world, env.pose, a, cfg.motion);
          env.pose = sr.pose;
          integrate_scan(env.map, env.pose, render_panorama(env.world, env.pose, cfg.pano),
                         cfg.pano);
        }

        const Cell true_goal_cell = env.world.cell_of(env.task.goal_pose);
        s.reward = compute_reward(map_before, env.map, true_goal_cell, goal_cell, agent_cell,
                                  first_scale, cfg.reward)
                       .total();
        env.scale_count += 1;
        s.done = env.scale_count >= cfg.scales_per_episode;
        if (s.done) env.needs_reset = true;
      }
      // serial episode-counter assignment keeps world cycling order fixed
      for (int e = 0; e < cfg.n_envs; ++e)
        if (envs[e].needs_reset) episode_counters[e] = next_episode++;
    }

#ifdef _OPENMP
#pragma omp parallel for num_threads(nw) schedule(dynamic)
#endif
    for (int e = 0; e < cfg.n_envs; ++e) {
      if (buffer.at(e, cfg.horizon_scales - 1).done) {
        buffer.bootstrap_value[e] = 0.0;
      } else {
        const PolicyInput next = envs[e].build_input(cfg);
        buffer.bootstrap_value[e] = net.forward(next).value;
      }
    }

    compute_returns_and_advantages(buffer, cfg.tau, cfg.gae_lambda);

    double mean_reward = 0.0;
    for (const RolloutSample& s : buffer.samples) mean_reward += s.reward;
    mean_reward /= buffer.samples.size();

    reward_ema = update == 0 ? mean_reward : 0.9 * reward_ema + 0.1 * mean_reward;
    if (update >= warmup && reward_ema > best_ema) {
      best_ema = reward_ema;
      best_theta = net.params().theta_vec();
    }

    const PpoStats stats = ppo_update(net, buffer, opt, cfg.ppo);

    result.log.push_back({update, mean_reward, stats.policy_loss, stats.value_loss,
                          stats.entropy});
  }
  if (!best_theta.empty()) net.params().theta_vec() = best_theta;
  return result;
}

TrainGoalConfig train_goal_config_from(const Config& c) {
  TrainGoalConfig t;
  t.n_envs = c.get_int("n_envs", t.n_envs);
  t.total_updates = c.get_int("total_updates", t.total_updates);
  t.horizon_scales = c.get_int("horizon_scales", t.horizon_scales);
  t.k_steps = c.get_int("k", t.k_steps);
  t.scales_per_episode = c.get_int("scales_per_episode", t.scales_per_episode);
  t.tau = c.get_double("tau", t.tau);
  t.gae_lambda = c.get_double("gae_lambda", t.gae_lambda);
  t.lr = c.get_double("lr", t.lr);
  t.n_train_worlds = c.get_int("n_train_worlds", t.n_train_worlds);
  t.world_seed_base = static_cast<uint64_t>(c.get_int("world_seed_base", 1));
  t.workers = c.get_int("workers", t.workers);
  t.world.width_m = c.get_double("world_width_m", t.world.width_m);
  t.world.height_m = c.get_double("world_height_m", t.world.height_m);
  t.world.cell_size_m = c.get_double("cell_size_m", t.world.cell_size_m);
  t.world.n_rooms = c.get_int("n_rooms", t.world.n_rooms);
  t.world.n_clutter = c.get_int("n_clutter", t.world.n_clutter);
  t.pano.n_rays = c.get_int("n_rays", t.pano.n_rays);
  t.pano.max_range_m = c.get_double("max_range_m", t.pano.max_range_m);
  t.motion.step_m = c.get_double("step_m", t.motion.step_m);
  t.motion.turn_rad = c.get_double("turn_rad", t.motion.turn_rad);
  t.reward.r_goal = c.get_double("r_goal", t.reward.r_goal);
  t.reward.r_collide = c.get_double("r_collide", t.reward.r_collide);
  t.reward.goal_radius_m = c.get_double("d_g", t.reward.goal_radius_m);
  t.reward.explore_coef = c.get_double("explore_coef", t.reward.explore_coef);
  t.ppo.clip = c.get_double("clip", t.ppo.clip);
  t.ppo.value_coef = c.get_double("value_coef", t.ppo.value_coef);
  t.ppo.entropy_coef = c.get_double("entropy_coef", t.ppo.entropy_coef);
  t.ppo.epochs = c.get_int("ppo_epochs", t.ppo.epochs);
  t.ppo.minibatches = c.get_int("ppo_minibatches", t.ppo.minibatches);
  return t;
}

void write_training_log_csv(const std::vector<UpdateLog>& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "update,mean_reward,policy_loss,value_loss,entropy\n";
  char buf[160];
  for (const UpdateLog& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f\n", row.update, row.mean_reward,
                  row.policy_loss, row.value_loss, row.entropy);
    f << buf;
  }
}

}  // namespace panonav
