#include <doctest.h>

#include <cmath>

#include "panonav/config.hpp"
#include "panonav/goal_policy.hpp"

using namespace panonav;

namespace {

constexpr int kPanoDim = 6;  // toy panorama width keeps finite differences fast

PolicyInput random_input(Rng& rng, int pano_dim = kPanoDim) {
  PolicyInput in;
  in.goal_pano.resize(pano_dim);
  in.current_pano.resize(pano_dim);
  in.map_channels.resize(static_cast<size_t>(kMapChannels) * kMapPatch * kMapPatch);
  for (double& v : in.goal_pano) v = rng.uniform();
  for (double& v : in.current_pano) v = rng.uniform();
  for (double& v : in.map_channels) v = rng.uniform();
  return in;
}

}  // namespace

TEST_CASE("encode: zero weights give mean (0.5, 0.5), value 0") {
  GoalPolicyNet net(kPanoDim);
  Rng rng(1);
  const PolicyOutput out = net.forward(random_input(rng));
  CHECK(out.mean[0] == 0.5);
  CHECK(out.mean[1] == 0.5);
  CHECK(out.value == 0.0);
  CHECK(out.variance[0] == 1.0);  // exp(0)
  CHECK(out.variance[1] == 1.0);
}

TEST_CASE("encode: shared-weight streams swap embeddings when inputs swap") {
  GoalPolicyNet net(kPanoDim);
  Rng rng(2);
  net.init_weights(rng);
  PolicyInput a = random_input(rng);
  PolicyInput b = a;
  std::swap(b.goal_pano, b.current_pano);

  GoalPolicyNet::Cache ca, cb;
  net.forward(a, &ca);
  net.forward(b, &cb);
  CHECK(ca.s_goal2 == cb.s_cur2);
  CHECK(ca.s_cur2 == cb.s_goal2);

  // identical panoramas on both streams give identical embeddings
  PolicyInput same = a;
  same.current_pano = same.goal_pano;
  GoalPolicyNet::Cache cs;
  net.forward(same, &cs);
  CHECK(cs.s_goal2 == cs.s_cur2);
}

TEST_CASE("encode: analytic gradient matches central finite differences") {
  GoalPolicyNet net(kPanoDim);
  Rng rng(3);
  net.init_weights(rng);
  const PolicyInput in = random_input(rng);

  // scalar probe: fixed linear combination of all five head outputs
  const double cm[2] = {0.7, -1.3}, cl[2] = {0.4, 0.9}, cv = -0.6;
  auto probe = [&]() {
    GoalPolicyNet::Cache c;
    const PolicyOutput out = net.forward(in, &c);
    double L = cv * out.value;
    for (int i = 0; i < 2; ++i) {
      L += cm[i] * out.mean[i];
      L += cl[i] * std::clamp(c.logvar_raw[i], kLogVarMin, kLogVarMax);
    }
    return L;
  };

  GoalPolicyNet::Cache cache;
  net.forward(in, &cache);
  net.params().zero_grad();
  net.backward(cache, {cm[0], cm[1]}, {cl[0], cl[1]}, cv);

  const double eps = 1e-5;
  Rng pick(4);
  int checked = 0;
  const int n = net.params().size();
  for (int trial = 0; trial < 200; ++trial) {
    const int i = static_cast<int>(pick.uniform_int(n));
    double& theta = net.params().theta()[i];
    const double saved = theta;
    theta = saved + eps;
    const double up = probe();
    theta = saved - eps;
    const double dn = probe();
    theta = saved;
    const double fd = (up - dn) / (2 * eps);
    const double an = net.params().grad()[i];
    if (std::abs(fd) < 1e-8 && std::abs(an) < 1e-8) continue;  // dead ReLU path
    CHECK(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}) < 1e-4);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("sample_goal: log-density closed form and clamped support") {
  const std::array<double, 2> mean{0.3, 0.8};
  for (double v : {0.04, 0.25, 1.0}) {
    const std::array<double, 2> var{v, v};
    const double lp = gaussian_log_prob(mean, var, {mean[0], mean[1]});
    CHECK(lp == doctest::Approx(-std::log(2.0 * M_PI * v)).epsilon(1e-12));
  }
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const GoalSample s = sample_goal({0.9, 0.1}, {0.5, 0.5}, rng);
    CHECK(s.goal.gx >= 0.0);
    CHECK(s.goal.gx <= 1.0);
    CHECK(s.goal.gy >= 0.0);
    CHECK(s.goal.gy <= 1.0);
  }
  // variance -> 0 limit collapses onto the mean
  const GoalSample tight = sample_goal({0.4, 0.6}, {1e-20, 1e-20}, rng);
  CHECK(tight.goal.gx == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(tight.goal.gy == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("sample_goal: Monte Carlo sample mean matches the distribution mean") {
  Rng rng(6);
  const int N = 100000;
  const double sigma = 0.2;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < N; ++i) {
    const GoalSample s = sample_goal({0.5, 0.5}, {sigma * sigma, sigma * sigma}, rng);
    sx += s.goal.gx;
    sy += s.goal.gy;
  }
  const double tol = 3.0 * sigma / std::sqrt(static_cast<double>(N));
  CHECK(std::abs(sx / N - 0.5) < tol);
  CHECK(std::abs(sy / N - 0.5) < tol);
}

TEST_CASE("goal_to_cell: floor mapping with boundary clamp") {
  CHECK(goal_to_cell({0.0, 0.0}, 80, 80) == Cell{0, 0});
  CHECK(goal_to_cell({1.0, 1.0}, 80, 80) == Cell{79, 79});
  CHECK(goal_to_cell({0.5, 0.25}, 80, 80) == Cell{40, 20});
}

namespace {

// fully-free 40x40 map with an explored lower-left block of given cell count
OccupancyMap block_map(int explored_cols, int explored_rows) {
  OccupancyMap m(40, 40, 0.1);
  for (int y = 0; y < explored_rows; ++y)
    for (int x = 0; x < explored_cols; ++x) m.explored.at(x, y) = 1;
  return m;
}

}  // namespace

TEST_CASE("compute_reward: goal hit, unexplored goal, area growth (20, 0, +0.9)") {
  // predicted goal 0.6 m from the true goal, reachable on map_T; true goal
  // outside map_T's explored area; exploration grew by 90 cells = 0.9 m^2
  const OccupancyMap map_T = block_map(10, 10);    // 100 cells explored
  const OccupancyMap map_Tk = block_map(10, 19);   // +90 cells
  const Cell true_goal{20, 20};                    // unexplored at T
  const Cell predicted{14, 20};                    // 0.6 m away... but must be reachable
  // reachable prediction inside the explored block instead:
  const Cell pred_in{5, 5}, agent{0, 0};
  const RewardBreakdown far = compute_reward(map_T, map_Tk, true_goal, predicted, agent, false);
  CHECK(far.r_g == 20.0);  // 0.6 m <= 1.0 m
  CHECK(far.r_collide == -5.0);  // unexplored prediction is not known reachable

  // true goal at (5, 12): unexplored at T, 0.7 m from the reachable prediction
  const RewardBreakdown r = compute_reward(map_T, map_Tk, {5, 12}, pred_in, agent, false);
  CHECK(r.r_g == 20.0);
  CHECK(r.r_collide == 0.0);
  CHECK(r.r_explore == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.r_explore == explored_area(map_Tk) - explored_area(map_T));  // exact
  CHECK(r.total() == r.r_g + r.r_collide + r.r_explore);
}

TEST_CASE("compute_reward: prediction in an obstacle cell collides") {
  OccupancyMap map_T = block_map(10, 10);
  map_T.obstacle.at(5, 5) = 1;
  const RewardBreakdown r = compute_reward(map_T, map_T, {30, 30}, {5, 5}, {0, 0}, false);
  CHECK(r.r_collide == -5.0);
  CHECK(r.r_g == 0.0);
}

TEST_CASE("compute_reward: first time scale has zero explore term") {
  const OccupancyMap map_T = block_map(10, 10);
  const OccupancyMap map_Tk = block_map(10, 30);
  const RewardBreakdown r = compute_reward(map_T, map_Tk, {30, 30}, {5, 5}, {0, 0}, true);
  CHECK(r.r_explore == 0.0);
}

TEST_CASE("compute_reward: explored goal penalizes further exploration (-0.5)") {
  const OccupancyMap map_T = block_map(10, 10);
  const OccupancyMap map_Tk = block_map(10, 15);  // +50 cells = 0.5 m^2
  const Cell true_goal{5, 5};                     // inside explored block at T
  const RewardBreakdown r = compute_reward(map_T, map_Tk, true_goal, {2, 2}, {0, 0}, false);
  CHECK(r.r_explore == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(r.r_explore <= 0.0);
}

TEST_CASE("compute_reward: non-nested explored sets are rejected") {
  const OccupancyMap map_T = block_map(10, 10);
  const OccupancyMap map_Tk = block_map(9, 9);  // lost cells: inconsistent
  CHECK_THROWS_AS(compute_reward(map_T, map_Tk, {30, 30}, {5, 5}, {0, 0}, false),
                  InternalInconsistencyError);
}

TEST_CASE("compute_reward: explore-term sign property over random nested map pairs") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    OccupancyMap a(20, 20, 0.1);
    for (size_t i = 0; i < a.explored.size(); ++i) a.explored[i] = rng.uniform() < 0.4;
    OccupancyMap b = a;
    for (size_t i = 0; i < b.explored.size(); ++i)
      if (rng.uniform() < 0.2) b.explored[i] = 1;
    const Cell goal{static_cast<int>(rng.uniform_int(20)), static_cast<int>(rng.uniform_int(20))};
    const RewardBreakdown r = compute_reward(a, b, goal, {1, 1}, {0, 0}, false);
    if (a.explored.at(goal))
      CHECK(r.r_explore <= 0.0);
    else
      CHECK(r.r_explore >= 0.0);
    CHECK(r.total() == r.r_g + r.r_collide + r.r_explore);
  }
}

namespace {

RolloutBuffer make_buffer(int n_envs, int horizon) {
  RolloutBuffer b;
  b.n_envs = n_envs;
  b.horizon = horizon;
  b.samples.resize(static_cast<size_t>(n_envs) * horizon);
  b.bootstrap_value.assign(n_envs, 0.0);
  return b;
}

}  // namespace

TEST_CASE("returns: single terminal reward discounts geometrically (lambda = 1)") {
  const int T = 6;
  RolloutBuffer b = make_buffer(1, T);
  b.samples[T - 1].reward = 2.0;
  compute_returns_and_advantages(b, 0.99, 1.0);
  for (int t = 0; t < T; ++t)
    CHECK(b.returns[t] == doctest::Approx(2.0 * std::pow(0.99, T - 1 - t)).epsilon(1e-12));
}

TEST_CASE("returns: all-zero rewards and values give zero returns and advantages") {
  RolloutBuffer b = make_buffer(2, 5);
  compute_returns_and_advantages(b, 0.99, 0.95);
  for (double r : b.returns) CHECK(r == 0.0);
  for (double a : b.advantages) CHECK(a == 0.0);
}

TEST_CASE("returns: lambda = 1 equals brute-force discounted reward sums") {
  Rng rng(8);
  const int E = 3, T = 7;
  const double tau = 0.97;
  RolloutBuffer b = make_buffer(E, T);
  for (auto& s : b.samples) {
    s.reward = rng.uniform(-2.0, 2.0);
    s.value = rng.uniform(-1.0, 1.0);
  }
  for (int e = 0; e < E; ++e) b.bootstrap_value[e] = rng.uniform(-1.0, 1.0);
  b.at(1, 3).done = true;  // episode boundary mid-window
  compute_returns_and_advantages(b, tau, 1.0);
  for (int e = 0; e < E; ++e) {
    for (int t = 0; t < T; ++t) {
      double expect = 0.0, disc = 1.0;
      bool terminated = false;
      for (int i = t; i < T && !terminated; ++i) {
        expect += disc * b.at(e, i).reward;
        disc *= tau;
        terminated = b.at(e, i).done;
      }
      if (!terminated) expect += disc * b.bootstrap_value[e];
      CHECK(std::abs(b.returns[e * T + t] - expect) < 1e-10);
    }
  }
}

TEST_CASE("returns: advantages are the normalized (return - value) at lambda = 1") {
  Rng rng(9);
  const int E = 2, T = 6, n = E * T;
  RolloutBuffer b = make_buffer(E, T);
  for (auto& s : b.samples) {
    s.reward = rng.uniform(-1.0, 1.0);
    s.value = rng.uniform(-1.0, 1.0);
  }
  compute_returns_and_advantages(b, 0.99, 1.0);
  std::vector<double> raw(n);
  for (int i = 0; i < n; ++i) raw[i] = b.returns[i] - b.samples[i].value;
  double mean = 0.0;
  for (double a : raw) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : raw) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n) + 1e-8;
  for (int i = 0; i < n; ++i)
    CHECK(b.advantages[i] == doctest::Approx((raw[i] - mean) / sd).epsilon(1e-10));
}

TEST_CASE("ppo_update: clipped surrogate uses ratio 1.2 when ratio is 1.5") {
  GoalPolicyNet net(kPanoDim);
  Rng rng(10);
  net.init_weights(rng);

  RolloutBuffer b = make_buffer(1, 1);
  RolloutSample& s = b.samples[0];
  s.input = random_input(rng);
  const PolicyOutput out = net.forward(s.input);
  s.goal = {out.mean[0] + 0.1, out.mean[1]};
  s.raw_goal = s.goal;
  const double lp = gaussian_log_prob(out.mean, out.variance, s.raw_goal);
  s.log_prob = lp - std::log(1.5);  // current/old ratio = 1.5
  s.value = out.value;
  b.advantages = {1.0};
  b.returns = {out.value};

  Adam opt(AdamConfig{0.0, 0.9, 0.999, 1e-6});  // observe loss only
  PpoConfig cfg;
  cfg.epochs = 1;
  cfg.minibatches = 1;
  const PpoStats stats = ppo_update(net, b, opt, cfg);
  CHECK(stats.policy_loss == doctest::Approx(-1.2).epsilon(1e-9));
}

TEST_CASE("ppo_update: zero advantage and exact value fit leave only entropy forces") {
  Rng rng(11);
  const PolicyInput in = random_input(rng);

  auto build = [&](double entropy_coef) {
    GoalPolicyNet net(kPanoDim);
    Rng wrng(12);
    net.init_weights(wrng);
    RolloutBuffer b = make_buffer(1, 1);
    RolloutSample& s = b.samples[0];
    s.input = in;
    const PolicyOutput out = net.forward(in);
    s.goal = {out.mean[0], out.mean[1]};  // sampled at the mean
    s.raw_goal = s.goal;
    s.log_prob = gaussian_log_prob(out.mean, out.variance, s.raw_goal);
    s.value = out.value;
    b.advantages = {0.0};
    b.returns = {out.value};
    Adam opt(AdamConfig{1e-3, 0.9, 0.999, 1e-6});
    PpoConfig cfg;
    cfg.epochs = 1;
    cfg.minibatches = 1;
    cfg.entropy_coef = entropy_coef;
    const std::vector<double> before = net.params().theta_vec();
    ppo_update(net, b, opt, cfg);
    double delta = 0.0;
    for (int i = 0; i < net.params().size(); ++i)
      delta += std::abs(net.params().theta()[i] - before[i]);
    return delta;
  };

  CHECK(build(0.0) == 0.0);   // no gradient source at all
  CHECK(build(0.01) > 0.0);   // entropy bonus alone moves parameters
}

TEST_CASE("ppo_update: loss gradient matches finite differences") {
  GoalPolicyNet net(kPanoDim);
  Rng rng(13);
  net.init_weights(rng);

  const int N = 6;
  RolloutBuffer b = make_buffer(1, N);
  b.advantages.resize(N);
  b.returns.resize(N);
  for (int i = 0; i < N; ++i) {
    RolloutSample& s = b.samples[i];
    s.input = random_input(rng);
    const PolicyOutput out = net.forward(s.input);
    GoalSample gs = sample_goal(out.mean, out.variance, rng);
    s.goal = gs.goal;
    s.raw_goal = gs.raw;
    s.log_prob = gs.log_prob + rng.uniform(-0.3, 0.3);  // off-policy ratios
    s.value = out.value;
    b.advantages[i] = rng.uniform(-1.5, 1.5);
    b.returns[i] = out.value + rng.uniform(-0.5, 0.5);
  }

  PpoConfig cfg;
  cfg.epochs = 1;
  cfg.minibatches = 1;

  // test-side loss replica used as the finite-difference oracle
  auto loss_of = [&]() {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      const RolloutSample& s = b.samples[i];
      const PolicyOutput out = net.forward(s.input);
      const double ratio =
          std::exp(gaussian_log_prob(out.mean, out.variance, s.raw_goal) - s.log_prob);
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
      double entropy = 0.0;
      for (int d = 0; d < 2; ++d)
        entropy += 0.5 * (std::log(2.0 * M_PI * out.variance[d]) + 1.0);
      const double verr = out.value - b.returns[i];
      acc += -std::min(ratio * b.advantages[i], clipped * b.advantages[i]);
      acc += cfg.value_coef * 0.5 * verr * verr;
      acc += -cfg.entropy_coef * entropy;
    }
    return acc / N;
  };

  Adam opt(AdamConfig{0.0, 0.9, 0.999, 1e-6});  // lr 0: leaves gradient in place
  ppo_update(net, b, opt, cfg);

  const double eps = 1e-5;
  Rng pick(14);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int i = static_cast<int>(pick.uniform_int(net.params().size()));
    double& theta = net.params().theta()[i];
    const double saved = theta;
    theta = saved + eps;
    const double up = loss_of();
    theta = saved - eps;
    const double dn = loss_of();
    theta = saved;
    const double fd = (up - dn) / (2 * eps);
    const double an = net.params().grad()[i];
    if (std::abs(fd) < 1e-8 && std::abs(an) < 1e-8) continue;
    CHECK(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}) < 1e-4);
    ++checked;
  }
  CHECK(checked > 40);
}

namespace {

TrainGoalConfig smoke_config() {
  TrainGoalConfig cfg;
  cfg.n_envs = 2;
  cfg.total_updates = 5;
  cfg.horizon_scales = 3;
  cfg.k_steps = 3;
  cfg.scales_per_episode = 6;
  cfg.n_train_worlds = 2;
  cfg.world.width_m = 8.0;
  cfg.world.height_m = 8.0;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("train_goal_policy: smoke run emits one log row per update") {
  TrainGoalConfig cfg = smoke_config();
  GoalPolicyNet net(panorama_feature_dim(cfg.pano));
  Rng wrng(20);
  net.init_weights(wrng);
  Rng rng(21);
  const TrainGoalResult res = train_goal_policy(net, cfg, rng);
  REQUIRE(res.log.size() == 5);
  for (const UpdateLog& row : res.log) {
    CHECK(std::isfinite(row.mean_reward));
    CHECK(std::isfinite(row.policy_loss));
    CHECK(std::isfinite(row.value_loss));
    CHECK(std::isfinite(row.entropy));
  }
}

TEST_CASE("train_goal_policy: seeded reruns and worker counts agree exactly") {
  auto run = [&](int workers) {
    TrainGoalConfig cfg = smoke_config();
    cfg.workers = workers;
    GoalPolicyNet net(panorama_feature_dim(cfg.pano));
    Rng wrng(22);
    net.init_weights(wrng);
    Rng rng(23);
    const TrainGoalResult res = train_goal_policy(net, cfg, rng);
    return std::make_pair(res, net.params().theta_vec());
  };
  const auto [r1, p1] = run(1);
  const auto [r2, p2] = run(1);
  const auto [rp, pp] = run(0);  // all hardware threads
  REQUIRE(r1.log.size() == r2.log.size());
  REQUIRE(r1.log.size() == rp.log.size());
  for (size_t i = 0; i < r1.log.size(); ++i) {
    CHECK(r1.log[i].mean_reward == r2.log[i].mean_reward);
    CHECK(r1.log[i].policy_loss == r2.log[i].policy_loss);
    CHECK(r1.log[i].mean_reward == rp.log[i].mean_reward);
    CHECK(r1.log[i].policy_loss == rp.log[i].policy_loss);
  }
  CHECK(p1 == p2);
  CHECK(p1 == pp);
}

TEST_CASE("train_goal_config_from: config keys override defaults") {
  Config c;
  c.set("n_envs", "4");
  c.set("lr", "0.001");
  c.set("explore_coef", "0");
  const TrainGoalConfig t = train_goal_config_from(c);
  CHECK(t.n_envs == 4);
  CHECK(t.lr == 0.001);
  CHECK(t.reward.explore_coef == 0.0);
  CHECK(t.ppo.clip == 0.2);  // untouched default
}
