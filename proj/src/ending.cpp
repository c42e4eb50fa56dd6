#include "panonav/ending.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "panonav/goal_policy.hpp"

namespace panonav {

int label_pair(double d_ij) {
  if (d_ij < 0) throw InvalidInputError("negative pair distance");
  return d_ij <= kEndingDistanceM ? 1 : 0;
}

namespace {

ObservationPair make_pair(const Trajectory& traj, int i, int j) {
  ObservationPair p;
  p.o_i = traj[i].pano;
  p.o_j = traj[j].pano;
  p.d_ij = std::hypot(traj[i].pose.x - traj[j].pose.x, traj[i].pose.y - traj[j].pose.y);
  p.label = label_pair(p.d_ij);
  return p;
}

}  // namespace

std::vector<ObservationPair> sample_pairs(const std::vector<Trajectory>& trajectories, int n,
                                          Rng& rng) {
  std::vector<const Trajectory*> usable;
  for (const Trajectory& t : trajectories)
    if (!t.empty()) usable.push_back(&t);
  if (usable.empty()) throw InvalidInputError("no non-empty trajectories");

  std::vector<ObservationPair> pairs;
  pairs.reserve(n);
  int n_pos = 0, n_neg = 0;
  for (int k = 0; k < n; ++k) {
    const Trajectory& t = *usable[rng.uniform_int(static_cast<int>(usable.size()))];
    const int i = rng.uniform_int(static_cast<int>(t.size()));
    const int j = rng.uniform_int(static_cast<int>(t.size()));
    pairs.push_back(make_pair(t, i, j));
    (pairs.back().label ? n_pos : n_neg) += 1;
  }

  // Top up the minority class with biased index offsets.
  const int quota = n / 4;
  long tries = 0;
  const long max_tries = 200L * n + 10000;
  while ((n_pos < quota || n_neg < quota) && tries < max_tries) {
    ++tries;
    const Trajectory& t = *usable[rng.uniform_int(static_cast<int>(usable.size()))];
    const int i = rng.uniform_int(static_cast<int>(t.size()));
    const bool want_pos = n_pos < quota;
    const int max_off = want_pos ? 4 : static_cast<int>(t.size());
    const int off = rng.uniform_int(2 * max_off + 1) - max_off;
    const int j = std::clamp(i + off, 0, static_cast<int>(t.size()) - 1);
    ObservationPair p = make_pair(t, i, j);
    if (want_pos != (p.label == 1)) continue;
    // replace a majority-class entry so the requested count is preserved
    for (size_t r = 0; r < pairs.size(); ++r) {
      if (pairs[r].label != p.label) {
        (pairs[r].label ? n_pos : n_neg) -= 1;
        pairs[r] = std::move(p);
        (want_pos ? n_pos : n_neg) += 1;
        break;
      }
    }
  }
  if (n_pos < quota || n_neg < quota)
    throw DatasetDegeneracyError("could not balance pair classes from trajectories");
  return pairs;
}

NepmNet::NepmNet(int pano_dim) : pano_dim_(pano_dim) {
  stream1_.init(ps_, pano_dim, 64);
  stream2_.init(ps_, 64, 64);
  fusion_.init(ps_, 128, 64);
  out_.init(ps_, 64, 1);
}

void NepmNet::init_weights(Rng& rng) {
  stream1_.init_weights(ps_, rng);
  stream2_.init_weights(ps_, rng);
  fusion_.init_weights(ps_, rng);
  out_.init_weights(ps_, rng);
}

double NepmNet::forward(const std::vector<double>& feat_i, const std::vector<double>& feat_j,
                        Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c.xi = &feat_i;
  c.xj = &feat_j;
  auto run_stream = [&](const std::vector<double>& x, std::vector<double>& h1,
                        std::vector<double>& h2) {
    h1.resize(64);
    h2.resize(64);
    stream1_.forward(ps_, x.data(), h1.data());
    relu_inplace(h1.data(), 64);
    stream2_.forward(ps_, h1.data(), h2.data());
    relu_inplace(h2.data(), 64);
  };
  run_stream(feat_i, c.si1, c.si2);
  run_stream(feat_j, c.sj1, c.sj2);
  c.fuse_in.resize(128);
  std::copy(c.si2.begin(), c.si2.end(), c.fuse_in.begin());
  std::copy(c.sj2.begin(), c.sj2.end(), c.fuse_in.begin() + 64);
  c.fuse_out.resize(64);
  fusion_.forward(ps_, c.fuse_in.data(), c.fuse_out.data());
  relu_inplace(c.fuse_out.data(), 64);
  out_.forward(ps_, c.fuse_out.data(), &c.logit);
  check_finite(&c.logit, 1, "nepm logit");
  return sigmoid(c.logit);
}

void NepmNet::backward(const Cache& c, double d_logit) {
  std::vector<double> d_fuse_out(64);
  out_.backward(ps_, c.fuse_out.data(), &d_logit, d_fuse_out.data());
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
  stream_backward(*c.xi, c.si1, c.si2, d_fuse_in.data());
  stream_backward(*c.xj, c.sj1, c.sj2, d_fuse_in.data() + 64);
}

double nepm_forward(const Panorama& o_i, const Panorama& o_j, const NepmNet& net,
                    const PanoramaConfig& cfg) {
  return net.forward(panorama_features(o_i, cfg), panorama_features(o_j, cfg));
}

NepmReport train_nepm(const std::vector<ObservationPair>& pairs, NepmNet& net,
                      const TrainNepmConfig& cfg, Rng& rng) {
  struct Feat {
    std::vector<double> xi, xj;
    int label;
  };
  std::vector<Feat> pos, neg;
  for (const ObservationPair& p : pairs) {
    Feat f{panorama_features(p.o_i, cfg.pano), panorama_features(p.o_j, cfg.pano), p.label};
    (p.label ? pos : neg).push_back(std::move(f));
  }
  if (pos.empty() || neg.empty())
    throw DatasetDegeneracyError("both pair classes required for training");

  const int hold_pos = std::max(1, static_cast<int>(pos.size() * cfg.holdout_frac));
  const int hold_neg = std::max(1, static_cast<int>(neg.size() * cfg.holdout_frac));
  const int hold = std::min(hold_pos, hold_neg);  // balanced held-out split
  if (static_cast<int>(pos.size()) <= hold || static_cast<int>(neg.size()) <= hold)
    throw DatasetDegeneracyError("too few pairs for a held-out split");
  std::vector<Feat> hold_set(pos.end() - hold, pos.end());
  hold_set.insert(hold_set.end(), neg.end() - hold, neg.end());
  pos.resize(pos.size() - hold);
  neg.resize(neg.size() - hold);

  Adam opt(AdamConfig{cfg.lr, 0.9, 0.999, 1e-5});
  const int half = cfg.batch_size / 2;
  NepmReport report;
  for (int it = 0; it < cfg.iterations; ++it) {
    net.params().zero_grad();
    double loss = 0.0;
    const double inv = 1.0 / cfg.batch_size;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const bool positive = b < half;  // exactly 64/64 per batch
      const std::vector<Feat>& pool = positive ? pos : neg;
      const Feat& f = pool[rng.uniform_int(static_cast<int>(pool.size()))];
      NepmNet::Cache cache;
      const double p = net.forward(f.xi, f.xj, &cache);
      const double y = f.label;
      const double eps = 1e-12;
      loss += -(y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
      net.backward(cache, (p - y) * inv);
    }
    loss *= inv;
    if (!std::isfinite(loss)) throw NumericalFailureError("non-finite NEPM loss");
    opt.step(net.params());
    report.final_loss = loss;
  }

  int tp = 0, fp = 0, tn = 0, fn = 0;
  for (const Feat& f : hold_set) {
    const int pred = net.forward(f.xi, f.xj) >= 0.5 ? 1 : 0;
    if (pred == 1 && f.label == 1) ++tp;
    else if (pred == 1) ++fp;
    else if (f.label == 0) ++tn;
    else ++fn;
  }
  report.holdout_size = static_cast<int>(hold_set.size());
  report.accuracy = static_cast<double>(tp + tn) / hold_set.size();
  report.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  report.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return report;
}

bool should_stop(const Panorama& current, const Panorama& goal, const NepmNet& net,
                 double threshold, const PanoramaConfig& cfg) {
  return nepm_forward(current, goal, net, cfg) >= threshold;
}

namespace {

nlohmann::json pano_to_json(const Panorama& p) {
  nlohmann::json j;
  j["ranges"] = p.ranges;
  std::vector<std::vector<double>> lms;
  for (const auto& lm : p.landmark_hits) lms.emplace_back(lm.begin(), lm.end());
  j["landmarks"] = lms;
  return j;
}

Panorama pano_from_json(const nlohmann::json& j) {
  Panorama p;
  p.ranges = j.at("ranges").get<std::vector<double>>();
  for (const auto& lm : j.at("landmarks")) {
    std::array<double, kLandmarkDim> a{};
    for (int i = 0; i < kLandmarkDim && i < static_cast<int>(lm.size()); ++i) a[i] = lm[i];
    p.landmark_hits.push_back(a);
  }
  return p;
}

}  // namespace

void save_pairs_jsonl(const std::vector<ObservationPair>& pairs, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const ObservationPair& p : pairs) {
    nlohmann::json j;
    j["o_i"] = pano_to_json(p.o_i);
    j["o_j"] = pano_to_json(p.o_j);
    j["d_ij"] = p.d_ij;
    j["label"] = p.label;
    f << j.dump() << "\n";
  }
}

std::vector<ObservationPair> load_pairs_jsonl(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<ObservationPair> pairs;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    ObservationPair p;
    p.o_i = pano_from_json(j.at("o_i"));
    p.o_j = pano_from_json(j.at("o_j"));
    p.d_ij = j.at("d_ij").get<double>();
    p.label = j.at("label").get<int>();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace panonav
