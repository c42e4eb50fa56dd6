#pragma once

#include <string>
#include <vector>

#include "panonav/nn.hpp"
#include "panonav/world.hpp"

namespace panonav {

inline constexpr double kEndingDistanceM = 1.0;

struct DatasetDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ObservationPair {
  Panorama o_i;
  Panorama o_j;
  double d_ij = 0.0;  // ground-truth pose distance, training only
  int label = 0;      // 1 iff d_ij <= 1.0 m
};

int label_pair(double d_ij);

struct TrajStep {
  Pose pose;
  Panorama pano;
};
using Trajectory = std::vector<TrajStep>;

// Uniform (trajectory, i, j) draws; the minority class is topped up to at
// least n/4 by biased index offsets.
std::vector<ObservationPair> sample_pairs(const std::vector<Trajectory>& trajectories, int n,
                                          Rng& rng);

// Siamese pair classifier: shared-weight panorama streams, fusion layer,
// single logistic unit. Input order is fixed as (o_i, o_j) = (current, goal);
// the output is not symmetric under swapping.
class NepmNet {
 public:
  explicit NepmNet(int pano_dim);
  void init_weights(Rng& rng);

  struct Cache {
    std::vector<double> si1, si2, sj1, sj2, fuse_in, fuse_out;
    double logit = 0.0;
    const std::vector<double>* xi = nullptr;
    const std::vector<double>* xj = nullptr;
  };

  double forward(const std::vector<double>& feat_i, const std::vector<double>& feat_j,
                 Cache* cache = nullptr) const;
  // d_logit: gradient w.r.t. the pre-sigmoid output.
  void backward(const Cache& cache, double d_logit);

  ParamStore& params() { return ps_; }
  const ParamStore& params() const { return ps_; }
  int pano_dim() const { return pano_dim_; }

 private:
  int pano_dim_;
  DenseLayer stream1_, stream2_, fusion_, out_;
  ParamStore ps_;
};

double nepm_forward(const Panorama& o_i, const Panorama& o_j, const NepmNet& net,
                    const PanoramaConfig& cfg = {});

struct TrainNepmConfig {
  int batch_size = 128;  // 64 positives + 64 negatives
  int iterations = 600;
  double lr = 1e-3;
  double holdout_frac = 0.2;
  PanoramaConfig pano;
};

struct NepmReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double final_loss = 0.0;
  int holdout_size = 0;
};

NepmReport train_nepm(const std::vector<ObservationPair>& pairs, NepmNet& net,
                      const TrainNepmConfig& cfg, Rng& rng);

bool should_stop(const Panorama& current, const Panorama& goal, const NepmNet& net,
                 double threshold = 0.5, const PanoramaConfig& cfg = {});

// JSON-lines persistence of the pair dataset.
void save_pairs_jsonl(const std::vector<ObservationPair>& pairs, const std::string& path);
std::vector<ObservationPair> load_pairs_jsonl(const std::string& path);

}  // namespace panonav
