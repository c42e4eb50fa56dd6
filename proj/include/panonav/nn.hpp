#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "panonav/random.hpp"

namespace panonav {

struct NumericalFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All parameters of a network live in one flat vector; layers hold offsets.
// Flat storage makes Adam, finite-difference checks and checkpointing trivial.
class ParamStore {
 public:
  int alloc(int n) {
    const int off = static_cast<int>(theta_.size());
    theta_.resize(off + n, 0.0);
    grad_.resize(off + n, 0.0);
    return off;
  }
  int size() const { return static_cast<int>(theta_.size()); }

  double* theta(int off = 0) { return theta_.data() + off; }
  const double* theta(int off = 0) const { return theta_.data() + off; }
  double* grad(int off = 0) { return grad_.data() + off; }

  std::vector<double>& theta_vec() { return theta_; }
  const std::vector<double>& theta_vec() const { return theta_; }
  std::vector<double>& grad_vec() { return grad_; }

  void zero_grad() { grad_.assign(grad_.size(), 0.0); }

 private:
  std::vector<double> theta_;
  std::vector<double> grad_;
};

struct DenseLayer {
  int in = 0, out = 0, w_off = 0, b_off = 0;

  void init(ParamStore& ps, int in_dim, int out_dim);
  void init_weights(ParamStore& ps, Rng& rng) const;  // Xavier-uniform
  void forward(const ParamStore& ps, const double* x, double* y) const;
  // Accumulates parameter grads; dx may be null for the first layer.
  void backward(ParamStore& ps, const double* x, const double* dy, double* dx) const;
};

// 3x3 convolution, channels-first layout [c][y][x], zero padding 1.
struct Conv2dLayer {
  int in_c = 0, out_c = 0, in_h = 0, in_w = 0, stride = 2;
  int w_off = 0, b_off = 0;

  int out_h() const { return (in_h + 2 - 3) / stride + 1; }
  int out_w() const { return (in_w + 2 - 3) / stride + 1; }
  int out_size() const { return out_c * out_h() * out_w(); }

  void init(ParamStore& ps, int in_channels, int out_channels, int h, int w, int stride_);
  void init_weights(ParamStore& ps, Rng& rng) const;
  void forward(const ParamStore& ps, const double* x, double* y) const;
  void backward(ParamStore& ps, const double* x, const double* dy, double* dx) const;
};

inline void relu_inplace(double* y, int n) {
  for (int i = 0; i < n; ++i)
    if (y[i] < 0) y[i] = 0;
}
// Uses the post-activation values as the mask.
inline void relu_backward_inplace(double* dy, const double* y, int n) {
  for (int i = 0; i < n; ++i)
    if (y[i] <= 0) dy[i] = 0;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_finite(const double* x, int n, const char* what);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  void step(ParamStore& ps);
  const AdamConfig& config() const { return cfg_; }
  AdamConfig& config() { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

// Versioned text checkpoint: "panonav-ckpt 1 <name> <count>" then one value
// per line at full precision.
void save_checkpoint(const ParamStore& ps, const std::string& name, const std::string& path);
void load_checkpoint(ParamStore& ps, const std::string& name, const std::string& path);

}  // namespace panonav
