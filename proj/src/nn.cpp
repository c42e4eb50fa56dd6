#include "panonav/nn.hpp"

#include <fstream>
#include <sstream>

namespace panonav {

void DenseLayer::init(ParamStore& ps, int in_dim, int out_dim) {
  in = in_dim;
  out = out_dim;
  w_off = ps.alloc(in * out);
  b_off = ps.alloc(out);
}

void DenseLayer::init_weights(ParamStore& ps, Rng& rng) const {
  const double s = std::sqrt(6.0 / (in + out));
  double* w = ps.theta(w_off);
  for (int i = 0; i < in * out; ++i) w[i] = rng.uniform(-s, s);
  double* b = ps.theta(b_off);
  for (int i = 0; i < out; ++i) b[i] = 0.0;
}

void DenseLayer::forward(const ParamStore& ps, const double* x, double* y) const {
  const double* w = ps.theta(w_off);
  const double* b = ps.theta(b_off);
  for (int o = 0; o < out; ++o) {
    double acc = b[o];
    const double* row = w + static_cast<size_t>(o) * in;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void DenseLayer::backward(ParamStore& ps, const double* x, const double* dy, double* dx) const {
  const double* w = ps.theta(w_off);
  double* gw = ps.grad(w_off);
  double* gb = ps.grad(b_off);
  if (dx)
    for (int i = 0; i < in; ++i) dx[i] = 0.0;
  for (int o = 0; o < out; ++o) {
    const double g = dy[o];
    gb[o] += g;
    const double* row = w + static_cast<size_t>(o) * in;
    double* grow = gw + static_cast<size_t>(o) * in;
    for (int i = 0; i < in; ++i) {
      grow[i] += g * x[i];
      if (dx) dx[i] += g * row[i];
    }
  }
}

void Conv2dLayer::init(ParamStore& ps, int in_channels, int out_channels, int h, int w,
                       int stride_) {
  in_c = in_channels;
  out_c = out_channels;
  in_h = h;
  in_w = w;
  stride = stride_;
  w_off = ps.alloc(out_c * in_c * 9);
  b_off = ps.alloc(out_c);
}

void Conv2dLayer::init_weights(ParamStore& ps, Rng& rng) const {
  const int fan_in = in_c * 9, fan_out = out_c * 9;
  const double s = std::sqrt(6.0 / (fan_in + fan_out));
  double* w = ps.theta(w_off);
  for (int i = 0; i < out_c * in_c * 9; ++i) w[i] = rng.uniform(-s, s);
  double* b = ps.theta(b_off);
  for (int i = 0; i < out_c; ++i) b[i] = 0.0;
}

void Conv2dLayer::forward(const ParamStore& ps, const double* x, double* y) const {
  const double* w = ps.theta(w_off);
  const double* b = ps.theta(b_off);
  const int oh = out_h(), ow = out_w();
  for (int oc = 0; oc < out_c; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b[oc];
        for (int ic = 0; ic < in_c; ++ic) {
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = oy * stride + ky - 1;
            if (iy < 0 || iy >= in_h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * stride + kx - 1;
              if (ix < 0 || ix >= in_w) continue;
              acc += w[((oc * in_c + ic) * 3 + ky) * 3 + kx] *
                     x[(ic * in_h + iy) * in_w + ix];
            }
          }
        }
        y[(oc * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void Conv2dLayer::backward(ParamStore& ps, const double* x, const double* dy, double* dx) const {
  const double* w = ps.theta(w_off);
  double* gw = ps.grad(w_off);
  double* gb = ps.grad(b_off);
  const int oh = out_h(), ow = out_w();
  if (dx)
    for (int i = 0; i < in_c * in_h * in_w; ++i) dx[i] = 0.0;
  for (int oc = 0; oc < out_c; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const double g = dy[(oc * oh + oy) * ow + ox];
        gb[oc] += g;
        for (int ic = 0; ic < in_c; ++ic) {
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = oy * stride + ky - 1;
            if (iy < 0 || iy >= in_h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * stride + kx - 1;
              if (ix < 0 || ix >= in_w) continue;
              const int wi = ((oc * in_c + ic) * 3 + ky) * 3 + kx;
              const int xi = (ic * in_h + iy) * in_w + ix;
              gw[wi] += g * x[xi];
              if (dx) dx[xi] += g * w[wi];
            }
          }
        }
      }
    }
  }
}

void check_finite(const double* x, int n, const char* what) {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(x[i]))
      throw NumericalFailureError(std::string("non-finite value in ") + what);
}

void Adam::step(ParamStore& ps) {
  const int n = ps.size();
  if (static_cast<int>(m_.size()) != n) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  double* th = ps.theta();
  double* g = ps.grad();
  for (int i = 0; i < n; ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
    th[i] -= cfg_.lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + cfg_.eps);
  }
}

void save_checkpoint(const ParamStore& ps, const std::string& name, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "panonav-ckpt 1 " << name << " " << ps.size() << "\n";
  char buf[48];
  for (int i = 0; i < ps.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", ps.theta()[i]);
    f << buf;
  }
}

void load_checkpoint(ParamStore& ps, const std::string& name, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path);
  std::string magic, got_name;
  int version = 0, count = 0;
  f >> magic >> version >> got_name >> count;
  if (magic != "panonav-ckpt" || version != 1)
    throw std::runtime_error("bad checkpoint header in " + path);
  if (got_name != name)
    throw std::runtime_error("checkpoint " + path + " holds '" + got_name + "', expected '" +
                             name + "'");
  if (count != ps.size())
    throw std::runtime_error("checkpoint size mismatch in " + path);
  for (int i = 0; i < count; ++i) f >> ps.theta()[i];
  if (!f) throw std::runtime_error("truncated checkpoint " + path);
}

}  // namespace panonav
