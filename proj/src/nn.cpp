#include "har/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace har::nn {

namespace {

struct InputCtx : LayerCtx {
  Tensor input;
};

struct MaskCtx : LayerCtx {
  std::vector<char> active;
  std::vector<int> shape;
};

struct OutputCtx : LayerCtx {
  Tensor output;
};

struct ShapeCtx : LayerCtx {
  std::vector<int> in_shape;
};

void check_rank(const Tensor& x, int rank, const char* who) {
  if (x.rank() != rank) {
    throw std::invalid_argument(std::string(who) + ": expected rank " +
                                std::to_string(rank) + " input, got rank " +
                                std::to_string(x.rank()));
  }
}

// Uniform(-s, s) with s = gain * sqrt(3 / fan_in) has variance gain^2 / fan_in,
// which preserves activation scale through a linear map of unit-variance input.
double fan_in_bound(int fan_in, double gain) { return gain * std::sqrt(3.0 / fan_in); }

}  // namespace

bool Tensor::all_finite() const {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(int in, int out, std::string name, double init_gain)
    : in_(in), out_(out), init_gain_(init_gain) {
  W_.name = name + ".W";
  W_.value = Tensor({out, in});
  W_.grad = Tensor({out, in});
  b_.name = name + ".b";
  b_.value = Tensor({out});
  b_.grad = Tensor({out});
}

void Dense::init(Rng& rng) {
  const double s = fan_in_bound(in_, init_gain_);
  for (double& w : W_.value.v) w = rng.uniform(-s, s);
  b_.value.fill(0.0);
}

Tensor Dense::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  check_rank(x, 2, "Dense");
  if (x.dim(1) != in_) {
    throw std::invalid_argument("Dense: input width " + std::to_string(x.dim(1)) +
                                " != expected " + std::to_string(in_));
  }
  const int B = x.dim(0);
  Tensor y({B, out_});
  for (int b = 0; b < B; ++b) {
    const double* xr = &x.v[static_cast<std::size_t>(b) * in_];
    double* yr = &y.v[static_cast<std::size_t>(b) * out_];
    for (int o = 0; o < out_; ++o) {
      const double* wr = &W_.value.v[static_cast<std::size_t>(o) * in_];
      double acc = b_.value.v[o];
      for (int i = 0; i < in_; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  if (cache) {
    auto c = std::make_unique<InputCtx>();
    c->input = x;
    *cache = std::move(c);
  }
  return y;
}

Tensor Dense::backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) {
  const auto& c = static_cast<const InputCtx&>(cache);
  const Tensor& x = c.input;
  const int B = x.dim(0);
  Tensor gx({B, in_});
  for (int b = 0; b < B; ++b) {
    const double* xr = &x.v[static_cast<std::size_t>(b) * in_];
    const double* gr = &gy.v[static_cast<std::size_t>(b) * out_];
    double* gxr = &gx.v[static_cast<std::size_t>(b) * in_];
    for (int o = 0; o < out_; ++o) {
      const double g = gr[o];
      if (g == 0.0) continue;
      const double* wr = &W_.value.v[static_cast<std::size_t>(o) * in_];
      for (int i = 0; i < in_; ++i) gxr[i] += g * wr[i];
      if (with_param_grads) {
        double* gwr = &W_.grad.v[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) gwr[i] += g * xr[i];
        b_.grad.v[o] += g;
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// ReLU

Tensor ReLU::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  Tensor y = x;
  std::vector<char> active(x.v.size());
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    const bool a = y.v[i] > 0.0;
    active[i] = a;
    if (!a) y.v[i] = 0.0;
  }
  if (cache) {
    auto c = std::make_unique<MaskCtx>();
    c->active = std::move(active);
    c->shape = x.shape;
    *cache = std::move(c);
  }
  return y;
}

Tensor ReLU::backward(const LayerCtx& cache, const Tensor& gy, bool) {
  const auto& c = static_cast<const MaskCtx&>(cache);
  Tensor gx = gy;
  gx.shape = c.shape;
  for (std::size_t i = 0; i < gx.v.size(); ++i) {
    if (!c.active[i]) gx.v[i] = 0.0;
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Sigmoid

Tensor Sigmoid::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  Tensor y = x;
  for (double& t : y.v) t = 1.0 / (1.0 + std::exp(-t));
  if (cache) {
    auto c = std::make_unique<OutputCtx>();
    c->output = y;
    *cache = std::move(c);
  }
  return y;
}

Tensor Sigmoid::backward(const LayerCtx& cache, const Tensor& gy, bool) {
  const auto& c = static_cast<const OutputCtx&>(cache);
  Tensor gx = gy;
  for (std::size_t i = 0; i < gx.v.size(); ++i) {
    const double s = c.output.v[i];
    gx.v[i] *= s * (1.0 - s);
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(int c_in, int c_out, int k, int pad_l, int pad_r, std::string name,
               double init_gain)
    : c_in_(c_in), c_out_(c_out), k_(k), pad_l_(pad_l), pad_r_(pad_r),
      init_gain_(init_gain) {
  W_.name = name + ".W";
  W_.value = Tensor({c_out, c_in, k});
  W_.grad = Tensor({c_out, c_in, k});
  b_.name = name + ".b";
  b_.value = Tensor({c_out});
  b_.grad = Tensor({c_out});
}

void Conv1d::init(Rng& rng) {
  const double s = fan_in_bound(c_in_ * k_, init_gain_);
  for (double& w : W_.value.v) w = rng.uniform(-s, s);
  b_.value.fill(0.0);
}

Tensor Conv1d::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  check_rank(x, 3, "Conv1d");
  if (x.dim(1) != c_in_) {
    throw std::invalid_argument("Conv1d: input has " + std::to_string(x.dim(1)) +
                                " channels, expected " + std::to_string(c_in_));
  }
  const int B = x.dim(0);
  const int T = x.dim(2);
  const int To = T + pad_l_ + pad_r_ - k_ + 1;
  if (To < 1) throw std::invalid_argument("Conv1d: input too short");
  Tensor y({B, c_out_, To});
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < c_out_; ++co) {
      double* yr = &y.v[(static_cast<std::size_t>(b) * c_out_ + co) * To];
      const double bias = b_.value.v[co];
      for (int t = 0; t < To; ++t) yr[t] = bias;
      for (int ci = 0; ci < c_in_; ++ci) {
        const double* xr = &x.v[(static_cast<std::size_t>(b) * c_in_ + ci) * T];
        const double* wr = &W_.value.v[(static_cast<std::size_t>(co) * c_in_ + ci) * k_];
        for (int kk = 0; kk < k_; ++kk) {
          const double w = wr[kk];
          if (w == 0.0) continue;
          // y[t] += w * x[t - pad_l + kk] over valid t
          const int off = kk - pad_l_;
          const int t0 = std::max(0, -off);
          const int t1 = std::min(To, T - off);
          const double* xs = xr + off;
          for (int t = t0; t < t1; ++t) yr[t] += w * xs[t];
        }
      }
    }
  }
  if (cache) {
    auto c = std::make_unique<InputCtx>();
    c->input = x;
    *cache = std::move(c);
  }
  return y;
}

Tensor Conv1d::backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) {
  const auto& c = static_cast<const InputCtx&>(cache);
  const Tensor& x = c.input;
  const int B = x.dim(0);
  const int T = x.dim(2);
  const int To = gy.dim(2);
  Tensor gx({B, c_in_, T});
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < c_out_; ++co) {
      const double* gr = &gy.v[(static_cast<std::size_t>(b) * c_out_ + co) * To];
      if (with_param_grads) {
        double acc = 0.0;
        for (int t = 0; t < To; ++t) acc += gr[t];
        b_.grad.v[co] += acc;
      }
      for (int ci = 0; ci < c_in_; ++ci) {
        const double* xr = &x.v[(static_cast<std::size_t>(b) * c_in_ + ci) * T];
        double* gxr = &gx.v[(static_cast<std::size_t>(b) * c_in_ + ci) * T];
        const double* wr = &W_.value.v[(static_cast<std::size_t>(co) * c_in_ + ci) * k_];
        double* gwr = &W_.grad.v[(static_cast<std::size_t>(co) * c_in_ + ci) * k_];
        for (int kk = 0; kk < k_; ++kk) {
          const int off = kk - pad_l_;
          const int t0 = std::max(0, -off);
          const int t1 = std::min(To, T - off);
          const double w = wr[kk];
          double gw = 0.0;
          const double* xs = xr + off;
          double* gxs = gxr + off;
          for (int t = t0; t < t1; ++t) {
            const double g = gr[t];
            gw += g * xs[t];
            gxs[t] += g * w;
          }
          if (with_param_grads) gwr[kk] += gw;
        }
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// ConvTranspose1d

ConvTranspose1d::ConvTranspose1d(int c_in, int c_out, int out_extra, std::string name,
                                 double init_gain)
    : c_in_(c_in), c_out_(c_out), out_extra_(out_extra), init_gain_(init_gain) {
  if (out_extra != 0 && out_extra != 1) {
    throw std::invalid_argument("ConvTranspose1d: out_extra must be 0 or 1");
  }
  W_.name = name + ".W";
  W_.value = Tensor({c_in, c_out, kKernel});
  W_.grad = Tensor({c_in, c_out, kKernel});
  b_.name = name + ".b";
  b_.value = Tensor({c_out});
  b_.grad = Tensor({c_out});
}

void ConvTranspose1d::init(Rng& rng) {
  // Each output sample sees ceil(k / stride) taps per input channel.
  const double s = fan_in_bound(c_in_ * (kKernel / kStride), init_gain_);
  for (double& w : W_.value.v) w = rng.uniform(-s, s);
  b_.value.fill(0.0);
}

Tensor ConvTranspose1d::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  check_rank(x, 3, "ConvTranspose1d");
  if (x.dim(1) != c_in_) {
    throw std::invalid_argument("ConvTranspose1d: input has " + std::to_string(x.dim(1)) +
                                " channels, expected " + std::to_string(c_in_));
  }
  const int B = x.dim(0);
  const int T = x.dim(2);
  const int To = kStride * T + out_extra_;
  Tensor y({B, c_out_, To});
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < c_out_; ++co) {
      double* yr = &y.v[(static_cast<std::size_t>(b) * c_out_ + co) * To];
      const double bias = b_.value.v[co];
      for (int u = 0; u < To; ++u) yr[u] = bias;
    }
    for (int ci = 0; ci < c_in_; ++ci) {
      const double* xr = &x.v[(static_cast<std::size_t>(b) * c_in_ + ci) * T];
      for (int co = 0; co < c_out_; ++co) {
        double* yr = &y.v[(static_cast<std::size_t>(b) * c_out_ + co) * To];
        const double* wr = &W_.value.v[(static_cast<std::size_t>(ci) * c_out_ + co) * kKernel];
        for (int t = 0; t < T; ++t) {
          const double xv = xr[t];
          if (xv == 0.0) continue;
          const int base = kStride * t - kPad;
          const int k0 = std::max(0, -base);
          const int k1 = std::min(kKernel, To - base);
          for (int kk = k0; kk < k1; ++kk) yr[base + kk] += xv * wr[kk];
        }
      }
    }
  }
  if (cache) {
    auto c = std::make_unique<InputCtx>();
    c->input = x;
    *cache = std::move(c);
  }
  return y;
}

Tensor ConvTranspose1d::backward(const LayerCtx& cache, const Tensor& gy,
                                 bool with_param_grads) {
  const auto& c = static_cast<const InputCtx&>(cache);
  const Tensor& x = c.input;
  const int B = x.dim(0);
  const int T = x.dim(2);
  const int To = gy.dim(2);
  Tensor gx({B, c_in_, T});
  for (int b = 0; b < B; ++b) {
    if (with_param_grads) {
      for (int co = 0; co < c_out_; ++co) {
        const double* gr = &gy.v[(static_cast<std::size_t>(b) * c_out_ + co) * To];
        double acc = 0.0;
        for (int u = 0; u < To; ++u) acc += gr[u];
        b_.grad.v[co] += acc;
      }
    }
    for (int ci = 0; ci < c_in_; ++ci) {
      const double* xr = &x.v[(static_cast<std::size_t>(b) * c_in_ + ci) * T];
      double* gxr = &gx.v[(static_cast<std::size_t>(b) * c_in_ + ci) * T];
      for (int co = 0; co < c_out_; ++co) {
        const double* gr = &gy.v[(static_cast<std::size_t>(b) * c_out_ + co) * To];
        const double* wr = &W_.value.v[(static_cast<std::size_t>(ci) * c_out_ + co) * kKernel];
        double* gwr = &W_.grad.v[(static_cast<std::size_t>(ci) * c_out_ + co) * kKernel];
        for (int t = 0; t < T; ++t) {
          const int base = kStride * t - kPad;
          const int k0 = std::max(0, -base);
          const int k1 = std::min(kKernel, To - base);
          double acc = 0.0;
          for (int kk = k0; kk < k1; ++kk) acc += gr[base + kk] * wr[kk];
          gxr[t] += acc;
          if (with_param_grads) {
            const double xv = xr[t];
            if (xv != 0.0) {
              for (int kk = k0; kk < k1; ++kk) gwr[kk] += gr[base + kk] * xv;
            }
          }
        }
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// AvgPool1d

Tensor AvgPool1d::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  check_rank(x, 3, "AvgPool1d");
  const int B = x.dim(0), C = x.dim(1), T = x.dim(2);
  const int To = T / 2;
  if (To < 1) throw std::invalid_argument("AvgPool1d: input too short");
  Tensor y({B, C, To});
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xr = &x.v[(static_cast<std::size_t>(b) * C + c) * T];
      double* yr = &y.v[(static_cast<std::size_t>(b) * C + c) * To];
      for (int t = 0; t < To; ++t) yr[t] = 0.5 * (xr[2 * t] + xr[2 * t + 1]);
    }
  }
  if (cache) {
    auto c = std::make_unique<ShapeCtx>();
    c->in_shape = x.shape;
    *cache = std::move(c);
  }
  return y;
}

Tensor AvgPool1d::backward(const LayerCtx& cache, const Tensor& gy, bool) {
  const auto& c = static_cast<const ShapeCtx&>(cache);
  const int B = c.in_shape[0], C = c.in_shape[1], T = c.in_shape[2];
  const int To = T / 2;
  Tensor gx({B, C, T});
  for (int b = 0; b < B; ++b) {
    for (int ch = 0; ch < C; ++ch) {
      const double* gr = &gy.v[(static_cast<std::size_t>(b) * C + ch) * To];
      double* gxr = &gx.v[(static_cast<std::size_t>(b) * C + ch) * T];
      for (int t = 0; t < To; ++t) {
        const double g = 0.5 * gr[t];
        gxr[2 * t] = g;
        gxr[2 * t + 1] = g;
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  check_rank(x, 3, "GlobalAvgPool");
  const int B = x.dim(0), C = x.dim(1), T = x.dim(2);
  Tensor y({B, C});
  const double inv = 1.0 / T;
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xr = &x.v[(static_cast<std::size_t>(b) * C + c) * T];
      double acc = 0.0;
      for (int t = 0; t < T; ++t) acc += xr[t];
      y.at2(b, c) = acc * inv;
    }
  }
  if (cache) {
    auto c = std::make_unique<ShapeCtx>();
    c->in_shape = x.shape;
    *cache = std::move(c);
  }
  return y;
}

Tensor GlobalAvgPool::backward(const LayerCtx& cache, const Tensor& gy, bool) {
  const auto& c = static_cast<const ShapeCtx&>(cache);
  const int B = c.in_shape[0], C = c.in_shape[1], T = c.in_shape[2];
  Tensor gx({B, C, T});
  const double inv = 1.0 / T;
  for (int b = 0; b < B; ++b) {
    for (int ch = 0; ch < C; ++ch) {
      const double g = gy.at2(b, ch) * inv;
      double* gxr = &gx.v[(static_cast<std::size_t>(b) * C + ch) * T];
      for (int t = 0; t < T; ++t) gxr[t] = g;
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Reshape3

Tensor Reshape3::forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) {
  check_rank(x, 2, "Reshape3");
  if (x.dim(1) != channels_ * time_) {
    throw std::invalid_argument("Reshape3: cannot reshape width " +
                                std::to_string(x.dim(1)) + " into " +
                                std::to_string(channels_) + "x" + std::to_string(time_));
  }
  Tensor y = x;
  y.shape = {x.dim(0), channels_, time_};
  if (cache) *cache = std::make_unique<LayerCtx>();
  return y;
}

Tensor Reshape3::backward(const LayerCtx&, const Tensor& gy, bool) {
  Tensor gx = gy;
  gx.shape = {gy.dim(0), channels_ * time_};
  return gx;
}

// ---------------------------------------------------------------------------
// Sequential

Tensor Sequential::forward(const Tensor& x, Ctx* ctx) {
  Tensor cur = x;
  if (ctx) {
    ctx->per_layer.clear();
    ctx->per_layer.resize(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      cur = layers_[i]->forward(cur, &ctx->per_layer[i]);
    }
  } else {
    for (auto& l : layers_) cur = l->forward(cur, nullptr);
  }
  return cur;
}

Tensor Sequential::backward(const Ctx& ctx, const Tensor& gy, bool with_param_grads) {
  if (ctx.per_layer.size() != layers_.size()) {
    throw std::logic_error("Sequential::backward: context does not match layer stack");
  }
  Tensor g = gy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(*ctx.per_layer[i], g, with_param_grads);
  }
  return g;
}

std::vector<Param*> Sequential::params() {
  std::vector<Param*> out;
  for (auto& l : layers_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  return out;
}

std::int64_t Sequential::param_count() const {
  std::int64_t n = 0;
  for (Param* p : const_cast<Sequential*>(this)->params()) n += p->value.size();
  return n;
}

void Sequential::zero_grad() {
  for (Param* p : params()) p->zero_grad();
}

void Sequential::init(Rng& rng) {
  for (auto& l : layers_) l->init(rng);
}

std::vector<double> Sequential::flat_params() const {
  std::vector<double> flat;
  for (Param* p : const_cast<Sequential*>(this)->params()) {
    flat.insert(flat.end(), p->value.v.begin(), p->value.v.end());
  }
  return flat;
}

void Sequential::set_flat_params(const std::vector<double>& flat) {
  std::size_t off = 0;
  for (Param* p : params()) {
    if (off + p->value.v.size() > flat.size()) {
      throw std::invalid_argument("Sequential::set_flat_params: size mismatch");
    }
    std::copy(flat.begin() + off, flat.begin() + off + p->value.v.size(),
              p->value.v.begin());
    off += p->value.v.size();
  }
  if (off != flat.size()) {
    throw std::invalid_argument("Sequential::set_flat_params: size mismatch");
  }
}

// ---------------------------------------------------------------------------
// Adam

void Adam::reset() {
  t_ = 0;
  m_.clear();
  v_.clear();
}

void Adam::step(const std::vector<Param*>& params) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i]->value.v.size(), 0.0);
      v_[i].assign(params[i]->value.v.size(), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& val = params[i]->value.v;
    const auto& g = params[i]->grad.v;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < val.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      val[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace har::nn
